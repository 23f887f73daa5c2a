import type { ApiClient } from "./api.js";
import { clampSpan, initialState, type Palette, type UiState } from "./state.js";
import type {
  BoardPayload,
  Direction,
  FactorsPayload,
  Granularity,
  Mode,
  OverlayPayload,
  RecommendPayload,
  SlicesPayload,
  Span,
  SpeechMeta,
  TwinPayload,
} from "./types.js";

export interface MirrorData {
  twin: TwinPayload;
  recommendations: RecommendPayload;
}

/** One render callback per panel; the controller calls each at most once per
 * user action (the no-cascade linkage contract). */
export interface PanelSinks {
  factor?: (p: FactorsPayload) => void;
  timeslice?: (p: SlicesPayload) => void;
  mirror?: (p: MirrorData) => void;
  speaker?: (p: OverlayPayload) => void;
  palette?: (palette: Palette) => void;
  comparison?: (speechId: string | null) => void;
}

const RECOMMEND_K = 4;

/**
 * Panel linkage. Every user action maps to a fixed set of panel refreshes:
 *
 *   factor selection   -> timeslice, mirror, speaker (one refresh each)
 *   brush / span       -> timeslice, mirror
 *   playhead           -> speaker
 *   mode / granularity / direction toggles -> mirror
 *   analyzed speech    -> all four
 *   palette toggle     -> restyle only, zero API calls
 */
export class PanelController {
  readonly state: UiState = initialState();
  private sinks: PanelSinks = {};
  private meta = new Map<string, SpeechMeta>();
  private significant: string[] = [];

  constructor(private api: ApiClient) {}

  register(sinks: PanelSinks): void {
    this.sinks = { ...this.sinks, ...sinks };
  }

  speeches(): SpeechMeta[] {
    return [...this.meta.values()];
  }

  metaOf(id: string): SpeechMeta | undefined {
    return this.meta.get(id);
  }

  async loadSpeechList(): Promise<SpeechMeta[]> {
    const list = await this.api.speeches();
    this.meta = new Map(list.map((m) => [m.speech_id, m]));
    return list;
  }

  /** Factors used for mirror recommendations when nothing is selected. */
  private recommendFactors(): string[] {
    return this.state.selectedFactors.length ? this.state.selectedFactors : this.significant;
  }

  private async refreshFactorPanel(): Promise<void> {
    if (!this.state.analyzedId) return;
    const payload = await this.api.factors(this.state.analyzedId, this.state.brushedSpan);
    this.significant = Object.entries(payload.factors)
      .filter(([, e]) => e.score?.significant)
      .map(([id]) => id);
    this.sinks.factor?.(payload);
  }

  private async refreshTimeslice(): Promise<void> {
    if (!this.state.analyzedId) return;
    const payload = await this.api.slices(
      this.state.analyzedId,
      this.state.brushedSpan,
      this.state.selectedFactors.length ? this.state.selectedFactors : undefined,
    );
    this.sinks.timeslice?.(payload);
  }

  private async refreshMirror(): Promise<void> {
    if (!this.state.analyzedId) return;
    const factors = this.state.mode === "factor" ? this.recommendFactors() : [];
    if (this.state.mode === "factor" && factors.length === 0) return;
    const span = this.state.brushedSpan;
    const [twin, recommendations] = await Promise.all([
      this.api.twin(this.state.analyzedId, span, this.state.selectedFactors),
      this.api.recommend({
        speech_id: this.state.analyzedId,
        start_s: span?.start_s ?? null,
        end_s: span?.end_s ?? null,
        granularity: this.state.granularity,
        mode: this.state.mode,
        selected_factors: factors,
        k: RECOMMEND_K,
        direction: this.state.direction,
      }),
    ]);
    this.sinks.mirror?.({ twin, recommendations });
  }

  private async refreshSpeaker(): Promise<void> {
    if (!this.state.analyzedId) return;
    const payload = await this.api.overlay(this.state.analyzedId, this.state.playhead_s);
    this.sinks.speaker?.(payload);
  }

  async setAnalyzed(speechId: string): Promise<void> {
    const meta = this.meta.get(speechId);
    this.state.analyzedId = speechId;
    this.state.duration_s = meta?.duration_s ?? 0;
    this.state.brushedSpan = null;
    this.state.playhead_s = 0;
    await this.refreshFactorPanel();
    await Promise.all([this.refreshTimeslice(), this.refreshMirror(), this.refreshSpeaker()]);
  }

  /** Selecting factors filters the other three panels, each refreshed once. */
  async selectFactors(factorIds: string[]): Promise<void> {
    this.state.selectedFactors = [...factorIds];
    await Promise.all([this.refreshTimeslice(), this.refreshMirror(), this.refreshSpeaker()]);
  }

  /** Brushing the timeline narrows the span; timeslice + mirror follow.
   * A brush that collapses after clamping falls back to the whole speech. */
  async setBrush(span: Span | null): Promise<void> {
    const clamped = span ? clampSpan(span, this.state.duration_s) : null;
    this.state.brushedSpan =
      clamped && clamped.end_s - clamped.start_s > 1e-9 ? clamped : null;
    await Promise.all([this.refreshTimeslice(), this.refreshMirror()]);
  }

  async setPlayhead(t: number): Promise<void> {
    this.state.playhead_s = Math.max(0, Math.min(t, this.state.duration_s));
    await this.refreshSpeaker();
  }

  async setMode(mode: Mode): Promise<void> {
    this.state.mode = mode;
    await this.refreshMirror();
  }

  async setGranularity(granularity: Granularity): Promise<void> {
    this.state.granularity = granularity;
    await this.refreshMirror();
  }

  async setDirection(direction: Direction): Promise<void> {
    this.state.direction = direction;
    await this.refreshMirror();
  }

  setComparison(speechId: string | null): void {
    this.state.comparisonId = speechId;
    this.sinks.comparison?.(speechId);
  }

  /** Double-click on the comparison thumbnail promotes it to the main view. */
  async swapComparison(): Promise<void> {
    if (!this.state.comparisonId) return;
    const next = this.state.comparisonId;
    this.state.comparisonId = this.state.analyzedId;
    this.sinks.comparison?.(this.state.comparisonId);
    await this.setAnalyzed(next);
  }

  /** Palette toggle restyles in place; no data changes, no API traffic. */
  togglePalette(): Palette {
    this.state.palette = this.state.palette === "standard" ? "colorblind" : "standard";
    this.sinks.palette?.(this.state.palette);
    return this.state.palette;
  }

  hoverFactor(factorId: string): Promise<BoardPayload> {
    if (!this.state.analyzedId) return Promise.reject(new Error("no speech loaded"));
    return this.api.board(factorId, this.state.analyzedId, this.state.brushedSpan);
  }
}
