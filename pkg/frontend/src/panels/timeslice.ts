import type { PanelController } from "../controller.js";
import type { Encodings } from "../encodings.js";
import type { SlicesPayload, TimeSlice } from "../types.js";

const W = 760;
const TIMELINE_H = 34;
const CELL = 90;

/**
 * Time Slice Panel: brushable sentence timeline, eight per-slice glyph cells
 * for the selected factor's modality, and the script with per-word
 * effectiveness colors. Click a word to seek the video; double-click to
 * select its sentence on the timeline.
 */
export class TimeslicePanel {
  private payload: SlicesPayload | null = null;
  private brushing: { x0: number } | null = null;

  constructor(
    private root: HTMLElement,
    private controller: PanelController,
    private enc: Encodings,
  ) {}

  setEncodings(enc: Encodings): void {
    this.enc = enc;
    if (this.payload) this.render(this.payload);
  }

  private tx(t: number): number {
    // timeline maps the whole speech, not just the brushed span
    const d = this.controller.state.duration_s || 1;
    return (t / d) * W;
  }

  render(payload: SlicesPayload): void {
    this.payload = payload;
    const state = this.controller.state;

    const rects = payload.sentences
      .map((s) => {
        const color = this.enc.effectivenessColor(s.effectiveness, s.effectiveness !== null);
        return `<rect class="sentence" data-index="${s.index}" x="${this.tx(s.start_s).toFixed(1)}" y="6" width="${Math.max(1, this.tx(s.end_s) - this.tx(s.start_s)).toFixed(1)}" height="${TIMELINE_H - 12}" fill="${color}"><title>${s.text}</title></rect>`;
      })
      .join("");
    const brush =
      state.brushedSpan === null
        ? ""
        : `<rect class="brush" x="${this.tx(state.brushedSpan.start_s).toFixed(1)}" y="2" width="${Math.max(1, this.tx(state.brushedSpan.end_s) - this.tx(state.brushedSpan.start_s)).toFixed(1)}" height="${TIMELINE_H - 4}"/>`;
    const playhead = `<path class="playhead" d="M ${this.tx(state.playhead_s).toFixed(1)} 0 l -5 -8 h 10 Z" transform="translate(0, ${TIMELINE_H})"/>`;

    const cells = payload.slices.map((s) => this.cellSvg(s)).join("");
    const words = payload.slices
      .flatMap((s) => s.words)
      .map((w) => {
        const color = this.enc.effectivenessColor(w.effectiveness, w.effectiveness !== null);
        const cls = w.split ? "word split" : "word";
        return `<span class="${cls}" data-start="${w.start_s}" data-sentence="${w.sentence_index}" style="color:${color}">${w.text}</span>`;
      })
      .join(" ");

    this.root.innerHTML =
      `<svg class="timeline" viewBox="0 -10 ${W} ${TIMELINE_H + 10}">${rects}${brush}${playhead}</svg>` +
      `<div class="cells">${cells}</div>` +
      `<div class="script">${words}</div>`;

    this.wire();
  }

  private cellSvg(s: TimeSlice): string {
    const selected = this.controller.state.selectedFactors;
    const fid = selected[0] ?? "";
    let body = "";
    if (fid.startsWith("eye.")) {
      body = this.heatmapSvg(s);
    } else if (fid.startsWith("gesture.") && s.representative_pose) {
      body = this.poseSvg(s.representative_pose);
    } else if (fid.startsWith("voice.")) {
      body = this.audioSvg(s);
    } else if (fid.startsWith("stage.")) {
      body = this.footprintSvg(s);
    } else {
      body = this.faceSvg(s);
    }
    return `<svg class="cell" viewBox="0 0 ${CELL} ${CELL}" data-slice="${s.index}"><title>${s.start_s.toFixed(1)}–${s.end_s.toFixed(1)}s</title>${body}</svg>`;
  }

  private faceSvg(s: TimeSlice): string {
    // miniature of the twin encodings: emotion ring + valence mouth + arousal spikes
    const cx = CELL / 2;
    const cy = CELL / 2;
    const r = CELL * 0.3;
    const parts: string[] = [];
    const props = s.emotion_proportions;
    if (props) {
      const neutral = this.enc.neutralIndex();
      let angle = -Math.PI / 2;
      const others = props.map((p, c) => ({ p, c })).filter((e) => e.c !== neutral && e.p > 0);
      const total = others.reduce((acc, e) => acc + e.p, 0) || 1;
      for (const { p, c } of others) {
        const a1 = angle + (p / total) * 2 * Math.PI;
        const large = a1 - angle > Math.PI ? 1 : 0;
        parts.push(
          `<path d="M ${cx} ${cy} L ${cx + r * Math.cos(angle)} ${cy + r * Math.sin(angle)} A ${r} ${r} 0 ${large} 1 ${cx + r * Math.cos(a1)} ${cy + r * Math.sin(a1)} Z" fill="${this.enc.emotionColor(c)}" opacity="0.85"/>`,
        );
        angle = a1;
      }
      const rn = r * Math.sqrt(props[neutral] ?? 0);
      parts.push(`<circle cx="${cx}" cy="${cy}" r="${rn.toFixed(1)}" fill="${this.enc.emotionColor(neutral)}"/>`);
    }
    if (s.arousal_mean !== null) {
      const len = this.enc.spikeProtrusion(s.arousal_mean) * r * 1.6;
      for (let i = 0; i < 8; i++) {
        const a = (i / 8) * 2 * Math.PI;
        parts.push(
          `<line class="spike" x1="${(cx + r * Math.cos(a)).toFixed(1)}" y1="${(cy + r * Math.sin(a)).toFixed(1)}" x2="${(cx + (r + len) * Math.cos(a)).toFixed(1)}" y2="${(cy + (r + len) * Math.sin(a)).toFixed(1)}"/>`,
        );
      }
    }
    if (s.valence_mean !== null) {
      const half = r * 0.55;
      const y = cy + r * 0.45;
      const ctrl = y + this.enc.mouthCurvature(s.valence_mean) * r * 0.5;
      parts.push(`<path class="mouth" d="M ${cx - half} ${y} Q ${cx} ${ctrl} ${cx + half} ${y}"/>`);
    }
    return parts.join("");
  }

  private heatmapSvg(s: TimeSlice): string {
    const grid = s.gaze_heatmap;
    const n = grid.length;
    const cell = CELL / n;
    const maxC = Math.max(1, ...grid.flat());
    const rects: string[] = [];
    for (let i = 0; i < n; i++) {
      for (let j = 0; j < n; j++) {
        const c = grid[i][j];
        if (!c) continue;
        const alpha = 0.15 + 0.85 * (c / maxC);
        rects.push(
          `<rect x="${(i * cell).toFixed(1)}" y="${(j * cell).toFixed(1)}" width="${cell.toFixed(1)}" height="${cell.toFixed(1)}" fill="#1d3f6e" opacity="${alpha.toFixed(2)}"/>`,
        );
      }
    }
    return `<rect class="cell-bg" width="${CELL}" height="${CELL}"/>` + rects.join("");
  }

  private poseSvg(pose: number[][]): string {
    const xs = pose.map((p) => p[0]);
    const ys = pose.map((p) => p[1]);
    const lo = [Math.min(...xs), Math.min(...ys)];
    const hi = [Math.max(...xs), Math.max(...ys)];
    const span = Math.max(hi[0] - lo[0], hi[1] - lo[1]) || 1;
    const px = (x: number) => ((x - lo[0]) / span) * (CELL - 20) + 10;
    const py = (y: number) => ((y - lo[1]) / span) * (CELL - 20) + 10;
    const bones = [
      [0, 7], [7, 8], [8, 9], [9, 10],
      [8, 11], [11, 12], [12, 13], [8, 14], [14, 15], [15, 16],
    ];
    return bones
      .map(
        ([a, b]) =>
          `<line class="bone" x1="${px(pose[a][0]).toFixed(1)}" y1="${py(pose[a][1]).toFixed(1)}" x2="${px(pose[b][0]).toFixed(1)}" y2="${py(pose[b][1]).toFixed(1)}"/>`,
      )
      .join("");
  }

  private audioSvg(s: TimeSlice): string {
    if (!s.audio_samples.length) return "";
    const t0 = s.start_s;
    const t1 = s.end_s;
    const pitches = s.audio_samples.map((a) => a[2]).filter((p): p is number => p !== null);
    const pLo = Math.min(...pitches, 80);
    const pHi = Math.max(...pitches, 300);
    return s.audio_samples
      .filter((a) => a[2] !== null)
      .map((a) => {
        const x = ((a[0] - t0) / (t1 - t0 || 1)) * (CELL - 10) + 5;
        const y = CELL - 8 - ((a[2]! - pLo) / (pHi - pLo || 1)) * (CELL - 16);
        const r = a[1] === null ? 1 : 0.6 + this.enc.mouthWidth(a[1]) * 4;
        return `<circle class="dot" cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="${r.toFixed(1)}"/>`;
      })
      .join("");
  }

  private footprintSvg(s: TimeSlice): string {
    return (
      `<rect class="cell-bg" width="${CELL}" height="${CELL}"/>` +
      s.footprints
        .map(
          ([x, y]) =>
            `<circle class="footprint" cx="${(x * CELL).toFixed(1)}" cy="${(y * CELL).toFixed(1)}" r="1.6"/>`,
        )
        .join("")
    );
  }

  private wire(): void {
    const svg = this.root.querySelector<SVGSVGElement>("svg.timeline");
    if (svg) {
      const toTime = (ev: PointerEvent) => {
        const rect = svg.getBoundingClientRect();
        const frac = (ev.clientX - rect.left) / rect.width;
        return Math.max(0, Math.min(1, frac)) * (this.controller.state.duration_s || 1);
      };
      svg.addEventListener("pointerdown", (ev) => {
        this.brushing = { x0: toTime(ev) };
        svg.setPointerCapture(ev.pointerId);
      });
      svg.addEventListener("pointerup", (ev) => {
        if (!this.brushing) return;
        const a = this.brushing.x0;
        const b = toTime(ev);
        this.brushing = null;
        if (Math.abs(b - a) < 0.25) {
          void this.controller.setBrush(null); // click clears the brush
        } else {
          void this.controller.setBrush({ start_s: Math.min(a, b), end_s: Math.max(a, b) });
        }
      });
    }
    for (const el of this.root.querySelectorAll<HTMLElement>(".word")) {
      el.addEventListener("click", () => {
        void this.controller.setPlayhead(Number(el.dataset.start));
      });
      el.addEventListener("dblclick", () => {
        const idx = Number(el.dataset.sentence);
        const sent = this.payload?.sentences.find((s) => s.index === idx);
        if (sent) void this.controller.setBrush({ start_s: sent.start_s, end_s: sent.end_s });
      });
    }
  }
}
