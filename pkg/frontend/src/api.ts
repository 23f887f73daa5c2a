import type {
  BoardPayload,
  EncodingsPayload,
  FactorsPayload,
  OverlayPayload,
  RecommendPayload,
  RecommendRequest,
  SlicesPayload,
  Span,
  SpeechMeta,
  TwinPayload,
} from "./types.js";

/** What the panels need from the backend; mocked wholesale in tests. */
export interface ApiClient {
  speeches(): Promise<SpeechMeta[]>;
  factors(speechId: string, span?: Span | null): Promise<FactorsPayload>;
  slices(speechId: string, span?: Span | null, factors?: string[]): Promise<SlicesPayload>;
  twin(speechId: string, span?: Span | null, factors?: string[]): Promise<TwinPayload>;
  recommend(req: RecommendRequest): Promise<RecommendPayload>;
  overlay(speechId: string, t: number, interval?: number): Promise<OverlayPayload>;
  board(factorId: string, speechId: string, span?: Span | null): Promise<BoardPayload>;
  encodings(): Promise<EncodingsPayload>;
}

function query(params: Record<string, string | number | undefined>): string {
  const parts = Object.entries(params)
    .filter(([, v]) => v !== undefined && v !== "")
    .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`);
  return parts.length ? `?${parts.join("&")}` : "";
}

function spanParams(span?: Span | null): Record<string, number | undefined> {
  return span ? { start: span.start_s, end: span.end_s } : {};
}

/**
 * Fetch-backed client. Requests carry a cancellation key: issuing a new
 * request with the same key aborts the in-flight one, so stale responses
 * never clobber fresher panel state.
 */
export class HttpApiClient implements ApiClient {
  private inflight = new Map<string, AbortController>();

  constructor(
    private base: string = "",
    private fetcher: typeof fetch = fetch.bind(globalThis),
  ) {}

  private async getJson<T>(path: string, key?: string): Promise<T> {
    let signal: AbortSignal | undefined;
    if (key !== undefined) {
      this.inflight.get(key)?.abort();
      const ctl = new AbortController();
      this.inflight.set(key, ctl);
      signal = ctl.signal;
    }
    const resp = await this.fetcher(this.base + path, { signal });
    if (!resp.ok) {
      const body = await resp.json().catch(() => null);
      const code = body?.error?.code ?? `HTTP ${resp.status}`;
      throw new Error(`${code}: ${body?.error?.message ?? path}`);
    }
    return (await resp.json()) as T;
  }

  speeches(): Promise<SpeechMeta[]> {
    return this.getJson<{ speeches: SpeechMeta[] }>("/api/speeches").then((d) => d.speeches);
  }

  factors(speechId: string, span?: Span | null): Promise<FactorsPayload> {
    return this.getJson(
      `/api/speeches/${encodeURIComponent(speechId)}/factors${query(spanParams(span))}`,
      "factors",
    );
  }

  slices(speechId: string, span?: Span | null, factors?: string[]): Promise<SlicesPayload> {
    return this.getJson(
      `/api/speeches/${encodeURIComponent(speechId)}/slices${query({
        ...spanParams(span),
        factors: factors?.join(","),
      })}`,
      "slices",
    );
  }

  twin(speechId: string, span?: Span | null, factors?: string[]): Promise<TwinPayload> {
    return this.getJson<{ twin: TwinPayload }>(
      `/api/speeches/${encodeURIComponent(speechId)}/twin${query({
        ...spanParams(span),
        factors: factors?.join(","),
      })}`,
      "twin",
    ).then((d) => d.twin);
  }

  async recommend(req: RecommendRequest): Promise<RecommendPayload> {
    this.inflight.get("recommend")?.abort();
    const ctl = new AbortController();
    this.inflight.set("recommend", ctl);
    const resp = await this.fetcher(`${this.base}/api/recommend`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
      signal: ctl.signal,
    });
    if (!resp.ok) {
      const body = await resp.json().catch(() => null);
      throw new Error(body?.error?.code ?? `HTTP ${resp.status}`);
    }
    return (await resp.json()) as RecommendPayload;
  }

  overlay(speechId: string, t: number, interval = 0.6): Promise<OverlayPayload> {
    return this.getJson(
      `/api/speeches/${encodeURIComponent(speechId)}/overlay${query({ t, interval })}`,
      "overlay",
    );
  }

  board(factorId: string, speechId: string, span?: Span | null): Promise<BoardPayload> {
    return this.getJson(
      `/api/factors/${encodeURIComponent(factorId)}/board${query({
        speech_id: speechId,
        ...spanParams(span),
      })}`,
      "board",
    );
  }

  encodings(): Promise<EncodingsPayload> {
    return this.getJson("/api/encodings");
  }
}
