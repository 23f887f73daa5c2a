import type { Direction, Granularity, Mode, Span } from "./types.js";

export type Palette = "standard" | "colorblind";

/** The single source of truth the four panels render from. */
export interface UiState {
  analyzedId: string | null;
  comparisonId: string | null;
  duration_s: number;
  selectedFactors: string[];
  brushedSpan: Span | null; // null = whole speech
  playhead_s: number;
  mode: Mode;
  granularity: Granularity;
  direction: Direction;
  palette: Palette;
}

export function initialState(): UiState {
  return {
    analyzedId: null,
    comparisonId: null,
    duration_s: 0,
    selectedFactors: [],
    brushedSpan: null,
    playhead_s: 0,
    mode: "factor",
    granularity: "speech",
    direction: "most-similar",
    palette: "standard",
  };
}

export function clampSpan(span: Span, duration: number): Span {
  const start = Math.max(0, Math.min(span.start_s, duration));
  const end = Math.max(start, Math.min(span.end_s, duration));
  return { start_s: start, end_s: end };
}
