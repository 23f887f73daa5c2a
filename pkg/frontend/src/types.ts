/** Payload shapes of the /api endpoints (see docs/API.md in the repo root). */

export interface SpeechMeta {
  speech_id: string;
  title: string;
  year: number;
  region: string;
  level: number;
  rank: number | null;
  online: boolean;
  fps: number;
  duration_s: number;
  video_url: string | null;
}

export interface FactorScore {
  class_probs: number[];
  expected_class: number;
  significant: boolean;
  gray: boolean;
  label: string;
}

export interface FactorEntry {
  value: number | null;
  coverage: number;
  technique: string;
  feature: string;
  statistic: string;
  score: FactorScore | null;
}

export interface FactorsPayload {
  speech_id: string;
  span: { start_s: number; end_s: number } | null;
  factors: Record<string, FactorEntry>;
}

export interface TwinPayload {
  emotion_proportions: number[];
  valence_mean: number;
  arousal_mean: number;
  gaze_mean: [number, number];
  volume_mean: number;
  representative_gestures: { pose: number[][]; weight: number }[];
  footprints: [number, number][];
  coverage: Record<string, number>;
}

export interface WordSegment {
  text: string;
  start_s: number;
  end_s: number;
  sentence_index: number;
  split: boolean;
  effectiveness: number | null;
}

export interface TimeSlice {
  index: number;
  start_s: number;
  end_s: number;
  valence_mean: number | null;
  arousal_mean: number | null;
  emotion_proportions: number[] | null;
  gaze_heatmap: number[][];
  footprints: [number, number][];
  representative_pose: number[][] | null;
  audio_samples: [number, number | null, number | null][];
  words: WordSegment[];
  counts: Record<string, number>;
}

export interface SentenceSpan {
  index: number;
  start_s: number;
  end_s: number;
  text: string;
  effectiveness: number | null;
}

export interface SlicesPayload {
  speech_id: string;
  start_s: number;
  end_s: number;
  slices: TimeSlice[];
  sentences: SentenceSpan[];
}

export interface OverlaySample {
  t_s: number;
  skeleton: number[][];
  gaze_origin: [number, number] | null;
  gaze_dir: [number, number] | null;
  bbox_center: [number, number] | null;
  opacity: number;
}

export interface OverlayPayload {
  speech_id: string;
  playhead_s: number;
  interval_s: number;
  samples: OverlaySample[];
}

export type Granularity = "speech" | "sentence";
export type Mode = "factor" | "script";
export type Direction = "most-similar" | "most-different";

export interface RecommendRequest {
  speech_id: string;
  start_s?: number | null;
  end_s?: number | null;
  granularity: Granularity;
  mode: Mode;
  selected_factors: string[];
  k: number;
  direction: Direction;
}

export interface Candidate {
  speech_id: string;
  sentence_index: number | null;
  start_s: number;
  end_s: number;
  distance: number;
  text: string | null;
  twin: TwinPayload;
  level: number;
  title: string;
}

export interface RecommendPayload {
  candidates: Candidate[];
  bounds: Record<string, [number, number]> | null;
  skipped: number;
}

export interface BoardPayload {
  factor: string;
  speech_id: string;
  value: number | null;
  curve: [number, number][] | null;
  histogram: { edges: number[]; counts: number[]; highlight_bin: number | null } | null;
  corpus_mean: number | null;
  best_mean: number | null;
  best_level: number | null;
}

export interface GlyphRamp {
  input: string;
  domain: [number, number];
  range: [number, number];
}

export interface EncodingsPayload {
  glyph: {
    mouth_curvature: GlyphRamp;
    spike_protrusion: GlyphRamp;
    mouth_width: GlyphRamp;
    min_face_radius: number;
  };
  emotions: string[];
  neutral_index: number;
  emotion_palettes: Record<string, string[]>;
  effectiveness_scale: string[];
  non_significant_color: string;
  time_slices: number;
  heatmap_grid: number;
}

export interface Span {
  start_s: number;
  end_s: number;
}
