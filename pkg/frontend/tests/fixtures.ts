import type { ApiClient } from "../src/api.js";
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
} from "../src/types.js";

export const ENCODINGS: EncodingsPayload = {
  glyph: {
    mouth_curvature: { input: "valence_mean", domain: [-1, 1], range: [-1, 1] },
    spike_protrusion: { input: "arousal_mean", domain: [-1, 1], range: [0, 0.35] },
    mouth_width: { input: "volume_mean", domain: [30, 90], range: [0.15, 0.75] },
    min_face_radius: 0.18,
  },
  emotions: ["angry", "disgust", "fear", "happy", "sad", "surprise", "neutral"],
  neutral_index: 6,
  emotion_palettes: {
    standard: ["#d64545", "#7b9e37", "#8458b3", "#f2c230", "#3e7cb1", "#e8803a", "#9e9e9e"],
    colorblind: ["#c44601", "#f57600", "#8babf1", "#ffdf4d", "#054fb9", "#89ce00", "#9e9e9e"],
  },
  effectiveness_scale: ["#67001f", "#d6604d", "#f7f7f7", "#4393c3", "#053061"],
  non_significant_color: "#c9c9c9",
  time_slices: 8,
  heatmap_grid: 16,
};

const BASE_POSE: number[][] = [
  [0.5, 0.78], [0.46, 0.78], [0.46, 0.9], [0.46, 0.99],
  [0.54, 0.78], [0.54, 0.9], [0.54, 0.99],
  [0.5, 0.62], [0.5, 0.47], [0.5, 0.41], [0.5, 0.33],
  [0.58, 0.48], [0.63, 0.6], [0.65, 0.7],
  [0.42, 0.48], [0.37, 0.6], [0.35, 0.7],
];

export function makeTwin(over: Partial<TwinPayload> = {}): TwinPayload {
  return {
    emotion_proportions: [0.1, 0, 0.05, 0.25, 0.1, 0, 0.5],
    valence_mean: 0.2,
    arousal_mean: 0.1,
    gaze_mean: [0.1, -0.05],
    volume_mean: 62,
    representative_gestures: [
      { pose: BASE_POSE, weight: 0.7 },
      { pose: BASE_POSE.map(([x, y]) => [x + 0.05, y]), weight: 0.3 },
    ],
    footprints: [[0.4, 0.5], [0.6, 0.55]],
    coverage: { emotion: 1, valence: 1, arousal: 1, gaze: 1, volume: 1, pose: 1 },
    ...over,
  };
}

export const META: SpeechMeta = {
  speech_id: "sp-1",
  title: "First",
  year: 2022,
  region: "europe",
  level: 4,
  rank: 2,
  online: true,
  fps: 10,
  duration_s: 60,
  video_url: null,
};

export function makeFactors(speechId = "sp-1"): FactorsPayload {
  return {
    speech_id: speechId,
    span: null,
    factors: {
      "face.valence.average": {
        value: 0.2, coverage: 1, technique: "facial expression",
        feature: "valence", statistic: "average",
        score: { class_probs: [0.1, 0.1, 0.2, 0.3, 0.2, 0.1], expected_class: 3.8, significant: true, gray: false, label: "medium" },
      },
      "voice.volume.volatility": {
        value: 0.5, coverage: 1, technique: "voice",
        feature: "volume", statistic: "volatility",
        score: { class_probs: [0.3, 0.2, 0.2, 0.1, 0.1, 0.1], expected_class: 2.6, significant: true, gray: false, label: "low" },
      },
      "pace.rate.average": {
        value: 0.22, coverage: 1, technique: "pace",
        feature: "speaking rate", statistic: "average",
        score: { class_probs: [0.2, 0.2, 0.2, 0.2, 0.1, 0.1], expected_class: 3.0, significant: false, gray: true, label: "gray" },
      },
    },
  };
}

export function makeSlices(speechId = "sp-1", start = 0, end = 60): SlicesPayload {
  const slices = Array.from({ length: 8 }, (_, i) => ({
    index: i,
    start_s: start + ((end - start) / 8) * i,
    end_s: start + ((end - start) / 8) * (i + 1),
    valence_mean: 0.1,
    arousal_mean: 0.0,
    emotion_proportions: [0, 0, 0, 0.5, 0, 0, 0.5],
    gaze_heatmap: Array.from({ length: 16 }, () => Array(16).fill(0)),
    footprints: [[0.5, 0.5]] as [number, number][],
    representative_pose: BASE_POSE,
    audio_samples: [[start + i, 60, 150]] as [number, number | null, number | null][],
    words: [],
    counts: { frames: 10, emotion: 10, valence: 10, arousal: 10, gaze: 10, volume: 10, audio: 10 },
  }));
  return {
    speech_id: speechId,
    start_s: start,
    end_s: end,
    slices,
    sentences: [{ index: 0, start_s: 1, end_s: 5, text: "hello world", effectiveness: 3.4 }],
  };
}

export interface Call {
  method: string;
  args: unknown[];
}

/** Counting mock; every method resolves with a canned payload. */
export class MockApi implements ApiClient {
  calls: Call[] = [];

  private note(method: string, ...args: unknown[]) {
    this.calls.push({ method, args });
  }

  count(method: string): number {
    return this.calls.filter((c) => c.method === method).length;
  }

  last(method: string): Call | undefined {
    return [...this.calls].reverse().find((c) => c.method === method);
  }

  reset(): void {
    this.calls = [];
  }

  async speeches(): Promise<SpeechMeta[]> {
    this.note("speeches");
    return [META, { ...META, speech_id: "sp-2", title: "Second" }];
  }

  async factors(speechId: string, span?: Span | null): Promise<FactorsPayload> {
    this.note("factors", speechId, span ?? null);
    return makeFactors(speechId);
  }

  async slices(speechId: string, span?: Span | null, factors?: string[]): Promise<SlicesPayload> {
    this.note("slices", speechId, span ?? null, factors ?? null);
    return makeSlices(speechId, span?.start_s ?? 0, span?.end_s ?? META.duration_s);
  }

  async twin(speechId: string, span?: Span | null, factors?: string[]): Promise<TwinPayload> {
    this.note("twin", speechId, span ?? null, factors ?? null);
    return makeTwin();
  }

  async recommend(req: RecommendRequest): Promise<RecommendPayload> {
    this.note("recommend", req);
    return {
      candidates: [
        {
          speech_id: "sp-2", sentence_index: null, start_s: 0, end_s: 60,
          distance: 0.3, text: null, twin: makeTwin(), level: 5, title: "Second",
        },
      ],
      bounds: null,
      skipped: 0,
    };
  }

  async overlay(speechId: string, t: number, interval?: number): Promise<OverlayPayload> {
    this.note("overlay", speechId, t, interval ?? null);
    return {
      speech_id: speechId,
      playhead_s: t,
      interval_s: interval ?? 0.6,
      samples: [
        { t_s: t, skeleton: BASE_POSE, gaze_origin: [0.5, 0.3], gaze_dir: [0.2, 0.1], bbox_center: [0.5, 0.5], opacity: 1 },
      ],
    };
  }

  async board(factorId: string, speechId: string, span?: Span | null): Promise<BoardPayload> {
    this.note("board", factorId, speechId, span ?? null);
    return {
      factor: factorId, speech_id: speechId, value: 0.2,
      curve: [[0, 2], [1, 4]],
      histogram: { edges: [0, 0.5, 1], counts: [3, 4], highlight_bin: 0 },
      corpus_mean: 0.4, best_mean: 0.6, best_level: 6,
    };
  }

  async encodings(): Promise<EncodingsPayload> {
    this.note("encodings");
    return ENCODINGS;
  }
}
