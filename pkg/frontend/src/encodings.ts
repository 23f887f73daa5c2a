import type { EncodingsPayload, GlyphRamp } from "./types.js";
import type { Palette } from "./state.js";

/** Clamped linear ramp; the engine serves the same table it tests against. */
export function linearMap(x: number, ramp: GlyphRamp): number {
  const [lo, hi] = ramp.domain;
  const [a, b] = ramp.range;
  const t = (Math.min(Math.max(x, lo), hi) - lo) / (hi - lo);
  return a + t * (b - a);
}

/**
 * Color and geometry lookups derived from /api/encodings. Switching the
 * palette swaps the emotion color list and nothing else; every geometric
 * mapping stays byte-identical.
 */
export class Encodings {
  constructor(
    readonly table: EncodingsPayload,
    readonly palette: Palette = "standard",
  ) {}

  withPalette(palette: Palette): Encodings {
    return new Encodings(this.table, palette);
  }

  emotionColor(category: number): string {
    return this.table.emotion_palettes[this.palette][category];
  }

  emotionColors(): string[] {
    return [...this.table.emotion_palettes[this.palette]];
  }

  /** Diverging scale over expected class 1..6; gray when not significant. */
  effectivenessColor(expectedClass: number | null, significant: boolean): string {
    if (expectedClass === null || !significant) return this.table.non_significant_color;
    const scale = this.table.effectiveness_scale;
    const t = (Math.min(Math.max(expectedClass, 1), 6) - 1) / 5;
    const idx = Math.min(scale.length - 1, Math.floor(t * scale.length));
    return scale[idx];
  }

  mouthCurvature(valenceMean: number): number {
    return linearMap(valenceMean, this.table.glyph.mouth_curvature);
  }

  spikeProtrusion(arousalMean: number): number {
    return linearMap(arousalMean, this.table.glyph.spike_protrusion);
  }

  mouthWidth(volumeMean: number): number {
    return linearMap(volumeMean, this.table.glyph.mouth_width);
  }

  minFaceRadius(): number {
    return this.table.glyph.min_face_radius;
  }

  neutralIndex(): number {
    return this.table.neutral_index;
  }
}
