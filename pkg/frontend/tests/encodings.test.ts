import { describe, expect, it } from "vitest";

import { Encodings, linearMap } from "../src/encodings.js";
import { twinGeometry } from "../src/glyph.js";
import { ENCODINGS, makeTwin } from "./fixtures.js";

describe("encodings", () => {
  it("linearMap is a clamped linear ramp", () => {
    const ramp = { input: "x", domain: [0, 10] as [number, number], range: [1, 3] as [number, number] };
    expect(linearMap(0, ramp)).toBe(1);
    expect(linearMap(5, ramp)).toBe(2);
    expect(linearMap(10, ramp)).toBe(3);
    expect(linearMap(-99, ramp)).toBe(1);
    expect(linearMap(99, ramp)).toBe(3);
  });

  it("effectiveness colors: diverging scale, gray when not significant", () => {
    const enc = new Encodings(ENCODINGS);
    expect(enc.effectivenessColor(1, true)).toBe(ENCODINGS.effectiveness_scale[0]);
    expect(enc.effectivenessColor(6, true)).toBe(ENCODINGS.effectiveness_scale[4]);
    expect(enc.effectivenessColor(3.5, false)).toBe(ENCODINGS.non_significant_color);
    expect(enc.effectivenessColor(null, true)).toBe(ENCODINGS.non_significant_color);
  });

  it("palette toggle changes only the emotion colors", () => {
    const std = new Encodings(ENCODINGS, "standard");
    const alt = std.withPalette("colorblind");

    // colors swap
    expect(alt.emotionColors()).toEqual(ENCODINGS.emotion_palettes.colorblind);
    expect(alt.emotionColors()).not.toEqual(std.emotionColors());

    // every non-color mapping is unchanged
    for (const v of [-1, -0.4, 0, 0.7, 1]) {
      expect(alt.mouthCurvature(v)).toBe(std.mouthCurvature(v));
      expect(alt.spikeProtrusion(v)).toBe(std.spikeProtrusion(v));
    }
    for (const v of [30, 55, 90]) expect(alt.mouthWidth(v)).toBe(std.mouthWidth(v));
    expect(alt.minFaceRadius()).toBe(std.minFaceRadius());
    expect(alt.effectivenessColor(2.5, true)).toBe(std.effectivenessColor(2.5, true));
    expect(alt.effectivenessColor(2.5, false)).toBe(std.effectivenessColor(2.5, false));

    // glyph geometry is identical apart from wedge fill colors
    const twin = makeTwin();
    const g1 = twinGeometry(twin, std);
    const g2 = twinGeometry(twin, alt);
    const strip = (g: ReturnType<typeof twinGeometry>) => ({
      ...g,
      wedges: g.wedges.map(({ color, ...rest }) => rest),
      neutralColor: undefined,
    });
    expect(strip(g2)).toEqual(strip(g1));
    expect(g1.wedges.map((w) => w.color)).not.toEqual(g2.wedges.map((w) => w.color));
  });
});
