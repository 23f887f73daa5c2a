import type { TwinPayload } from "./types.js";
import type { Encodings } from "./encodings.js";

// Human3.6M joint indices used for the gesture arms
const THORAX = 8;
const NECK = 9;
const HEAD = 10;
const L_SHOULDER = 11;
const L_ELBOW = 12;
const L_WRIST = 13;
const R_SHOULDER = 14;
const R_ELBOW = 15;
const R_WRIST = 16;
const ARM_CHAIN = [R_WRIST, R_ELBOW, R_SHOULDER, L_SHOULDER, L_ELBOW, L_WRIST];

export interface Wedge {
  startAngle: number;
  endAngle: number;
  category: number;
  color: string;
}

export interface TwinGeometry {
  size: number;
  cx: number;
  cy: number;
  faceRadius: number;
  neutralRadius: number;
  neutralColor: string;
  wedges: Wedge[];
  spikes: { x1: number; y1: number; x2: number; y2: number }[];
  spikeLength: number;
  mouth: { x1: number; x2: number; y: number; ctrlY: number; halfWidth: number };
  eyes: { cx: number; cy: number; r: number; pupilDx: number; pupilDy: number }[];
  arms: { points: [number, number][]; opacity: number }[];
  footRect: { x: number; y: number; w: number; h: number };
  footprints: { x: number; y: number }[];
}

/** Thorax-centered, shoulder-normalized joint positions for glyph drawing. */
export function normalizedPose(pose: number[][]): [number, number][] | null {
  const dx = pose[L_SHOULDER][0] - pose[R_SHOULDER][0];
  const dy = pose[L_SHOULDER][1] - pose[R_SHOULDER][1];
  const shoulder = Math.hypot(dx, dy);
  if (!(shoulder > 1e-9)) return null;
  const [tx, ty] = pose[THORAX];
  return pose.map(([x, y]) => [(x - tx) / shoulder, (y - ty) / shoulder]);
}

/**
 * Pure geometry of one SpeechTwin glyph. All visual channels are monotone in
 * their inputs: arousal -> spike protrusion, volume -> mouth width, valence ->
 * mouth curvature, cluster weight -> arm opacity, neutral share -> center disc.
 */
export function twinGeometry(twin: TwinPayload, enc: Encodings, size = 150): TwinGeometry {
  const cx = size / 2;
  const faceRadius = size * 0.26;
  const cy = faceRadius * 1.45;
  const neutral = enc.neutralIndex();

  const props = twin.emotion_proportions;
  const neutralShare = props[neutral] ?? 0;
  const neutralRadius = faceRadius * Math.max(enc.minFaceRadius(), Math.sqrt(neutralShare));

  const others = props
    .map((p, category) => ({ p, category }))
    .filter((e) => e.category !== neutral && e.p > 0);
  const totalOther = others.reduce((s, e) => s + e.p, 0);
  const wedges: Wedge[] = [];
  let angle = -Math.PI / 2;
  for (const { p, category } of others) {
    const sweep = totalOther > 0 ? (p / totalOther) * 2 * Math.PI : 0;
    wedges.push({
      startAngle: angle,
      endAngle: angle + sweep,
      category,
      color: enc.emotionColor(category),
    });
    angle += sweep;
  }

  const protrusion = enc.spikeProtrusion(twin.arousal_mean);
  const spikeLength = protrusion * faceRadius * 1.6;
  const spikes = [];
  const nSpikes = 12;
  for (let i = 0; i < nSpikes; i++) {
    const a = (i / nSpikes) * 2 * Math.PI - Math.PI / 2;
    spikes.push({
      x1: cx + Math.cos(a) * faceRadius,
      y1: cy + Math.sin(a) * faceRadius,
      x2: cx + Math.cos(a) * (faceRadius + spikeLength),
      y2: cy + Math.sin(a) * (faceRadius + spikeLength),
    });
  }

  const halfWidth = enc.mouthWidth(twin.volume_mean) * faceRadius;
  const mouthY = cy + faceRadius * 0.45;
  const curvature = enc.mouthCurvature(twin.valence_mean);
  const mouth = {
    x1: cx - halfWidth,
    x2: cx + halfWidth,
    y: mouthY,
    // positive valence bends the middle down in SVG coords: a smile
    ctrlY: mouthY + curvature * faceRadius * 0.5,
    halfWidth,
  };

  const [yaw, pitch] = twin.gaze_mean;
  const pupil = faceRadius * 0.07;
  const eyes = [-1, 1].map((side) => ({
    cx: cx + side * faceRadius * 0.34,
    cy: cy - faceRadius * 0.22,
    r: faceRadius * 0.13,
    pupilDx: Math.sin(yaw) * pupil,
    pupilDy: -Math.sin(pitch) * pupil,
  }));

  const maxW = Math.max(...twin.representative_gestures.map((g) => g.weight), 1e-9);
  const armScale = faceRadius * 1.0;
  const armAnchorY = cy + faceRadius * 1.55;
  const arms = twin.representative_gestures.flatMap((g) => {
    const norm = normalizedPose(g.pose);
    if (!norm) return [];
    const points = ARM_CHAIN.map(
      (j) => [cx + norm[j][0] * armScale, armAnchorY + norm[j][1] * armScale] as [number, number],
    );
    return [{ points, opacity: 0.2 + 0.8 * (g.weight / maxW) }];
  });

  const footRect = {
    x: cx - faceRadius * 1.1,
    y: armAnchorY + faceRadius * 0.75,
    w: faceRadius * 2.2,
    h: faceRadius * 0.9,
  };
  const footprints = twin.footprints.map(([fx, fy]) => ({
    x: footRect.x + fx * footRect.w,
    y: footRect.y + fy * footRect.h,
  }));

  return {
    size,
    cx,
    cy,
    faceRadius,
    neutralRadius,
    neutralColor: enc.emotionColor(neutral),
    wedges,
    spikes,
    spikeLength,
    mouth,
    eyes,
    arms,
    footRect,
    footprints,
  };
}

function arcPath(cx: number, cy: number, rInner: number, rOuter: number, a0: number, a1: number): string {
  const large = a1 - a0 > Math.PI ? 1 : 0;
  const p = (r: number, a: number) => `${cx + r * Math.cos(a)} ${cy + r * Math.sin(a)}`;
  return [
    `M ${p(rInner, a0)}`,
    `L ${p(rOuter, a0)}`,
    `A ${rOuter} ${rOuter} 0 ${large} 1 ${p(rOuter, a1)}`,
    `L ${p(rInner, a1)}`,
    `A ${rInner} ${rInner} 0 ${large} 0 ${p(rInner, a0)}`,
    "Z",
  ].join(" ");
}

/** Render a twin as an SVG string; pure, so it is testable without a DOM. */
export function renderTwinSvg(twin: TwinPayload, enc: Encodings, size = 150): string {
  const g = twinGeometry(twin, enc, size);
  const parts: string[] = [];
  const height = g.footRect.y + g.footRect.h + 6;
  parts.push(
    `<svg class="twin" viewBox="0 0 ${g.size} ${height}" xmlns="http://www.w3.org/2000/svg">`,
  );

  for (const s of g.spikes) {
    parts.push(
      `<line x1="${s.x1.toFixed(2)}" y1="${s.y1.toFixed(2)}" x2="${s.x2.toFixed(2)}" y2="${s.y2.toFixed(2)}" class="spike"/>`,
    );
  }
  parts.push(`<circle cx="${g.cx}" cy="${g.cy}" r="${g.faceRadius}" class="face-rim"/>`);
  for (const w of g.wedges) {
    parts.push(
      `<path d="${arcPath(g.cx, g.cy, g.neutralRadius, g.faceRadius, w.startAngle, w.endAngle)}" fill="${w.color}" class="wedge" data-category="${w.category}"/>`,
    );
  }
  parts.push(
    `<circle cx="${g.cx}" cy="${g.cy}" r="${g.neutralRadius.toFixed(2)}" fill="${g.neutralColor}" class="neutral"/>`,
  );
  for (const e of g.eyes) {
    parts.push(`<circle cx="${e.cx.toFixed(2)}" cy="${e.cy.toFixed(2)}" r="${e.r.toFixed(2)}" class="eye"/>`);
    parts.push(
      `<circle cx="${(e.cx + e.pupilDx).toFixed(2)}" cy="${(e.cy + e.pupilDy).toFixed(2)}" r="${(e.r * 0.45).toFixed(2)}" class="pupil"/>`,
    );
  }
  parts.push(
    `<path d="M ${g.mouth.x1.toFixed(2)} ${g.mouth.y.toFixed(2)} Q ${g.cx} ${g.mouth.ctrlY.toFixed(2)} ${g.mouth.x2.toFixed(2)} ${g.mouth.y.toFixed(2)}" class="mouth"/>`,
  );
  for (const arm of g.arms) {
    const pts = arm.points.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
    parts.push(`<polyline points="${pts}" class="arm" stroke-opacity="${arm.opacity.toFixed(3)}"/>`);
  }
  parts.push(
    `<rect x="${g.footRect.x.toFixed(2)}" y="${g.footRect.y.toFixed(2)}" width="${g.footRect.w.toFixed(2)}" height="${g.footRect.h.toFixed(2)}" class="foot-rect"/>`,
  );
  for (const f of g.footprints) {
    parts.push(`<circle cx="${f.x.toFixed(2)}" cy="${f.y.toFixed(2)}" r="1.1" class="footprint"/>`);
  }
  parts.push("</svg>");
  return parts.join("");
}

/** Skeleton bone pairs for the video overlay (Human3.6M order). */
export const BONES: [number, number][] = [
  [0, 1], [1, 2], [2, 3], [0, 4], [4, 5], [5, 6],
  [0, 7], [7, THORAX], [THORAX, NECK], [NECK, HEAD],
  [THORAX, L_SHOULDER], [L_SHOULDER, L_ELBOW], [L_ELBOW, L_WRIST],
  [THORAX, R_SHOULDER], [R_SHOULDER, R_ELBOW], [R_ELBOW, R_WRIST],
];

export const HEAD_JOINT = HEAD;
