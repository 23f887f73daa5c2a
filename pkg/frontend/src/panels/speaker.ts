import type { PanelController } from "../controller.js";
import type { Encodings } from "../encodings.js";
import type { OverlayPayload } from "../types.js";
import { BONES, HEAD_JOINT } from "../glyph.js";

const W = 640;
const H = 400;

/**
 * Speaker Panel: the video (or a blank stage for synthetic corpora) with the
 * technique overlays drawn on top — bounding box, fading skeleton trail, gaze
 * rays whose opacity falls along the ray, and a head marker. The comparison
 * video sits top-right; double-clicking swaps it into the main view.
 */
export class SpeakerPanel {
  private video: HTMLVideoElement | null = null;
  private stage: HTMLElement;
  private overlay: SVGSVGElement;
  private thumb: HTMLElement;
  private slider: HTMLInputElement;
  private clock: HTMLElement;

  constructor(
    private root: HTMLElement,
    private controller: PanelController,
    private enc: Encodings,
  ) {
    root.innerHTML =
      `<div class="stage">` +
      `<svg class="speaker-overlay" viewBox="0 0 ${W} ${H}"></svg>` +
      `<div class="thumb hidden" title="double-click to switch"></div>` +
      `</div>` +
      `<div class="transport"><input type="range" min="0" max="100" step="0.1" value="0"/><span class="clock">0.0s</span></div>`;
    this.stage = root.querySelector(".stage")!;
    this.overlay = root.querySelector("svg.speaker-overlay")!;
    this.thumb = root.querySelector(".thumb")!;
    this.slider = root.querySelector("input")!;
    this.clock = root.querySelector(".clock")!;

    this.slider.addEventListener("input", () => {
      const t = (Number(this.slider.value) / 100) * this.controller.state.duration_s;
      if (this.video) this.video.currentTime = t;
      void this.controller.setPlayhead(t);
    });
    this.thumb.addEventListener("dblclick", () => void this.controller.swapComparison());
  }

  setEncodings(enc: Encodings): void {
    this.enc = enc;
  }

  /** Mount or clear the media element when the analyzed speech changes. */
  setMedia(videoUrl: string | null): void {
    this.video?.remove();
    this.video = null;
    if (videoUrl) {
      this.video = document.createElement("video");
      this.video.src = videoUrl;
      this.video.className = "speaker-video";
      this.video.addEventListener("timeupdate", () => {
        if (this.video) void this.controller.setPlayhead(this.video.currentTime);
      });
      this.stage.prepend(this.video);
    }
  }

  setComparison(speechId: string | null): void {
    if (speechId === null) {
      this.thumb.classList.add("hidden");
    } else {
      this.thumb.textContent = speechId;
      this.thumb.classList.remove("hidden");
    }
  }

  render(payload: OverlayPayload): void {
    const t = this.controller.state.playhead_s;
    const d = this.controller.state.duration_s || 1;
    this.slider.value = ((t / d) * 100).toFixed(1);
    this.clock.textContent = `${t.toFixed(1)}s`;

    const parts: string[] = [];
    const latest = payload.samples[payload.samples.length - 1];
    if (latest?.bbox_center) {
      const [bx, by] = latest.bbox_center;
      parts.push(
        `<rect class="bbox" x="${(bx * W - 70).toFixed(1)}" y="${(by * H - 110).toFixed(1)}" width="140" height="220"/>`,
      );
    }
    for (const s of payload.samples) {
      const op = s.opacity.toFixed(3);
      for (const [a, b] of BONES) {
        const pa = s.skeleton[a];
        const pb = s.skeleton[b];
        if (pa.some(Number.isNaN) || pb.some(Number.isNaN)) continue;
        parts.push(
          `<line class="bone" opacity="${op}" x1="${(pa[0] * W).toFixed(1)}" y1="${(pa[1] * H).toFixed(1)}" x2="${(pb[0] * W).toFixed(1)}" y2="${(pb[1] * H).toFixed(1)}"/>`,
        );
      }
      if (s.gaze_origin && s.gaze_dir) {
        const [ox, oy] = s.gaze_origin;
        const [dx, dy] = s.gaze_dir;
        const x0 = ox * W;
        const y0 = oy * H;
        // the ray fades along its direction: three segments of falling opacity
        const len = 90;
        for (let seg = 0; seg < 3; seg++) {
          const f0 = seg / 3;
          const f1 = (seg + 1) / 3;
          const segOp = s.opacity * (1 - f0) * 0.9;
          parts.push(
            `<line class="gaze" opacity="${segOp.toFixed(3)}" x1="${(x0 + dx * len * f0).toFixed(1)}" y1="${(y0 + dy * len * f0).toFixed(1)}" x2="${(x0 + dx * len * f1).toFixed(1)}" y2="${(y0 + dy * len * f1).toFixed(1)}"/>`,
          );
        }
      }
      const head = s.skeleton[HEAD_JOINT];
      if (head && !head.some(Number.isNaN)) {
        parts.push(
          `<circle class="facemark" opacity="${op}" cx="${(head[0] * W).toFixed(1)}" cy="${(head[1] * H).toFixed(1)}" r="7"/>`,
        );
      }
    }
    this.overlay.innerHTML = parts.join("");
  }
}
