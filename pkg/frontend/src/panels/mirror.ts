import type { MirrorData, PanelController } from "../controller.js";
import type { Encodings } from "../encodings.js";
import type { Candidate, FactorsPayload } from "../types.js";
import { renderTwinSvg } from "../glyph.js";

/**
 * Mirror Panel: the analyzed span's SpeechTwin, the mode / granularity /
 * direction toggles, and the recommended twins. Hovering a candidate opens
 * the speech comparison board (factor differences, largest apart at top and
 * bottom); clicking sets it as the comparison video.
 */
export class MirrorPanel {
  private data: MirrorData | null = null;
  private board: HTMLElement;
  private analyzedFactors: FactorsPayload | null = null;

  constructor(
    private root: HTMLElement,
    private controller: PanelController,
    private enc: Encodings,
    private fetchFactors: (speechId: string, span?: { start_s: number; end_s: number } | null) => Promise<FactorsPayload>,
  ) {
    this.board = document.createElement("div");
    this.board.className = "compare-board hidden";
    document.body.appendChild(this.board);
  }

  setEncodings(enc: Encodings): void {
    this.enc = enc;
    if (this.data) this.render(this.data);
  }

  noteAnalyzedFactors(p: FactorsPayload): void {
    this.analyzedFactors = p;
  }

  render(data: MirrorData): void {
    this.data = data;
    const s = this.controller.state;
    const toggles =
      `<div class="toggles">` +
      this.toggle("mode", ["factor", "script"], s.mode) +
      this.toggle("granularity", ["speech", "sentence"], s.granularity) +
      this.toggle("direction", ["most-similar", "most-different"], s.direction) +
      `</div>`;

    const main =
      `<div class="twin-main">` +
      `<h3>${s.analyzedId ?? ""}</h3>` +
      renderTwinSvg(data.twin, this.enc, 170) +
      `</div>`;

    const cards = data.recommendations.candidates
      .map((c, i) => {
        const name = c.sentence_index === null ? c.speech_id : `${c.speech_id} · s${c.sentence_index}`;
        return (
          `<div class="twin-card" data-i="${i}">` +
          renderTwinSvg(c.twin, this.enc, 110) +
          `<div class="card-name">${name}</div>` +
          `<div class="card-meta">level ${c.level} · d=${c.distance.toFixed(3)}</div>` +
          `</div>`
        );
      })
      .join("");

    this.root.innerHTML =
      toggles + main + `<div class="twin-grid">${cards}</div>` +
      (data.recommendations.skipped
        ? `<div class="skip-note">${data.recommendations.skipped} candidates lacked the selected factors</div>`
        : "");
    this.wire();
  }

  private toggle(kind: string, values: string[], active: string): string {
    const buttons = values
      .map((v) => `<button class="${v === active ? "on" : ""}" data-kind="${kind}" data-value="${v}">${v}</button>`)
      .join("");
    return `<span class="toggle-group">${buttons}</span>`;
  }

  private wire(): void {
    for (const btn of this.root.querySelectorAll<HTMLButtonElement>(".toggles button")) {
      btn.addEventListener("click", () => {
        const v = btn.dataset.value!;
        if (btn.dataset.kind === "mode") void this.controller.setMode(v as "factor" | "script");
        else if (btn.dataset.kind === "granularity")
          void this.controller.setGranularity(v as "speech" | "sentence");
        else void this.controller.setDirection(v as "most-similar" | "most-different");
      });
    }
    for (const card of this.root.querySelectorAll<HTMLElement>(".twin-card")) {
      const i = Number(card.dataset.i);
      const cand = this.data!.recommendations.candidates[i];
      card.addEventListener("click", () => this.controller.setComparison(cand.speech_id));
      card.addEventListener("mouseenter", (ev) => void this.showBoard(cand, ev as MouseEvent));
      card.addEventListener("mouseleave", () => this.board.classList.add("hidden"));
    }
  }

  private async showBoard(cand: Candidate, ev: MouseEvent): Promise<void> {
    if (!this.analyzedFactors) return;
    let other: FactorsPayload;
    try {
      const span = cand.sentence_index === null ? null : { start_s: cand.start_s, end_s: cand.end_s };
      other = await this.fetchFactors(cand.speech_id, span);
    } catch {
      return;
    }
    // expected-class differences, biggest apart polarized top and bottom
    const diffs: { id: string; diff: number }[] = [];
    for (const [id, mine] of Object.entries(this.analyzedFactors.factors)) {
      const theirs = other.factors[id];
      if (mine.score && theirs?.score) {
        diffs.push({ id, diff: theirs.score.expected_class - mine.score.expected_class });
      }
    }
    diffs.sort((a, b) => b.diff - a.diff);
    const shown = diffs.length > 12 ? [...diffs.slice(0, 6), ...diffs.slice(-6)] : diffs;
    const maxAbs = Math.max(0.01, ...shown.map((d) => Math.abs(d.diff)));
    const rows = shown
      .map((d) => {
        const w = (Math.abs(d.diff) / maxAbs) * 70;
        const side = d.diff >= 0 ? "pos" : "neg";
        return (
          `<div class="diff-row"><span class="diff-id">${d.id}</span>` +
          `<span class="diff-bar ${side}" style="width:${w.toFixed(0)}px"></span>` +
          `<span class="diff-val">${d.diff >= 0 ? "+" : ""}${d.diff.toFixed(2)}</span></div>`
        );
      })
      .join("");
    this.board.innerHTML =
      `<h4>${cand.speech_id} vs ${this.controller.state.analyzedId}</h4>` +
      `<div class="board-stats">placement: level ${cand.level}${cand.text ? ` · “${cand.text}”` : ""}</div>` +
      rows;
    this.board.style.left = `${Math.max(8, ev.clientX - 340)}px`;
    this.board.style.top = `${Math.min(ev.clientY, window.innerHeight - 320)}px`;
    this.board.classList.remove("hidden");
  }
}
