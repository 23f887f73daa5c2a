import type { PanelController } from "../controller.js";
import type { Encodings } from "../encodings.js";
import type { BoardPayload, FactorEntry, FactorsPayload } from "../types.js";
import { STATISTIC_MARK, techniqueIcon } from "../icons.js";

const GROUP_ORDER = [
  "facial expression", "eye contact", "use of stage", "body gesture", "voice", "pace",
];

function fmt(v: number | null): string {
  if (v === null) return "—";
  const a = Math.abs(v);
  return a !== 0 && (a >= 1e4 || a < 1e-3) ? v.toExponential(2) : v.toPrecision(4);
}

/**
 * Factor Panel: the 23 factors in six collapsible technique groups, colored
 * by effectiveness; hover opens the effectiveness board (trend curve plus the
 * collection histogram), clicking toggles selection and filters the other
 * panels.
 */
export class FactorPanel {
  private payload: FactorsPayload | null = null;
  private board: HTMLElement;

  constructor(
    private root: HTMLElement,
    private controller: PanelController,
    private enc: Encodings,
  ) {
    this.board = document.createElement("div");
    this.board.className = "factor-board hidden";
    document.body.appendChild(this.board);
  }

  setEncodings(enc: Encodings): void {
    this.enc = enc;
    if (this.payload) this.render(this.payload);
  }

  render(payload: FactorsPayload): void {
    this.payload = payload;
    const selected = new Set(this.controller.state.selectedFactors);
    const groups = new Map<string, [string, FactorEntry][]>();
    for (const [id, entry] of Object.entries(payload.factors)) {
      const list = groups.get(entry.technique) ?? [];
      list.push([id, entry]);
      groups.set(entry.technique, list);
    }

    const html: string[] = [];
    for (const technique of GROUP_ORDER) {
      const rows = groups.get(technique) ?? [];
      html.push(`<details open class="group"><summary>${techniqueIcon(technique)}<span>${technique}</span></summary>`);
      for (const [id, entry] of rows) {
        const color = this.enc.effectivenessColor(
          entry.score?.expected_class ?? null,
          entry.score?.significant ?? false,
        );
        const label = entry.score?.label ?? "—";
        html.push(
          `<div class="factor-row${selected.has(id) ? " selected" : ""}" data-factor="${id}">` +
            `<span class="chip" style="background:${color}"></span>` +
            `<span class="fid">${entry.feature} <b>${STATISTIC_MARK[entry.statistic] ?? ""}</b> ${entry.statistic}</span>` +
            `<span class="fval">${fmt(entry.value)}</span>` +
            `<span class="flabel">${label}</span>` +
          `</div>`,
        );
      }
      html.push("</details>");
    }
    this.root.innerHTML = html.join("");

    for (const row of this.root.querySelectorAll<HTMLElement>(".factor-row")) {
      const id = row.dataset.factor!;
      row.addEventListener("click", () => this.toggle(id));
      row.addEventListener("mouseenter", (ev) => this.showBoard(id, ev as MouseEvent));
      row.addEventListener("mouseleave", () => this.board.classList.add("hidden"));
    }
  }

  private toggle(id: string): void {
    const current = new Set(this.controller.state.selectedFactors);
    if (current.has(id)) current.delete(id);
    else current.add(id);
    void this.controller.selectFactors([...current]);
    if (this.payload) this.render(this.payload);
  }

  private async showBoard(id: string, ev: MouseEvent): Promise<void> {
    let board: BoardPayload;
    try {
      board = await this.controller.hoverFactor(id);
    } catch {
      return;
    }
    this.board.innerHTML = this.boardHtml(board);
    this.board.style.left = `${Math.min(ev.clientX + 14, window.innerWidth - 340)}px`;
    this.board.style.top = `${Math.min(ev.clientY + 10, window.innerHeight - 260)}px`;
    this.board.classList.remove("hidden");
  }

  private boardHtml(b: BoardPayload): string {
    const w = 300;
    const h = 110;
    const parts = [`<h4>${b.factor}</h4>`];

    if (b.curve && b.curve.length > 1) {
      const xs = b.curve.map((p) => p[0]);
      const lo = Math.min(...xs);
      const hi = Math.max(...xs);
      const px = (x: number) => ((x - lo) / (hi - lo || 1)) * (w - 16) + 8;
      const py = (y: number) => h - 12 - ((y - 1) / 5) * (h - 24);
      const pts = b.curve.map(([x, y]) => `${px(x).toFixed(1)},${py(y).toFixed(1)}`).join(" ");
      parts.push(
        `<div class="board-title">effectiveness trend</div>` +
        `<svg viewBox="0 0 ${w} ${h}"><polyline class="curve" points="${pts}"/>` +
        (b.value !== null
          ? `<line class="marker" x1="${px(b.value).toFixed(1)}" y1="8" x2="${px(b.value).toFixed(1)}" y2="${h - 10}"/>`
          : "") +
        `</svg>`,
      );
    }

    if (b.histogram) {
      const counts = b.histogram.counts;
      const maxC = Math.max(...counts, 1);
      const bw = (w - 16) / counts.length;
      const bars = counts
        .map((c, i) => {
          const bh = (c / maxC) * (h - 26);
          const cls = i === b.histogram!.highlight_bin ? "bar highlight" : "bar";
          return `<rect class="${cls}" x="${(8 + i * bw).toFixed(1)}" y="${(h - 12 - bh).toFixed(1)}" width="${(bw - 1).toFixed(1)}" height="${bh.toFixed(1)}"/>`;
        })
        .join("");
      parts.push(
        `<div class="board-title">distribution in the collection</div>` +
        `<svg viewBox="0 0 ${w} ${h}">${bars}</svg>`,
      );
    }
    const rows = [
      b.value !== null ? `this speech: <b>${fmt(b.value)}</b>` : "this speech: undefined",
      b.corpus_mean !== null ? `all speeches: ${fmt(b.corpus_mean)}` : "",
      b.best_mean !== null ? `level-${b.best_level} speeches: ${fmt(b.best_mean)}` : "",
    ].filter(Boolean);
    parts.push(`<div class="board-stats">${rows.join(" · ")}</div>`);
    return parts.join("");
  }
}
