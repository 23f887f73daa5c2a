import { HttpApiClient } from "./api.js";
import { PanelController } from "./controller.js";
import { Encodings } from "./encodings.js";
import { FactorPanel } from "./panels/factor.js";
import { MirrorPanel } from "./panels/mirror.js";
import { SpeakerPanel } from "./panels/speaker.js";
import { TimeslicePanel } from "./panels/timeslice.js";

async function boot(): Promise<void> {
  const api = new HttpApiClient();
  const controller = new PanelController(api);
  let enc = new Encodings(await api.encodings());

  const factor = new FactorPanel(document.getElementById("factor-panel")!, controller, enc);
  const timeslice = new TimeslicePanel(document.getElementById("timeslice-panel")!, controller, enc);
  const speaker = new SpeakerPanel(document.getElementById("speaker-panel")!, controller, enc);
  const mirror = new MirrorPanel(
    document.getElementById("mirror-panel")!,
    controller,
    enc,
    (id, span) => api.factors(id, span),
  );

  controller.register({
    factor: (p) => {
      factor.render(p);
      mirror.noteAnalyzedFactors(p);
    },
    timeslice: (p) => timeslice.render(p),
    mirror: (p) => mirror.render(p),
    speaker: (p) => speaker.render(p),
    comparison: (id) => speaker.setComparison(id),
    palette: (palette) => {
      enc = enc.withPalette(palette);
      factor.setEncodings(enc);
      timeslice.setEncodings(enc);
      speaker.setEncodings(enc);
      mirror.setEncodings(enc);
    },
  });

  const speeches = await controller.loadSpeechList();
  const select = document.getElementById("speech-select") as HTMLSelectElement;
  select.innerHTML = speeches
    .map((m) => `<option value="${m.speech_id}">${m.speech_id} — ${m.title} (level ${m.level})</option>`)
    .join("");
  select.addEventListener("change", () => {
    const meta = controller.metaOf(select.value);
    speaker.setMedia(meta?.video_url ?? null);
    void controller.setAnalyzed(select.value);
  });

  document.getElementById("palette-toggle")!.addEventListener("click", () => {
    const palette = controller.togglePalette();
    document.getElementById("palette-toggle")!.textContent = `palette: ${palette}`;
  });

  if (speeches.length) {
    const first = speeches[0];
    speaker.setMedia(first.video_url);
    await controller.setAnalyzed(first.speech_id);
  } else {
    document.getElementById("factor-panel")!.textContent =
      "Empty corpus. Ingest speeches first: podium synth --corpus DIR --n 20";
  }
}

boot().catch((err) => {
  console.error(err);
  document.body.insertAdjacentHTML(
    "afterbegin",
    `<div class="boot-error">Failed to reach the engine API: ${String(err)}</div>`,
  );
});
