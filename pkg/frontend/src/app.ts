// Page assembly for the co-creative loop: write lyrics, set parameters,
// generate, audition variants per line, pick one per line, export.
// All musical data comes from the API verbatim; this file only wires DOM.

import { ApiError, StudioApi, sha256Hex } from "./api.js";
import { downloadBytes } from "./download.js";
import { buildGrid, exportReady, missingSelections, trainingBannerMessage } from "./grid.js";
import { highlightNote, renderPianoRoll } from "./pianoroll.js";
import { planVariant } from "./playback.js";
import { Synth } from "./synth.js";
import { DURATION_CLASSES, KEY_NAMES, ProjectView } from "./types.js";

const api = new StudioApi();
const synth = new Synth();

let project: ProjectView | null = null;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, attrs: Record<string, string> = {}, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

function banner(message: string, kind: "info" | "error" = "info") {
  const box = document.getElementById("banner")!;
  box.textContent = message;
  box.className = message ? `banner banner-${kind}` : "banner banner-empty";
}

function editorValues() {
  const lyrics = (document.getElementById("lyrics") as HTMLTextAreaElement).value
    .split("\n").map((line) => line.trim()).filter((line) => line.length > 0);
  const restriction = Array.from(
    document.querySelectorAll<HTMLInputElement>("#restrictions input:checked"),
  ).map((input) => input.value);
  return {
    title: (document.getElementById("title") as HTMLInputElement).value || "Untitled",
    lyrics,
    params: {
      melody_count: Number((document.getElementById("variants") as HTMLInputElement).value),
      exploit_rhythm: Number((document.getElementById("exploit-rhythm") as HTMLInputElement).value),
      exploit_melody: Number((document.getElementById("exploit-melody") as HTMLInputElement).value),
      rhythm_restriction: restriction,
      key_fifths: keyFifths((document.getElementById("key") as HTMLSelectElement).value),
      key_mode: (document.getElementById("key") as HTMLSelectElement).value.endsWith("m")
        ? "minor" : "major",
      seed: Number((document.getElementById("seed") as HTMLInputElement).value),
    },
  };
}

const MAJOR_FIFTHS: Record<string, number> = {
  C: 0, G: 1, D: 2, A: 3, E: 4, B: 5, "F#": 6, F: -1, Bb: -2, Eb: -3, Ab: -4, Db: -5,
};
const MINOR_FIFTHS: Record<string, number> = {
  Am: 0, Em: 1, Dm: -1, Gm: -2, Cm: -3,
};

function keyFifths(name: string): number {
  return name.endsWith("m") ? MINOR_FIFTHS[name] ?? 0 : MAJOR_FIFTHS[name] ?? 0;
}

async function refreshHealth() {
  try {
    const health = await api.health();
    banner(trainingBannerMessage(health));
  } catch {
    banner(trainingBannerMessage(null), "error");
  }
}

async function onCreateAndGenerate() {
  const values = editorValues();
  if (values.lyrics.length === 0) {
    banner("Enter at least one lyric line.", "error");
    return;
  }
  try {
    banner("Generating…");
    const created = project && sameProjectInputs(project, values)
      ? project
      : await api.createProject(values.title, values.lyrics, values.params);
    const generated = await api.generate(created.id);
    project = await api.getProject(generated.id);
    location.hash = project.id;
    banner("");
    renderGrid();
  } catch (error) {
    const message = error instanceof ApiError
      ? `${error.message}${error.status === 409 ? " — train first." : ""}`
      : String(error);
    banner(message, "error");
    renderGrid();
  }
}

function sameProjectInputs(
  existing: ProjectView,
  values: ReturnType<typeof editorValues>,
): boolean {
  const p = existing.params;
  const v = values.params;
  return JSON.stringify(existing.lyric_lines) === JSON.stringify(values.lyrics)
    && p.melody_count === v.melody_count
    && p.exploit_rhythm === v.exploit_rhythm
    && p.exploit_melody === v.exploit_melody
    && p.key_fifths === v.key_fifths
    && p.key_mode === v.key_mode
    && p.seed === v.seed
    && JSON.stringify([...p.rhythm_restriction].sort())
      === JSON.stringify([...v.rhythm_restriction].sort());
}

async function onSelect(line: number, variant: number) {
  if (!project) return;
  await api.select(project.id, line, variant);
  project = await api.getProject(project.id);
  renderGrid();
}

async function onExport(format: "midi" | "musicxml") {
  if (!project) return;
  try {
    const result = await api.exportSong(project.id, format);
    if (result.serverSha256) {
      const local = await sha256Hex(result.bytes);
      if (local !== result.serverSha256) {
        banner("Download corrupted in transit; try again.", "error");
        return;
      }
    }
    const fallback = format === "midi" ? "song.mid" : "song.musicxml";
    downloadBytes(result.bytes, result.filename ?? fallback,
      format === "midi" ? "audio/midi" : "application/vnd.recordare.musicxml+xml");
  } catch (error) {
    banner(error instanceof ApiError ? error.message : String(error), "error");
  }
}

function renderGrid() {
  const host = document.getElementById("grid")!;
  host.textContent = "";
  const exportBox = document.getElementById("export-box")!;
  exportBox.textContent = "";
  if (!project || !project.variants || project.variants.length === 0) return;

  for (const group of buildGrid(project)) {
    const section = el("section", { class: "line-group" });
    section.appendChild(el("h3", {}, `Line ${group.lineIndex + 1}: ${group.lyric}`));
    const row = el("div", { class: "cards" });
    for (const card of group.cards) {
      const box = el("div", { class: card.selected ? "card card-selected" : "card" });
      const roll = renderPianoRoll(card.variant, card.syllables);
      box.appendChild(roll);

      const controls = el("div", { class: "card-controls" });
      const play = el("button", { type: "button" }, "play");
      play.addEventListener("click", () => {
        const plan = planVariant(card.variant, project!.params.tempo_bpm);
        play.textContent = "stop";
        synth.play(plan,
          (index) => highlightNote(roll, index),
          () => { highlightNote(roll, null); play.textContent = "play"; });
      });
      controls.appendChild(play);

      const label = el("label", { class: "pick" });
      const radio = el("input", {
        type: "radio",
        name: `line-${group.lineIndex}`,
        value: String(card.variantIndex),
      }) as HTMLInputElement;
      radio.checked = card.selected;
      radio.addEventListener("change", () => {
        synth.stop();
        void onSelect(card.lineIndex, card.variantIndex);
      });
      label.appendChild(radio);
      label.appendChild(document.createTextNode(` var ${card.variantIndex + 1}`));
      controls.appendChild(label);
      box.appendChild(controls);
      row.appendChild(box);
    }
    section.appendChild(row);
    host.appendChild(section);
  }

  const missing = missingSelections(project);
  if (exportReady(project)) {
    const midi = el("button", { type: "button" }, "Download MIDI");
    midi.addEventListener("click", () => void onExport("midi"));
    const xml = el("button", { type: "button" }, "Download MusicXML");
    xml.addEventListener("click", () => void onExport("musicxml"));
    exportBox.appendChild(midi);
    exportBox.appendChild(xml);
  } else {
    exportBox.appendChild(el("span", { class: "export-blocked" },
      `Select a variant for every line to export (missing: ${
        missing.map((i) => i + 1).join(", ")})`));
  }
}

function buildEditor() {
  const restrictions = document.getElementById("restrictions")!;
  for (const cls of DURATION_CLASSES) {
    const label = el("label", { class: "restrict" });
    const box = el("input", { type: "checkbox", value: cls });
    label.appendChild(box);
    label.appendChild(document.createTextNode(cls));
    restrictions.appendChild(label);
  }
  const key = document.getElementById("key") as HTMLSelectElement;
  for (const name of KEY_NAMES) {
    key.appendChild(el("option", { value: name }, name));
  }
  document.getElementById("generate")!.addEventListener(
    "click", () => void onCreateAndGenerate());
}

async function restoreFromHash() {
  const id = location.hash.replace("#", "");
  if (!id) return;
  try {
    project = await api.getProject(id);
    const lyricsBox = document.getElementById("lyrics") as HTMLTextAreaElement;
    lyricsBox.value = project.lyric_lines.join("\n");
    (document.getElementById("title") as HTMLInputElement).value = project.title;
    renderGrid();
  } catch {
    location.hash = "";
  }
}

export function start() {
  buildEditor();
  void refreshHealth();
  void restoreFromHash();
}
