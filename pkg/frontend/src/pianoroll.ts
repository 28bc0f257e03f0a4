// SVG piano roll for one variant: one rect per note straight from the API
// payload, x scaled by beats (the roll's extent equals total_beats), y by
// MIDI pitch, with the syllable text under each note.

import type { SyllableView, VariantView } from "./types.js";

const BEAT_WIDTH = 26;
const ROW_HEIGHT = 5;
const LABEL_BAND = 14;
const PITCH_PAD = 2;

export interface RollGeometry {
  width: number;
  height: number;
  rects: { x: number; y: number; w: number; h: number; index: number }[];
}

export function rollGeometry(variant: VariantView): RollGeometry {
  const pitches = variant.notes.map((n) => n.midi_pitch);
  const high = (pitches.length ? Math.max(...pitches) : 72) + PITCH_PAD;
  const low = (pitches.length ? Math.min(...pitches) : 60) - PITCH_PAD;
  const rows = high - low + 1;
  return {
    width: variant.total_beats * BEAT_WIDTH,
    height: rows * ROW_HEIGHT + LABEL_BAND,
    rects: variant.notes.map((note, index) => ({
      x: note.start_beat * BEAT_WIDTH,
      y: (high - note.midi_pitch) * ROW_HEIGHT,
      w: note.duration_beats * BEAT_WIDTH,
      h: ROW_HEIGHT,
      index,
    })),
  };
}

export function renderPianoRoll(
  variant: VariantView,
  syllables: SyllableView[] | undefined,
): SVGSVGElement {
  const geometry = rollGeometry(variant);
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("class", "roll");
  svg.setAttribute("width", String(Math.max(geometry.width, 40)));
  svg.setAttribute("height", String(geometry.height));
  svg.setAttribute(
    "viewBox", `0 0 ${Math.max(geometry.width, 40)} ${geometry.height}`);

  for (let beat = 0; beat <= variant.total_beats; beat++) {
    const line = document.createElementNS(svg.namespaceURI, "line");
    line.setAttribute("x1", String(beat * BEAT_WIDTH));
    line.setAttribute("x2", String(beat * BEAT_WIDTH));
    line.setAttribute("y1", "0");
    line.setAttribute("y2", String(geometry.height - LABEL_BAND));
    line.setAttribute("class", "roll-grid");
    svg.appendChild(line);
  }

  geometry.rects.forEach((rect, i) => {
    const el = document.createElementNS(svg.namespaceURI, "rect");
    el.setAttribute("x", String(rect.x));
    el.setAttribute("y", String(rect.y));
    el.setAttribute("width", String(Math.max(rect.w - 1, 2)));
    el.setAttribute("height", String(rect.h));
    el.setAttribute("class", "roll-note");
    el.setAttribute("data-note-index", String(rect.index));
    svg.appendChild(el);

    const syllable = syllables?.[i];
    if (syllable) {
      const text = document.createElementNS(svg.namespaceURI, "text");
      text.setAttribute("x", String(rect.x + 1));
      text.setAttribute("y", String(geometry.height - 3));
      text.setAttribute("class", "roll-syllable");
      text.textContent = syllable.text;
      svg.appendChild(text);
    }
  });
  return svg;
}

export function highlightNote(svg: SVGSVGElement, index: number | null) {
  svg.querySelectorAll(".roll-note").forEach((el) => {
    const active = index !== null
      && el.getAttribute("data-note-index") === String(index);
    el.classList.toggle("roll-note-active", active);
  });
}
