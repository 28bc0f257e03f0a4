// Variant grid view model: card counts, selection state, pass-through data.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import {
  buildGrid,
  exportReady,
  missingSelections,
  trainingBannerMessage,
} from "../src/grid.js";
import type { NoteView, ProjectView, VariantView } from "../src/types.js";

function note(pitch: number, start: number): NoteView {
  return { midi_pitch: pitch, scale_degree: 1, accidental: "none",
           duration_class: "quarter_0", start_beat: start, duration_beats: 1 };
}

function variant(line: number, index: number): VariantView {
  return { line_index: line, variant_index: index, total_beats: 2,
           selected: false, notes: [note(60 + index, 0), note(62 + index, 1)] };
}

function project(melodyCount: number, lines: number,
                 selections: Record<string, number> = {}): ProjectView {
  return {
    id: "p1", title: "t",
    lyric_lines: Array.from({ length: lines }, (_, i) => `line ${i}`),
    params: { exploit_rhythm: 4, exploit_melody: 2, melody_count: melodyCount,
              rhythm_restriction: [], key_fifths: 0, key_mode: "major",
              time_sig: "4/4", tempo_bpm: 120, seed: 0 },
    generation: 1,
    selections,
    missing_selections: [],
    variants: Array.from({ length: lines }, (_, line) =>
      Array.from({ length: melodyCount }, (_, v) => variant(line, v))),
    created_at: 0, updated_at: 0,
  };
}

describe("buildGrid", () => {
  it("renders exactly melody_count cards per line", () => {
    const grid = buildGrid(project(12, 4));
    expect(grid).toHaveLength(4);
    for (const group of grid) {
      expect(group.cards).toHaveLength(12);
    }
  });

  it("passes variant note data through verbatim", () => {
    const p = project(3, 2);
    const grid = buildGrid(p);
    for (const group of grid) {
      for (const card of group.cards) {
        expect(card.variant).toBe(p.variants![card.lineIndex][card.variantIndex]);
        expect(card.variant.notes).toEqual(
          p.variants![card.lineIndex][card.variantIndex].notes);
      }
    }
  });

  it("marks exactly the selected card per line", () => {
    const grid = buildGrid(project(5, 2, { "0": 3 }));
    const selected = grid[0].cards.filter((c) => c.selected);
    expect(selected).toHaveLength(1);
    expect(selected[0].variantIndex).toBe(3);
    expect(grid[1].cards.some((c) => c.selected)).toBe(false);
  });

  it("radio semantics: a new selection replaces the old one", () => {
    const before = buildGrid(project(5, 1, { "0": 3 }));
    const after = buildGrid(project(5, 1, { "0": 1 }));
    expect(before[0].cards.filter((c) => c.selected).map((c) => c.variantIndex))
      .toEqual([3]);
    expect(after[0].cards.filter((c) => c.selected).map((c) => c.variantIndex))
      .toEqual([1]);
  });
});

describe("export gating", () => {
  it("reports missing lines until every line is selected", () => {
    const p = project(3, 3, { "1": 0 });
    expect(missingSelections(p)).toEqual([0, 2]);
    expect(exportReady(p)).toBe(false);
  });

  it("is ready when all lines are selected", () => {
    const p = project(3, 2, { "0": 2, "1": 0 });
    expect(missingSelections(p)).toEqual([]);
    expect(exportReady(p)).toBe(true);
  });

  it("is not ready before any variants exist", () => {
    const p = project(3, 2, { "0": 0, "1": 0 });
    p.variants = [];
    expect(exportReady(p)).toBe(false);
  });
});

describe("training banner", () => {
  it("warns until models are trained, clears afterwards", () => {
    expect(trainingBannerMessage({ models_loaded: false })).toContain("train");
    expect(trainingBannerMessage({ models_loaded: true })).toBe("");
    expect(trainingBannerMessage(null)).toContain("unreachable");
  });
});

describe("editor defaults", () => {
  it("exploit sliders default to 4 (rhythm) and 2 (melody)", () => {
    const html = readFileSync(
      join(__dirname, "..", "static", "index.html"), "utf-8");
    expect(html).toMatch(/id="exploit-rhythm"[^>]*value="4"/);
    expect(html).toMatch(/id="exploit-melody"[^>]*value="2"/);
  });
});
