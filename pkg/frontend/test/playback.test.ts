// Playback timing: tempo arithmetic only, no audio objects.

import { describe, expect, it } from "vitest";
import { beatsToSeconds, midiToFrequency, planVariant, totalSeconds } from "../src/playback.js";
import type { VariantView } from "../src/types.js";

const variant: VariantView = {
  line_index: 0,
  variant_index: 0,
  total_beats: 2.5,
  selected: false,
  notes: [
    { midi_pitch: 60, scale_degree: 1, accidental: "none",
      duration_class: "quarter_0", start_beat: 0, duration_beats: 1 },
    { midi_pitch: 64, scale_degree: 3, accidental: "none",
      duration_class: "8th_0", start_beat: 1, duration_beats: 0.5 },
    { midi_pitch: 67, scale_degree: 5, accidental: "none",
      duration_class: "quarter_0", start_beat: 1.5, duration_beats: 1 },
  ],
};

describe("beatsToSeconds", () => {
  it("quarter note at 120 BPM lasts 0.5 s within 50 ms", () => {
    expect(Math.abs(beatsToSeconds(1, 120) - 0.5)).toBeLessThan(0.05);
  });

  it("scales with tempo", () => {
    expect(beatsToSeconds(1, 60)).toBeCloseTo(1.0, 9);
    expect(beatsToSeconds(2, 240)).toBeCloseTo(0.5, 9);
  });
});

describe("planVariant", () => {
  it("keeps note order aligned with start offsets and never overlaps", () => {
    const plan = planVariant(variant, 120);
    for (let i = 1; i < plan.length; i++) {
      const prev = plan[i - 1];
      expect(plan[i].startSeconds).toBeGreaterThanOrEqual(
        prev.startSeconds + prev.durationSeconds - 1e-9);
    }
  });

  it("quarter-note plan entries last 0.5 s at 120 BPM", () => {
    const plan = planVariant(variant, 120);
    expect(Math.abs(plan[0].durationSeconds - 0.5)).toBeLessThan(0.05);
  });

  it("total length equals total beats at the tempo", () => {
    const plan = planVariant(variant, 120);
    expect(totalSeconds(plan)).toBeCloseTo(beatsToSeconds(2.5, 120), 9);
  });

  it("uses equal temperament from A440", () => {
    expect(midiToFrequency(69)).toBeCloseTo(440, 6);
    expect(midiToFrequency(60)).toBeCloseTo(261.6256, 3);
  });
});
