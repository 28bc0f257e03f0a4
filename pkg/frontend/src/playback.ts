// Pure scheduling math: beats to seconds at the project tempo, and the flat
// playback plan for one variant. No audio objects here so it stays testable.

import type { NoteView, VariantView } from "./types.js";

export interface PlannedNote {
  index: number;
  startSeconds: number;
  durationSeconds: number;
  frequency: number;
  midiPitch: number;
}

export function beatsToSeconds(beats: number, bpm: number): number {
  return (beats * 60) / bpm;
}

export function midiToFrequency(pitch: number): number {
  return 440 * Math.pow(2, (pitch - 69) / 12);
}

export function planVariant(variant: VariantView, bpm: number): PlannedNote[] {
  return variant.notes.map((note: NoteView, index: number) => ({
    index,
    startSeconds: beatsToSeconds(note.start_beat, bpm),
    durationSeconds: beatsToSeconds(note.duration_beats, bpm),
    frequency: midiToFrequency(note.midi_pitch),
    midiPitch: note.midi_pitch,
  }));
}

export function totalSeconds(plan: PlannedNote[]): number {
  let end = 0;
  for (const note of plan) {
    end = Math.max(end, note.startSeconds + note.durationSeconds);
  }
  return end;
}
