// Server JSON shapes, mirrored verbatim. The UI never derives or adjusts
// musical data; whatever the API sends is what gets rendered and played.

export interface NoteView {
  midi_pitch: number;
  scale_degree: number;
  accidental: string;
  duration_class: string;
  start_beat: number;
  duration_beats: number;
}

export interface VariantView {
  line_index: number;
  variant_index: number;
  notes: NoteView[];
  total_beats: number;
  selected: boolean;
}

export interface ProjectParams {
  exploit_rhythm: number;
  exploit_melody: number;
  melody_count: number;
  rhythm_restriction: string[];
  key_fifths: number;
  key_mode: string;
  time_sig: string;
  tempo_bpm: number;
  seed: number;
}

export interface SyllableView {
  text: string;
  type: string;
  number: number;
}

export interface ProjectView {
  id: string;
  title: string;
  lyric_lines: string[];
  params: ProjectParams;
  generation: number;
  selections: Record<string, number>;
  missing_selections: number[];
  variants?: VariantView[][];
  syllables?: SyllableView[][];
  created_at: number;
  updated_at: number;
}

export interface HealthView {
  status: string;
  models_loaded: boolean;
}

export const DURATION_CLASSES = [
  "whole_0", "whole_1", "half_0", "half_1", "quarter_0", "quarter_1",
  "8th_0", "8th_1", "16th_0", "16th_1", "32nd_0", "32nd_1",
];

export const KEY_NAMES = [
  "C", "G", "D", "A", "E", "B", "F#", "F", "Bb", "Eb", "Ab", "Db",
  "Am", "Em", "Dm", "Gm", "Cm",
];
