"""Sequential melody generation: one duration, then one pitch, per syllable.

For every syllable the rhythm model's distribution is sampled first (after
removing restricted duration classes), then the melody model picks a scale
degree given the chosen duration.  Sampling uses the explore/exploit rule:
draw k times independently, keep the modal label, break ties by the label's
original probability and then by global label order, so large k converges
on the argmax while k=1 samples the raw distribution.

Scale degrees become concrete pitches by picking, among the octaves inside
the vocal range, the candidate closest to the previous pitch (ties resolve
downward; the first note aims at the range midpoint).  A rolling five-note
context keeps the history features identical to what training rows carry.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .features import HISTORY, PartialRow, complete_row, split_melody_label
from .forest import ClassDistribution, RandomForestModel, predict_distribution
from .score import (
    DurationClass,
    KeySignature,
    LyricSyllable,
    Score,
    TimeSignature,
    degree_pitch_class,
    make_note,
)

DEFAULT_VOCAL_RANGE = (57, 81)  # A3..A5
DEFAULT_EXPLOIT_RHYTHM = 4
DEFAULT_EXPLOIT_MELODY = 2


class RestrictionError(ValueError):
    """Raised when restrictions remove every possible outcome."""


@dataclass(frozen=True)
class GenerationParams:
    exploit_rhythm: int = DEFAULT_EXPLOIT_RHYTHM
    exploit_melody: int = DEFAULT_EXPLOIT_MELODY
    melody_count: int = 15
    rhythm_restriction: frozenset = frozenset()
    key: KeySignature = KeySignature(0, "major")
    time_sig: TimeSignature = TimeSignature(4, 4)
    vocal_range: tuple[int, int] = DEFAULT_VOCAL_RANGE
    seed: int = 0
    tempo_bpm: float = 120.0

    def __post_init__(self):
        if self.exploit_rhythm < 1 or self.exploit_melody < 1:
            raise ValueError("explore/exploit draw counts must be >= 1")
        if self.melody_count < 1:
            raise ValueError("melody_count must be >= 1")
        low, high = self.vocal_range
        if high - low < 12:
            raise ValueError("vocal range must span at least an octave")
        from .score import ALL_DURATION_CLASSES

        if len(self.rhythm_restriction) >= len(ALL_DURATION_CLASSES):
            raise RestrictionError(
                "rhythm restriction covers every duration class; relax it"
            )


@dataclass
class GeneratedNote:
    duration: DurationClass
    scale_degree: int
    accidental: str
    midi_pitch: int


@dataclass
class MelodyVariant:
    line_index: int
    notes: list[GeneratedNote]
    start_offset_beats: Fraction = Fraction(0)


@dataclass
class GenerationContext:
    """Rolling song state while notes are decided one at a time."""

    key: KeySignature
    time_sig: TimeSignature
    offset_beats: Fraction = Fraction(0)
    song_start: bool = True
    history: list = field(default_factory=list)  # (degree str, accidental, duration str)
    prev_pitch: int | None = None

    @property
    def offset_in_measure(self) -> Fraction:
        return self.offset_beats % self.time_sig.measure_beats

    @property
    def first_measure(self) -> bool:
        return self.song_start and self.offset_beats < self.time_sig.measure_beats

    def push(self, note: GeneratedNote):
        self.history.append(
            (str(note.scale_degree), note.accidental, str(note.duration))
        )
        if len(self.history) > HISTORY:
            self.history.pop(0)
        self.offset_beats += note.duration.beats
        self.prev_pitch = note.midi_pitch


def sample_exploit(dist: ClassDistribution, k: int, rng: random.Random) -> str:
    """Modal label of k independent draws; ties prefer the likelier label."""
    if k < 1:
        raise ValueError("draw count must be >= 1")
    ordered = [label for label in dist.labels if label in dist.probabilities]
    if not ordered:
        raise ValueError("cannot sample from an empty distribution")
    cumulative = []
    running = 0.0
    for label in ordered:
        running += dist.probabilities[label]
        cumulative.append(running)
    tally: dict[str, int] = {}
    for _ in range(k):
        u = rng.random() * running
        for label, edge in zip(ordered, cumulative):
            if u < edge:
                tally[label] = tally.get(label, 0) + 1
                break
        else:
            tally[ordered[-1]] = tally.get(ordered[-1], 0) + 1
    best_count = max(tally.values())
    tied = [label for label in ordered if tally.get(label, 0) == best_count]
    return max(tied, key=lambda lb: (dist.probabilities[lb], -ordered.index(lb)))


def restrict(dist: ClassDistribution, excluded) -> ClassDistribution:
    """Zero out excluded labels and renormalize the remainder."""
    excluded = {str(e) for e in excluded}
    kept = {
        label: p for label, p in dist.probabilities.items()
        if label not in excluded and p > 0
    }
    total = sum(kept.values())
    if total <= 0:
        raise RestrictionError(
            "every possible outcome is restricted away; relax the rhythm restriction"
        )
    return ClassDistribution(
        probabilities={label: p / total for label, p in kept.items()},
        labels=dist.labels,
    )


def realize_pitch(scale_degree: int, accidental: str, key: KeySignature,
                  prev_pitch: int | None, vocal_range: tuple[int, int]) -> int:
    """Concrete MIDI pitch: in-range octave closest to the previous note."""
    low, high = vocal_range
    pitch_class = degree_pitch_class(scale_degree, accidental, key)
    candidates = [m for m in range(low, high + 1) if m % 12 == pitch_class]
    if not candidates:
        raise ValueError(f"no pitch for degree {scale_degree} inside range {vocal_range}")
    anchor = prev_pitch if prev_pitch is not None else (low + high) / 2
    return min(candidates, key=lambda m: (abs(m - anchor), m))


def generate_line(rhythm_model: RandomForestModel, melody_model: RandomForestModel,
                  line_rows: list[PartialRow], params: GenerationParams,
                  ctx: GenerationContext, rng: random.Random,
                  line_index: int = 0) -> MelodyVariant:
    """Generate one melody variant for one annotated lyric line."""
    notes = []
    start = ctx.offset_beats
    for partial in line_rows:
        row = complete_row(
            partial,
            offset_beats=ctx.offset_beats,
            offset_in_measure=ctx.offset_in_measure,
            first_measure=partial.first_measure and ctx.first_measure,
            history=ctx.history,
        )
        rhythm_dist = restrict(
            predict_distribution(rhythm_model, row), params.rhythm_restriction
        )
        duration = DurationClass.from_string(
            sample_exploit(rhythm_dist, params.exploit_rhythm, rng)
        )
        row["duration_class"] = str(duration)
        row["duration_beats"] = float(duration.beats)
        melody_dist = predict_distribution(melody_model, row)
        degree, accidental = split_melody_label(
            sample_exploit(melody_dist, params.exploit_melody, rng)
        )
        pitch = realize_pitch(degree, accidental, params.key, ctx.prev_pitch,
                              params.vocal_range)
        note = GeneratedNote(duration, degree, accidental, pitch)
        notes.append(note)
        ctx.push(note)
    return MelodyVariant(line_index=line_index, notes=notes, start_offset_beats=start)


def variant_seed(master_seed: int, line_index: int, variant_index: int) -> int:
    return (master_seed * 1_000_003 + line_index) * 1_000_003 + variant_index


def generate_variants(rhythm_model: RandomForestModel, melody_model: RandomForestModel,
                      annotated_lines, params: GenerationParams,
                      line_rows=None) -> list[list[MelodyVariant]]:
    """melody_count variants per line, each from a fresh seeded context."""
    from .features import lyrics_to_rows

    if line_rows is None:
        line_rows = lyrics_to_rows(annotated_lines, params.key, params.time_sig)
    if not line_rows:
        raise ValueError("no lyric lines to generate for")
    out = []
    for line_index, rows in enumerate(line_rows):
        variants = []
        for v in range(params.melody_count):
            rng = random.Random(variant_seed(params.seed, line_index, v))
            ctx = GenerationContext(
                key=params.key, time_sig=params.time_sig,
                song_start=line_index == 0,
            )
            fresh = [replace(r, values={}) for r in rows]
            variants.append(generate_line(
                rhythm_model, melody_model, fresh, params, ctx, rng, line_index,
            ))
        out.append(variants)
    return out


def variant_to_score(variant: MelodyVariant, syllables, params: GenerationParams,
                     title: str = "", start_offset: Fraction = Fraction(0)) -> Score:
    """Concrete Score for one variant (used for per-variant export)."""
    if len(syllables) != len(variant.notes):
        raise ValueError("one syllable per generated note is required")
    notes = []
    offset = Fraction(start_offset)
    for syl, gen in zip(syllables, variant.notes):
        lyric = LyricSyllable(
            text=syl.text, syllabic_type=syl.syllabic_type,
            word_text=syl.word.text, syllable_number=syl.syllable_number,
        )
        notes.append(make_note(
            offset_beats=offset, duration=gen.duration, midi_pitch=gen.midi_pitch,
            syllable=lyric, key=params.key, time_sig=params.time_sig,
        ))
        offset += gen.duration.beats
    return Score(title=title, notes=notes, tempo_bpm=params.tempo_bpm).validate()


def assemble_song(selections: list[MelodyVariant], annotated_lines,
                  params: GenerationParams, tempo_bpm: float | None = None,
                  title: str = "") -> Score:
    """Concatenate one selected variant per line into a full score.

    Each line begins at the first measure boundary at or after the end of
    the previous line.
    """
    if len(selections) != len(annotated_lines):
        raise ValueError("need exactly one selected variant per lyric line")
    measure = params.time_sig.measure_beats
    notes = []
    cursor = Fraction(0)
    for variant, syllables in zip(selections, annotated_lines):
        if variant is None:
            raise ValueError("a line is missing its selection")
        line_score = variant_to_score(variant, syllables, params,
                                      start_offset=cursor)
        notes.extend(line_score.notes)
        end = cursor + sum((n.duration.beats for n in variant.notes), Fraction(0))
        cursor = -(-end // measure) * measure  # ceil to the next boundary
    return Score(
        title=title,
        notes=notes,
        tempo_bpm=tempo_bpm if tempo_bpm is not None else params.tempo_bpm,
    ).validate()
