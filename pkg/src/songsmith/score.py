"""Core score model: notes with attached syllables, keys, meters, durations.

Everything downstream (feature extraction, the two classifiers, generation,
file export) works on these types.  Offsets and durations are kept as exact
``Fraction`` values in quarter-note units so long scores never drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


class ScoreError(ValueError):
    """Raised for scores or score files that violate the supported subset."""


FLAT = "flat"
NATURAL = "none"
SHARP = "sharp"
ACCIDENTALS = (FLAT, NATURAL, SHARP)

# Semitone of each major-scale degree above the tonic.
MAJOR_SCALE_SEMITONES = (0, 2, 4, 5, 7, 9, 11)

# Chromatic pitch classes mapped onto (degree, accidental) relative to a
# major-scale tonic.  Raised 1/4/5 are spelled sharp, lowered 3/7 flat.
_PITCH_CLASS_TABLE = {
    0: (1, NATURAL),
    1: (1, SHARP),
    2: (2, NATURAL),
    3: (3, FLAT),
    4: (3, NATURAL),
    5: (4, NATURAL),
    6: (4, SHARP),
    7: (5, NATURAL),
    8: (5, SHARP),
    9: (6, NATURAL),
    10: (7, FLAT),
    11: (7, NATURAL),
}

_ACCIDENTAL_OFFSET = {FLAT: -1, NATURAL: 0, SHARP: 1}


@dataclass(frozen=True)
class TimeSignature:
    numerator: int
    denominator: int

    def __post_init__(self):
        if self.numerator < 1:
            raise ScoreError(f"time signature numerator must be >= 1, got {self.numerator}")
        if self.denominator not in (1, 2, 4, 8, 16, 32):
            raise ScoreError(f"time signature denominator must be a power of two <= 32, got {self.denominator}")

    @property
    def measure_beats(self) -> Fraction:
        """Measure length in quarter-note beats."""
        return Fraction(4 * self.numerator, self.denominator)

    @property
    def beat_unit(self) -> Fraction:
        """Length of one denominator beat in quarter-note units."""
        return Fraction(4, self.denominator)

    def __str__(self):
        return f"{self.numerator}/{self.denominator}"


@dataclass(frozen=True)
class KeySignature:
    fifths: int
    mode: str = "major"

    def __post_init__(self):
        if not -7 <= self.fifths <= 7:
            raise ScoreError(f"key fifths must be in [-7, 7], got {self.fifths}")
        if self.mode not in ("major", "minor"):
            raise ScoreError(f"key mode must be major or minor, got {self.mode!r}")

    @property
    def tonic_pitch_class(self) -> int:
        """Pitch class of the major tonic (relative major for minor keys)."""
        return (self.fifths * 7) % 12


# Duration vocabulary: six note-value bases, plain or single-dotted.
DURATION_BASES = ("whole", "half", "quarter", "8th", "16th", "32nd")
_BASE_BEATS = {
    "whole": Fraction(4),
    "half": Fraction(2),
    "quarter": Fraction(1),
    "8th": Fraction(1, 2),
    "16th": Fraction(1, 4),
    "32nd": Fraction(1, 8),
}


@dataclass(frozen=True)
class DurationClass:
    base: str
    dots: int = 0

    def __post_init__(self):
        if self.base not in _BASE_BEATS:
            raise ScoreError(f"unknown duration base {self.base!r}")
        if self.dots not in (0, 1):
            raise ScoreError(f"durations carry 0 or 1 dots, got {self.dots}")

    @property
    def beats(self) -> Fraction:
        b = _BASE_BEATS[self.base]
        return b * Fraction(3, 2) if self.dots else b

    def __str__(self):
        return f"{self.base}_{self.dots}"

    @classmethod
    def from_string(cls, text: str) -> "DurationClass":
        base, _, dots = text.rpartition("_")
        if not base or dots not in ("0", "1"):
            raise ScoreError(f"bad duration class string {text!r}")
        return cls(base, int(dots))

    @classmethod
    def from_beats(cls, beats: Fraction) -> "DurationClass | None":
        """Duration class whose length is exactly `beats`, or None."""
        return _BEATS_TO_CLASS.get(Fraction(beats))


ALL_DURATION_CLASSES = tuple(
    DurationClass(base, dots) for base in DURATION_BASES for dots in (1, 0)
)
_BEATS_TO_CLASS = {d.beats: d for d in ALL_DURATION_CLASSES}


def duration_sort_key(d: DurationClass):
    """Canonical ordering: longest first, dotted before plain at equal base."""
    return (-d.beats, d.dots == 0)


SYLLABIC_TYPES = ("single", "begin", "middle", "end")


@dataclass(frozen=True)
class LyricSyllable:
    text: str
    syllabic_type: str
    word_text: str
    syllable_number: int = 1

    def __post_init__(self):
        if self.syllabic_type not in SYLLABIC_TYPES:
            raise ScoreError(f"bad syllabic type {self.syllabic_type!r}")
        if not self.text:
            raise ScoreError("syllable text must be non-empty")
        if self.syllabic_type == "single" and self.syllable_number != 1:
            raise ScoreError("single-syllable words number their syllable 1")
        if self.syllable_number < 1:
            raise ScoreError("syllable numbers are 1-based")


def classify_pitch(midi_pitch: int, key: KeySignature) -> tuple[int, str]:
    """Scale degree (1-7) and accidental of a pitch against the key's major tonic."""
    if not 0 <= midi_pitch <= 127:
        raise ScoreError(f"pitch {midi_pitch} outside MIDI range 0-127")
    rel = (midi_pitch - key.tonic_pitch_class) % 12
    return _PITCH_CLASS_TABLE[rel]


def degree_pitch_class(scale_degree: int, accidental: str, key: KeySignature) -> int:
    """Pitch class realizing a (degree, accidental) pair in the key."""
    if not 1 <= scale_degree <= 7:
        raise ScoreError(f"scale degree must be 1-7, got {scale_degree}")
    if accidental not in _ACCIDENTAL_OFFSET:
        raise ScoreError(f"bad accidental {accidental!r}")
    semis = MAJOR_SCALE_SEMITONES[scale_degree - 1] + _ACCIDENTAL_OFFSET[accidental]
    return (key.tonic_pitch_class + semis) % 12


@dataclass(frozen=True)
class NoteEvent:
    """One sung note: where it falls, how long, what pitch, which syllable."""

    offset_beats: Fraction
    offset_in_measure: Fraction
    measure_index: int
    duration: DurationClass
    scale_degree: int
    accidental: str
    midi_pitch: int
    syllable: LyricSyllable
    key: KeySignature
    time_sig: TimeSignature
    melisma: bool = False

    def __post_init__(self):
        if self.offset_beats < 0 or self.offset_in_measure < 0:
            raise ScoreError("note offsets must be non-negative")
        if self.offset_in_measure >= self.time_sig.measure_beats:
            raise ScoreError(
                f"offset {self.offset_in_measure} does not fit a {self.time_sig} measure"
            )
        if not 0 <= self.midi_pitch <= 127:
            raise ScoreError(f"pitch {self.midi_pitch} outside MIDI range 0-127")
        expected = classify_pitch(self.midi_pitch, self.key)
        if (self.scale_degree, self.accidental) != expected:
            raise ScoreError(
                f"degree {self.scale_degree}/{self.accidental} inconsistent with "
                f"pitch {self.midi_pitch} in key fifths={self.key.fifths}"
            )


def make_note(
    offset_beats: Fraction,
    duration: DurationClass,
    midi_pitch: int,
    syllable: LyricSyllable,
    key: KeySignature,
    time_sig: TimeSignature,
    melisma: bool = False,
) -> NoteEvent:
    """Build a NoteEvent, deriving measure position and scale degree."""
    offset_beats = Fraction(offset_beats)
    measure = offset_beats // time_sig.measure_beats
    in_measure = offset_beats - measure * time_sig.measure_beats
    degree, accidental = classify_pitch(midi_pitch, key)
    return NoteEvent(
        offset_beats=offset_beats,
        offset_in_measure=in_measure,
        measure_index=int(measure),
        duration=duration,
        scale_degree=degree,
        accidental=accidental,
        midi_pitch=midi_pitch,
        syllable=syllable,
        key=key,
        time_sig=time_sig,
        melisma=melisma,
    )


@dataclass
class Score:
    """A single-voice lyric-annotated melody."""

    title: str = ""
    notes: list[NoteEvent] = field(default_factory=list)
    tempo_bpm: float = 120.0

    def validate(self):
        if self.tempo_bpm <= 0:
            raise ScoreError("tempo must be positive")
        prev_end = None
        for n in self.notes:
            if prev_end is not None and n.offset_beats < prev_end:
                raise ScoreError(
                    f"overlapping notes at offset {n.offset_beats} (previous ends {prev_end})"
                )
            prev_end = n.offset_beats + n.duration.beats
        return self

    @property
    def total_beats(self) -> Fraction:
        if not self.notes:
            return Fraction(0)
        last = self.notes[-1]
        return last.offset_beats + last.duration.beats
