"""Deterministic synthetic corpus for training and pipeline tests.

Real lyric-annotated corpora are scarce, so tests train on generated songs
whose musical surface is a pure function of observable features:

* ``duration_rule(beat_strength, syllable_type)`` fixes every note length,
* ``degree_rule(previous_degree, vowel_strength)`` fixes every scale degree
  (``previous_degree=None`` at a song start; accidentals are always plain).

Both rules are exported so tests can assert that feature extraction
reproduces them with zero contradictions and that trained models recover
them exactly.  Randomness (seeded) only picks the lyrics; word choice walks
the rules through their input space.  Durations stay on the sixteenth grid,
which keeps beat strengths inside a closed five-value set in 4/4.
"""

from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

from .features import default_lexicon
from .generate import realize_pitch
from .lexicon import Lexicon
from .musicxml import write_musicxml
from .score import (
    DurationClass,
    KeySignature,
    LyricSyllable,
    Score,
    TimeSignature,
    make_note,
)

KEY = KeySignature(0, "major")
TIME_SIG = TimeSignature(4, 4)
VOCAL_RANGE = (57, 81)

# Duration by (beat strength level, syllable type); all values keep offsets
# on the sixteenth grid so the strength column never leaves this table.
_DURATION_TABLE = {
    (1.0, "single"): "quarter_0",
    (1.0, "begin"): "8th_0",
    (1.0, "middle"): "16th_0",
    (1.0, "end"): "half_0",
    (0.5, "single"): "8th_0",
    (0.5, "begin"): "quarter_0",
    (0.5, "middle"): "16th_0",
    (0.5, "end"): "quarter_1",
    (0.25, "single"): "8th_0",
    (0.25, "begin"): "8th_1",
    (0.25, "middle"): "16th_0",
    (0.25, "end"): "quarter_0",
    (0.125, "single"): "16th_0",
    (0.125, "begin"): "8th_0",
    (0.125, "middle"): "16th_0",
    (0.125, "end"): "8th_1",
    (0.0625, "single"): "16th_0",
    (0.0625, "begin"): "16th_0",
    (0.0625, "middle"): "16th_0",
    (0.0625, "end"): "8th_0",
}

# Next scale degree by (previous degree or None, vowel strength).  Every
# phrase opens on the tonic; afterwards each strength advances the degree by
# a fixed step (2, 1 or 4 around the seven degrees), so every degree is
# visited equally often whatever the lyrics.
_DEGREE_STEPS = {"primary": 2, "none": 1, "secondary": 4}
_OPENING_DEGREE = 1

# Lyric vocabulary; every word is in the bundled lexicon.  Song openers
# cycle through all three vowel strengths on the first syllable, and the
# pool carries enough secondary-stress syllables (compounds like sunshine,
# moonlight, yesterday) that no stress level is starved of training rows.
OPENING_WORDS = ("love", "the", "understand", "night", "a", "afternoon",
                 "rain", "of", "overnight")
VOCABULARY = (
    "love", "night", "day", "heart", "you", "i", "dream", "light", "rain",
    "sun", "time", "we", "go", "stay", "run", "fly", "sky", "star", "home",
    "road", "the", "a", "of", "and", "miss", "look", "back", "morning",
    "away", "tonight", "shadow", "river", "thunder", "golden", "lonely",
    "story", "looking", "remember", "forever", "together", "memory",
    "sunshine", "sunshine", "rainbow", "rainbow", "moonlight", "moonlight",
    "midnight", "midnight", "yesterday", "yesterday", "goodbye", "goodbye",
    "someday", "someday", "outside", "outside", "inside", "inside",
    "somewhere", "anywhere", "everywhere", "anyone", "everyone", "nobody",
    "somebody", "someone", "radio", "tomorrow", "window", "understand",
    "afternoon", "overnight", "beautiful",
)


def duration_rule(beat_strength: float, syllable_type: str) -> DurationClass:
    """Ground-truth duration for a metrical position and syllable role."""
    return DurationClass.from_string(_DURATION_TABLE[(beat_strength, syllable_type)])


def degree_rule(previous_degree: int | None, vowel_strength: str) -> int:
    """Ground-truth scale degree following a previous degree."""
    if previous_degree is None:
        return _OPENING_DEGREE
    return (previous_degree - 1 + _DEGREE_STEPS[vowel_strength]) % 7 + 1


def synthesize_song(song_index: int, seed: int, lexicon: Lexicon | None = None) -> Score:
    """One deterministic song; lyrics drawn from the seeded vocabulary walk."""
    from .meter import beat_strength

    if lexicon is None:
        lexicon = default_lexicon()
    rng = random.Random((seed * 7919 + song_index) * 104729)

    lines = []
    n_lines = rng.randint(10, 14)
    for line_index in range(n_lines):
        n_words = rng.randint(5, 8)
        words = []
        for w in range(n_words):
            if line_index == 0 and w == 0:
                words.append(OPENING_WORDS[song_index % len(OPENING_WORDS)])
            else:
                words.append(rng.choice(VOCABULARY))
        lines.append(" ".join(words))

    syllables = []
    for line in lines:
        syllables.extend(lexicon.annotate_line(line))

    notes = []
    offset = Fraction(0)
    prev_degree = None
    prev_pitch = None
    for syl in syllables:
        in_measure = offset % TIME_SIG.measure_beats
        strength = beat_strength(in_measure, TIME_SIG)
        duration = duration_rule(strength, syl.syllabic_type)
        degree = degree_rule(prev_degree, syl.vowel_strength)
        pitch = realize_pitch(degree, "none", KEY, prev_pitch, VOCAL_RANGE)
        lyric = LyricSyllable(
            text=syl.text, syllabic_type=syl.syllabic_type,
            word_text=syl.word.text, syllable_number=syl.syllable_number,
        )
        notes.append(make_note(
            offset_beats=offset, duration=duration, midi_pitch=pitch,
            syllable=lyric, key=KEY, time_sig=TIME_SIG,
        ))
        offset += duration.beats
        prev_degree = degree
        prev_pitch = pitch

    return Score(title=f"Synthetic Song {song_index + 1:03d}", notes=notes).validate()


def make_synthetic_corpus(songs: int, seed: int, out_dir) -> list[Path]:
    """Write `songs` MusicXML files into `out_dir`; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lexicon = default_lexicon()
    paths = []
    for i in range(songs):
        score = synthesize_song(i, seed, lexicon)
        path = out / f"song_{i:03d}.musicxml"
        path.write_bytes(write_musicxml(score))
        paths.append(path)
    return paths
