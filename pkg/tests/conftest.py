"""Shared fixtures: lexicon, random score generator, small corpora."""

import random
from fractions import Fraction

import pytest

from songsmith.features import default_lexicon
from songsmith.score import (
    DurationClass,
    KeySignature,
    LyricSyllable,
    Score,
    TimeSignature,
    make_note,
)

# Classes writable at divisions=8 (everything but the dotted 32nd).
WRITABLE_CLASSES = [
    DurationClass(base, dots)
    for base in ("whole", "half", "quarter", "8th", "16th", "32nd")
    for dots in (0, 1)
    if not (base == "32nd" and dots == 1)
]

WORDS = ["love", "night", "rain", "sun", "dream", "home", "star", "light"]
TWO_SYLLABLE = [("sun", "shine", "sunshine"), ("rain", "bow", "rainbow"),
                ("mor", "ning", "morning"), ("sto", "ry", "story")]


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


def random_score(rng: random.Random, n_notes: int = 20,
                 allow_melisma: bool = False) -> Score:
    """A valid single-voice score with random rhythm, pitches and lyrics."""
    key = KeySignature(rng.randint(-5, 6), rng.choice(["major", "minor"]))
    time_sig = rng.choice([TimeSignature(2, 4), TimeSignature(3, 4),
                           TimeSignature(4, 4), TimeSignature(6, 8)])
    notes = []
    offset = Fraction(0)
    pending_word = []  # queued (text, syllabic, word, number) for multi-syllable words
    while len(notes) < n_notes:
        if rng.random() < 0.15:
            offset += rng.choice([Fraction(1, 2), Fraction(1), Fraction(2)])  # rest gap
        duration = rng.choice(WRITABLE_CLASSES[2:])  # skip whole notes: shorter scores
        if pending_word:
            text, syllabic, word, number = pending_word.pop(0)
            melisma = False
        elif allow_melisma and notes and rng.random() < 0.15:
            text = syllabic = word = number = None
            melisma = True
        elif rng.random() < 0.3 and len(notes) < n_notes - 1:
            begin, end, word = rng.choice(TWO_SYLLABLE)
            text, syllabic, number = begin, "begin", 1
            pending_word.append((end, "end", word, 2))
            melisma = False
        else:
            word = rng.choice(WORDS)
            text, syllabic, number = word, "single", 1
            melisma = False
        if melisma:
            syllable = notes[-1].syllable
        else:
            syllable = LyricSyllable(text, syllabic, word, number)
        notes.append(make_note(
            offset_beats=offset, duration=duration,
            midi_pitch=rng.randint(50, 84), syllable=syllable,
            key=key, time_sig=time_sig, melisma=melisma,
        ))
        offset += duration.beats
    return Score(title="Random Score", notes=notes).validate()
