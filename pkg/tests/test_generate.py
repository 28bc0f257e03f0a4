"""Explore/exploit sampling, restriction, pitch realization, line generation."""

import random
from fractions import Fraction

import pytest

from songsmith.features import lyrics_to_rows
from songsmith.forest import ClassDistribution, ForestParams, train_forest
from songsmith.generate import (
    GenerationContext,
    GenerationParams,
    RestrictionError,
    assemble_song,
    generate_line,
    generate_variants,
    realize_pitch,
    restrict,
    sample_exploit,
    variant_to_score,
)
from songsmith.midi import read_midi, write_midi
from songsmith.score import KeySignature
from songsmith.synthetic import KEY, TIME_SIG, synthesize_song
from songsmith.features import build_melody_dataset, build_rhythm_dataset, default_lexicon


def dist(**probs):
    return ClassDistribution(probabilities=probs, labels=tuple(sorted(probs)))


class FixedRandom:
    """random.Random stand-in replaying a fixed uniform sequence."""

    def __init__(self, values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


# -- sample_exploit -----------------------------------------------------------


def test_degenerate_distribution():
    for k in (1, 4, 100):
        assert sample_exploit(dist(A=1.0), k, random.Random(0)) == "A"


def test_tie_broken_by_original_probability():
    # Draws B, A, A, B from {A:0.5, B:0.3, C:0.2}: 2-2 tie goes to A.
    d = dist(A=0.5, B=0.3, C=0.2)
    rng = FixedRandom([0.6, 0.1, 0.2, 0.7])
    assert sample_exploit(d, 4, rng) == "A"


def test_remaining_tie_broken_by_label_order():
    d = dist(A=0.5, B=0.5)
    rng = FixedRandom([0.25, 0.75])  # one draw each
    assert sample_exploit(d, 2, rng) == "A"


def test_exploit_biases_toward_argmax():
    d = dist(A=0.5, B=0.3, C=0.2)
    trials = 10_000
    hits = {}
    for k in (1, 9):
        rng = random.Random(42)
        hits[k] = sum(sample_exploit(d, k, rng) == "A" for _ in range(trials))
    assert hits[9] > hits[1]
    assert abs(hits[1] / trials - 0.5) < 0.02


# -- restrict -----------------------------------------------------------------


def test_restrict_renormalizes():
    d = dist(whole_0=0.2, quarter_0=0.8)
    out = restrict(d, {"whole_0"})
    assert out.probabilities == {"quarter_0": 1.0}


def test_restrict_identity_when_empty():
    d = dist(A=0.6, B=0.4)
    assert restrict(d, set()).probabilities == d.probabilities


def test_restrict_full_support_errors():
    d = dist(A=0.6, B=0.4)
    with pytest.raises(RestrictionError, match="relax"):
        restrict(d, {"A", "B"})


# -- realize_pitch ------------------------------------------------------------


def test_realize_pitch_examples():
    c = KeySignature(0)
    assert realize_pitch(1, "none", c, 64, (57, 81)) == 60
    assert realize_pitch(5, "none", c, 60, (57, 81)) == 67
    assert realize_pitch(1, "none", c, None, (57, 81)) == 72


def test_realize_pitch_tie_resolves_downward():
    c = KeySignature(0)
    # prev exactly between C4 (60) and C5 (72)
    assert realize_pitch(1, "none", c, 66, (57, 81)) == 60


def test_realized_pitches_stay_in_range():
    rng = random.Random(0)
    for _ in range(500):
        key = KeySignature(rng.randint(-5, 6))
        low = rng.randint(40, 60)
        high = low + rng.randint(12, 30)
        prev = rng.choice([None, rng.randint(30, 90)])
        p = realize_pitch(rng.randint(1, 7),
                          rng.choice(["flat", "none", "sharp"]),
                          key, prev, (low, high))
        assert low <= p <= high


# -- generation against trained models ---------------------------------------


@pytest.fixture(scope="module")
def trained_models():
    corpus = [synthesize_song(i, 5) for i in range(6)]
    params = ForestParams(n_trees=25)
    rhythm = train_forest(build_rhythm_dataset(corpus), params, seed=5)
    melody = train_forest(build_melody_dataset(corpus), params, seed=5)
    return rhythm, melody


@pytest.fixture(scope="module")
def annotated_lines():
    lex = default_lexicon()
    return [lex.annotate_line("love the sunshine tonight"),
            lex.annotate_line("rainbow in the morning")]


def test_one_note_per_syllable(trained_models, annotated_lines):
    rhythm, melody = trained_models
    params = GenerationParams(melody_count=3, key=KEY, time_sig=TIME_SIG, seed=1)
    per_line = generate_variants(rhythm, melody, annotated_lines, params)
    assert len(per_line) == len(annotated_lines)
    for line_variants, syllables in zip(per_line, annotated_lines):
        assert len(line_variants) == 3
        for v in line_variants:
            assert len(v.notes) == len(syllables)


def test_context_history_tracks_last_notes(trained_models, annotated_lines):
    rhythm, melody = trained_models
    params = GenerationParams(key=KEY, time_sig=TIME_SIG, seed=2)
    rows = lyrics_to_rows(annotated_lines, params.key, params.time_sig)
    ctx = GenerationContext(key=params.key, time_sig=params.time_sig)
    variant = generate_line(rhythm, melody, rows[0], params, ctx,
                            random.Random(0), line_index=0)
    expected = [(str(n.scale_degree), n.accidental, str(n.duration))
                for n in variant.notes][-5:]
    assert ctx.history == expected
    total = sum((n.duration.beats for n in variant.notes), Fraction(0))
    assert ctx.offset_beats == total


def test_same_seed_identical_variants(trained_models, annotated_lines):
    rhythm, melody = trained_models
    params = GenerationParams(melody_count=2, key=KEY, time_sig=TIME_SIG, seed=3)
    a = generate_variants(rhythm, melody, annotated_lines, params)
    b = generate_variants(rhythm, melody, annotated_lines, params)
    assert a == b
    other = GenerationParams(melody_count=2, key=KEY, time_sig=TIME_SIG, seed=4)
    assert generate_variants(rhythm, melody, annotated_lines, other) != a


def test_restriction_never_appears(trained_models, annotated_lines):
    rhythm, melody = trained_models
    banned = frozenset({"whole_0", "32nd_0", "32nd_1"})
    params = GenerationParams(melody_count=60, rhythm_restriction=banned,
                              key=KEY, time_sig=TIME_SIG, seed=4)
    per_line = generate_variants(rhythm, melody, annotated_lines, params)
    produced = 0
    for variants in per_line:
        for v in variants:
            for note in v.notes:
                assert str(note.duration) not in banned
                produced += 1
    assert produced >= 500


def test_full_restriction_rejected_at_params():
    from songsmith.score import ALL_DURATION_CLASSES

    with pytest.raises(RestrictionError):
        GenerationParams(rhythm_restriction=frozenset(
            str(d) for d in ALL_DURATION_CLASSES))


def test_assemble_song_measure_alignment(trained_models, annotated_lines):
    rhythm, melody = trained_models
    params = GenerationParams(melody_count=1, key=KEY, time_sig=TIME_SIG, seed=6)
    per_line = generate_variants(rhythm, melody, annotated_lines, params)
    chosen = [per_line[0][0], per_line[1][0]]
    score = assemble_song(chosen, annotated_lines, params)
    line1_beats = sum((n.duration.beats for n in chosen[0].notes), Fraction(0))
    measures = -(-line1_beats // 4)
    second_start = measures * 4
    line2_first = score.notes[len(chosen[0].notes)]
    assert line2_first.offset_beats == second_start


def test_assembled_midi_equals_shifted_concatenation(trained_models, annotated_lines):
    rhythm, melody = trained_models
    params = GenerationParams(melody_count=1, key=KEY, time_sig=TIME_SIG, seed=7)
    per_line = generate_variants(rhythm, melody, annotated_lines, params)
    chosen = [per_line[0][0], per_line[1][0]]
    assembled = assemble_song(chosen, annotated_lines, params)
    combined = read_midi(write_midi(assembled))

    expected = []
    cursor = Fraction(0)
    for variant, syllables in zip(chosen, annotated_lines):
        score = variant_to_score(variant, syllables, params)
        shift = int(cursor * 480)
        for pitch, onset, duration in read_midi(write_midi(score)):
            expected.append((pitch, onset + shift, duration))
        beats = sum((n.duration.beats for n in variant.notes), Fraction(0))
        cursor = -(-(cursor + beats) // 4) * 4
    expected.sort(key=lambda e: (e[1], e[0]))
    assert combined == expected


def test_assemble_requires_all_selections(annotated_lines):
    params = GenerationParams(key=KEY, time_sig=TIME_SIG)
    with pytest.raises(ValueError):
        assemble_song([None, None], annotated_lines, params)


def test_generation_in_other_meters_and_keys(trained_models, annotated_lines):
    # Unseen time-signature / key categories route gracefully; output stays
    # valid and in range.
    from songsmith.score import TimeSignature as TS

    rhythm, melody = trained_models
    params = GenerationParams(melody_count=2, key=KeySignature(2, "major"),
                              time_sig=TS(3, 4), seed=8)
    per_line = generate_variants(rhythm, melody, annotated_lines, params)
    for variants, syllables in zip(per_line, annotated_lines):
        for v in variants:
            assert len(v.notes) == len(syllables)
            for note in v.notes:
                assert 57 <= note.midi_pitch <= 81
    score = assemble_song([per_line[0][0], per_line[1][1]], annotated_lines, params)
    assert score.notes[0].time_sig == TS(3, 4)
    # second line starts on a 3/4 measure boundary
    boundary = score.notes[len(per_line[0][0].notes)].offset_beats
    assert boundary % 3 == 0
