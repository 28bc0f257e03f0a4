"""Feature rows, dataset construction, history consistency, TSV round trip."""

import random
from fractions import Fraction

import pytest

from songsmith.features import (
    ALL_COLUMNS,
    build_melody_dataset,
    build_rhythm_dataset,
    dataset_from_tsv,
    dataset_to_tsv,
    extract_rows,
    lyrics_to_rows,
    melody_label,
)
from songsmith.score import (
    DurationClass,
    KeySignature,
    LyricSyllable,
    Score,
    TimeSignature,
    make_note,
)
from songsmith.synthetic import synthesize_song

from conftest import random_score


def _simple_score(pitches, key=KeySignature(0)):
    ts = TimeSignature(4, 4)
    syl = LyricSyllable("la", "single", "la")
    notes = []
    offset = Fraction(0)
    for p in pitches:
        notes.append(make_note(offset, DurationClass("quarter"), p, syl, key, ts))
        offset += 1
    return Score(notes=notes).validate()


def test_scale_degree_classification_in_rows():
    rows = extract_rows(_simple_score([64, 63]))
    assert rows[0].values["scale_degree"] == "3"
    assert rows[0].values["accidental"] == "none"
    assert rows[1].values["scale_degree"] == "3"
    assert rows[1].values["accidental"] == "flat"


def test_first_note_history_all_none():
    rows = extract_rows(_simple_score([60, 62, 64]))
    first = rows[0].values
    assert first["first_measure"] is True
    for i in range(1, 6):
        assert first[f"prev_scale_degree_{i}"] == "NONE"
        assert first[f"prev_accidental_{i}"] == "NONE"
        assert first[f"prev_duration_{i}"] == "NONE"


def test_history_chain_and_song_isolation():
    song = synthesize_song(0, 3)
    rows = extract_rows(song)
    for n in range(1, len(rows)):
        assert rows[n].values["prev_scale_degree_1"] == rows[n - 1].values["scale_degree"]
        assert rows[n].values["prev_duration_1"] == rows[n - 1].values["duration_class"]
    # Histories never cross songs: first row of a second extraction is fresh.
    rows_b = extract_rows(synthesize_song(1, 3))
    assert rows_b[0].values["prev_scale_degree_1"] == "NONE"


def test_duration_beats_matches_class():
    rng = random.Random(5)
    rows = extract_rows(random_score(rng, 30))
    for r in rows:
        cls = DurationClass.from_string(r.values["duration_class"])
        assert r.values["duration_beats"] == float(cls.beats)


def test_extraction_is_deterministic():
    song = synthesize_song(2, 9)
    a = [r.values for r in extract_rows(song)]
    b = [r.values for r in extract_rows(song)]
    assert a == b


def test_beat_strength_factor_is_string_form():
    rows = extract_rows(synthesize_song(0, 3))
    for r in rows:
        assert r.values["beat_strength_factor"] == str(r.values["beat_strength"])


def test_rhythm_dataset_hides_current_note_outcome():
    corpus = [synthesize_song(i, 4) for i in range(2)]
    ds = build_rhythm_dataset(corpus)
    names = ds.feature_names
    for hidden in ("duration_class", "duration_beats", "scale_degree", "accidental"):
        assert hidden not in names
    for i in range(1, 6):
        assert f"prev_duration_{i}" in names
    assert ds.target == "duration_class"
    assert len(ds.rows) == sum(len(s.notes) for s in corpus)


def test_melody_dataset_keeps_duration_predictors():
    corpus = [synthesize_song(i, 4) for i in range(2)]
    ds = build_melody_dataset(corpus)
    names = ds.feature_names
    assert "duration_class" in names and "duration_beats" in names
    assert "scale_degree" not in names and "accidental" not in names
    assert all("_" in label for label in ds.class_labels)
    assert ds.rows[0][ds.target] in ds.class_labels


def test_melody_label_format():
    assert melody_label(1, "none") == "1_none"
    assert melody_label(4, "sharp") == "4_sharp"
    # vocabulary bound: 7 degrees x 3 accidentals
    labels = {melody_label(d, a) for d in range(1, 8)
              for a in ("flat", "none", "sharp")}
    assert len(labels) == 21


def test_single_song_row_count():
    song = synthesize_song(0, 5)
    ds = build_rhythm_dataset([song])
    assert len(ds.rows) == len(song.notes)


def test_empty_corpus_rejected():
    with pytest.raises(ValueError):
        build_rhythm_dataset([])
    with pytest.raises(ValueError):
        build_melody_dataset([])


def test_lyrics_to_rows_partial(lexicon):
    annotated = [lexicon.annotate_line("I miss you"),
                 lexicon.annotate_line("looking back")]
    lines = lyrics_to_rows(annotated, KeySignature(0), TimeSignature(4, 4))
    assert len(lines) == 2 and len(lines[0]) == 3
    first = lines[0][0]
    assert first.first_measure is True
    assert lines[1][0].first_measure is False
    assert first.offset_beats is None and first.offset_in_measure is None
    assert first.syllable_type == "single"
    # lyric features match the annotation exactly
    for row, syl in zip(lines[0], annotated[0]):
        assert row.word_frequency == syl.word.frequency
        assert row.word_rarity == syl.word.rarity
        assert row.vowel_strength == syl.vowel_strength


def test_schema_covers_every_declared_column():
    names = [n for n, _ in ALL_COLUMNS]
    assert len(names) == len(set(names)) == 34
    rows = extract_rows(synthesize_song(0, 2))
    assert set(rows[0].values) == set(names)


def test_dataset_tsv_roundtrip():
    corpus = [synthesize_song(i, 6) for i in range(2)]
    ds = build_rhythm_dataset(corpus)
    text = dataset_to_tsv(ds)
    assert text.startswith("# songsmith-dataset-v1")
    back = dataset_from_tsv(text)
    assert back.target == ds.target
    assert back.schema == ds.schema
    assert len(back.rows) == len(ds.rows)
    for a, b in zip(ds.rows, back.rows):
        for name, _ in ds.schema:
            assert a[name] == b[name], name


def test_tsv_rejects_foreign_text():
    with pytest.raises(ValueError):
        dataset_from_tsv("a,b,c\n1,2,3\n")
