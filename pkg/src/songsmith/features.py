"""Per-note feature rows and the two training datasets built from them.

Every sung note becomes one row combining positional features (offsets,
beat strength, measure flags), the note's own duration and scale degree,
lyric-derived word features, and the degree/accidental/duration of the five
preceding notes of the same song (``NONE`` before the song starts).

The rhythm dataset targets the duration class and hides everything decided
at generation time after the current syllable is reached but before its
duration exists: the current duration (class and beats) and the current
scale degree and accidental (the melody head runs second and may see the
chosen duration, so the melody dataset keeps duration as a predictor).

Datasets can be round-tripped through a tab-separated text table with an
embedded schema version for offline inspection.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from fractions import Fraction

from .lexicon import Lexicon
from .meter import beat_strength, is_offbeat
from .score import KeySignature, Score, TimeSignature

NONE_LABEL = "NONE"
HISTORY = 5

DATASET_SCHEMA_VERSION = "songsmith-dataset-v1"

# (name, kind) in canonical order; kind is "num" or "cat".
BASE_COLUMNS = [
    ("first_measure", "cat"),
    ("key_fifths", "num"),
    ("key_mode", "cat"),
    ("time_sig", "cat"),
    ("offset_beats", "num"),
    ("offset_in_measure", "num"),
    ("duration_beats", "num"),
    ("duration_class", "cat"),
    ("scale_degree", "cat"),
    ("accidental", "cat"),
    ("beat_strength", "num"),
    ("beat_strength_factor", "cat"),
    ("offbeat", "cat"),
    ("syllable_type", "cat"),
    ("syllable_number", "num"),
    ("word_frequency", "num"),
    ("word_rarity", "num"),
    ("vowel_strength", "cat"),
    ("vowel_count", "num"),
]
HISTORY_COLUMNS = [
    (f"prev_{what}_{i}", "cat")
    for i in range(1, HISTORY + 1)
    for what in ("scale_degree", "accidental", "duration")
]
ALL_COLUMNS = BASE_COLUMNS + HISTORY_COLUMNS
COLUMN_KINDS = dict(ALL_COLUMNS)

RHYTHM_TARGET = "duration_class"
MELODY_TARGET = "melody_label"

# Hidden from the rhythm model: undecided when a duration is being chosen.
_RHYTHM_EXCLUDED = {"duration_class", "duration_beats", "scale_degree", "accidental"}
# Hidden from the melody model: the two halves of its own target.
_MELODY_EXCLUDED = {"scale_degree", "accidental"}


def melody_label(scale_degree: int, accidental: str) -> str:
    return f"{scale_degree}_{accidental}"


def split_melody_label(label: str) -> tuple[int, str]:
    degree, _, accidental = label.partition("_")
    return int(degree), accidental


@dataclass
class FeatureRow:
    """One note's feature vector; values keyed by column name."""

    values: dict

    def __getitem__(self, name):
        return self.values[name]


@dataclass
class Dataset:
    """Rows plus the schema and target needed to train one model."""

    schema: list[tuple[str, str]]
    rows: list[dict]
    target: str
    class_labels: list[str]

    @property
    def feature_names(self) -> list[str]:
        return [name for name, _ in self.schema]


def extract_rows(score: Score, lexicon: Lexicon | None = None) -> list[FeatureRow]:
    """Feature rows for every note of one score, in order."""
    if lexicon is None:
        lexicon = default_lexicon()
    rows: list[FeatureRow] = []
    history: list[tuple[str, str, str]] = []  # (degree, accidental, duration)
    for note in score.notes:
        strength = beat_strength(note.offset_in_measure, note.time_sig)
        word = lexicon.word_info(note.syllable.word_text)
        stress = word.stress_pattern
        idx = min(note.syllable.syllable_number, len(stress)) - 1
        values = {
            "first_measure": note.measure_index == 0,
            "key_fifths": note.key.fifths,
            "key_mode": note.key.mode,
            "time_sig": str(note.time_sig),
            "offset_beats": float(note.offset_beats),
            "offset_in_measure": float(note.offset_in_measure),
            "duration_beats": float(note.duration.beats),
            "duration_class": str(note.duration),
            "scale_degree": str(note.scale_degree),
            "accidental": note.accidental,
            "beat_strength": strength,
            "beat_strength_factor": str(strength),
            "offbeat": is_offbeat(note.offset_in_measure, note.time_sig),
            "syllable_type": note.syllable.syllabic_type,
            "syllable_number": note.syllable.syllable_number,
            "word_frequency": word.frequency,
            "word_rarity": word.rarity,
            "vowel_strength": stress[idx],
            "vowel_count": word.vowel_count,
        }
        _fill_history(values, history)
        rows.append(FeatureRow(values))
        history.append((str(note.scale_degree), note.accidental, str(note.duration)))
    return rows


def _fill_history(values: dict, history: list):
    for i in range(1, HISTORY + 1):
        if i <= len(history):
            degree, accidental, duration = history[-i]
        else:
            degree = accidental = duration = NONE_LABEL
        values[f"prev_scale_degree_{i}"] = degree
        values[f"prev_accidental_{i}"] = accidental
        values[f"prev_duration_{i}"] = duration


def _corpus_rows(corpus: list[Score], lexicon: Lexicon | None) -> list[FeatureRow]:
    if not corpus:
        raise ValueError("cannot build a dataset from an empty corpus")
    rows = []
    for score in corpus:
        rows.extend(extract_rows(score, lexicon))
    return rows


def build_rhythm_dataset(corpus: list[Score], lexicon: Lexicon | None = None) -> Dataset:
    """Dataset predicting the duration class of the current note."""
    rows = _corpus_rows(corpus, lexicon)
    schema = [(n, k) for n, k in ALL_COLUMNS if n not in _RHYTHM_EXCLUDED]
    data = [
        {**{n: r.values[n] for n, _ in schema}, RHYTHM_TARGET: r.values["duration_class"]}
        for r in rows
    ]
    labels = sorted({d[RHYTHM_TARGET] for d in data}, key=_duration_label_key)
    return Dataset(schema=schema, rows=data, target=RHYTHM_TARGET, class_labels=labels)


def build_melody_dataset(corpus: list[Score], lexicon: Lexicon | None = None) -> Dataset:
    """Dataset predicting the joint `<degree>_<accidental>` label."""
    rows = _corpus_rows(corpus, lexicon)
    schema = [(n, k) for n, k in ALL_COLUMNS if n not in _MELODY_EXCLUDED]
    data = []
    for r in rows:
        row = {n: r.values[n] for n, _ in schema}
        row[MELODY_TARGET] = melody_label(
            int(r.values["scale_degree"]), r.values["accidental"]
        )
        data.append(row)
    labels = sorted({d[MELODY_TARGET] for d in data}, key=_melody_label_key)
    return Dataset(schema=schema, rows=data, target=MELODY_TARGET, class_labels=labels)


def _duration_label_key(label: str):
    from .score import DurationClass, duration_sort_key

    return duration_sort_key(DurationClass.from_string(label))


def _melody_label_key(label: str):
    degree, accidental = split_melody_label(label)
    return (degree, ("flat", "none", "sharp").index(accidental))


# -- generation-side rows --------------------------------------------------


@dataclass
class PartialRow:
    """Lyric features of one syllable; musical fields filled during generation."""

    syllable_text: str
    syllable_type: str
    syllable_number: int
    word_frequency: int
    word_rarity: float
    vowel_strength: str
    vowel_count: int
    first_measure: bool
    key: KeySignature
    time_sig: TimeSignature
    offset_beats: Fraction | None = None
    offset_in_measure: Fraction | None = None
    values: dict = field(default_factory=dict)


def lyrics_to_rows(annotated_lines, key: KeySignature, time_sig: TimeSignature,
                   first_line_is_song_start: bool = True) -> list[list[PartialRow]]:
    """Partial feature rows per annotated lyric line.

    Offsets, beat strength and history stay unset; generation fills them as
    each note is decided.
    """
    if not annotated_lines:
        raise ValueError("no lyric lines to convert")
    out = []
    for line_index, syllables in enumerate(annotated_lines):
        line_rows = []
        for syl in syllables:
            line_rows.append(PartialRow(
                syllable_text=syl.text,
                syllable_type=syl.syllabic_type,
                syllable_number=syl.syllable_number,
                word_frequency=syl.word.frequency,
                word_rarity=syl.word.rarity,
                vowel_strength=syl.vowel_strength,
                vowel_count=syl.word.vowel_count,
                first_measure=first_line_is_song_start and line_index == 0,
                key=key,
                time_sig=time_sig,
            ))
        out.append(line_rows)
    return out


def complete_row(partial: PartialRow, offset_beats: Fraction,
                 offset_in_measure: Fraction, first_measure: bool,
                 history: list) -> dict:
    """Fill a partial row's positional and history fields into a full row."""
    strength = beat_strength(offset_in_measure, partial.time_sig)
    values = {
        "first_measure": first_measure,
        "key_fifths": partial.key.fifths,
        "key_mode": partial.key.mode,
        "time_sig": str(partial.time_sig),
        "offset_beats": float(offset_beats),
        "offset_in_measure": float(offset_in_measure),
        "beat_strength": strength,
        "beat_strength_factor": str(strength),
        "offbeat": is_offbeat(offset_in_measure, partial.time_sig),
        "syllable_type": partial.syllable_type,
        "syllable_number": partial.syllable_number,
        "word_frequency": partial.word_frequency,
        "word_rarity": partial.word_rarity,
        "vowel_strength": partial.vowel_strength,
        "vowel_count": partial.vowel_count,
    }
    _fill_history(values, history)
    partial.offset_beats = offset_beats
    partial.offset_in_measure = offset_in_measure
    partial.values = values
    return values


_DEFAULT_LEXICON = None


def default_lexicon() -> Lexicon:
    """The bundled tables, loaded once per process."""
    global _DEFAULT_LEXICON
    if _DEFAULT_LEXICON is None:
        _DEFAULT_LEXICON = Lexicon.load()
    return _DEFAULT_LEXICON


# -- delimited text round-trip ----------------------------------------------


def dataset_to_tsv(dataset: Dataset) -> str:
    """Tab-separated dump with an embedded schema version line."""
    buf = io.StringIO()
    kinds = ",".join(f"{n}:{k}" for n, k in dataset.schema)
    buf.write(f"# {DATASET_SCHEMA_VERSION}\ttarget={dataset.target}\t{kinds}\n")
    names = dataset.feature_names + [dataset.target]
    buf.write("\t".join(names) + "\n")
    for row in dataset.rows:
        buf.write("\t".join(_cell(row[n]) for n in names) + "\n")
    return buf.getvalue()


def dataset_from_tsv(text: str) -> Dataset:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(f"# {DATASET_SCHEMA_VERSION}"):
        raise ValueError(f"not a {DATASET_SCHEMA_VERSION} table")
    _, target_part, kinds_part = lines[0].split("\t")
    target = target_part.removeprefix("target=")
    schema = []
    for item in kinds_part.split(","):
        name, _, kind = item.rpartition(":")
        schema.append((name, kind))
    kind_of = dict(schema)
    names = lines[1].split("\t")
    rows = []
    for line in lines[2:]:
        if not line:
            continue
        cells = line.split("\t")
        row = {}
        for name, cell in zip(names, cells):
            row[name] = _uncell(cell, kind_of.get(name, "cat"))
        rows.append(row)
    labels = sorted({r[target] for r in rows})
    return Dataset(schema=schema, rows=rows, target=target, class_labels=labels)


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _uncell(cell: str, kind: str):
    if kind == "num":
        value = float(cell)
        return int(value) if value.is_integer() else value
    if cell in ("true", "false"):
        return cell == "true"
    return cell
