"""File-backed workspace shared by the CLI and the HTTP service.

Layout under one data directory:

    corpus/<id>.musicxml   ingested source files (bytes as uploaded)
    corpus/index.json      corpus records (id, filename, title, note count)
    models/rhythm.mfrf     serialized duration model
    models/melody.mfrf     serialized scale-degree model
    models/rhythm_eval.json / melody_eval.json   persisted evaluation reports
    projects/<id>.json     one song project per file

Everything is plain files so a workspace can be copied or diffed; writes go
through a temp file + rename so readers never observe partial state.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import forest
from .features import build_melody_dataset, build_rhythm_dataset, default_lexicon
from .forest import ForestParams, stratified_split
from .generate import GenerationParams
from .lexicon import Lexicon
from .musicxml import parse_musicxml
from .score import DurationClass, KeySignature, ScoreError, TimeSignature

TRAIN_FRACTION = 0.75


class WorkspaceError(Exception):
    """Data-level failure: bad corpus file, missing corpus, bad lyrics."""


class ModelsMissingError(Exception):
    """Raised when an operation needs trained models that do not exist."""


@dataclass
class CorpusRecord:
    id: str
    filename: str
    title: str
    note_count: int
    warnings: list[str] = field(default_factory=list)


def _atomic_write(path: Path, data: bytes):
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _write_json(path: Path, obj):
    _atomic_write(path, json.dumps(obj, indent=1, sort_keys=True).encode("utf-8"))


class Workspace:
    """All corpus/model/project state below one directory."""

    def __init__(self, root, lexicon: Lexicon | None = None):
        self.root = Path(root)
        self.corpus_dir = self.root / "corpus"
        self.models_dir = self.root / "models"
        self.projects_dir = self.root / "projects"
        for d in (self.corpus_dir, self.models_dir, self.projects_dir):
            d.mkdir(parents=True, exist_ok=True)
        self.lexicon = lexicon if lexicon is not None else default_lexicon()
        self._lock = threading.Lock()
        self._models_cache = None

    # -- corpus ----------------------------------------------------------

    def corpus_records(self) -> list[CorpusRecord]:
        index = self.corpus_dir / "index.json"
        if not index.exists():
            return []
        return [CorpusRecord(**r) for r in json.loads(index.read_text("utf-8"))]

    def _save_records(self, records: list[CorpusRecord]):
        _write_json(self.corpus_dir / "index.json", [asdict(r) for r in records])

    def add_corpus_file(self, filename: str, data: bytes) -> CorpusRecord:
        """Parse, validate and persist one corpus file."""
        try:
            score = parse_musicxml(data)
        except ScoreError as exc:
            raise WorkspaceError(f"{filename}: {exc}") from exc
        if not score.notes:
            raise WorkspaceError(f"{filename}: contains no sung notes")
        warnings = []
        melisma_count = sum(1 for n in score.notes if n.melisma)
        if melisma_count:
            warnings.append(
                f"{melisma_count} notes had no lyric and inherit the previous syllable"
            )
        record = CorpusRecord(
            id=uuid.uuid4().hex[:12],
            filename=filename,
            title=score.title or filename,
            note_count=len(score.notes),
            warnings=warnings,
        )
        with self._lock:
            (self.corpus_dir / f"{record.id}.musicxml").write_bytes(data)
            records = self.corpus_records()
            records.append(record)
            self._save_records(records)
        return record

    def ingest_directory(self, directory, skip_bad: bool = False):
        """Ingest every .musicxml/.xml/.mxl under a directory, sorted by name.

        With skip_bad, unparseable songs are dropped and reported instead of
        aborting the run.  Returns (records, skipped) where skipped is a list
        of (filename, reason).
        """
        directory = Path(directory)
        paths = sorted(
            p for p in directory.rglob("*")
            if p.suffix.lower() in (".musicxml", ".xml", ".mxl")
        )
        if not paths:
            raise WorkspaceError(f"no MusicXML files found under {directory}")
        records, skipped = [], []
        for path in paths:
            try:
                records.append(self.add_corpus_file(path.name, path.read_bytes()))
            except WorkspaceError as exc:
                if not skip_bad:
                    raise
                skipped.append((path.name, str(exc)))
        return records, skipped

    def corpus_scores(self):
        records = self.corpus_records()
        if not records:
            raise WorkspaceError("corpus is empty; ingest MusicXML files first")
        scores = []
        for record in records:
            data = (self.corpus_dir / f"{record.id}.musicxml").read_bytes()
            scores.append(parse_musicxml(data))
        return scores

    # -- models ----------------------------------------------------------

    @property
    def rhythm_model_path(self) -> Path:
        return self.models_dir / "rhythm.mfrf"

    @property
    def melody_model_path(self) -> Path:
        return self.models_dir / "melody.mfrf"

    def models_trained(self) -> bool:
        return self.rhythm_model_path.exists() and self.melody_model_path.exists()

    def train(self, params: ForestParams = ForestParams(), seed: int = 0):
        """Build both datasets, split 75/25, train, evaluate, persist.

        Returns (rhythm_report, melody_report, rhythm_model, melody_model).
        """
        scores = self.corpus_scores()
        results = []
        for build in (build_rhythm_dataset, build_melody_dataset):
            dataset = build(scores, self.lexicon)
            train_set, test_set = stratified_split(dataset, TRAIN_FRACTION, seed)
            model = forest.train_forest(train_set, params, seed)
            report = forest.evaluate(model, test_set) if test_set.rows else None
            results.append((model, report))
        (rhythm_model, rhythm_report), (melody_model, melody_report) = results
        with self._lock:
            _atomic_write(self.rhythm_model_path, forest.serialize_model(rhythm_model))
            _atomic_write(self.melody_model_path, forest.serialize_model(melody_model))
            _write_json(self.models_dir / "rhythm_eval.json", _report_json(rhythm_report))
            _write_json(self.models_dir / "melody_eval.json", _report_json(melody_report))
            self._models_cache = (rhythm_model, melody_model)
        return rhythm_report, melody_report, rhythm_model, melody_model

    def load_models(self):
        with self._lock:
            if self._models_cache is not None:
                return self._models_cache
            if not self.models_trained():
                raise ModelsMissingError(
                    "models are not trained yet; run training before generating"
                )
            models = (
                forest.deserialize_model(self.rhythm_model_path.read_bytes()),
                forest.deserialize_model(self.melody_model_path.read_bytes()),
            )
            self._models_cache = models
            return models

    def load_reports(self):
        out = []
        for name in ("rhythm_eval.json", "melody_eval.json"):
            path = self.models_dir / name
            if not path.exists():
                raise ModelsMissingError("no evaluation reports; train first")
            out.append(_report_from_json(json.loads(path.read_text("utf-8"))))
        return tuple(out)

    # -- generation ------------------------------------------------------

    def generate_to_directory(self, lyric_lines: list[str], params: GenerationParams,
                              out_dir) -> Path:
        """Variant MIDI+MusicXML files plus a manifest; returns the manifest path."""
        from .generate import generate_variants, variant_to_score
        from .midi import write_midi
        from .musicxml import write_musicxml

        annotated = [self.lexicon.annotate_line(line) for line in lyric_lines]
        rhythm_model, melody_model = self.load_models()
        all_variants = generate_variants(rhythm_model, melody_model, annotated, params)

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        manifest = ["line\tvariant\tseed\tmidi\tmusicxml\tparams"]
        params_text = (
            f"exploit_rhythm={params.exploit_rhythm}"
            f" exploit_melody={params.exploit_melody}"
            f" key_fifths={params.key.fifths} key_mode={params.key.mode}"
            f" time_sig={params.time_sig}"
            f" restrict={','.join(sorted(str(r) for r in params.rhythm_restriction)) or '-'}"
        )
        from .generate import variant_seed

        for line_index, variants in enumerate(all_variants):
            for v_index, variant in enumerate(variants):
                stem = f"line{line_index:02d}_var{v_index:02d}"
                score = variant_to_score(variant, annotated[line_index], params,
                                         title=stem)
                (out / f"{stem}.mid").write_bytes(write_midi(score))
                (out / f"{stem}.musicxml").write_bytes(write_musicxml(score))
                manifest.append("\t".join([
                    str(line_index), str(v_index),
                    str(variant_seed(params.seed, line_index, v_index)),
                    f"{stem}.mid", f"{stem}.musicxml", params_text,
                ]))
        manifest_path = out / "manifest.tsv"
        manifest_path.write_text("\n".join(manifest) + "\n", encoding="utf-8")
        return manifest_path


def _report_json(report):
    if report is None:
        return None
    return {
        "accuracy": report.accuracy,
        "labels": report.labels,
        "confusion": report.confusion,
        "per_class_error": {
            k: (None if v != v else v) for k, v in report.per_class_error.items()
        },
    }


def _report_from_json(obj):
    if obj is None:
        return None
    return forest.EvaluationReport(
        accuracy=obj["accuracy"],
        labels=obj["labels"],
        confusion=obj["confusion"],
        per_class_error={
            k: (float("nan") if v is None else v)
            for k, v in obj["per_class_error"].items()
        },
    )


# -- parameter parsing shared by CLI and service -----------------------------

_KEY_FIFTHS = {
    "C": 0, "G": 1, "D": 2, "A": 3, "E": 4, "B": 5, "F#": 6, "C#": 7,
    "F": -1, "BB": -2, "EB": -3, "AB": -4, "DB": -5, "GB": -6, "CB": -7,
}
_MINOR_FIFTHS = {
    "A": 0, "E": 1, "B": 2, "F#": 3, "C#": 4, "G#": 5, "D#": 6, "A#": 7,
    "D": -1, "G": -2, "C": -3, "F": -4, "BB": -5, "EB": -6, "AB": -7,
}


def parse_key(text: str) -> KeySignature:
    """Key names like C, F#, Bb, Am, C#m into fifths + mode."""
    name = text.strip()
    mode = "major"
    if name.endswith(("m", "M")) and len(name) > 1 and name[-1] == "m":
        mode = "minor"
        name = name[:-1]
    name = name.upper().replace("♭", "B").replace("♯", "#")
    table = _MINOR_FIFTHS if mode == "minor" else _KEY_FIFTHS
    if name not in table:
        raise ValueError(f"unknown key name {text!r}")
    return KeySignature(table[name], mode)


def parse_time_signature(text: str) -> TimeSignature:
    num, _, den = text.partition("/")
    if not num.isdigit() or not den.isdigit():
        raise ValueError(f"bad time signature {text!r}; expected e.g. 4/4")
    return TimeSignature(int(num), int(den))


def parse_restriction(text: str) -> frozenset:
    """Comma-separated duration class names into a restriction set."""
    if not text.strip():
        return frozenset()
    names = [t.strip() for t in text.split(",") if t.strip()]
    for name in names:
        DurationClass.from_string(name)  # validates
    return frozenset(names)


def read_lyrics_file(path) -> list[str]:
    """One lyric line per file line; blank lines separate sections (ignored)."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [line.strip() for line in text.splitlines()]
    lines = [line for line in lines if line]
    if not lines:
        raise WorkspaceError(f"lyrics file {path} has no lyric lines")
    return lines
