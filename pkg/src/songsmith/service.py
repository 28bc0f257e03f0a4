"""HTTP studio service: corpora, training, projects, variants, exports.

A thin FastAPI layer over :class:`Workspace` and :class:`ProjectStore`.
Reads are concurrent; per-project writes serialize behind one lock map;
training runs one job at a time (a second POST /train gets 409) and swaps
models atomically, so readers always see either the old or the new pair.
The UI bundle, when given, is served statically under ``/ui``.
"""

from __future__ import annotations

import hashlib
import threading
from fractions import Fraction

from fastapi import FastAPI, File, Response, UploadFile
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import forest
from .forest import ForestParams
from .generate import RestrictionError
from .midi import write_midi
from .musicxml import write_musicxml
from .projects import (
    ProjectError,
    ProjectStore,
    SelectionsIncompleteError,
    SongProject,
    params_from_json,
)
from .workspace import ModelsMissingError, Workspace, WorkspaceError


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def _report_payload(report):
    if report is None:
        return None
    return {
        "accuracy": report.accuracy,
        "labels": report.labels,
        "confusion": report.confusion,
        "per_class_error": {
            label: (None if err != err else err)
            for label, err in report.per_class_error.items()
        },
    }


def _variant_payload(project: SongProject, line: int, index: int) -> dict:
    variant = project.variants[line][index]
    notes = []
    beat = Fraction(0)
    for i, note in enumerate(variant.notes):
        notes.append({
            "midi_pitch": note.midi_pitch,
            "scale_degree": note.scale_degree,
            "accidental": note.accidental,
            "duration_class": str(note.duration),
            "start_beat": float(beat),
            "duration_beats": float(note.duration.beats),
        })
        beat += note.duration.beats
    return {
        "line_index": line,
        "variant_index": index,
        "notes": notes,
        "total_beats": float(beat),
        "selected": project.selections.get(line) == index,
    }


def _project_payload(project: SongProject, with_variants: bool = True) -> dict:
    payload = {
        "id": project.id,
        "title": project.title,
        "lyric_lines": project.lyric_lines,
        "params": {
            "exploit_rhythm": project.params.exploit_rhythm,
            "exploit_melody": project.params.exploit_melody,
            "melody_count": project.params.melody_count,
            "rhythm_restriction": sorted(str(r) for r in project.params.rhythm_restriction),
            "key_fifths": project.params.key.fifths,
            "key_mode": project.params.key.mode,
            "time_sig": str(project.params.time_sig),
            "tempo_bpm": project.params.tempo_bpm,
            "seed": project.params.seed,
        },
        "generation": project.generation,
        "selections": {str(k): v for k, v in project.selections.items()},
        "missing_selections": project.missing_selections(),
        "created_at": project.created_at,
        "updated_at": project.updated_at,
    }
    if with_variants:
        payload["variants"] = [
            [_variant_payload(project, line, i) for i in range(len(variants))]
            for line, variants in enumerate(project.variants)
        ]
    return payload


def _syllables_payload(workspace: Workspace, lines):
    out = []
    for line in lines:
        out.append([
            {"text": s.text, "type": s.syllabic_type, "number": s.syllable_number}
            for s in workspace.lexicon.annotate_line(line)
        ])
    return out


def create_app(workspace: Workspace, ui_dir=None) -> FastAPI:
    app = FastAPI(title="songsmith studio")
    store = ProjectStore(workspace)
    train_lock = threading.Lock()
    project_locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    def project_lock(project_id: str) -> threading.Lock:
        with locks_guard:
            return project_locks.setdefault(project_id, threading.Lock())

    @app.get("/health")
    def health():
        return {"status": "ok", "models_loaded": workspace.models_trained()}

    @app.post("/corpus")
    async def upload_corpus(files: list[UploadFile] = File(...)):
        records, failures = [], []
        for upload in files:
            data = await upload.read()
            try:
                record = workspace.add_corpus_file(upload.filename or "upload.musicxml", data)
                records.append({
                    "id": record.id, "filename": record.filename,
                    "title": record.title, "note_count": record.note_count,
                    "warnings": record.warnings,
                })
            except WorkspaceError as exc:
                failures.append({"filename": upload.filename, "error": str(exc)})
        if not records and failures:
            return JSONResponse(status_code=422,
                                content={"records": [], "failures": failures})
        return {"records": records, "failures": failures}

    @app.get("/corpus")
    def list_corpus():
        return {"records": [
            {"id": r.id, "filename": r.filename, "title": r.title,
             "note_count": r.note_count, "warnings": r.warnings}
            for r in workspace.corpus_records()
        ]}

    @app.post("/train")
    def train(body: dict | None = None):
        body = body or {}
        if not train_lock.acquire(blocking=False):
            return _error(409, "a training job is already running")
        try:
            params = ForestParams(
                n_trees=int(body.get("n_trees", 500)),
                mtry=body.get("mtry"),
                min_leaf=int(body.get("min_leaf", 1)),
            )
            seed = int(body.get("seed", 0))
            try:
                rhythm_report, melody_report, rhythm_model, melody_model = (
                    workspace.train(params, seed)
                )
            except WorkspaceError as exc:
                return _error(400, str(exc))
            return {
                "rhythm_eval": _report_payload(rhythm_report),
                "melody_eval": _report_payload(melody_report),
                "importance": {
                    "rhythm": forest.importance(rhythm_model),
                    "melody": forest.importance(melody_model),
                },
            }
        finally:
            train_lock.release()

    @app.get("/models/importance")
    def models_importance():
        try:
            rhythm_model, melody_model = workspace.load_models()
        except ModelsMissingError as exc:
            return _error(409, str(exc))
        return {
            "rhythm": forest.importance(rhythm_model),
            "melody": forest.importance(melody_model),
        }

    @app.post("/projects")
    def create_project(body: dict):
        try:
            params = params_from_json(body.get("params", {}))
            project = store.create(
                title=body.get("title", "Untitled"),
                lyric_lines=[line for line in body.get("lyrics", []) if line.strip()],
                params=params,
            )
        except (WorkspaceError, RestrictionError, ValueError) as exc:
            return _error(422, str(exc))
        return _project_payload(project)

    @app.get("/projects")
    def list_projects():
        out = []
        for pid in store.list_ids():
            out.append(_project_payload(store.load(pid), with_variants=False))
        return {"projects": out}

    @app.get("/projects/{project_id}")
    def get_project(project_id: str):
        try:
            project = store.load(project_id)
        except KeyError:
            return _error(404, f"unknown project {project_id}")
        payload = _project_payload(project)
        payload["syllables"] = _syllables_payload(workspace, project.lyric_lines)
        return payload

    @app.post("/projects/{project_id}/generate")
    def generate(project_id: str):
        with project_lock(project_id):
            try:
                project = store.load(project_id)
            except KeyError:
                return _error(404, f"unknown project {project_id}")
            try:
                project = store.generate(project)
            except ModelsMissingError as exc:
                return _error(409, str(exc))
            except RestrictionError as exc:
                return _error(422, str(exc))
            return _project_payload(project)

    @app.put("/projects/{project_id}/selections")
    def put_selections(project_id: str, body: dict):
        with project_lock(project_id):
            try:
                project = store.load(project_id)
            except KeyError:
                return _error(404, f"unknown project {project_id}")
            try:
                project = store.select(project, body.get("selections", body))
            except (ProjectError, ValueError) as exc:
                return _error(422, str(exc))
            return _project_payload(project, with_variants=False)

    @app.get("/projects/{project_id}/export")
    def export(project_id: str, format: str = "midi"):
        try:
            project = store.load(project_id)
        except KeyError:
            return _error(404, f"unknown project {project_id}")
        try:
            score = store.assembled_score(project)
        except SelectionsIncompleteError as exc:
            return _error(409, str(exc))
        except ProjectError as exc:
            return _error(409, str(exc))
        if format == "midi":
            data = write_midi(score)
            media, ext = "audio/midi", "mid"
        elif format == "musicxml":
            data = write_musicxml(score)
            media, ext = "application/vnd.recordare.musicxml+xml", "musicxml"
        else:
            return _error(422, f"unknown export format {format!r}")
        filename = f"{project.title or 'song'}.{ext}".replace(" ", "_")
        return Response(content=data, media_type=media, headers={
            "Content-Disposition": f'attachment; filename="{filename}"',
            "X-Content-SHA256": hashlib.sha256(data).hexdigest(),
        })

    @app.get("/variants/{project_id}/{line}/{variant}.mid")
    def variant_midi(project_id: str, line: int, variant: int):
        try:
            project = store.load(project_id)
        except KeyError:
            return _error(404, f"unknown project {project_id}")
        if not (0 <= line < len(project.variants)
                and 0 <= variant < len(project.variants[line])):
            return _error(404, "unknown variant")
        from .generate import variant_to_score

        annotated = workspace.lexicon.annotate_line(project.lyric_lines[line])
        score = variant_to_score(project.variants[line][variant], annotated,
                                 project.params)
        return Response(content=write_midi(score), media_type="audio/midi")

    if ui_dir:
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
