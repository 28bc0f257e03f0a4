"""Song projects: lyric lines, generated variants, selections, exports.

A project is one JSON file under the workspace's ``projects/`` directory.
Regenerating variants bumps the generation counter and clears selections,
because selection indices refer to the variant list they were made against.
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .generate import (
    GeneratedNote,
    GenerationParams,
    MelodyVariant,
    assemble_song,
    generate_variants,
)
from .score import DurationClass, KeySignature, TimeSignature
from .workspace import Workspace, WorkspaceError


class ProjectError(Exception):
    pass


class SelectionsIncompleteError(ProjectError):
    def __init__(self, missing_lines):
        self.missing_lines = list(missing_lines)
        super().__init__(
            "cannot export before every line has a selection; missing lines: "
            + ", ".join(str(i) for i in self.missing_lines)
        )


@dataclass
class SongProject:
    id: str
    title: str
    lyric_lines: list[str]
    params: GenerationParams
    variants: list[list[MelodyVariant]] = field(default_factory=list)
    selections: dict = field(default_factory=dict)  # line index -> variant index
    generation: int = 0
    created_at: float = 0.0
    updated_at: float = 0.0

    def missing_selections(self) -> list[int]:
        return [i for i in range(len(self.lyric_lines)) if i not in self.selections]


def _params_to_json(p: GenerationParams) -> dict:
    return {
        "exploit_rhythm": p.exploit_rhythm,
        "exploit_melody": p.exploit_melody,
        "melody_count": p.melody_count,
        "rhythm_restriction": sorted(str(r) for r in p.rhythm_restriction),
        "key_fifths": p.key.fifths,
        "key_mode": p.key.mode,
        "time_sig": [p.time_sig.numerator, p.time_sig.denominator],
        "vocal_range": list(p.vocal_range),
        "seed": p.seed,
        "tempo_bpm": p.tempo_bpm,
    }


def params_from_json(obj: dict) -> GenerationParams:
    defaults = GenerationParams()
    return GenerationParams(
        exploit_rhythm=obj.get("exploit_rhythm", defaults.exploit_rhythm),
        exploit_melody=obj.get("exploit_melody", defaults.exploit_melody),
        melody_count=obj.get("melody_count", defaults.melody_count),
        rhythm_restriction=frozenset(obj.get("rhythm_restriction", [])),
        key=KeySignature(obj.get("key_fifths", 0), obj.get("key_mode", "major")),
        time_sig=TimeSignature(*obj.get("time_sig", [4, 4])),
        vocal_range=tuple(obj.get("vocal_range", defaults.vocal_range)),
        seed=obj.get("seed", 0),
        tempo_bpm=obj.get("tempo_bpm", defaults.tempo_bpm),
    )


def _variant_to_json(v: MelodyVariant) -> dict:
    return {
        "line_index": v.line_index,
        "start_offset_beats": str(v.start_offset_beats),
        "notes": [
            [str(n.duration), n.scale_degree, n.accidental, n.midi_pitch]
            for n in v.notes
        ],
    }


def _variant_from_json(obj: dict) -> MelodyVariant:
    return MelodyVariant(
        line_index=obj["line_index"],
        start_offset_beats=Fraction(obj["start_offset_beats"]),
        notes=[
            GeneratedNote(DurationClass.from_string(d), degree, accidental, pitch)
            for d, degree, accidental, pitch in obj["notes"]
        ],
    )


class ProjectStore:
    """JSON-per-project persistence inside a workspace."""

    def __init__(self, workspace: Workspace):
        self.workspace = workspace
        self.directory = workspace.projects_dir

    def _path(self, project_id: str) -> Path:
        return self.directory / f"{project_id}.json"

    def create(self, title: str, lyric_lines: list[str],
               params: GenerationParams) -> SongProject:
        if not lyric_lines:
            raise WorkspaceError("a project needs at least one lyric line")
        for line in lyric_lines:
            self.workspace.lexicon.annotate_line(line)  # validates early
        now = time.time()
        project = SongProject(
            id=uuid.uuid4().hex[:12], title=title, lyric_lines=list(lyric_lines),
            params=params, created_at=now, updated_at=now,
        )
        self.save(project)
        return project

    def save(self, project: SongProject):
        obj = {
            "id": project.id,
            "title": project.title,
            "lyric_lines": project.lyric_lines,
            "params": _params_to_json(project.params),
            "variants": [[_variant_to_json(v) for v in line]
                         for line in project.variants],
            "selections": {str(k): v for k, v in project.selections.items()},
            "generation": project.generation,
            "created_at": project.created_at,
            "updated_at": project.updated_at,
        }
        path = self._path(project.id)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(obj, indent=1, sort_keys=True), encoding="utf-8")
        tmp.replace(path)

    def load(self, project_id: str) -> SongProject:
        path = self._path(project_id)
        if not path.exists():
            raise KeyError(project_id)
        obj = json.loads(path.read_text("utf-8"))
        return SongProject(
            id=obj["id"],
            title=obj["title"],
            lyric_lines=obj["lyric_lines"],
            params=params_from_json(obj["params"]),
            variants=[[_variant_from_json(v) for v in line]
                      for line in obj["variants"]],
            selections={int(k): v for k, v in obj["selections"].items()},
            generation=obj["generation"],
            created_at=obj["created_at"],
            updated_at=obj["updated_at"],
        )

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.json"))

    def generate(self, project: SongProject) -> SongProject:
        """(Re)generate all variants; clears selections since indices dangle."""
        rhythm_model, melody_model = self.workspace.load_models()
        annotated = [self.workspace.lexicon.annotate_line(line)
                     for line in project.lyric_lines]
        project.variants = generate_variants(
            rhythm_model, melody_model, annotated, project.params,
        )
        project.selections = {}
        project.generation += 1
        project.updated_at = time.time()
        self.save(project)
        return project

    def select(self, project: SongProject, selections: dict) -> SongProject:
        for line, variant in selections.items():
            line, variant = int(line), int(variant)
            if not 0 <= line < len(project.variants):
                raise ProjectError(f"line {line} does not exist")
            if not 0 <= variant < len(project.variants[line]):
                raise ProjectError(f"variant {variant} does not exist on line {line}")
            project.selections[line] = variant
        project.updated_at = time.time()
        self.save(project)
        return project

    def assembled_score(self, project: SongProject):
        missing = project.missing_selections()
        if missing:
            raise SelectionsIncompleteError(missing)
        if not project.variants:
            raise ProjectError("no variants generated yet")
        annotated = [self.workspace.lexicon.annotate_line(line)
                     for line in project.lyric_lines]
        chosen = [project.variants[i][project.selections[i]]
                  for i in range(len(project.lyric_lines))]
        return assemble_song(chosen, annotated, project.params,
                             title=project.title)
