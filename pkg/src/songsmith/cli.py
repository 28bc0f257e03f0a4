"""Command-line pipeline: ingest, train, evaluate, generate, synthesize.

Every command is a thin composition over the library; no musical or model
logic lives here.  Options resolve as flag > environment variable > config
file: any long option can come from ``SONGSMITH_<NAME>`` (dashes as
underscores) or from a JSON config file passed with ``--config``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 model error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .forest import ForestParams, ModelFormatError, importance, report_to_text
from .generate import GenerationParams, RestrictionError
from .score import ScoreError
from .synthetic import make_synthetic_corpus
from .workspace import (
    ModelsMissingError,
    Workspace,
    WorkspaceError,
    parse_key,
    parse_restriction,
    parse_time_signature,
    read_lyrics_file,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_MODEL = 3

ENV_PREFIX = "SONGSMITH_"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _load_config(path):
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")


class UsageError(Exception):
    pass


def resolve(args, config, name, default=None):
    """Option value with flag > env > config file precedence."""
    value = getattr(args, name.replace("-", "_"), None)
    if value is not None:
        return value
    env = os.environ.get(ENV_PREFIX + name.replace("-", "_").upper())
    if env is not None:
        return env
    if name in config:
        return config[name]
    return default


def build_parser() -> _Parser:
    parser = _Parser(prog="songsmith",
                     description="Corpus-trained co-creative melody generation")
    parser.add_argument("--data-dir", help="workspace directory (default ./songsmith-data)")
    parser.add_argument("--config", help="JSON config file with option defaults")
    parser.add_argument("--lexicon", help="pronunciation lexicon path (CMUdict format)")
    parser.add_argument("--frequencies", help="word frequency table path")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and store corpus MusicXML files")
    p.add_argument("directory")
    p.add_argument("--skip-bad-notes", action="store_true",
                   help="drop unparseable songs instead of aborting")

    p = sub.add_parser("train", help="train rhythm and melody models")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trees", type=int, default=None)
    p.add_argument("--mtry", type=int, default=None)
    p.add_argument("--min-leaf", type=int, default=None)

    sub.add_parser("evaluate", help="print evaluation reports for trained models")
    sub.add_parser("importance", help="print feature importance tables")

    p = sub.add_parser("generate", help="generate melody variants for a lyrics file")
    p.add_argument("--lyrics", required=True, help="text file, one lyric line per line")
    p.add_argument("--out", required=True, help="output directory for variant files")
    p.add_argument("--variants", type=int, default=None)
    p.add_argument("--exploit-rhythm", type=int, default=None)
    p.add_argument("--exploit-melody", type=int, default=None)
    p.add_argument("--restrict", default=None,
                   help="comma-separated duration classes to exclude, e.g. whole_0,32nd_0")
    p.add_argument("--key", default=None, help="key name, e.g. C, F#, Bb, Am")
    p.add_argument("--time-sig", default=None, help="time signature, e.g. 4/4")
    p.add_argument("--tempo", type=float, default=None)
    p.add_argument("--range", dest="vocal_range", default=None,
                   help="vocal range as MIDI numbers, e.g. 57-81")
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("make-synthetic-corpus",
                       help="write a deterministic synthetic corpus for testing")
    p.add_argument("--songs", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("serve", help="run the HTTP studio service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--ui-dir", default=None, help="static UI bundle to serve at /ui")

    return parser


def _workspace(args, config) -> Workspace:
    from .lexicon import Lexicon

    data_dir = resolve(args, config, "data-dir", "./songsmith-data")
    lex_path = resolve(args, config, "lexicon")
    freq_path = resolve(args, config, "frequencies")
    lexicon = None
    if lex_path or freq_path:
        lexicon = Lexicon.load(lex_path, freq_path)
    return Workspace(data_dir, lexicon=lexicon)


def cmd_ingest(args, config) -> int:
    ws = _workspace(args, config)
    records, skipped = ws.ingest_directory(args.directory, skip_bad=args.skip_bad_notes)
    for r in records:
        print(f"ingested {r.filename}: {r.note_count} notes (id {r.id})")
    for name, reason in skipped:
        print(f"skipped {name}: {reason}")
    print(f"{len(records)} songs ingested, {len(skipped)} skipped")
    return EXIT_OK


def cmd_train(args, config) -> int:
    ws = _workspace(args, config)
    seed = int(resolve(args, config, "seed", 0))
    params = ForestParams(
        n_trees=int(resolve(args, config, "trees", 500)),
        mtry=(lambda m: int(m) if m is not None else None)(resolve(args, config, "mtry")),
        min_leaf=int(resolve(args, config, "min-leaf", 1)),
    )
    rhythm_report, melody_report, rhythm_model, melody_model = ws.train(params, seed)
    for name, model, report in (("rhythm", rhythm_model, rhythm_report),
                                ("melody", melody_model, melody_report)):
        line = f"{name} model: {len(model.trees)} trees"
        if report is not None:
            line += f", test accuracy {report.accuracy:.4f}"
        print(line)
    return EXIT_OK


def cmd_evaluate(args, config) -> int:
    ws = _workspace(args, config)
    rhythm_report, melody_report = ws.load_reports()
    print("# rhythm model")
    print(report_to_text(rhythm_report))
    print("# melody model")
    print(report_to_text(melody_report))
    return EXIT_OK


def cmd_importance(args, config) -> int:
    ws = _workspace(args, config)
    rhythm_model, melody_model = ws.load_models()
    for name, model in (("rhythm", rhythm_model), ("melody", melody_model)):
        print(f"# {name} model feature importance (mean decrease Gini)")
        for feature, score in importance(model):
            print(f"{feature}\t{score:.6f}")
        print()
    return EXIT_OK


def cmd_generate(args, config) -> int:
    ws = _workspace(args, config)
    try:
        params = GenerationParams(
            exploit_rhythm=int(resolve(args, config, "exploit-rhythm", 4)),
            exploit_melody=int(resolve(args, config, "exploit-melody", 2)),
            melody_count=int(resolve(args, config, "variants", 15)),
            rhythm_restriction=parse_restriction(str(resolve(args, config, "restrict", ""))),
            key=parse_key(str(resolve(args, config, "key", "C"))),
            time_sig=parse_time_signature(str(resolve(args, config, "time-sig", "4/4"))),
            vocal_range=_parse_range(str(resolve(args, config, "vocal-range", "57-81"))),
            seed=int(resolve(args, config, "seed", 0)),
            tempo_bpm=float(resolve(args, config, "tempo", 120.0)),
        )
    except RestrictionError as exc:
        raise UsageError(f"--restrict: {exc}")
    except (ScoreError, ValueError) as exc:
        raise UsageError(str(exc))
    lines = read_lyrics_file(args.lyrics)
    manifest = ws.generate_to_directory(lines, params, args.out)
    n_files = params.melody_count * len(lines)
    print(f"wrote {n_files} variants ({n_files} MIDI + {n_files} MusicXML) to {args.out}")
    print(f"manifest: {manifest}")
    return EXIT_OK


def _parse_range(text: str) -> tuple[int, int]:
    low, _, high = text.partition("-")
    if not low.strip().isdigit() or not high.strip().isdigit():
        raise ValueError(f"bad vocal range {text!r}; expected e.g. 57-81")
    return int(low), int(high)


def cmd_make_synthetic(args, config) -> int:
    paths = make_synthetic_corpus(args.songs, args.seed, args.out)
    print(f"wrote {len(paths)} synthetic songs to {args.out}")
    return EXIT_OK


def cmd_serve(args, config) -> int:
    import uvicorn

    from .service import create_app

    ws = _workspace(args, config)
    app = create_app(ws, ui_dir=resolve(args, config, "ui-dir"))
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


_COMMANDS = {
    "ingest": cmd_ingest,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "importance": cmd_importance,
    "generate": cmd_generate,
    "make-synthetic-corpus": cmd_make_synthetic,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        return _COMMANDS[args.command](args, config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WorkspaceError, ScoreError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ModelsMissingError, ModelFormatError, RestrictionError) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
