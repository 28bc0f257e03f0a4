"""CLI pipeline: ingest, train, evaluate, generate, exit codes, config."""

import hashlib
import json

import pytest

from songsmith.cli import main
from songsmith.synthetic import make_synthetic_corpus
from songsmith.workspace import Workspace, parse_key, parse_restriction
from songsmith.score import KeySignature


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus")
    make_synthetic_corpus(6, seed=3, out_dir=path)
    return path


def run(args):
    return main([str(a) for a in args])


def test_full_pipeline(tmp_path, corpus_dir, capsys):
    data = tmp_path / "data"
    assert run(["--data-dir", data, "ingest", corpus_dir]) == 0
    assert "6 songs ingested" in capsys.readouterr().out

    assert run(["--data-dir", data, "train", "--seed", "5", "--trees", "20"]) == 0
    out = capsys.readouterr().out
    assert "rhythm model: 20 trees" in out and "test accuracy" in out

    assert run(["--data-dir", data, "evaluate"]) == 0
    out = capsys.readouterr().out
    assert "# rhythm model" in out and "class_error" in out and "accuracy" in out

    assert run(["--data-dir", data, "importance"]) == 0
    out = capsys.readouterr().out
    assert "beat_strength" in out and "prev_scale_degree_1" in out

    lyrics = tmp_path / "lyrics.txt"
    lyrics.write_text("love the sunshine\n\nrainbow in the morning\n", encoding="utf-8")
    out_dir = tmp_path / "variants"
    assert run(["--data-dir", data, "generate", "--lyrics", lyrics,
                "--out", out_dir, "--variants", "4", "--seed", "9"]) == 0
    mids = sorted(p.name for p in out_dir.glob("*.mid"))
    xmls = sorted(p.name for p in out_dir.glob("*.musicxml"))
    assert len(mids) == len(xmls) == 8  # 2 lines x 4 variants
    assert mids[0] == "line00_var00.mid"
    manifest = (out_dir / "manifest.tsv").read_text("utf-8")
    assert manifest.startswith("line\tvariant\tseed\t")
    assert len(manifest.strip().splitlines()) == 9
    # no exploit flags given: the defaults are 4 rhythm draws, 2 melody draws
    assert "exploit_rhythm=4 exploit_melody=2" in manifest


def test_importance_lists_every_feature_once(tmp_path, corpus_dir, capsys):
    data = tmp_path / "data"
    run(["--data-dir", data, "ingest", corpus_dir])
    run(["--data-dir", data, "train", "--seed", "1", "--trees", "10"])
    capsys.readouterr()
    assert run(["--data-dir", data, "importance"]) == 0
    out = capsys.readouterr().out
    rhythm_block = out.split("# melody model")[0]
    lines = [l for l in rhythm_block.splitlines() if "\t" in l]
    names = [l.split("\t")[0] for l in lines]
    assert len(names) == len(set(names)) == 30  # 34 columns minus 4 hidden


def test_train_determinism_same_seed_same_hashes(tmp_path, corpus_dir, capsys):
    digests = []
    for name in ("one", "two"):
        data = tmp_path / name
        run(["--data-dir", data, "ingest", corpus_dir])
        run(["--data-dir", data, "train", "--seed", "11", "--trees", "8"])
        ws = Workspace(data)
        digests.append((
            hashlib.sha256(ws.rhythm_model_path.read_bytes()).hexdigest(),
            hashlib.sha256(ws.melody_model_path.read_bytes()).hexdigest(),
        ))
    capsys.readouterr()
    assert digests[0] == digests[1]


def test_exit_codes(tmp_path, corpus_dir, capsys):
    data = tmp_path / "data"
    # data error: ingest from an empty directory, or train with no corpus
    empty = tmp_path / "empty"
    empty.mkdir()
    assert run(["--data-dir", data, "ingest", empty]) == 2
    assert run(["--data-dir", data, "train", "--trees", "5"]) == 2
    # model error: generate before training
    lyrics = tmp_path / "l.txt"
    lyrics.write_text("love\n", encoding="utf-8")
    assert run(["--data-dir", data, "generate", "--lyrics", lyrics,
                "--out", tmp_path / "x"]) == 3
    # usage error: restriction covering all 12 classes names the flag
    run(["--data-dir", data, "ingest", corpus_dir])
    run(["--data-dir", data, "train", "--trees", "5"])
    capsys.readouterr()
    all_classes = ("whole_0,whole_1,half_0,half_1,quarter_0,quarter_1,"
                   "8th_0,8th_1,16th_0,16th_1,32nd_0,32nd_1")
    assert run(["--data-dir", data, "generate", "--lyrics", lyrics,
                "--out", tmp_path / "y", "--restrict", all_classes]) == 1
    err = capsys.readouterr().err
    assert "--restrict" in err
    # usage error: unknown flag value
    assert run(["--data-dir", data, "generate", "--lyrics", lyrics,
                "--out", tmp_path / "z", "--key", "H#"]) == 1


def test_skip_bad_notes_drops_song(tmp_path, corpus_dir, capsys):
    blended = tmp_path / "blended"
    blended.mkdir()
    for p in corpus_dir.glob("*.musicxml"):
        (blended / p.name).write_bytes(p.read_bytes())
    (blended / "broken.musicxml").write_bytes(b"<score-partwise><nope>")
    data1 = tmp_path / "strict"
    assert run(["--data-dir", data1, "ingest", blended]) == 2
    data2 = tmp_path / "lax"
    assert run(["--data-dir", data2, "ingest", blended, "--skip-bad-notes"]) == 0
    out = capsys.readouterr().out
    assert "skipped broken.musicxml" in out
    assert "6 songs ingested, 1 skipped" in out


def test_make_synthetic_corpus_command(tmp_path, capsys):
    out = tmp_path / "synth"
    assert run(["make-synthetic-corpus", "--songs", "3", "--seed", "4",
                "--out", out]) == 0
    assert len(list(out.glob("*.musicxml"))) == 3


def test_env_and_config_precedence(tmp_path, corpus_dir, monkeypatch, capsys):
    config = tmp_path / "conf.json"
    config.write_text(json.dumps({"data-dir": str(tmp_path / "from_config")}))
    # config alone
    assert run(["--config", config, "ingest", corpus_dir]) == 0
    assert (tmp_path / "from_config").exists()
    # env beats config
    monkeypatch.setenv("SONGSMITH_DATA_DIR", str(tmp_path / "from_env"))
    assert run(["--config", config, "ingest", corpus_dir]) == 0
    assert (tmp_path / "from_env").exists()
    # flag beats env
    assert run(["--config", config, "--data-dir", tmp_path / "from_flag",
                "ingest", corpus_dir]) == 0
    assert (tmp_path / "from_flag").exists()
    capsys.readouterr()


def test_cli_matches_library_outputs(tmp_path, corpus_dir, capsys):
    """The generate command is a thin wrapper: same bytes as the library call."""
    data = tmp_path / "data"
    run(["--data-dir", data, "ingest", corpus_dir])
    run(["--data-dir", data, "train", "--seed", "2", "--trees", "10"])
    lyrics = tmp_path / "l.txt"
    lyrics.write_text("love the sunshine\n", encoding="utf-8")
    cli_out = tmp_path / "cli_out"
    run(["--data-dir", data, "generate", "--lyrics", lyrics, "--out", cli_out,
         "--variants", "3", "--seed", "6"])
    capsys.readouterr()

    from songsmith.generate import GenerationParams

    lib_out = tmp_path / "lib_out"
    ws = Workspace(data)
    ws.generate_to_directory(["love the sunshine"],
                             GenerationParams(melody_count=3, seed=6), lib_out)
    cli_files = sorted(p.name for p in cli_out.iterdir())
    lib_files = sorted(p.name for p in lib_out.iterdir())
    assert cli_files == lib_files
    for name in cli_files:
        assert (cli_out / name).read_bytes() == (lib_out / name).read_bytes()


def test_parse_key_names():
    assert parse_key("C") == KeySignature(0, "major")
    assert parse_key("F#") == KeySignature(6, "major")
    assert parse_key("Bb") == KeySignature(-2, "major")
    assert parse_key("Am") == KeySignature(0, "minor")
    assert parse_key("C#m") == KeySignature(4, "minor")
    with pytest.raises(ValueError):
        parse_key("X")


def test_parse_restriction_validates():
    assert parse_restriction("whole_0, 32nd_0") == frozenset({"whole_0", "32nd_0"})
    with pytest.raises(Exception):
        parse_restriction("not_a_class")
