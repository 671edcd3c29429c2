import json

import pytest

from dubpair.cli import main
from dubpair.fixtures import build_mini_corpus


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    dest = tmp_path_factory.mktemp("cli_corpus")
    build_mini_corpus(dest)
    return dest


@pytest.fixture(scope="module")
def config_file(corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_out")
    path = out / "config.json"
    path.write_text(
        json.dumps(
            {
                "input_root": str(corpus),
                "output_root": str(out / "run"),
                "k_units": 64,
            }
        )
    )
    return path


def test_run_all_success(config_file, capsys):
    from pathlib import Path

    assert main(["run-all", "--config", str(config_file), "--csv"]) == 0
    out = capsys.readouterr().out
    assert "manifest" in out
    run_dir = json.loads(config_file.read_text())["output_root"]
    assert (Path(run_dir) / "manifest.csv").exists()


def test_stage_subcommand(config_file, capsys):
    assert main(["parse", "--config", str(config_file)]) == 0
    out = capsys.readouterr().out
    assert "parse" in out and "merge" in out


def test_bad_config_exit_1(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"input_root": "x", "output_root": "y", "nope": 1}))
    assert main(["run-all", "--config", str(path)]) == 1


def test_invalid_value_exit_1(tmp_path, corpus):
    path = tmp_path / "bad.json"
    path.write_text(
        json.dumps(
            {
                "input_root": str(corpus),
                "output_root": str(tmp_path / "out"),
                "min_duration_s": 16.0,
            }
        )
    )
    assert main(["run-all", "--config", str(path)]) == 1


def test_unknown_flag_exit_1():
    assert main(["run-all", "--config", "x", "--bogus"]) == 1


def test_unknown_command_exit_1():
    assert main(["frobnicate"]) == 1


def test_help_exit_0():
    assert main(["--help"]) == 0


def test_stats_subcommand(config_file, capsys):
    run_dir = json.loads(config_file.read_text())["output_root"]
    manifest = f"{run_dir}/manifest.jsonl"
    assert main(["stats", "--manifest", manifest]) == 0
    table = capsys.readouterr().out
    assert "utterances" in table and "mean (s)" in table
    assert main(["stats", "--manifest", manifest, "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["count"] == 28

def test_validate_subcommand(config_file, capsys):
    run_dir = json.loads(config_file.read_text())["output_root"]
    assert main(["validate", "--manifest", f"{run_dir}/manifest.jsonl"]) == 0
    assert "valid" in capsys.readouterr().out


def test_validate_reports_violations_exit_1(config_file, tmp_path, capsys):
    import shutil

    run_dir = json.loads(config_file.read_text())["output_root"]
    dest = tmp_path / "run"
    shutil.copytree(run_dir, dest)
    manifest = dest / "manifest.jsonl"
    rows = manifest.read_text().splitlines()
    (dest / json.loads(rows[0])["audio_path"]).unlink()
    assert main(["validate", "--manifest", str(manifest)]) == 1


def test_bleu_subcommand(tmp_path, capsys):
    hyp = tmp_path / "hyp.txt"
    ref = tmp_path / "ref.txt"
    hyp.write_text("the cat sat on the mat\n")
    ref.write_text("the cat sat on a mat\n")
    assert main(["bleu", "--hyp", str(hyp), "--ref", str(ref)]) == 0
    assert capsys.readouterr().out.strip() == "53.73"


def test_bleu_mismatched_lines_exit_1(tmp_path):
    hyp = tmp_path / "hyp.txt"
    ref = tmp_path / "ref.txt"
    hyp.write_text("one line\n")
    ref.write_text("one line\nsecond line\n")
    assert main(["bleu", "--hyp", str(hyp), "--ref", str(ref)]) == 1


def test_aggregate_ratings_subcommand(tmp_path, capsys):
    ratings = tmp_path / "ratings.csv"
    ratings.write_text(
        "item_id,rater_id,emotion,emphasis,intonation,rhythm\n"
        "clipA,r1,4,3,3,4\n"
        "clipA,r2,4,5,3,4\n"
        "clipB,r1,2,2,3,1\n"
    )
    assert main(["aggregate-ratings", "--ratings", str(ratings)]) == 0
    table = capsys.readouterr().out
    assert "emotion" in table and "clipA" in table
    assert main(["aggregate-ratings", "--ratings", str(ratings), "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["overall"]["emotion"] == pytest.approx(10 / 3)
