import json
import os
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import click
import pytest
from click.testing import CliRunner, Result

from cli.config import load_config
from cli.errors import ConfigFileError
from cli.main import cli, parse_strengths, split_names
from corpus.models import SeedProgram
from gateway.dispatcher import ModelGateway
from gateway.errors import TransientProviderError
from gateway.models import FaultLocTask, ModelAnswer

CONFIG = """
rng_seed = 7
roster = ["mock:oracle", "mock:random"]

[corpus]
python = "seeds.jsonl"

[filter]
min_loc = 10

[faults]
check_kills = false

[spm]
strengths = [1, 2]
quartiles = ["Q1"]
"""


@pytest.fixture
def config_path(tmp_path: Path, py_seed: SeedProgram) -> str:
    record = {"id": "sample", "language": "PY", "spec": "Scale and clamp."}
    record["code"] = py_seed.source_text
    (tmp_path / "seeds.jsonl").write_text(json.dumps(record) + "\n", encoding="utf-8")
    path = tmp_path / "run.toml"
    path.write_text(CONFIG, encoding="utf-8")
    return str(path)


def _invoke(config_path: str, run_dir: str, *args: str) -> Result:
    return CliRunner().invoke(cli, ["--config", config_path, "--run-dir", run_dir, *args])


def _lines(path: str) -> int:
    with open(path, encoding="utf-8") as f:
        return sum(1 for _ in f)


@pytest.mark.parametrize(
    "text, expected",
    [(None, None), ("all", None), ("1..3", [1, 2, 3]), ("1,4,8", [1, 4, 8])],
    ids=["default", "all", "range", "list"],
)
def test_parse_strengths(text: Optional[str], expected: Optional[List[int]]) -> None:
    assert parse_strengths(text) == expected


@pytest.mark.parametrize("text", ["0..2", "3,9", "x"], ids=["zero", "nine", "garbage"])
def test_parse_strengths_rejects(text: str) -> None:
    with pytest.raises(click.BadParameter):
        parse_strengths(text)


def test_split_names() -> None:
    assert split_names(" a, b ,c") == ["a", "b", "c"]
    assert split_names("all") is None
    with pytest.raises(click.BadParameter):
        split_names(" , ")


def test_load_config(config_path: str) -> None:
    config = load_config(config_path, {"rng_seed": 8, "run_dir": None})
    assert config.rng_seed == 8
    assert config.run_dir == "runs/default"
    assert config.evaluated_models == ["mock:oracle", "mock:random"]
    assert config.panel_models == config.evaluated_models
    assert config.resolve_path("seeds.jsonl") == os.path.join(
        os.path.dirname(config_path), "seeds.jsonl"
    )
    moved = load_config(config_path, {"run_dir": "elsewhere", "parallel": 9})
    assert moved.config_hash() == load_config(config_path).config_hash()
    assert config.config_hash() != moved.config_hash()


@pytest.mark.parametrize(
    "text",
    ["rng_seed = 'x'\n", "[spm]\nstrengths = [0]\n", "[faults]\nunknown = 1\n", "rng_seed =\n"],
    ids=["bad_type", "bad_strength", "unknown_key", "bad_toml"],
)
def test_load_config_rejects(text: str, tmp_path: Path) -> None:
    path = tmp_path / "bad.toml"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigFileError):
        load_config(str(path))


def test_missing_config_file(tmp_path: Path) -> None:
    result = _invoke(str(tmp_path / "absent.toml"), str(tmp_path / "run"), "ingest")
    assert result.exit_code == 2


@pytest.mark.parametrize(
    "args",
    [["inject"], ["filter"], ["mutate"], ["report"], ["evaluate"]],
    ids=["inject", "filter", "mutate", "report", "evaluate"],
)
def test_stage_before_its_input(args: List[str], config_path: str, tmp_path: Path) -> None:
    result = _invoke(config_path, str(tmp_path / "run"), *args)
    assert result.exit_code == 20


def test_stages_one_by_one(config_path: str, tmp_path: Path) -> None:
    run_dir = str(tmp_path / "run")
    result = _invoke(config_path, run_dir, "ingest")
    assert result.exit_code == 0
    assert "1 seeds retained" in result.output
    assert _invoke(config_path, run_dir, "inject").exit_code == 0
    assert _invoke(config_path, run_dir, "evaluate", "--phase", "spm").exit_code == 20
    assert _invoke(config_path, run_dir, "evaluate", "--models", "nobody").exit_code == 12
    assert _invoke(config_path, run_dir, "evaluate").exit_code == 0
    result = _invoke(config_path, run_dir, "filter", "--panel", "mock:oracle")
    assert result.exit_code == 0
    assert "11 of 11 tasks retained" in result.output
    assert _invoke(config_path, run_dir, "mutate", "--strengths", "1").exit_code == 0
    assert _invoke(config_path, run_dir, "evaluate", "--phase", "spm").exit_code == 0
    out = str(tmp_path / "out")
    assert _invoke(config_path, run_dir, "report", "--out", out).exit_code == 0
    assert os.path.exists(os.path.join(out, "summary.json"))


def test_pipeline(config_path: str, tmp_path: Path) -> None:
    run_dir = str(tmp_path / "run")
    result = _invoke(config_path, run_dir, "pipeline")
    assert result.exit_code == 0, result.output
    with open(os.path.join(run_dir, "report", "summary.json"), encoding="utf-8") as f:
        summary = json.load(f)
    assert summary["baseline"]["models"]["mock:oracle"]["accuracy"] == 100.0
    assert summary["robustness"]["per_model"]["mock:oracle"]["failed"] == 0
    assert summary["spm"]["tasks"] > 0

    answers = os.path.join(run_dir, "answers.jsonl")
    mutants = os.path.join(run_dir, "mutants.jsonl")
    counts = (_lines(answers), _lines(mutants))
    assert _invoke(config_path, run_dir, "pipeline").exit_code == 0
    assert (_lines(answers), _lines(mutants)) == counts

    result = CliRunner().invoke(
        cli, ["--config", config_path, "--run-dir", run_dir, "--seed", "8", "pipeline"]
    )
    assert result.exit_code == 21


def test_run_options_after_subcommand(config_path: str, tmp_path: Path) -> None:
    run_dir = str(tmp_path / "run")
    args = ["pipeline", "--config", config_path, "--run-dir", run_dir, "--seed", "42"]
    result = CliRunner().invoke(cli, [*args, "--parallel", "2"])
    assert result.exit_code == 0, result.output
    with open(os.path.join(run_dir, "manifest.json"), encoding="utf-8") as f:
        assert json.load(f)["rng_seed"] == 42
    # the subcommand value wins over the group value
    result = CliRunner().invoke(cli, ["--seed", "7", *args])
    assert result.exit_code == 0, result.output
    assert _invoke(config_path, run_dir, "report").exit_code == 21


def _report_files(run_dir: str) -> Dict[str, bytes]:
    report_dir = Path(run_dir) / "report"
    return {path.name: path.read_bytes() for path in sorted(report_dir.iterdir())}


def _streams(run_dir: str) -> Dict[str, bytes]:
    return {path.name: path.read_bytes() for path in sorted(Path(run_dir).glob("*.jsonl"))}


def test_pipeline_is_reproducible(config_path: str, tmp_path: Path) -> None:
    first, second = str(tmp_path / "first"), str(tmp_path / "second")
    assert _invoke(config_path, first, "pipeline").exit_code == 0
    assert _invoke(config_path, second, "pipeline").exit_code == 0
    assert _report_files(first) == _report_files(second)
    assert _streams(first) == _streams(second)
    assert "summary.json" in _report_files(first)


def test_pipeline_resumes_after_crash(
    config_path: str, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    clean, crashed = str(tmp_path / "clean"), str(tmp_path / "crashed")
    assert _invoke(config_path, clean, "pipeline").exit_code == 0

    evaluate = ModelGateway.evaluate

    def failing(
        self: ModelGateway,
        model_name: str,
        tasks: Sequence[FaultLocTask],
        on_batch: Optional[Callable[[List[ModelAnswer]], None]] = None,
    ) -> List[ModelAnswer]:
        def persist_then_fail(batch: List[ModelAnswer]) -> None:
            if on_batch is not None:
                on_batch(batch)
            raise TransientProviderError("HTTP 503")

        return evaluate(self, model_name, tasks, persist_then_fail)

    monkeypatch.setattr(ModelGateway, "evaluate", failing)
    # one batch of eight answers lands before the failure
    result = _invoke(config_path, crashed, "--parallel", "1", "pipeline")
    assert result.exit_code == 12
    assert _lines(os.path.join(crashed, "answers.jsonl")) == 8
    assert not os.path.exists(os.path.join(crashed, "report"))

    monkeypatch.undo()
    result = _invoke(config_path, crashed, "pipeline")
    assert result.exit_code == 0, result.output
    assert _report_files(crashed) == _report_files(clean)
    assert _streams(crashed) == _streams(clean)
