"""CLI behavior: commands, stdout contracts and exit codes."""
from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from schemex.cli import main

PRODUCT_DOC = {
    "version": 1,
    "structures": [{"name": "product", "fields": ["name::str", "price::str"]}],
}


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def workspace(tmp_path_factory, runner):
    """A generated corpus and a small trained model shared by the CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "corpus.jsonl"
    model = root / "model.bin"
    res = runner.invoke(main, ["gen-data", "--seed", "1", "--count", "24", "--out", str(data)])
    assert res.exit_code == 0, res.output
    res = runner.invoke(
        main,
        [
            "train",
            "--data", str(data),
            "--out", str(model),
            "--epochs", "2",
            "--hidden-dim", "32",
            "--layers", "1",
        ],
    )
    assert res.exit_code == 0, res.output
    return root, data, model


class TestGenData:
    def test_writes_expected_count(self, runner, tmp_path):
        out = tmp_path / "c.jsonl"
        res = runner.invoke(main, ["gen-data", "--seed", "7", "--count", "11", "--out", str(out)])
        assert res.exit_code == 0
        assert len(out.read_text().strip().splitlines()) == 11

    def test_deterministic_bytes(self, runner, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        runner.invoke(main, ["gen-data", "--seed", "7", "--count", "9", "--out", str(a)])
        runner.invoke(main, ["gen-data", "--seed", "7", "--count", "9", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestTrainOutput:
    def test_emits_summary_json(self, workspace):
        root, data, model = workspace
        assert model.exists()


class TestExtract:
    def test_prints_result_json(self, runner, workspace, tmp_path):
        _, _, model = workspace
        schema_file = tmp_path / "schema.json"
        schema_file.write_text(json.dumps(PRODUCT_DOC))
        res = runner.invoke(
            main,
            ["extract", "--model", str(model), "--schema", str(schema_file), "--text", "Pixel costs $499."],
        )
        assert res.exit_code == 0, res.output
        body = json.loads(res.output)
        assert body["format_version"] == 1
        assert "structures" in body

    def test_inline_schema_and_stdin(self, runner, workspace):
        _, _, model = workspace
        res = runner.invoke(
            main,
            ["extract", "--model", str(model), "--schema", json.dumps(PRODUCT_DOC), "--text", "-"],
            input="Pixel costs $499.",
        )
        assert res.exit_code == 0, res.output
        assert json.loads(res.output)["format_version"] == 1

    def test_dump_plan(self, runner, workspace):
        _, _, model = workspace
        res = runner.invoke(
            main,
            [
                "extract", "--model", str(model), "--schema", json.dumps(PRODUCT_DOC),
                "--text", "Pixel costs $499.", "--dump-plan",
            ],
        )
        assert res.exit_code == 0, res.output
        plan = json.loads(res.output)
        assert plan["tokens"][0] == "[P]"
        assert plan["text_start"] > 0


class TestEval:
    def test_reports_metrics(self, runner, workspace):
        _, data, model = workspace
        res = runner.invoke(main, ["eval", "--model", str(model), "--data", str(data)])
        assert res.exit_code == 0, res.output
        metrics = json.loads(res.output)
        assert "span" in metrics and "classification" in metrics


class TestBench:
    def test_emits_parsable_json(self, runner, workspace):
        _, _, model = workspace
        res = runner.invoke(
            main, ["bench", "--model", str(model), "--labels", "2,3", "--repeats", "10"]
        )
        assert res.exit_code == 0, res.output
        report = json.loads(res.stdout)
        assert report["scaling_ratios"]["baseline"] > 0
        assert [row["labels"] for row in report["rows"]] == [2, 3]


class TestExitCodes:
    def test_usage_error_is_2(self, runner):
        res = runner.invoke(main, ["extract"])
        assert res.exit_code == 2

    def test_missing_model_file_is_3(self, runner, tmp_path):
        res = runner.invoke(
            main,
            ["extract", "--model", str(tmp_path / "nope.bin"), "--schema", json.dumps(PRODUCT_DOC), "--text", "x"],
        )
        assert res.exit_code == 3
        assert res.stderr.startswith("error:")

    def test_bad_schema_is_4(self, runner, workspace):
        _, _, model = workspace
        res = runner.invoke(
            main, ["extract", "--model", str(model), "--schema", '{"version": 2}', "--text", "x"]
        )
        assert res.exit_code == 4
        assert "error:ParseError" in res.stderr

    def test_overflow_is_5(self, runner, workspace):
        _, _, model = workspace
        res = runner.invoke(
            main,
            [
                "extract", "--model", str(model), "--schema", json.dumps(PRODUCT_DOC),
                "--text", "word " * 40, "--max-len", "8",
            ],
        )
        assert res.exit_code == 5
        assert "error:ContextOverflow" in res.stderr
