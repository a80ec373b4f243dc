import json

import pytest
from click.testing import CliRunner

from tests.instances import line_metric
from tree_cover_toolkit import __version__
from tree_cover_toolkit.domain import CoverKind, TreeCover, TreeEmbedding, cycle_metric
from tree_cover_toolkit.infrastructure.formats import write_metric
from tree_cover_toolkit.infrastructure.persistence import CoverStore
from tree_cover_toolkit.presentation import cli
from tree_cover_toolkit.presentation.cli import EXIT_INPUT_ERROR, EXIT_VERIFICATION_FAILED


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def line_file(tmp_path):
    path = tmp_path / "line.txt"
    write_metric(line_metric(16), path)
    return path


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_gen_then_stats(runner, tmp_path):
    out = tmp_path / "c6.txt"
    result = runner.invoke(cli, ["gen", "cycle", "--n", "6", "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert out.read_text().startswith("6\n")
    result = runner.invoke(cli, ["stats", "-i", str(out)])
    assert result.exit_code == 0, result.output
    assert "aspect_ratio" in result.output


def test_cover_then_verify(runner, line_file, tmp_path):
    out_dir = tmp_path / "cover"
    result = runner.invoke(cli, ["cover", "doubling", "-i", str(line_file), "--eps", "0.25", "-o", str(out_dir)])
    assert result.exit_code == 0, result.output
    report = json.loads((out_dir / "report.json").read_text())
    assert report["verification"]["plain_distortion"] <= 1.25 * (1 + 1e-9)
    result = runner.invoke(cli, ["verify", "--cover", str(out_dir), "-i", str(line_file), "--histogram"])
    assert result.exit_code == 0, result.output
    assert (out_dir / "distortion_histogram.csv").exists()


def test_ramsey_cover(runner, line_file, tmp_path):
    result = runner.invoke(
        cli, ["cover", "ramsey", "-i", str(line_file), "--k", "2", "--seed", "4", "-o", str(tmp_path / "r")]
    )
    assert result.exit_code == 0, result.output
    assert "Ramsey distortion" in result.output


def test_verify_against_the_wrong_metric(runner, line_file, tmp_path):
    out_dir = tmp_path / "cover"
    runner.invoke(cli, ["cover", "doubling", "-i", str(line_file), "--eps", "0.5", "-o", str(out_dir)])
    short = tmp_path / "short.txt"
    write_metric(line_metric(5), short)
    result = runner.invoke(cli, ["verify", "--cover", str(out_dir), "-i", str(short)])
    assert result.exit_code == EXIT_INPUT_ERROR
    assert "cover/metric mismatch" in result.output


def test_verify_reports_a_missed_claim(runner, tmp_path):
    metric_file = tmp_path / "c6.txt"
    write_metric(cycle_metric(6), metric_file)
    path = TreeEmbedding(6, tuple((i, i + 1, 1.0) for i in range(5)), tuple(range(6)))
    CoverStore(tmp_path / "cover").save(TreeCover((path,), CoverKind.PLAIN, 2.0))
    result = runner.invoke(cli, ["verify", "--cover", str(tmp_path / "cover"), "-i", str(metric_file)])
    assert result.exit_code == EXIT_VERIFICATION_FAILED
    assert "Verification failed" in result.output
    assert json.loads((tmp_path / "cover" / "verification.json").read_text())["passed"] is False


@pytest.mark.parametrize(
    "args, message",
    [
        (["cover", "doubling", "--eps", "1.5"], "invalid parameters"),
        (["cover", "planar", "--eps", "0.5"], "needs a graph"),
        (["cover", "doubling"], "--eps"),
        (["cover", "ramsey", "--k", "2", "--size-cap", "4"], "above the cap"),
    ],
)
def test_cover_input_errors(runner, line_file, tmp_path, args, message):
    result = runner.invoke(cli, [*args, "-i", str(line_file), "-o", str(tmp_path / "x")])
    assert result.exit_code == EXIT_INPUT_ERROR
    assert message in result.output


def test_malformed_input_file(runner, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("2\n0 1\n")
    result = runner.invoke(cli, ["stats", "-i", str(bad)])
    assert result.exit_code == EXIT_INPUT_ERROR
    assert "unexpected end of file" in " ".join(result.output.split())


def test_nets_to_file(runner, line_file, tmp_path):
    out = tmp_path / "nets.json"
    result = runner.invoke(cli, ["nets", "-i", str(line_file), "--eps", "0.1", "-o", str(out)])
    assert result.exit_code == 0, result.output
    data = json.loads(out.read_text())
    assert set(data) == {"eps", "ladder", "subnets"}


def test_witness(runner):
    result = runner.invoke(cli, ["witness", "--n", "6", "--k", "2"])
    assert result.exit_code == 0, result.output
    assert "Z_2(6)" in result.output


def test_config_lists_settings(runner):
    result = runner.invoke(cli, ["config"])
    assert result.exit_code == 0
    assert "doubling_rescale" in result.output
