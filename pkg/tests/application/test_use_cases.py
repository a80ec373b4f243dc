import json

import pytest

from tests.instances import grid_graph, line_metric
from tree_cover_toolkit.application import (
    BuildCoverUseCase,
    GenerateInstanceUseCase,
    HardnessWitnessUseCase,
    MetricStatsUseCase,
    NetsUseCase,
    RunConfig,
    VerificationFailedError,
    VerifyCoverUseCase,
)
from tree_cover_toolkit.application.services import CoverBuildService, VerificationService
from tree_cover_toolkit.config import Settings
from tree_cover_toolkit.domain import CoverMetricMismatchError, ParameterError, SizeCapError
from tree_cover_toolkit.infrastructure.formats import read_graph, read_metric, write_graph, write_metric


@pytest.fixture
def config(tmp_path):
    return Settings(_env_file=None, threads=1, output_dir=tmp_path / "covers")


@pytest.fixture
def line_file(tmp_path):
    path = tmp_path / "line.txt"
    write_metric(line_metric(16), path)
    return path


@pytest.fixture
def grid_file(tmp_path):
    path = tmp_path / "grid.txt"
    write_graph(grid_graph(3, 3), path)
    return path


class RejectingVerification(VerificationService):
    def gate(self, cover, m, threads=None, details=None):
        raise VerificationFailedError(self.verify(cover, m, threads), cover, details)


def test_build_writes_cover_and_report(config, line_file):
    run = RunConfig(command="cover", algorithm="doubling", input_path=line_file, eps=0.25, seed=3)
    result = BuildCoverUseCase(config=config).execute(run)
    out_dir = config.output_dir / "doubling"
    assert result["out_dir"] == str(out_dir)
    assert (out_dir / "cover.json").exists()
    report = json.loads((out_dir / "report.json").read_text())
    assert report["passed"] is True
    assert report["command"] == "cover"
    assert report["seed"] == 3
    assert report["config"]["run"]["eps"] == 0.25
    assert "input_path" not in report["config"]["run"]
    assert "threads" not in report["config"]["settings"]
    assert report["verification"]["claimed_met"] is True


def test_reports_are_reproducible(config, line_file, tmp_path):
    texts = []
    for name in ("a", "b"):
        run = RunConfig(
            command="cover", algorithm="ramsey", input_path=line_file, k=2, seed=9, out_dir=tmp_path / name
        )
        BuildCoverUseCase(config=config).execute(run)
        texts.append((tmp_path / name / "report.json").read_text())
    assert texts[0] == texts[1]


def test_failed_gate_still_writes_artifacts(config, line_file, tmp_path):
    service = CoverBuildService(config, RejectingVerification(config))
    run = RunConfig(command="cover", algorithm="hpf", input_path=line_file, alpha=2.0, out_dir=tmp_path / "bad")
    with pytest.raises(VerificationFailedError):
        BuildCoverUseCase(build_service=service, config=config).execute(run)
    report = json.loads((tmp_path / "bad" / "report.json").read_text())
    assert report["passed"] is False
    assert (tmp_path / "bad" / "cover.json").exists()


def test_planar_needs_a_graph_input(config, line_file):
    run = RunConfig(command="cover", algorithm="planar", input_path=line_file, eps=0.5)
    with pytest.raises(ParameterError, match="needs a graph"):
        BuildCoverUseCase(config=config).execute(run)


def test_planar_cover_from_graph_file(config, grid_file, tmp_path):
    run = RunConfig(command="cover", algorithm="planar", input_path=grid_file, eps=0.5, out_dir=tmp_path / "p")
    try:
        result = BuildCoverUseCase(config=config).execute(run)
    except VerificationFailedError:
        pytest.skip("randomized separator cover missed its bound on every retry")
    assert result["report"]["build"]["attempts"] >= 1


def test_size_cap_applies_to_inputs(config, line_file):
    run = RunConfig(command="cover", algorithm="doubling", input_path=line_file, eps=0.5, size_cap=8)
    with pytest.raises(SizeCapError):
        BuildCoverUseCase(config=config).execute(run)


def test_verify_round_trip_and_histogram(config, line_file, tmp_path):
    out_dir = tmp_path / "cover"
    BuildCoverUseCase(config=config).execute(
        RunConfig(command="cover", algorithm="ramsey", input_path=line_file, k=2, out_dir=out_dir)
    )
    run = RunConfig(command="verify", input_path=line_file, out_dir=out_dir)
    result = VerifyCoverUseCase(config=config).execute(run, histogram=True)
    assert result["report"]["passed"] is True
    assert result["report"]["seed"] is None
    assert set(result["paths"]) == {"report", "histogram"}
    assert (out_dir / "verification.json").exists()
    assert (out_dir / "distortion_histogram.csv").exists()


def test_verify_against_the_wrong_metric(config, line_file, tmp_path):
    out_dir = tmp_path / "cover"
    BuildCoverUseCase(config=config).execute(
        RunConfig(command="cover", algorithm="doubling", input_path=line_file, eps=0.5, out_dir=out_dir)
    )
    other = tmp_path / "short.txt"
    write_metric(line_metric(5), other)
    with pytest.raises(CoverMetricMismatchError):
        VerifyCoverUseCase(config=config).execute(RunConfig(command="verify", input_path=other, out_dir=out_dir))


def test_metric_stats(tmp_path):
    path = tmp_path / "line5.txt"
    write_metric(line_metric(5), path)
    stats = MetricStatsUseCase().execute(RunConfig(command="stats", input_path=path))
    assert stats["points"] == 5
    assert stats["aspect_ratio"] == 4.0
    assert stats["doubling_exact"] == 3
    assert stats["ultrametric"] is False
    assert "edges" not in stats


def test_graph_stats_report_edges(grid_file):
    stats = MetricStatsUseCase().execute(RunConfig(command="stats", input_path=grid_file))
    assert stats["edges"] == 12
    assert stats["aspect_ratio"] == 4.0


def test_nets_dump(line_file):
    result = NetsUseCase().execute(RunConfig(command="nets", input_path=line_file, eps=0.1))
    assert result["ladder"]["low"] == -3
    assert result["subnets"]["t"] >= 1
    with pytest.raises(ParameterError):
        NetsUseCase().execute(RunConfig(command="nets", input_path=line_file))


@pytest.mark.parametrize("kind, fmt", [("cycle", "metric"), ("composition", "metric"), ("recursive-cycle", "graph")])
def test_generate_instances(tmp_path, kind, fmt):
    out = tmp_path / f"{kind}.txt"
    result = GenerateInstanceUseCase().execute(kind, RunConfig(command="gen", n=4, k=2, beta=0.5, out_file=out))
    assert result["format"] == fmt
    if fmt == "metric":
        assert read_metric(out).n == result["points"]
    else:
        assert read_graph(out).n == result["points"]


def test_generate_rejects_unknown_kind(tmp_path):
    with pytest.raises(ParameterError):
        GenerateInstanceUseCase().execute("torus", RunConfig(command="gen", n=4, out_file=tmp_path / "x.txt"))


def test_hardness_witness_report(config):
    report = HardnessWitnessUseCase(config).execute(RunConfig(command="witness", n=6, k=2, seed=0))
    assert report["command"] == "witness"
    assert report["witness"]["points"] == 36
    assert report["witness"]["consistent"] is True
