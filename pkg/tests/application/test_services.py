from types import SimpleNamespace

import pytest

from tests.instances import grid_graph, random_euclidean_metric
from tree_cover_toolkit.application import CoverBuildService, VerificationFailedError, VerificationService
from tree_cover_toolkit.application.services import CoverPersistenceService
from tree_cover_toolkit.config import Settings
from tree_cover_toolkit.domain import (
    CoverKind,
    ParameterError,
    TreeCover,
    TreeEmbedding,
    metric_from_graph,
    ramsey_alpha,
)


@pytest.fixture
def config(tmp_path):
    return Settings(_env_file=None, threads=1, output_dir=tmp_path, planar_max_retries=3)


class FlakyVerification(VerificationService):
    """Fails the first `failures` gates, then accepts whatever it is given."""

    def __init__(self, config, failures):
        super().__init__(config)
        self.failures = failures
        self.details_seen = []

    def gate(self, cover, m, threads=None, details=None):
        self.details_seen.append(details)
        if len(self.details_seen) <= self.failures:
            raise VerificationFailedError(self.verify(cover, m, threads), cover, details)
        return self.verify(cover, m, threads)


def test_doubling_rescales(config):
    assert CoverBuildService(config).doubling_rescales() == [8.0, 16.0, 32.0, 64.0, 68.0]
    narrow = Settings(_env_file=None, threads=1, doubling_rescale=68.0)
    assert CoverBuildService(narrow).doubling_rescales() == [68.0]


def test_doubling_cover_passes_the_gate(config, line16):
    result = CoverBuildService(config).build("doubling", line16, eps=0.25)
    assert result.report.claimed_met
    assert result.report.plain_distortion <= 1.25 * (1 + 1e-9)
    assert result.details["attempts"] >= 1
    assert result.details["eps"] == 0.25


def test_doubling_retry_moves_to_the_next_rescale(config, line16):
    flaky = FlakyVerification(config, failures=1)
    result = CoverBuildService(config, flaky).build_doubling(line16, 0.5)
    assert result.details["attempts"] == 2
    assert result.details["rescale"] == 16.0
    assert [d["rescale"] for d in flaky.details_seen] == [8.0, 16.0]


def test_planar_retries_draw_fresh_seeds(config):
    g = grid_graph(3, 3)
    m = metric_from_graph(g)
    flaky = FlakyVerification(config, failures=1)
    result = CoverBuildService(config, flaky).build("planar", m, graph=g, eps=0.5, seed=5)
    first, second = flaky.details_seen
    assert first["seed"] == 5
    assert second["seed"] != 5
    assert result.details["attempts"] == 2
    assert result.details["c"] == config.planar_constant


def test_planar_gives_up_after_max_retries(config):
    g = grid_graph(3, 3)
    flaky = FlakyVerification(config, failures=10)
    with pytest.raises(VerificationFailedError) as excinfo:
        CoverBuildService(config, flaky).build("planar", metric_from_graph(g), graph=g, eps=0.5, seed=0)
    assert len(flaky.details_seen) == config.planar_max_retries
    assert excinfo.value.cover is not None
    assert excinfo.value.details["attempts"] == config.planar_max_retries


def test_hpf_and_ramsey_covers_pass(config, plane20):
    service = CoverBuildService(config)
    hpf = service.build("hpf", plane20, alpha=2.0, seed=1)
    assert hpf.report.claimed_met
    assert "hierarchies" in hpf.details
    ramsey = service.build("ramsey", plane20, k=2, seed=1)
    assert ramsey.cover.kind == CoverKind.RAMSEY
    assert ramsey.report.claimed_met


@pytest.mark.parametrize(
    "algorithm, kwargs, message",
    [
        ("planar", {"eps": 0.5}, "needs a graph"),
        ("doubling", {}, "--eps"),
        ("hpf", {}, "--alpha"),
        ("ramsey", {}, "--k"),
        ("spanner", {}, "unknown algorithm"),
    ],
)
def test_dispatch_errors(config, line16, algorithm, kwargs, message):
    with pytest.raises(ParameterError, match=message):
        CoverBuildService(config).build(algorithm, line16, **kwargs)


def test_gate_rejects_a_missed_claim(config, cycle6):
    path = TreeEmbedding(6, tuple((i, i + 1, 1.0) for i in range(5)), tuple(range(6)))
    cover = TreeCover((path,), CoverKind.PLAIN, 2.0)
    service = VerificationService(config)
    assert service.verify(cover, cycle6).plain_distortion == 5.0
    with pytest.raises(VerificationFailedError, match="verification failed") as excinfo:
        service.gate(cover, cycle6, details={"note": 1})
    assert excinfo.value.details == {"note": 1}
    assert excinfo.value.report.plain_distortion == 5.0


def test_persistence_round_trip(config, line16, tmp_path):
    result = CoverBuildService(config).build("doubling", line16, eps=0.5)
    persistence = CoverPersistenceService()
    paths = persistence.save_run(
        tmp_path / "cover", result.cover, tmp_path / "cover" / "report.json", {"ok": True}, result.report
    )
    assert set(paths) == {"cover", "report", "histogram"}
    loaded = persistence.load_cover(tmp_path / "cover")
    assert [t.edges for t in loaded.trees] == [t.edges for t in result.cover.trees]
    assert loaded.claimed_distortion == result.cover.claimed_distortion


@pytest.mark.parametrize("n", [32, 64, 128])
def test_ramsey_sequence_stays_inside_the_calibrated_envelope(config, n):
    m = random_euclidean_metric(n, seed=n)
    results = CoverBuildService(config).ramsey_sequence(m, [3, 1, 2], seed=0)
    assert list(results) == [1, 2, 3]
    one_tree = results[1].report.home_tree_distortion
    for k, result in results.items():
        envelope = config.ramsey_calibration_slack * config.ramsey_calibration_constant * ramsey_alpha(n, k)
        assert result.details["envelope"] == pytest.approx(envelope)
        assert result.report.home_tree_distortion <= envelope
        assert result.report.home_tree_distortion <= one_tree * (1 + 1e-6)


def test_gate_rejects_ramsey_covers_outside_the_envelope(line16):
    tight = Settings(_env_file=None, threads=1, ramsey_calibration_constant=0.01)
    with pytest.raises(VerificationFailedError, match="calibrated envelope") as excinfo:
        CoverBuildService(tight).build("ramsey", line16, k=1, seed=0)
    assert excinfo.value.details["envelope"] == pytest.approx(1.5 * 0.01 * 16)
    assert excinfo.value.report.claimed_met


def test_zero_calibration_constant_turns_the_envelope_off(line16):
    relaxed = Settings(_env_file=None, threads=1, ramsey_calibration_constant=0.0)
    result = CoverBuildService(relaxed).build("ramsey", line16, k=1, seed=0)
    assert result.report.claimed_met
    assert "envelope" not in result.details


def test_ramsey_sequence_warns_when_distortion_grows(config, line16, monkeypatch, caplog):
    distortions = {1: 4.0, 2: 6.0}

    def fake_build(m, k, seed, threads=None):
        return SimpleNamespace(report=SimpleNamespace(home_tree_distortion=distortions[k]))

    service = CoverBuildService(config)
    monkeypatch.setattr(service, "build_ramsey", fake_build)
    with caplog.at_level("WARNING", logger="tree_cover_toolkit.application.services"):
        results = service.ramsey_sequence(line16, [2, 1], seed=0)
    assert list(results) == [1, 2]
    assert "rose from 4.0000 with 1 trees to 6.0000 with 2 trees" in caplog.text
