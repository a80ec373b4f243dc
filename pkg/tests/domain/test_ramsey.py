import numpy as np
import pytest

from tests.instances import cycle_metric, geometric_line_metric, line_metric, random_euclidean_metric
from tree_cover_toolkit.domain import (
    FiniteMetric,
    HstTree,
    ParameterError,
    RamseyExtractionError,
    TreeEmbedding,
    build_ramsey_cover,
    derive_rng,
    is_ultrametric,
    ramsey_alpha,
    ramsey_ultrametric,
    tree_distance,
    verify_cover,
)
from tree_cover_toolkit.domain import ramsey as ramsey_module
from tree_cover_toolkit.domain.ramsey import (
    RamseyStep,
    attach_to_nearest,
    measured_distortion,
    required_extraction,
    ultrametric_from_tree_split,
)


def test_required_extraction():
    assert required_extraction(16, 2.0) == 4
    assert required_extraction(10, 1.0) == 1
    assert required_extraction(1, 3.0) == 1


def test_tree_split_ultrametric_bounds():
    m = line_metric(5)
    u = ultrametric_from_tree_split(m, [0, 1, 2, 3, 4])
    assert is_ultrametric(FiniteMetric(u))
    off = ~np.eye(5, dtype=bool)
    assert np.all(u[off] >= m.dist[off])
    assert (u[off] / m.dist[off]).max() <= 4.0
    assert ultrametric_from_tree_split(m, [2]).shape == (1, 1)


def test_attach_to_nearest_hangs_points_off_the_base():
    m = line_metric(5)
    base = TreeEmbedding(2, ((0, 1, 4.0),), (0, 1))
    t = attach_to_nearest(m, [0, 4], base)
    assert t.num_nodes == 5
    assert tree_distance(t, 0, 4) == 4.0
    assert tree_distance(t, 1, 0) == 1.0
    # point 2 ties between 0 and 4 and goes to the lower index
    assert tree_distance(t, 2, 0) == 2.0
    assert tree_distance(t, 2, 4) == 6.0
    assert np.all(t.point_distances() >= m.dist)


def test_ultrametric_step_extracts_enough(plane20):
    survivors = list(range(plane20.n))
    step = ramsey_ultrametric(plane20, survivors, 2.0, derive_rng(0, "step"))
    assert len(step.extracted) >= required_extraction(20, 2.0)
    assert set(step.extracted) <= set(survivors)
    assert step.alpha_actual == measured_distortion(plane20, step.tree, step.extracted)
    assert np.all(step.tree.point_distances() >= plane20.dist * (1 - 1e-9))
    assert step.to_dict()["extracted"] == len(step.extracted)


@pytest.mark.parametrize("alpha, survivors", [(0.5, [0, 1]), (2.0, [])])
def test_ultrametric_step_parameters(line16, alpha, survivors):
    with pytest.raises(ParameterError):
        ramsey_ultrametric(line16, survivors, alpha, derive_rng(0, "step"))


def test_single_tree_cover_is_the_split_tree(line16):
    build = build_ramsey_cover(line16, 1, derive_rng(0, "ramsey"))
    assert build.cover.num_trees == 1
    assert build.steps == ()
    assert build.last_size == 16
    assert build.last_distortion <= 15.0
    report = verify_cover(build.cover, line16)
    assert report.claimed_met
    assert report.home_tree_distortion == build.cover.claimed_distortion


@pytest.mark.parametrize("k", [2, 3])
def test_cover_claims_its_verified_home_distortion(plane20, k):
    build = build_ramsey_cover(plane20, k, derive_rng(4, "ramsey"))
    cover = build.cover
    assert cover.num_trees == k
    assert all(0 <= h < k for h in cover.home_tree)
    report = verify_cover(cover, plane20)
    assert report.domination_ok
    assert report.claimed_met
    assert report.ramsey_distortion <= report.home_tree_distortion
    assert build.to_dict()["num_trees"] == k


def test_same_seed_same_cover(plane20):
    first = build_ramsey_cover(plane20, 2, derive_rng(8, "ramsey"))
    second = build_ramsey_cover(plane20, 2, derive_rng(8, "ramsey"))
    assert first.cover.home_tree == second.cover.home_tree
    assert [t.edges for t in first.cover.trees] == [t.edges for t in second.cover.trees]


def test_single_point_cover():
    build = build_ramsey_cover(FiniteMetric(np.zeros((1, 1))), 2, derive_rng(0, "ramsey"))
    assert build.cover.num_trees == 2
    assert build.cover.claimed_distortion == 1.0


def test_tree_count_must_be_positive(line16):
    with pytest.raises(ParameterError):
        build_ramsey_cover(line16, 0, derive_rng(0, "ramsey"))


def test_alpha_shape():
    assert ramsey_alpha(1, 3) == 1.0
    assert ramsey_alpha(128, 1) == pytest.approx(128.0)
    assert ramsey_alpha(64, 2) == pytest.approx(8.0 * np.sqrt(np.log(64)))


def test_extraction_keeps_eta_fixed_without_fallback(line16, monkeypatch):
    monkeypatch.setattr(ramsey_module, "required_extraction", lambda size, alpha: size + 1)
    with pytest.raises(RamseyExtractionError, match="2 attempts") as excinfo:
        ramsey_ultrametric(line16, list(range(16)), 1.0, derive_rng(0, "step"), attempts_per_eta=2, eta_fallback=False)
    best = excinfo.value.best_attempt
    assert best.eta == 1.0 / 8.0
    assert best.eta_halvings == 0


def test_extraction_halves_eta_as_a_logged_fallback(line16, monkeypatch, caplog):
    monkeypatch.setattr(ramsey_module, "required_extraction", lambda size, alpha: size + 1)
    with caplog.at_level("WARNING", logger="tree_cover_toolkit.domain.ramsey"):
        with pytest.raises(RamseyExtractionError, match="4 attempts"):
            ramsey_ultrametric(line16, list(range(16)), 1.0, derive_rng(0, "step"), attempts_per_eta=2)
    assert "halving the padding radius" in caplog.text


def test_step_reports_effective_eta(plane20):
    step = ramsey_ultrametric(plane20, list(range(plane20.n)), 2.0, derive_rng(0, "step"), attempts_per_eta=3)
    assert step.eta_halvings == (step.attempts - 1) // 3
    assert step.eta == pytest.approx(1.0 / 16.0 / 2.0**step.eta_halvings)
    assert step.to_dict()["eta_halvings"] == step.eta_halvings


RAMSEY_SUITE = [
    pytest.param(lambda: line_metric(128), id="line128"),
    pytest.param(lambda: geometric_line_metric(40), id="geometric40"),
    pytest.param(lambda: cycle_metric(48), id="cycle48"),
    *(pytest.param(lambda s=s: random_euclidean_metric(48, seed=s), id=f"plane48-{s}") for s in range(3)),
]


@pytest.mark.parametrize("make_metric", RAMSEY_SUITE)
def test_more_trees_never_lose_to_one_tree(make_metric):
    m = make_metric()
    one_tree = build_ramsey_cover(m, 1, derive_rng(0, "ramsey")).cover.claimed_distortion
    for k in (2, 3):
        build = build_ramsey_cover(m, k, derive_rng(0, "ramsey"))
        assert build.single_tree_distortion == pytest.approx(one_tree)
        assert build.cover.claimed_distortion <= one_tree * (1 + 1e-6)
        report = verify_cover(build.cover, m)
        assert report.claimed_met
        if build.rehomed:
            assert build.cover.home_tree == report.home_tree


def test_bad_extraction_tree_falls_back_to_the_split_tree(line16, monkeypatch, caplog):
    def star_step(m, survivors, alpha, rng, *args):
        extracted = tuple(survivors[: required_extraction(len(survivors), alpha)])
        tree = TreeEmbedding(m.n + 1, tuple((0, x + 1, 1000.0) for x in range(m.n)), tuple(range(1, m.n + 1)), 0)
        hst = HstTree((0.0,), (-1,), (0,))
        return RamseyStep(tuple(survivors), extracted, hst, tree, alpha, 2000.0, 1.0 / (8.0 * alpha), 1)

    monkeypatch.setattr(ramsey_module, "ramsey_ultrametric", star_step)
    with caplog.at_level("WARNING", logger="tree_cover_toolkit.domain.ramsey"):
        build = build_ramsey_cover(line16, 2, derive_rng(0, "ramsey"))
    assert build.rehomed
    assert "rehoming points" in caplog.text
    assert build.cover.home_tree == (1,) * 16
    assert build.cover.claimed_distortion == pytest.approx(build.single_tree_distortion)
    assert build.cover.claimed_distortion <= 15.0
    assert build.to_dict()["rehomed"] is True
    assert verify_cover(build.cover, line16).claimed_met
