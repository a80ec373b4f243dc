import logging
from pathlib import Path
from typing import Optional

from tree_cover_toolkit.application.run_config import RunConfig
from tree_cover_toolkit.application.services import (
    CoverBuildService,
    CoverPersistenceService,
    VerificationFailedError,
    VerificationService,
)
from tree_cover_toolkit.config import REPORT_FILE, VERIFY_REPORT_FILE, Settings
from tree_cover_toolkit.domain import (
    EXACT_DOUBLING_LIMIT,
    FiniteMetric,
    ParameterError,
    SizeCapError,
    WeightedGraph,
    aspect_ratio,
    build_ladder,
    composition_power,
    cycle_metric,
    doubling_constant_estimate,
    doubling_constant_exact,
    is_ultrametric,
    ramsey_hardness_witness,
    recursive_cycle_graph,
    subnet_partition,
)
from tree_cover_toolkit.infrastructure.formats import read_input, write_graph, write_metric
from tree_cover_toolkit.infrastructure.persistence import build_report

logger = logging.getLogger(__name__)


def _settings(config: Optional[Settings]) -> Settings:
    if config is None:
        from tree_cover_toolkit.config import settings
        return settings
    return config


def _load(run: RunConfig, planar: bool = False) -> tuple[FiniteMetric, Optional[WeightedGraph]]:
    if run.input_path is None:
        raise ParameterError("an --input file is required")
    m, graph = read_input(run.input_path, run.input_format, planar=planar)
    if m.n > run.size_cap:
        raise SizeCapError(f"input has {m.n} points, above the cap {run.size_cap}")
    return m, graph


class GenerateInstanceUseCase:
    """Writes cycle, composition and recursive-cycle instances."""

    KINDS = ("cycle", "composition", "recursive-cycle")

    def execute(self, kind: str, run: RunConfig) -> dict:
        """
        Build one gadget and write it in the matching text format.

        Returns:
            Dictionary with the written path, format and size
        """
        if run.out_file is None:
            raise ParameterError("gen needs an --out file")
        n = run.n if run.n is not None else 4
        k = run.k if run.k is not None else 1
        out = Path(run.out_file)
        out.parent.mkdir(parents=True, exist_ok=True)
        if kind == "cycle":
            m = cycle_metric(n)
            write_metric(m, out)
            result = {"format": "metric", "points": m.n}
        elif kind == "composition":
            beta = run.beta if run.beta is not None else 0.5
            m = composition_power(n, k, beta, run.size_cap)
            write_metric(m, out)
            result = {"format": "metric", "points": m.n, "beta": beta}
        elif kind == "recursive-cycle":
            g = recursive_cycle_graph(n, k, run.size_cap)
            write_graph(g.graph, out)
            result = {"format": "graph", "points": g.graph.n, "edges": g.graph.m, "inner_vertices": list(g.inner)}
        else:
            raise ParameterError(f"unknown instance kind {kind!r}, expected one of {self.KINDS}")
        logger.info(f"✅ Generated {kind} (n={n}, k={k}) at {out}")
        return {"kind": kind, "n": n, "k": k, "path": str(out), **result}


class BuildCoverUseCase:
    def __init__(
        self,
        build_service: Optional[CoverBuildService] = None,
        persistence_service: Optional[CoverPersistenceService] = None,
        config: Optional[Settings] = None,
    ):
        """
        Initialize use case.

        Args:
            build_service: Builder dispatch (default: CoverBuildService())
            persistence_service: Cover and report writer (default: CoverPersistenceService())
            config: Settings (default: process-wide settings)
        """
        self.config = _settings(config)
        self.build_service = build_service or CoverBuildService(self.config)
        self.persistence_service = persistence_service or CoverPersistenceService()

    def execute(self, run: RunConfig) -> dict:
        """
        Build, verify and persist a cover.

        The cover directory and report are written even when verification
        fails; the failure is re-raised afterwards.

        Returns:
            Dictionary with the output directory, artifact paths and report

        Raises:
            VerificationFailedError: If the gate fails after all retries
        """
        if run.algorithm is None:
            raise ParameterError("cover needs an algorithm")
        m, graph = _load(run, planar=run.algorithm == "planar")
        out_dir = run.out_dir or self.config.output_dir / run.algorithm
        config = {"run": run.to_report(), "settings": self.config.resolved()}
        logger.info(f"Building {run.algorithm} cover over {m.n} points")
        try:
            result = self.build_service.build(
                run.algorithm, m, graph,
                eps=run.eps, alpha=run.alpha, k=run.k, c=run.c, seed=run.seed, threads=run.threads,
            )
        except VerificationFailedError as e:
            payload = build_report("cover", config, run.seed, {
                "build": e.details,
                "verification": e.report.to_dict(),
                "passed": False,
            })
            if e.cover is not None:
                self.persistence_service.save_run(out_dir, e.cover, out_dir / REPORT_FILE, payload)
            else:
                self.persistence_service.save_report(out_dir / REPORT_FILE, payload)
            logger.error(f"❌ {run.algorithm} cover failed verification: {e}")
            raise
        payload = build_report("cover", config, run.seed, {
            "build": result.details,
            "verification": result.report.to_dict(),
            "passed": True,
        })
        paths = self.persistence_service.save_run(out_dir, result.cover, out_dir / REPORT_FILE, payload)
        logger.info(f"✅ {run.algorithm} cover: {result.cover.num_trees} trees written to {out_dir}")
        return {"out_dir": str(out_dir), "paths": paths, "report": payload}


class VerifyCoverUseCase:
    def __init__(
        self,
        verification_service: Optional[VerificationService] = None,
        persistence_service: Optional[CoverPersistenceService] = None,
        config: Optional[Settings] = None,
    ):
        self.config = _settings(config)
        self.verification_service = verification_service or VerificationService(self.config)
        self.persistence_service = persistence_service or CoverPersistenceService()

    def execute(self, run: RunConfig, histogram: bool = False) -> dict:
        """
        Re-verify a saved cover directory against its metric.

        Raises:
            CoverMetricMismatchError: If the cover and metric disagree on the points
            VerificationFailedError: If the claimed bound is missed (report still written)
        """
        if run.out_dir is None:
            raise ParameterError("verify needs a --cover directory")
        cover_dir = Path(run.out_dir)
        m, _ = _load(run)
        cover = self.persistence_service.load_cover(cover_dir)
        report = self.verification_service.verify(cover, m, run.threads)
        payload = build_report("verify", {"run": run.to_report(), "settings": self.config.resolved()}, None, {
            "verification": report.to_dict(),
            "passed": report.claimed_met,
        })
        paths = self.persistence_service.save_report(
            cover_dir / VERIFY_REPORT_FILE, payload, report if histogram else None
        )
        if not report.claimed_met:
            raise VerificationFailedError(report, cover)
        return {"paths": paths, "report": payload}


class MetricStatsUseCase:
    def execute(self, run: RunConfig) -> dict:
        """Aspect ratio, doubling estimates and shape of an input metric."""
        m, graph = _load(run)
        stats: dict = {"points": m.n, "ultrametric": is_ultrametric(m)}
        if graph is not None:
            stats["edges"] = graph.m
        if m.n >= 2:
            stats.update({"d_min": m.d_min, "d_max": m.d_max, "aspect_ratio": aspect_ratio(m)})
        stats["doubling_estimate"] = doubling_constant_estimate(m)
        if m.n <= EXACT_DOUBLING_LIMIT:
            stats["doubling_exact"] = doubling_constant_exact(m)
        logger.info(f"Doubling constant estimate {stats['doubling_estimate']} for {m.n} points")
        return stats


class NetsUseCase:
    def execute(self, run: RunConfig) -> dict:
        """Net ladder and sub-net classes for an internal eps in (0, 1/8)."""
        if run.eps is None:
            raise ParameterError("nets needs --eps")
        m, _ = _load(run)
        ladder = build_ladder(m, run.eps)
        parts = subnet_partition(ladder, m, run.eps, doubling_constant_estimate(m))
        return {"eps": run.eps, "ladder": ladder.to_dict(), "subnets": parts.to_dict()}


class HardnessWitnessUseCase:
    def __init__(self, config: Optional[Settings] = None):
        self.config = _settings(config)

    def execute(self, run: RunConfig) -> dict:
        """Ramsey distortion on Z_k(n) next to n/3 - 1."""
        if run.n is None or run.k is None:
            raise ParameterError("witness needs --n and --k")
        witness = ramsey_hardness_witness(
            run.n,
            run.k,
            run.seed,
            beta=run.beta if run.beta is not None else 0.5,
            size_cap=run.size_cap,
            attempts_per_eta=self.config.ramsey_attempts_per_eta,
            eta_fallback=self.config.ramsey_eta_fallback,
        )
        return build_report("witness", {"run": run.to_report()}, run.seed, {"witness": witness.to_dict()})
