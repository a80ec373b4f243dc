import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, TypeVar

from tenacity import Retrying, before_sleep_log, retry_if_exception_type, stop_after_attempt

from tree_cover_toolkit.config import HISTOGRAM_FILE, Settings
from tree_cover_toolkit.domain import (
    CoverKind,
    DistortionReport,
    FiniteMetric,
    ParameterError,
    PartitionParams,
    TreeCover,
    TreeCoverError,
    WeightedGraph,
    assemble_family,
    build_ramsey_cover,
    build_separator_cover,
    cover_from_family,
    derive_rng,
    derive_seed,
    doubling_constant_estimate,
    doubling_tree_cover,
    ramsey_alpha,
    verify_cover,
)
from tree_cover_toolkit.infrastructure.persistence import CoverStore, write_histogram, write_report

logger = logging.getLogger(__name__)

T = TypeVar("T")


class VerificationFailedError(TreeCoverError):
    """A cover missed its claimed distortion or broke domination."""

    def __init__(
        self,
        report: DistortionReport,
        cover: TreeCover | None = None,
        details: dict | None = None,
        reason: str | None = None,
    ):
        achieved = report.ramsey_distortion if report.ramsey_distortion is not None else report.plain_distortion
        super().__init__(
            reason
            or f"verification failed: distortion {achieved:.6f} vs claimed {report.claimed_distortion:.6f}, "
            f"{report.domination_violations} domination violations"
        )
        self.report = report
        self.cover = cover
        self.details = details or {}


@dataclass
class CoverBuildResult:
    cover: TreeCover
    report: DistortionReport
    details: dict = field(default_factory=dict)


class VerificationService:
    def __init__(self, config: Optional[Settings] = None):
        """
        Initialize verification service.

        Args:
            config: Settings (default: process-wide settings)
        """
        if config is None:
            from tree_cover_toolkit.config import settings
            config = settings
        self.config = config

    def verify(self, cover: TreeCover, m: FiniteMetric, threads: Optional[int] = None) -> DistortionReport:
        return verify_cover(
            cover,
            m,
            tolerance=self.config.verify_tolerance,
            threads=threads if threads is not None else self.config.threads,
        )

    def gate(
        self,
        cover: TreeCover,
        m: FiniteMetric,
        threads: Optional[int] = None,
        details: Optional[dict] = None,
    ) -> DistortionReport:
        """
        Verify and insist on the claimed bound.

        Ramsey covers must also stay inside the calibrated envelope
        slack * c_cal * n^(1/k) * (ln n)^(1 - 1/k); the envelope lands in
        `details` under "envelope".

        Raises:
            VerificationFailedError: Carrying the report, cover and build details
        """
        report = self.verify(cover, m, threads)
        if not report.claimed_met:
            raise VerificationFailedError(report, cover, details)
        envelope = self.ramsey_envelope(cover)
        if envelope is not None and report.home_tree_distortion is not None:
            if details is not None:
                details["envelope"] = envelope
            if report.home_tree_distortion > envelope * (1.0 + self.config.verify_tolerance):
                raise VerificationFailedError(
                    report,
                    cover,
                    details,
                    reason=f"verification failed: ramsey distortion {report.home_tree_distortion:.6f} "
                    f"exceeds the calibrated envelope {envelope:.6f} for {cover.num_trees} trees",
                )
        return report

    def ramsey_envelope(self, cover: TreeCover) -> Optional[float]:
        """Calibrated distortion ceiling for a Ramsey cover, None when off or not Ramsey."""
        if cover.kind != CoverKind.RAMSEY or self.config.ramsey_calibration_constant <= 0:
            return None
        return (
            self.config.ramsey_calibration_slack
            * self.config.ramsey_calibration_constant
            * ramsey_alpha(cover.num_points, cover.num_trees)
        )


class CoverBuildService:
    """Runs the four builders behind the verification gate."""

    def __init__(
        self,
        config: Optional[Settings] = None,
        verification_service: Optional[VerificationService] = None,
    ):
        if config is None:
            from tree_cover_toolkit.config import settings
            config = settings
        self.config = config
        self.verification_service = verification_service or VerificationService(config)
        logger.info("CoverBuildService initialized")

    def _retrying(self, attempts: int) -> Retrying:
        return Retrying(
            stop=stop_after_attempt(attempts),
            retry=retry_if_exception_type(VerificationFailedError),
            before_sleep=before_sleep_log(logger, logging.WARNING),
            reraise=True,
        )

    def doubling_rescales(self) -> list[float]:
        """Internal eps divisors tried in order: doubled per attempt, ending at the certified one."""
        rescales = [self.config.doubling_rescale]
        while rescales[-1] < self.config.doubling_max_rescale:
            rescales.append(min(rescales[-1] * 2.0, self.config.doubling_max_rescale))
        return rescales

    def build_doubling(self, m: FiniteMetric, eps: float, threads: Optional[int] = None) -> CoverBuildResult:
        """
        Doubling cover with distortion 1 + eps.

        Raises:
            VerificationFailedError: If even the last rescale misses the bound
        """
        threads = threads if threads is not None else self.config.threads
        rescales = self.doubling_rescales()
        for attempt in self._retrying(len(rescales)):
            with attempt:
                number = attempt.retry_state.attempt_number
                rescale = rescales[number - 1]
                logger.info(f"Doubling cover attempt {number}: eps={eps}, rescale={rescale}")
                build = doubling_tree_cover(m, eps, rescale=rescale, threads=threads)
                details = {**build.to_dict(), "attempts": number}
                report = self.verification_service.gate(build.cover, m, threads, details)
        return CoverBuildResult(build.cover, report, details)

    def build_planar(
        self,
        g: WeightedGraph,
        m: FiniteMetric,
        eps: float,
        seed: int,
        c: Optional[float] = None,
        threads: Optional[int] = None,
    ) -> CoverBuildResult:
        """
        Separator cover of a planar graph; every retry draws from a fresh derived seed.

        Raises:
            VerificationFailedError: After planar_max_retries failed attempts
        """
        constant = c if c is not None else self.config.planar_constant
        for attempt in self._retrying(self.config.planar_max_retries):
            with attempt:
                number = attempt.retry_state.attempt_number
                attempt_seed = seed if number == 1 else derive_seed(seed, "planar-retry", number)
                build = build_separator_cover(g, eps, constant, attempt_seed, m)
                details = {**build.to_dict(), "c": constant, "attempts": number}
                report = self.verification_service.gate(build.cover, m, threads, details)
        return CoverBuildResult(build.cover, report, details)

    def build_hpf(
        self,
        m: FiniteMetric,
        alpha: float,
        seed: int,
        threads: Optional[int] = None,
    ) -> CoverBuildResult:
        """Cover from an assembled padded family; claims mu / eta."""
        params = PartitionParams(
            alpha=alpha,
            doubling_constant=doubling_constant_estimate(m) if m.n > 1 else 1,
            padding_constant=self.config.hpf_padding_constant,
            size_factor=self.config.hpf_size_factor,
        )
        assembled = assemble_family(m, params, derive_rng(seed, "hpf"), self.config.lll_max_rounds)
        cover = cover_from_family(assembled.family, m)
        details = assembled.to_dict()
        report = self.verification_service.gate(cover, m, threads, details)
        return CoverBuildResult(cover, report, details)

    def build_ramsey(
        self,
        m: FiniteMetric,
        k: int,
        seed: int,
        threads: Optional[int] = None,
    ) -> CoverBuildResult:
        """Ramsey cover with k trees; extraction retries live inside the builder."""
        build = build_ramsey_cover(
            m,
            k,
            derive_rng(seed, "ramsey"),
            attempts_per_eta=self.config.ramsey_attempts_per_eta,
            eta_fallback=self.config.ramsey_eta_fallback,
        )
        details = build.to_dict()
        report = self.verification_service.gate(build.cover, m, threads, details)
        return CoverBuildResult(build.cover, report, details)

    def ramsey_sequence(
        self,
        m: FiniteMetric,
        ks: list[int],
        seed: int,
        threads: Optional[int] = None,
    ) -> dict[int, CoverBuildResult]:
        """
        Ramsey covers for several tree counts on one metric.

        A distortion that grows with k is logged as a warning.

        Returns:
            Results keyed by k, in increasing k
        """
        results: dict[int, CoverBuildResult] = {}
        previous: Optional[tuple[int, float]] = None
        for k in sorted(set(ks)):
            result = self.build_ramsey(m, k, seed, threads)
            distortion = result.report.home_tree_distortion or 1.0
            if previous is not None and distortion > previous[1] * (1.0 + self.config.verify_tolerance):
                logger.warning(
                    f"Ramsey distortion rose from {previous[1]:.4f} with {previous[0]} trees "
                    f"to {distortion:.4f} with {k} trees"
                )
            previous = (k, distortion)
            results[k] = result
        return results

    def build(
        self,
        algorithm: str,
        m: FiniteMetric,
        graph: Optional[WeightedGraph] = None,
        eps: Optional[float] = None,
        alpha: Optional[float] = None,
        k: Optional[int] = None,
        c: Optional[float] = None,
        seed: int = 0,
        threads: Optional[int] = None,
    ) -> CoverBuildResult:
        """
        Dispatch to one builder.

        Raises:
            ParameterError: On unknown algorithms or missing parameters
        """
        if algorithm == "doubling":
            return self.build_doubling(m, _required(eps, "eps"), threads)
        if algorithm == "planar":
            if graph is None:
                raise ParameterError("the planar builder needs a graph input")
            return self.build_planar(graph, m, _required(eps, "eps"), seed, c, threads)
        if algorithm == "hpf":
            return self.build_hpf(m, _required(alpha, "alpha"), seed, threads)
        if algorithm == "ramsey":
            return self.build_ramsey(m, int(_required(k, "k")), seed, threads)
        raise ParameterError(f"unknown algorithm {algorithm!r}")


def _required(value: Optional[T], name: str) -> T:
    if value is None:
        raise ParameterError(f"missing required parameter --{name}")
    return value


class CoverPersistenceService:
    def save_run(
        self,
        directory: Path,
        cover: TreeCover,
        report_path: Path,
        payload: dict,
        histogram: Optional[DistortionReport] = None,
    ) -> dict[str, str]:
        """
        Write a cover directory and its report.

        Returns:
            Paths written, keyed by artifact
        """
        paths = {"cover": str(CoverStore(directory).save(cover))}
        paths.update(self.save_report(report_path, payload, histogram))
        return paths

    def save_report(
        self,
        report_path: Path,
        payload: dict,
        histogram: Optional[DistortionReport] = None,
    ) -> dict[str, str]:
        paths = {"report": str(write_report(payload, report_path))}
        if histogram is not None:
            paths["histogram"] = str(write_histogram(histogram, report_path.parent / HISTOGRAM_FILE))
        return paths

    def load_cover(self, directory: Path) -> TreeCover:
        return CoverStore(directory).load()
