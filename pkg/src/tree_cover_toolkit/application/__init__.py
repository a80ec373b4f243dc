from .run_config import RunConfig
from .services import (
    CoverBuildResult,
    CoverBuildService,
    CoverPersistenceService,
    VerificationFailedError,
    VerificationService,
)
from .use_cases import (
    BuildCoverUseCase,
    GenerateInstanceUseCase,
    HardnessWitnessUseCase,
    MetricStatsUseCase,
    NetsUseCase,
    VerifyCoverUseCase,
)

__all__ = [
    "RunConfig",
    "CoverBuildResult",
    "CoverBuildService",
    "CoverPersistenceService",
    "VerificationFailedError",
    "VerificationService",
    "BuildCoverUseCase",
    "GenerateInstanceUseCase",
    "HardnessWitnessUseCase",
    "MetricStatsUseCase",
    "NetsUseCase",
    "VerifyCoverUseCase",
]
