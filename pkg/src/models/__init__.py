# Models package
from .schemas import (
    ExperimentConfig,
    EpochMetrics,
    GenConfig,
    LossKind,
    MetricReport,
    ModelConfig,
    RunManifest,
    SurvivalRecord,
)
