from .config import (
    DatasetConfig,
    ExperimentSpec,
    FeatureConfig,
    GnnConfig,
    OperatorKind,
    PruneConfig,
    SweepConfig,
    SyntheticConfig,
    TrainConfig,
    parse_variant,
)
from .presets import PRESETS, preset
from .reports import (
    CheckReport,
    CorrespondenceManifest,
    LevelSize,
    MetricsReport,
    ReplicateRow,
    StackManifest,
    SummaryRow,
)
