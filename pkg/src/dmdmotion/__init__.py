"""Motion detection in fixed-camera video via randomized low-rank spectral decomposition.

The pieces compose left to right: a randomized SVD sketches the snapshot
matrix, the reduced one-step operator's eigendecomposition separates slowly
evolving background modes from everything else, and thresholding the residual
against the reconstructed background yields per-frame foreground masks.
"""

from .background import (
    ForegroundMaskSequence,
    FourierModes,
    ModePartition,
    ResidualSequence,
    background_model,
    filter_masks,
    fourier_modes,
    median_filter,
    partition_modes,
    partition_modes_by_threshold,
    residual,
    threshold_mask,
)
from .dmd import (
    FIRST_FRAME,
    MEDIAN_FRAME,
    DmdDecomposition,
    SnapshotMatrix,
    deterministic_dmd,
    rdmd,
    reconstruct,
)
from .errors import DegenerateDataError
from .evaluation import (
    ConfusionCounts,
    RocCurve,
    best_f_over_thresholds,
    confusion,
    f_measure,
    f_measure_from_rates,
    precision,
    recall,
    roc_curve,
    specificity,
)
from .linalg import (
    SketchConfig,
    SvdFactors,
    deterministic_svd,
    rsvd,
    rsvd_error_bound,
)
from .pipeline import RunConfig, RunReport, benchmark_svd, run_bgsub
from .synthetic import (
    MovingRect,
    PlantedSystem,
    SyntheticSpec,
    decaying_spectrum_matrix,
    generate_synthetic,
    planted_linear_snapshots,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateDataError",
    "SvdFactors",
    "SketchConfig",
    "deterministic_svd",
    "rsvd",
    "rsvd_error_bound",
    "SnapshotMatrix",
    "DmdDecomposition",
    "FIRST_FRAME",
    "MEDIAN_FRAME",
    "rdmd",
    "deterministic_dmd",
    "reconstruct",
    "FourierModes",
    "ModePartition",
    "ResidualSequence",
    "ForegroundMaskSequence",
    "fourier_modes",
    "partition_modes",
    "partition_modes_by_threshold",
    "background_model",
    "residual",
    "threshold_mask",
    "median_filter",
    "filter_masks",
    "ConfusionCounts",
    "RocCurve",
    "confusion",
    "recall",
    "precision",
    "specificity",
    "f_measure",
    "f_measure_from_rates",
    "roc_curve",
    "best_f_over_thresholds",
    "MovingRect",
    "SyntheticSpec",
    "generate_synthetic",
    "PlantedSystem",
    "planted_linear_snapshots",
    "decaying_spectrum_matrix",
    "RunConfig",
    "RunReport",
    "run_bgsub",
    "benchmark_svd",
    "__version__",
]
