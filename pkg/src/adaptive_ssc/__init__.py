from .data import (
    DataMatrix,
    Labels,
    SyntheticSpec,
    load_csv,
    load_matrix,
    normalize_columns,
    generate_synthetic,
    add_gaussian_noise,
)
from .adaptive import KArray, NeighborhoodScore, neighborhood_scores, compute_k_array
from .omp import OmpConfig, CoefMatrix, omp_solve, ssc_omp, ssc_omp_adaptive
from .spectral import AffinityMatrix, SpectralConfig, build_affinity, normalized_laplacian, spectral_cluster
from .metrics import (
    MetricsReport,
    accuracy,
    connectivity,
    subspace_preserving_rate,
    subspace_preserving_error,
    sea_ratio,
    timed,
)
from .config import ExperimentConfig, SweepSpec
from .experiment import run_trial, run_sweep, compare

__all__ = [
    "DataMatrix",
    "Labels",
    "SyntheticSpec",
    "load_csv",
    "load_matrix",
    "normalize_columns",
    "generate_synthetic",
    "add_gaussian_noise",
    "KArray",
    "NeighborhoodScore",
    "neighborhood_scores",
    "compute_k_array",
    "OmpConfig",
    "CoefMatrix",
    "omp_solve",
    "ssc_omp",
    "ssc_omp_adaptive",
    "AffinityMatrix",
    "SpectralConfig",
    "build_affinity",
    "normalized_laplacian",
    "spectral_cluster",
    "MetricsReport",
    "accuracy",
    "connectivity",
    "subspace_preserving_rate",
    "subspace_preserving_error",
    "sea_ratio",
    "timed",
    "ExperimentConfig",
    "SweepSpec",
    "run_trial",
    "run_sweep",
    "compare",
]
