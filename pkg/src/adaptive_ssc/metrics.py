"""Evaluation quantities: ACCR, TIME, CONN, PERC, SSR and the SEA ratio."""
import logging
import time
from typing import Callable, TypeVar

import numpy as np
import orjson
from joblib import Parallel, delayed
from pydantic import BaseModel, Field
from scipy import linalg
from scipy.optimize import linear_sum_assignment
from scipy.sparse.csgraph import connected_components

from .data import Labels
from .errors import ContractError, ShapeError, UndefinedMetricError
from .omp import CoefMatrix
from .spectral import AffinityMatrix, build_affinity, eigensolver_error, normalized_laplacian

logger = logging.getLogger(__name__)

T = TypeVar("T")


class RunParams(BaseModel):
    dataset: str
    method: str
    n_clusters: int
    k: int
    eps: float
    seed: int
    trial: int = 0
    sigma: float = 0.0
    samples_per_cluster: int | None = None
    n_points: int = 0
    subsample_hash: str = ""


class MetricsReport(BaseModel):
    accr: float = Field(..., ge=0.0, le=100.0)
    time_seconds: float = Field(..., ge=0.0)
    conn: float = Field(..., ge=0.0)
    perc: float = Field(..., ge=0.0, le=100.0)
    ssr: float = Field(..., ge=0.0)
    # None when C has no nonzeros and the ratio is undefined
    sea: float | None = Field(None, ge=0.5, le=1.0)
    params: RunParams

    def to_json(self) -> bytes:
        return orjson.dumps(self.model_dump(), option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS)


def _check_lengths(n: int, truth: Labels, what: str):
    if len(truth) != n:
        raise ShapeError(f"{what} has {n} points but ground truth has {len(truth)}")


def accuracy(pred: Labels, truth: Labels) -> float:
    """Percentage of points labeled correctly under the best matching of cluster ids."""
    if len(pred) != len(truth):
        raise ContractError(f"Prediction length {len(pred)} differs from ground truth length {len(truth)}")
    contingency = np.zeros((pred.n_clusters, truth.n_clusters), dtype=np.int64)
    np.add.at(contingency, (pred.assignments, truth.assignments), 1)
    rows, cols = linear_sum_assignment(contingency, maximize=True)
    return 100.0 * contingency[rows, cols].sum() / len(truth)


def _cluster_connectivity(a: AffinityMatrix, members: np.ndarray) -> float:
    if members.size < 2:
        return 0.0
    sub = a.subgraph(members)
    n_components, _ = connected_components(sub.matrix, directed=False)
    if n_components > 1:
        return 0.0
    lap = normalized_laplacian(sub)
    try:
        second = linalg.eigvalsh(lap, subset_by_index=[1, 1], driver="evr")[0]
    except linalg.LinAlgError as e:
        raise eigensolver_error(lap, "eigenvalue 1", e) from e
    return max(float(second), 0.0)


def connectivity(a: AffinityMatrix, truth: Labels, n_jobs: int = 1) -> float:
    """Minimum over ground-truth clusters of the algebraic connectivity of the induced subgraph."""
    _check_lengths(a.n, truth, "Affinity matrix")
    groups = [np.flatnonzero(truth.assignments == c) for c in range(truth.n_clusters)]
    values = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_cluster_connectivity)(a, members) for members in groups
    )
    return float(min(values))


def _cross_cluster_mask(c: CoefMatrix, truth: Labels):
    _check_lengths(c.n, truth, "Coefficient matrix")
    rows, cols, vals = c.triplets()
    cross = truth.assignments[rows] != truth.assignments[cols]
    return cols, vals, cross


def subspace_preserving_rate(c: CoefMatrix, truth: Labels) -> float:
    """PERC: percentage of columns whose nonzeros all sit on same-cluster rows (all-zero columns count)."""
    cols, _, cross = _cross_cluster_mask(c, truth)
    violating = np.unique(cols[cross]).size
    return 100.0 * (c.n - violating) / c.n


def subspace_preserving_error(c: CoefMatrix, truth: Labels) -> float:
    """SSR: mean over columns of the l1 share of cross-cluster coefficients, in percent."""
    cols, vals, cross = _cross_cluster_mask(c, truth)
    mass = np.bincount(cols, weights=np.abs(vals), minlength=c.n)
    wrong = np.bincount(cols[cross], weights=np.abs(vals[cross]), minlength=c.n)
    share = np.divide(wrong, mass, out=np.zeros(c.n), where=mass > 0)
    return 100.0 * float(share.mean())


def sea_ratio(c: CoefMatrix) -> float:
    """nnz(|C| + |Cᵀ|) / (2 nnz(C)), counted on the sparsity pattern."""
    if c.nnz == 0:
        raise UndefinedMetricError("SEA ratio is undefined for an all-zero coefficient matrix")
    # |C_ij| + |C_ji| cannot cancel, so nnz(A) counts the union of both patterns
    return build_affinity(c).matrix.nnz / (2.0 * c.nnz)


def timed(task: Callable[[], T]) -> tuple[T, float]:
    """Run ``task`` and return (result, wall seconds on a monotonic clock)."""
    start = time.perf_counter()
    result = task()
    return result, time.perf_counter() - start


def evaluate(
    c: CoefMatrix,
    a: AffinityMatrix,
    pred: Labels,
    truth: Labels,
    seconds: float,
    params: RunParams,
    n_jobs: int = 1,
) -> MetricsReport:
    try:
        sea = sea_ratio(c)
    except UndefinedMetricError:
        logger.warning(f"SEA undefined for trial {params.trial}: coefficient matrix is all zero")
        sea = None
    return MetricsReport(
        accr=accuracy(pred, truth),
        time_seconds=seconds,
        conn=connectivity(a, truth, n_jobs=n_jobs),
        perc=subspace_preserving_rate(c, truth),
        ssr=subspace_preserving_error(c, truth),
        sea=sea,
        params=params,
    )


__all__ = [
    "RunParams",
    "MetricsReport",
    "accuracy",
    "connectivity",
    "subspace_preserving_rate",
    "subspace_preserving_error",
    "sea_ratio",
    "timed",
    "evaluate",
]
