"""Affinity construction and normalized spectral clustering."""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, Field
from scipy import linalg, sparse
from scipy.sparse.csgraph import connected_components
from sklearn.cluster import KMeans
from sklearn.preprocessing import normalize

from .data import Labels
from .errors import ContractError, NumericalError, ShapeError
from .numeric import child_seeds
from .omp import CoefMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AffinityMatrix:
    """Symmetric nonnegative graph weights with zero diagonal (CSR)."""

    matrix: sparse.csr_matrix

    def __post_init__(self):
        m = sparse.csr_matrix(self.matrix, dtype=np.float64, copy=True)
        if m.shape[0] != m.shape[1]:
            raise ShapeError(f"Affinity matrix must be square, got {m.shape}")
        m.eliminate_zeros()
        m.sort_indices()
        if m.nnz and m.data.min() < 0:
            raise ContractError("Affinity weights must be nonnegative")
        if (m != m.T).nnz:
            raise ContractError("Affinity matrix must be symmetric")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def subgraph(self, indices) -> "AffinityMatrix":
        idx = np.asarray(indices)
        return AffinityMatrix(self.matrix[idx][:, idx])

    def to_csv(self, path: str | Path) -> str:
        out_path = Path(path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        coo = self.matrix.tocoo()
        pd.DataFrame({"row": coo.row, "col": coo.col, "value": coo.data}).to_csv(
            out_path, index=False, float_format="%.17g"
        )
        return str(out_path)


class SpectralConfig(BaseModel):
    n_clusters: int = Field(..., ge=2)
    kmeans_restarts: int = Field(20, ge=1)
    kmeans_max_iters: int = Field(300, ge=1)
    rng_seed: int = Field(0, ge=0)
    n_jobs: int = 1


def build_affinity(c: CoefMatrix) -> AffinityMatrix:
    """A = |C| + |C|ᵀ."""
    magnitude = abs(c.matrix).tocsr()
    return AffinityMatrix(magnitude + magnitude.T)


def normalized_laplacian(a: AffinityMatrix) -> np.ndarray:
    """Dense I - D^-1/2 A D^-1/2; zero-degree vertices keep a unit diagonal entry."""
    weights = a.matrix.toarray()
    degree = weights.sum(axis=1)
    inv_sqrt = np.zeros_like(degree)
    connected = degree > 0
    inv_sqrt[connected] = 1.0 / np.sqrt(degree[connected])
    lap = np.eye(a.n) - inv_sqrt[:, None] * weights * inv_sqrt[None, :]
    return 0.5 * (lap + lap.T)


def count_components(a: AffinityMatrix) -> int:
    n_components, _ = connected_components(a.matrix, directed=False)
    return int(n_components)


def eigensolver_error(lap: np.ndarray, wanted: str, cause: Exception) -> NumericalError:
    # scipy surfaces the LAPACK info code in the message, not an iteration count
    return NumericalError(
        f"Symmetric eigensolver (LAPACK dsyevr) did not converge computing {wanted} "
        f"of a {lap.shape[0]}x{lap.shape[0]} Laplacian: {cause}"
    )


def smallest_eigenpairs(lap: np.ndarray, count: int) -> tuple[np.ndarray, np.ndarray]:
    try:
        return linalg.eigh(lap, subset_by_index=[0, count - 1], driver="evr")
    except linalg.LinAlgError as e:
        raise eigensolver_error(lap, f"eigenpairs 0..{count - 1}", e) from e


def _kmeans_restart(embedding: np.ndarray, n_clusters: int, max_iter: int, seed: int):
    km = KMeans(n_clusters=n_clusters, init="k-means++", n_init=1, max_iter=max_iter, random_state=seed)
    km.fit(embedding)
    return float(km.inertia_), km.labels_


def spectral_cluster(a: AffinityMatrix, cfg: SpectralConfig) -> Labels:
    """Normalized spectral clustering with k-means++ restarts; best inertia wins, ties to the lowest restart."""
    if cfg.n_clusters > a.n:
        raise ContractError(f"Cannot form {cfg.n_clusters} clusters from {a.n} points")
    lap = normalized_laplacian(a)
    _, vectors = smallest_eigenpairs(lap, cfg.n_clusters)
    # zero rows stay zero
    embedding = normalize(vectors, norm="l2", axis=1)

    seeds = child_seeds(cfg.rng_seed, cfg.kmeans_restarts)
    runs = Parallel(n_jobs=cfg.n_jobs, prefer="threads")(
        delayed(_kmeans_restart)(embedding, cfg.n_clusters, cfg.kmeans_max_iters, seed) for seed in seeds
    )
    best = int(np.argmin([inertia for inertia, _ in runs]))
    logger.debug(f"spectral: N={a.n} n={cfg.n_clusters} best restart {best} inertia={runs[best][0]:.6g}")
    return Labels.from_raw(runs[best][1])


__all__ = [
    "AffinityMatrix",
    "SpectralConfig",
    "build_affinity",
    "normalized_laplacian",
    "count_components",
    "eigensolver_error",
    "smallest_eigenpairs",
    "spectral_cluster",
]
