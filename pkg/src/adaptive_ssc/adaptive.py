"""Data-adaptive dictionary sizes from the Gram-matrix neighborhood structure.

Each point's budget grows with how tightly its nearest neighbors (by angle) gather
around it and shrinks for points in sparse or boundary regions, while the mean
budget stays within one of the requested K.
"""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .data import DataMatrix
from .errors import BudgetError, ContractError, ShapeError
from .numeric import round_half_away

logger = logging.getLogger(__name__)

# spread of the row means below which all points count as equally dense
DEGENERATE_SPREAD = 1e-12


@dataclass(frozen=True, eq=False)
class NeighborhoodScore:
    raw_mean: np.ndarray
    max_d: float
    min_d: float
    normalized: np.ndarray
    base_k: int


@dataclass(frozen=True, eq=False)
class KArray:
    """Per-point dictionary sizes. ``unclamped`` keeps the offset result before clamping."""

    sizes: np.ndarray
    base_k: int
    unclamped: np.ndarray

    def __post_init__(self):
        n = self.sizes.size
        if self.sizes.min() < 1 or self.sizes.max() > max(n - 2, 1):
            raise BudgetError(f"k-array sizes must lie in [1, {n - 2}]")

    def __len__(self) -> int:
        return self.sizes.size

    @classmethod
    def uniform(cls, k: int, n: int) -> "KArray":
        sizes = np.full(n, int(k), dtype=np.int64)
        return cls(sizes, int(k), sizes.copy())

    @property
    def mean_drift(self) -> float:
        """|mean(unclamped) - K|; bounded by 1."""
        return float(abs(self.unclamped.mean() - self.base_k))

    def to_csv(self, path: str | Path) -> str:
        out_path = Path(path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame({"point": np.arange(self.sizes.size), "size": self.sizes}).to_csv(out_path, index=False)
        return str(out_path)


def compute_gram(x: DataMatrix) -> np.ndarray:
    """XᵀX; for unit columns the entries are cosines of inter-point angles."""
    gram = x.values.T @ x.values
    gram.flags.writeable = False
    return gram


def _check_inputs(x: DataMatrix, k: int, gram: np.ndarray | None):
    if not x.unit_normalized:
        raise ContractError("Neighborhood scores need unit-normalized columns; call normalize_columns first")
    if k < 2:
        raise BudgetError(f"K must be at least 2 so that neighbor columns 2..K are non-empty, got {k}")
    if k > x.n_points - 1:
        raise BudgetError(f"K={k} exceeds the {x.n_points - 1} available neighbors")
    if gram is not None and gram.shape != (x.n_points, x.n_points):
        raise ShapeError(f"Gram matrix shape {gram.shape} does not match N={x.n_points}")


def neighborhood_scores(x: DataMatrix, k: int, gram: np.ndarray | None = None) -> NeighborhoodScore:
    """Mean similarity to the K-1 nearest neighbors, min-max rescaled to [0, K]."""
    _check_inputs(x, k, gram)
    if gram is None:
        gram = compute_gram(x)

    # K largest per row, descending; column 0 holds the self-similarity
    n = gram.shape[0]
    top = np.partition(gram, n - k, axis=1)[:, n - k:]
    ordered = np.sort(top, axis=1)[:, ::-1]
    raw_mean = ordered[:, 1:k].mean(axis=1)
    max_d = float(raw_mean.max())
    min_d = float(raw_mean.min())
    spread = max_d - min_d

    if spread <= DEGENERATE_SPREAD:
        normalized = np.full(raw_mean.shape, k / 2.0)
    else:
        normalized = np.clip(k * (raw_mean - min_d) / spread, 0.0, float(k))
    return NeighborhoodScore(raw_mean=raw_mean, max_d=max_d, min_d=min_d, normalized=normalized, base_k=int(k))


def apply_offset(normalized: np.ndarray, k: int) -> np.ndarray:
    """K - round(mean(normalized)) + round(normalized), without clamping."""
    offset = int(k) - round_half_away(float(np.mean(normalized)))
    return offset + round_half_away(normalized)


def compute_k_array(x: DataMatrix, k: int, gram: np.ndarray | None = None) -> KArray:
    scores = neighborhood_scores(x, k, gram)
    unclamped = apply_offset(scores.normalized, k)
    sizes = np.clip(unclamped, 1, x.n_points - 2)
    logger.debug(
        f"k-array: K={k} min={sizes.min()} max={sizes.max()} mean={sizes.mean():.3f} "
        f"clamped={int(np.count_nonzero(sizes != unclamped))}"
    )
    return KArray(sizes=sizes, base_k=int(k), unclamped=unclamped)


__all__ = [
    "NeighborhoodScore",
    "KArray",
    "compute_gram",
    "neighborhood_scores",
    "apply_offset",
    "compute_k_array",
]
