"""Data matrices, ground-truth labels, CSV/NPZ loaders, synthetic generator and noise."""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator

from .errors import ContractError, DegenerateInputError, ParseError, RangeError, ShapeError, SizeError, SpecError
from .numeric import round_half_away

logger = logging.getLogger(__name__)

MIN_POINTS = 3
UNIT_NORM_TOL = 1e-9
ZERO_NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """Column-major point collection: ``values`` has shape (dim, N), one point per column."""

    values: np.ndarray
    unit_normalized: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise ShapeError(f"DataMatrix expects a 2-D array, got {values.ndim}-D")
        dim, n = values.shape
        if dim < 1:
            raise ShapeError("DataMatrix needs dim >= 1")
        if n < MIN_POINTS:
            raise SizeError(f"DataMatrix needs at least {MIN_POINTS} points, got {n}")
        if self.unit_normalized:
            norms = np.linalg.norm(values, axis=0)
            off = np.flatnonzero(np.abs(norms - 1.0) > UNIT_NORM_TOL)
            if off.size:
                raise ShapeError(f"Column {off[0]} has norm {norms[off[0]]:.12g}, expected unit norm")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def n_points(self) -> int:
        return self.values.shape[1]

    def columns(self, indices) -> "DataMatrix":
        return DataMatrix(self.values[:, np.asarray(indices)], unit_normalized=self.unit_normalized)


@dataclass(frozen=True, eq=False)
class Labels:
    """Cluster assignment per point; ground truth and predictions share this type."""

    assignments: np.ndarray
    n_clusters: int

    def __post_init__(self):
        assignments = np.array(self.assignments, dtype=np.int64, copy=True).ravel()
        n_clusters = int(self.n_clusters)
        if n_clusters < 1:
            raise SpecError("Labels need n_clusters >= 1")
        if assignments.size and (assignments.min() < 0 or assignments.max() >= n_clusters):
            raise SpecError(f"Label values must lie in [0, {n_clusters})")
        missing = np.setdiff1d(np.arange(n_clusters), assignments)
        if missing.size:
            raise SpecError(f"Cluster {missing[0]} has no points")
        assignments.flags.writeable = False
        object.__setattr__(self, "assignments", assignments)
        object.__setattr__(self, "n_clusters", n_clusters)

    @classmethod
    def from_raw(cls, values) -> "Labels":
        """Remap arbitrary integer ids to contiguous 0-based indices (sorted by original id)."""
        _, inverse = np.unique(np.asarray(values).ravel(), return_inverse=True)
        return cls(inverse.astype(np.int64), int(inverse.max()) + 1 if inverse.size else 1)

    def __len__(self) -> int:
        return self.assignments.size

    def take(self, indices) -> "Labels":
        return Labels.from_raw(self.assignments[np.asarray(indices)])


class SyntheticSpec(BaseModel):
    n_subspaces: int = Field(5, ge=1)
    subspace_dim: int = Field(5, ge=1)
    ambient_dim: int = Field(50, ge=1)
    points_per_subspace: int = Field(100, ge=1)
    rng_seed: int = Field(0, ge=0)
    orthogonal: bool = True

    @model_validator(mode="after")
    def _check_dims(self):
        if self.subspace_dim >= self.ambient_dim:
            raise ValueError("subspace_dim must be smaller than ambient_dim")
        if self.orthogonal and self.n_subspaces * self.subspace_dim > self.ambient_dim:
            raise ValueError("n_subspaces * subspace_dim must not exceed ambient_dim for orthogonal subspaces")
        if self.n_subspaces * self.points_per_subspace < MIN_POINTS:
            raise ValueError(f"at least {MIN_POINTS} points are required")
        return self


def _read_numeric_table(path: Path) -> tuple[np.ndarray, int]:
    """Parse a headerless-or-headed numeric CSV; returns (table, number of header lines)."""
    try:
        frame = pd.read_csv(path, header=None, dtype=str, keep_default_na=False, skip_blank_lines=True)
    except pd.errors.EmptyDataError as e:
        raise SizeError(f"{path} contains no rows") from e
    except pd.errors.ParserError as e:
        raise ShapeError(f"Ragged rows in {path}: {e}") from e

    header_lines = 0
    first = pd.to_numeric(frame.iloc[0].str.strip(), errors="coerce")
    if first.isna().all():
        frame = frame.iloc[1:]
        header_lines = 1

    if frame.isna().to_numpy().any():
        row = int(np.flatnonzero(frame.isna().any(axis=1).to_numpy())[0])
        raise ShapeError(f"Ragged rows in {path}: row {row + 1 + header_lines} is shorter than the first row")

    table = np.empty(frame.shape, dtype=np.float64)
    for col in range(frame.shape[1]):
        raw = frame.iloc[:, col].str.strip()
        checked = pd.to_numeric(raw, errors="coerce").to_numpy(dtype=np.float64)
        bad = np.flatnonzero(~np.isfinite(checked))
        if bad.size:
            row = int(bad[0])
            raise ParseError(
                f"Malformed numeric cell {raw.iloc[row]!r} at row {row + 1 + header_lines}, column {col + 1} of {path}"
            )
        # pandas' fast float parser can be off by one ulp; numpy's str -> float64 rounds correctly
        table[:, col] = raw.to_numpy(dtype=object).astype(np.float64)
    return table, header_lines


def _split_labels(table: np.ndarray, has_labels: bool, source) -> tuple[np.ndarray, Labels | None]:
    if not has_labels:
        return table, None
    if table.shape[1] < 2:
        raise ShapeError(f"{source}: labeled data needs at least one feature column plus the label column")
    raw = table[:, -1]
    not_int = np.flatnonzero(raw != np.round(raw))
    if not_int.size:
        raise ParseError(f"{source}: label at row {not_int[0] + 1} is not an integer ({raw[not_int[0]]})")
    return table[:, :-1], Labels.from_raw(raw.astype(np.int64))


def load_csv(path: str | Path, has_labels: bool = True) -> tuple[DataMatrix, Labels | None]:
    """Load one point per CSV row; an optional non-numeric header line is skipped."""
    path = Path(path)
    table, _ = _read_numeric_table(path)
    if table.shape[0] < MIN_POINTS:
        raise SizeError(f"{path} holds {table.shape[0]} points, at least {MIN_POINTS} are required")
    features, labels = _split_labels(table, has_labels, path)
    x = DataMatrix(features.T)
    logger.info(f"Loaded {path}: dim={x.dim}, N={x.n_points}, clusters={labels.n_clusters if labels else '-'}")
    return x, labels


def load_npz(path: str | Path, has_labels: bool = True) -> tuple[DataMatrix, Labels | None]:
    """Load the binary format: array ``data`` (N x dim, row per point) and optional ``labels``."""
    path = Path(path)
    with np.load(path) as archive:
        if "data" not in archive:
            raise ShapeError(f"{path} has no 'data' array")
        data = np.asarray(archive["data"], dtype=np.float64)
        raw_labels = archive["labels"] if (has_labels and "labels" in archive) else None
    if data.ndim != 2:
        raise ShapeError(f"{path}: 'data' must be 2-D, got shape {data.shape}")
    if not np.all(np.isfinite(data)):
        row, col = np.argwhere(~np.isfinite(data))[0]
        raise ParseError(f"{path}: non-finite value at row {row + 1}, column {col + 1}")
    if data.shape[0] < MIN_POINTS:
        raise SizeError(f"{path} holds {data.shape[0]} points, at least {MIN_POINTS} are required")
    labels = None
    if has_labels:
        if raw_labels is None:
            raise ShapeError(f"{path} has no 'labels' array")
        if raw_labels.shape != (data.shape[0],):
            raise ShapeError(f"{path}: labels shape {raw_labels.shape} does not match {data.shape[0]} points")
        labels = Labels.from_raw(raw_labels.astype(np.int64))
    return DataMatrix(data.T), labels


def load_matrix(path: str | Path, has_labels: bool = True) -> tuple[DataMatrix, Labels | None]:
    if not Path(path).is_file():
        raise ContractError(f"Data file {path} does not exist")
    if Path(path).suffix.lower() == ".npz":
        return load_npz(path, has_labels)
    return load_csv(path, has_labels)


def write_csv(path: str | Path, x: DataMatrix, labels: Labels | None = None) -> str:
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(x.values.T)
    if labels is not None:
        if len(labels) != x.n_points:
            raise ShapeError(f"{len(labels)} labels for {x.n_points} points")
        frame[frame.shape[1]] = labels.assignments
    frame.to_csv(out_path, header=False, index=False, float_format="%.17g")
    return str(out_path)


def write_labels_csv(path: str | Path, labels: Labels) -> str:
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame({"label": labels.assignments}).to_csv(out_path, header=False, index=False)
    return str(out_path)


def normalize_columns(x: DataMatrix) -> DataMatrix:
    """Scale every column to unit Euclidean norm."""
    norms = np.linalg.norm(x.values, axis=0)
    degenerate = np.flatnonzero(norms < ZERO_NORM_TOL)
    if degenerate.size:
        raise DegenerateInputError(f"Column {degenerate[0]} has near-zero norm ({norms[degenerate[0]]:.3g})")
    return DataMatrix(x.values / norms, unit_normalized=True)


def generate_synthetic(spec: SyntheticSpec) -> tuple[DataMatrix, Labels]:
    """Union of random linear subspaces, unit-normalized, deterministic under ``spec.rng_seed``."""
    rng = np.random.default_rng(spec.rng_seed)
    d = spec.subspace_dim
    if spec.orthogonal:
        # one QR over all subspaces makes the bases mutually orthogonal
        q, _ = np.linalg.qr(rng.standard_normal((spec.ambient_dim, spec.n_subspaces * d)))
        bases = [q[:, s * d:(s + 1) * d] for s in range(spec.n_subspaces)]
    else:
        bases = [np.linalg.qr(rng.standard_normal((spec.ambient_dim, d)))[0] for _ in range(spec.n_subspaces)]

    blocks = [basis @ rng.standard_normal((d, spec.points_per_subspace)) for basis in bases]
    labels = np.repeat(np.arange(spec.n_subspaces), spec.points_per_subspace)
    x = normalize_columns(DataMatrix(np.hstack(blocks)))
    return x, Labels(labels, spec.n_subspaces)


def add_gaussian_noise(
    x: DataMatrix,
    sigma: float,
    variance: float = 0.01,
    rng_seed: int = 0,
    mode: str = "fraction",
) -> DataMatrix:
    """Corrupt data with zero-mean Gaussian noise and re-normalize.

    ``mode="fraction"``: round(sigma * N) randomly chosen columns get additive noise.
    ``mode="blend"``: every column becomes (1 - sigma) * x + sigma * noise.
    """
    if not 0.0 <= sigma <= 1.0:
        raise RangeError(f"sigma must lie in [0, 1], got {sigma}")
    if variance <= 0:
        raise RangeError(f"variance must be positive, got {variance}")
    if not np.all(np.isfinite(x.values)):
        raise RangeError("input matrix contains non-finite values")

    rng = np.random.default_rng(rng_seed)
    std = np.sqrt(variance)
    values = np.array(x.values)
    if mode == "fraction":
        count = round_half_away(sigma * x.n_points)
        if count:
            cols = np.sort(rng.choice(x.n_points, size=count, replace=False))
            values[:, cols] += rng.normal(0.0, std, size=(x.dim, count))
    elif mode == "blend":
        if sigma > 0:
            values = (1.0 - sigma) * values + sigma * rng.normal(0.0, std, size=values.shape)
    else:
        raise SpecError(f"Unknown noise mode {mode!r}; expected 'fraction' or 'blend'")
    return normalize_columns(DataMatrix(values))


__all__ = [
    "DataMatrix",
    "Labels",
    "SyntheticSpec",
    "load_csv",
    "load_npz",
    "load_matrix",
    "write_csv",
    "write_labels_csv",
    "normalize_columns",
    "generate_synthetic",
    "add_gaussian_noise",
]
