"""Orthogonal matching pursuit and the self-expressive drivers built on it.

``omp_solve`` is the classic greedy solver. ``ssc_omp`` codes every point over all
other points with one shared budget; ``ssc_omp_adaptive`` does the same with a
per-point budget taken from a :class:`~.adaptive.KArray`.
"""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, Field
from scipy import linalg, sparse

from .adaptive import KArray, compute_gram
from .data import UNIT_NORM_TOL, DataMatrix
from .errors import BudgetError, ContractError, ShapeError

logger = logging.getLogger(__name__)

ZERO_CORRELATION = 1e-14
# a new atom whose orthogonal remainder is this small is treated as dependent
DEPENDENT_ATOM = 1e-10


class OmpConfig(BaseModel):
    max_atoms: int = Field(8, ge=1)
    residual_threshold: float = Field(1e-6, ge=0.0)


@dataclass(frozen=True, eq=False)
class SparseCode:
    """OMP output: atoms in selection order, their coefficients and the residual norm path."""

    indices: np.ndarray
    values: np.ndarray
    residual_norms: np.ndarray

    @property
    def residual_norm(self) -> float:
        return float(self.residual_norms[-1])

    @property
    def n_iterations(self) -> int:
        return self.indices.size

    def to_dense(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        out[self.indices] = self.values
        return out


@dataclass(frozen=True, eq=False)
class CoefMatrix:
    """Self-expressive matrix C (column i codes point i), stored as CSC with no explicit zeros."""

    matrix: sparse.csc_matrix
    residual_norms: np.ndarray | None = None

    def __post_init__(self):
        m = sparse.csc_matrix(self.matrix, dtype=np.float64, copy=True)
        if m.shape[0] != m.shape[1]:
            raise ShapeError(f"Coefficient matrix must be square, got {m.shape}")
        m.eliminate_zeros()
        m.sort_indices()
        if not np.all(np.isfinite(m.data)):
            raise ContractError("Coefficient matrix holds non-finite values")
        if np.any(m.diagonal() != 0):
            raise ContractError("Coefficient matrix must have a zero diagonal")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        coo = self.matrix.tocoo()
        return coo.row.astype(np.int64), coo.col.astype(np.int64), coo.data

    def column_support(self, i: int) -> np.ndarray:
        return self.matrix.indices[self.matrix.indptr[i]:self.matrix.indptr[i + 1]]

    def column_nnz(self) -> np.ndarray:
        return np.diff(self.matrix.indptr)

    @classmethod
    def from_dense(cls, dense) -> "CoefMatrix":
        return cls(sparse.csc_matrix(np.asarray(dense, dtype=np.float64)))

    @classmethod
    def from_triplets(cls, rows, cols, values, n: int) -> "CoefMatrix":
        return cls(sparse.csc_matrix((values, (rows, cols)), shape=(n, n)))

    def to_csv(self, path: str | Path) -> str:
        out_path = Path(path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        rows, cols, vals = self.triplets()
        frame = pd.DataFrame({"row": rows, "col": cols, "value": vals})
        # first line records N so that trailing all-zero columns survive the round trip
        with open(out_path, "w") as fh:
            fh.write(f"# n={self.n}\n")
            frame.to_csv(fh, index=False, float_format="%.17g")
        return str(out_path)

    @classmethod
    def from_csv(cls, path: str | Path) -> "CoefMatrix":
        path = Path(path)
        with open(path) as fh:
            first = fh.readline().strip()
        if not first.startswith("# n="):
            raise ShapeError(f"{path} is missing the '# n=<N>' size line")
        n = int(first.removeprefix("# n="))
        frame = pd.read_csv(path, comment="#")
        missing = {"row", "col", "value"} - set(frame.columns)
        if missing:
            raise ShapeError(f"{path} lacks columns {sorted(missing)}")
        return cls.from_triplets(frame["row"].to_numpy(), frame["col"].to_numpy(), frame["value"].to_numpy(), n)


def _pursue(
    atoms: np.ndarray,
    target: np.ndarray,
    max_atoms: int,
    tol: float,
    exclude: int | None = None,
    first_correlation: np.ndarray | None = None,
) -> SparseCode:
    """Greedy selection with an incrementally grown QR factor of the active atoms."""
    dim, n_atoms = atoms.shape
    budget = min(max_atoms, n_atoms - (exclude is not None))
    q = np.empty((dim, budget))
    r = np.zeros((budget, budget))
    support: list[int] = []
    residual = target.copy()
    norms = [float(np.linalg.norm(residual))]
    dependent = False
    coef = np.empty(0)

    while len(support) < budget and norms[-1] >= tol:
        if not support and first_correlation is not None:
            corr = np.abs(first_correlation)
        else:
            corr = np.abs(atoms.T @ residual)
        if exclude is not None:
            corr[exclude] = -np.inf
        corr[support] = -np.inf
        j = int(np.argmax(corr))
        if corr[j] < ZERO_CORRELATION:
            break

        m = len(support)
        support.append(j)
        atom = atoms[:, j]
        if not dependent:
            # classical Gram-Schmidt, applied twice
            proj = q[:, :m].T @ atom
            w = atom - q[:, :m] @ proj
            corr2 = q[:, :m].T @ w
            w -= q[:, :m] @ corr2
            rho = float(np.linalg.norm(w))
            if rho > DEPENDENT_ATOM:
                q[:, m] = w / rho
                r[:m, m] = proj + corr2
                r[m, m] = rho
                residual = residual - q[:, m] * (q[:, m] @ residual)
            else:
                dependent = True
        if dependent:
            selected = atoms[:, support]
            coef = linalg.lstsq(selected, target, lapack_driver="gelsd")[0]
            residual = target - selected @ coef
        norms.append(float(np.linalg.norm(residual)))
        assert norms[-1] <= norms[-2] + 1e-12, "residual norm increased"

    k = len(support)
    if k and not dependent:
        coef = linalg.solve_triangular(r[:k, :k], q[:, :k].T @ target, lower=False, check_finite=False)
    return SparseCode(
        indices=np.asarray(support, dtype=np.int64),
        values=np.asarray(coef if k else np.empty(0), dtype=np.float64),
        residual_norms=np.asarray(norms),
    )


def omp_solve(dictionary: DataMatrix | np.ndarray, target, cfg: OmpConfig) -> SparseCode:
    """Sparse code of ``target`` over the unit-norm columns of ``dictionary``.

    Stops when the residual norm drops below ``cfg.residual_threshold``, when
    ``cfg.max_atoms`` atoms are selected, or when no atom correlates with the residual.
    Ties go to the lowest column index.
    """
    if isinstance(dictionary, DataMatrix):
        atoms = dictionary.values
        unit = dictionary.unit_normalized
    else:
        atoms = np.asarray(dictionary, dtype=np.float64)
        if atoms.ndim != 2:
            raise ShapeError(f"Dictionary must be 2-D, got shape {atoms.shape}")
        unit = bool(np.all(np.abs(np.linalg.norm(atoms, axis=0) - 1.0) <= UNIT_NORM_TOL))
    if atoms.shape[1] == 0:
        raise ContractError("Dictionary has no atoms")
    if not unit:
        raise ContractError("Dictionary columns must have unit norm")
    target = np.asarray(target, dtype=np.float64).ravel()
    if target.size != atoms.shape[0]:
        raise ShapeError(f"Target dimension {target.size} does not match dictionary dimension {atoms.shape[0]}")
    return _pursue(atoms, target, cfg.max_atoms, cfg.residual_threshold)


def _code_columns(values, gram, budgets, eps, columns):
    return [(i, _pursue(values, values[:, i], int(budgets[i]), eps, exclude=i, first_correlation=np.array(gram[:, i])))
            for i in columns]


def _self_express(x: DataMatrix, budgets: np.ndarray, eps: float, gram, n_jobs: int) -> CoefMatrix:
    if not x.unit_normalized:
        raise ContractError("Self-expression needs unit-normalized columns; call normalize_columns first")
    if eps < 0:
        raise ContractError(f"Residual threshold must be non-negative, got {eps}")
    n = x.n_points
    if gram is None:
        gram = compute_gram(x)
    elif gram.shape != (n, n):
        raise ShapeError(f"Gram matrix shape {gram.shape} does not match N={n}")

    if n_jobs == 1:
        coded = _code_columns(x.values, gram, budgets, eps, range(n))
    else:
        chunks = np.array_split(np.arange(n), max(1, min(n, 4 * abs(n_jobs))))
        parts = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_code_columns)(x.values, gram, budgets, eps, chunk) for chunk in chunks
        )
        coded = [item for part in parts for item in part]

    coded.sort(key=lambda item: item[0])
    rows = np.concatenate([code.indices for _, code in coded])
    cols = np.concatenate([np.full(code.indices.size, i, dtype=np.int64) for i, code in coded])
    vals = np.concatenate([code.values for _, code in coded])
    residuals = np.array([code.residual_norm for _, code in coded])
    c = sparse.csc_matrix((vals, (rows, cols)), shape=(n, n))
    return CoefMatrix(c, residual_norms=residuals)


def ssc_omp(x: DataMatrix, k: int, eps: float = 1e-6, gram: np.ndarray | None = None, n_jobs: int = 1) -> CoefMatrix:
    """Code each point over the other N-1 points with the same budget ``k``."""
    if not 1 <= k <= x.n_points - 2:
        raise BudgetError(f"K must lie in [1, {x.n_points - 2}] for N={x.n_points}, got {k}")
    return _self_express(x, np.full(x.n_points, int(k)), eps, gram, n_jobs)


def ssc_omp_adaptive(
    x: DataMatrix,
    k_array: KArray,
    eps: float = 1e-6,
    gram: np.ndarray | None = None,
    n_jobs: int = 1,
) -> CoefMatrix:
    """Like :func:`ssc_omp`, but point i gets budget ``k_array.sizes[i]``."""
    if len(k_array) != x.n_points:
        raise ShapeError(f"k-array has {len(k_array)} entries for {x.n_points} points")
    return _self_express(x, k_array.sizes, eps, gram, n_jobs)


__all__ = [
    "OmpConfig",
    "SparseCode",
    "CoefMatrix",
    "omp_solve",
    "ssc_omp",
    "ssc_omp_adaptive",
]
