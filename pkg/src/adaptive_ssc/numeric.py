import numpy as np
from pydantic import BaseModel, ValidationError

from .errors import SpecError


def round_half_away(values):
    """Round to the nearest integer, halves away from zero, on every platform.

    Works on scalars and arrays; returns int64 (or a Python int for scalars).
    """
    arr = np.asarray(values, dtype=np.float64)
    rounded = (np.sign(arr) * np.floor(np.abs(arr) + 0.5)).astype(np.int64)
    if rounded.ndim == 0:
        return int(rounded)
    return rounded


def child_seeds(seed: int, count: int, *key: int) -> list[int]:
    """Independent 32-bit seeds derived from (seed, *key)."""
    seq = np.random.SeedSequence([int(seed), *[int(k) for k in key]])
    return [int(s) for s in seq.generate_state(count)]


def derive_seed(seed: int, *key: int) -> int:
    return child_seeds(seed, 1, *key)[0]


def build_model(model: type[BaseModel], **fields) -> BaseModel:
    """Construct a pydantic model, turning validation failures into SpecError."""
    try:
        return model(**fields)
    except ValidationError as e:
        raise SpecError(f"Invalid {model.__name__}: {e}") from e


__all__ = ["round_half_away", "child_seeds", "derive_seed", "build_model"]
