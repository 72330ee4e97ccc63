import os
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

from .data import SyntheticSpec
from .errors import SpecError
from .numeric import build_model

SYNTHETIC = "synthetic"
METHODS = ("omp", "adaptive-omp")


def default_workers() -> int:
    return int(os.environ.get("SSC_WORKERS", 1))


def default_log_level() -> str:
    return os.environ.get("SSC_LOG_LEVEL", "INFO").upper()


class ExperimentConfig(BaseModel):
    """One experiment: which data, which method, and the default settings (K=8, eps=1e-6)."""

    dataset: str = SYNTHETIC
    synthetic: SyntheticSpec = Field(default_factory=SyntheticSpec)
    has_labels: bool = True
    method: Literal["omp", "adaptive-omp"] = "omp"
    k: int = Field(8, ge=1)
    eps: float = Field(1e-6, ge=0.0)
    n_clusters: int | None = Field(None, ge=2)
    trials: int = Field(1, ge=1)
    samples_per_cluster: int | None = Field(None, ge=1)
    noise_sigma: float = Field(0.0, ge=0.0, le=1.0)
    noise_variance: float = Field(0.01, gt=0.0)
    noise_mode: Literal["fraction", "blend"] = "fraction"
    seed: int = Field(0, ge=0)
    kmeans_restarts: int = Field(20, ge=1)
    kmeans_max_iters: int = Field(300, ge=1)
    workers: int = Field(default_factory=default_workers, validate_default=True)

    @field_validator("workers")
    @classmethod
    def _check_workers(cls, value: int) -> int:
        # joblib: negative counts are relative to the CPU count, 0 has no meaning
        if value == 0:
            raise ValueError("workers must be non-zero (1 for serial, -1 for all CPUs)")
        return value

    @model_validator(mode="after")
    def _check_method_budget(self):
        if self.method == "adaptive-omp" and self.k < 2:
            raise ValueError("adaptive-omp needs k >= 2")
        return self

    @property
    def dataset_id(self) -> str:
        if self.dataset == SYNTHETIC:
            s = self.synthetic
            return f"synthetic-{s.n_subspaces}x{s.subspace_dim}in{s.ambient_dim}-s{s.rng_seed}"
        return Path(self.dataset).stem

    def with_updates(self, **updates) -> "ExperimentConfig":
        """Copy with re-validation (``model_copy`` would skip it)."""
        return build_model(ExperimentConfig, **{**self.model_dump(), **updates})


SWEEP_AXES = ("n_clusters", "k", "samples_per_cluster", "noise_sigma")


class SweepSpec(BaseModel):
    axis: Literal["n_clusters", "k", "samples_per_cluster", "noise_sigma"]
    values: list[float] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _check_domain(self):
        if self.axis == "noise_sigma":
            if any(not 0.0 <= v <= 1.0 for v in self.values):
                raise ValueError("noise_sigma values must lie in [0, 1]")
            return self
        if any(v != int(v) for v in self.values):
            raise ValueError(f"{self.axis} values must be integers")
        lower = 2 if self.axis == "n_clusters" else 1
        if any(v < lower for v in self.values):
            raise ValueError(f"{self.axis} values must be >= {lower}")
        self.values = [int(v) for v in self.values]
        return self


def load_config_file(path: str | Path) -> dict:
    path = Path(path)
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except (OSError, yaml.YAMLError) as e:
        raise SpecError(f"Failed reading config file {path}: {e}") from e
    if not isinstance(data, dict):
        raise SpecError(f"Config file {path} must hold a mapping, got {type(data).__name__}")
    return data


def resolve_config(config_file: str | Path | None = None, **overrides) -> ExperimentConfig:
    """File values first, then every override that is not None."""
    fields = load_config_file(config_file) if config_file else {}
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return build_model(ExperimentConfig, **fields)


__all__ = [
    "SYNTHETIC",
    "METHODS",
    "SWEEP_AXES",
    "ExperimentConfig",
    "SweepSpec",
    "default_workers",
    "default_log_level",
    "load_config_file",
    "resolve_config",
]
