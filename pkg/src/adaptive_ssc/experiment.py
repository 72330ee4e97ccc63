"""Experiment orchestration: trials, sweeps, baseline-vs-adaptive comparison and report files.

A trial subsamples the dataset (deterministically from the master seed and the trial
index), optionally corrupts it, then runs normalization, [k-array], self-expression,
affinity and spectral clustering under one timer before computing every metric.
Both methods of a sweep row see the same subsample.
"""
import hashlib
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from .adaptive import compute_gram, compute_k_array
from .config import METHODS, SYNTHETIC, ExperimentConfig, SweepSpec
from .data import DataMatrix, Labels, add_gaussian_noise, generate_synthetic, load_matrix, normalize_columns
from .errors import ContractError, SizeError, SSCError, TrialError
from .metrics import MetricsReport, RunParams, evaluate, timed
from .numeric import build_model, derive_seed
from .omp import ssc_omp, ssc_omp_adaptive
from .spectral import SpectralConfig, build_affinity, spectral_cluster

logger = logging.getLogger(__name__)

KEY_COLUMNS = ["dataset", "n", "samples", "K", "eps", "sigma", "seed"]
METRIC_COLUMNS = ["accr", "time", "conn", "perc", "ssr", "sea"]
AGGREGATE_COLUMNS = KEY_COLUMNS + ["method"] + METRIC_COLUMNS + ["trials", "error"]
AXIS_COLUMNS = {"n_clusters": "n", "k": "K", "samples_per_cluster": "samples", "noise_sigma": "sigma"}
ALL_SAMPLES = "all"


def load_dataset(cfg: ExperimentConfig) -> tuple[DataMatrix, Labels]:
    if cfg.dataset == SYNTHETIC:
        return generate_synthetic(cfg.synthetic)
    x, labels = load_matrix(cfg.dataset, has_labels=cfg.has_labels)
    if labels is None:
        raise ContractError(f"{cfg.dataset}: experiments need ground-truth labels (has_labels=True)")
    return x, labels


def subsample(labels: Labels, n_clusters: int | None, samples_per_cluster: int | None, seed: int) -> np.ndarray:
    """Sorted point indices: ``n_clusters`` random clusters, then all or ``samples_per_cluster`` points of each."""
    rng = np.random.default_rng(seed)
    if n_clusters is None:
        chosen = np.arange(labels.n_clusters)
    elif n_clusters > labels.n_clusters:
        raise SizeError(f"Requested {n_clusters} clusters but the dataset has {labels.n_clusters}")
    else:
        chosen = np.sort(rng.choice(labels.n_clusters, size=n_clusters, replace=False))

    picked = []
    for cluster in chosen:
        members = np.flatnonzero(labels.assignments == cluster)
        if samples_per_cluster is not None:
            if samples_per_cluster > members.size:
                raise SizeError(f"Cluster {cluster} has {members.size} points, {samples_per_cluster} requested")
            members = rng.choice(members, size=samples_per_cluster, replace=False)
        picked.append(members)
    return np.sort(np.concatenate(picked))


def subsample_hash(indices: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(indices, dtype=np.int64).tobytes()).hexdigest()[:16]


def run_trial(
    cfg: ExperimentConfig,
    trial: int = 0,
    dataset: tuple[DataMatrix, Labels] | None = None,
    keep_outputs: bool = False,
):
    """One end-to-end run; returns a MetricsReport (plus (C, A, labels) when ``keep_outputs``)."""
    trial_seed = derive_seed(cfg.seed, trial)
    try:
        x_all, labels_all = dataset if dataset is not None else load_dataset(cfg)
        indices = subsample(labels_all, cfg.n_clusters, cfg.samples_per_cluster, trial_seed)
        digest = subsample_hash(indices)
        x = x_all.columns(indices)
        truth = labels_all.take(indices)
        if cfg.noise_sigma > 0:
            x = add_gaussian_noise(
                x, cfg.noise_sigma, cfg.noise_variance, derive_seed(trial_seed, 1), mode=cfg.noise_mode
            )
        spectral_cfg = build_model(
            SpectralConfig,
            n_clusters=truth.n_clusters,
            kmeans_restarts=cfg.kmeans_restarts,
            kmeans_max_iters=cfg.kmeans_max_iters,
            rng_seed=derive_seed(trial_seed, 2),
        )

        def pipeline():
            xn = normalize_columns(x)
            if cfg.method == "adaptive-omp":
                gram = compute_gram(xn)
                c = ssc_omp_adaptive(xn, compute_k_array(xn, cfg.k, gram), cfg.eps, gram)
            else:
                c = ssc_omp(xn, cfg.k, cfg.eps)
            a = build_affinity(c)
            return c, a, spectral_cluster(a, spectral_cfg)

        (c, a, pred), seconds = timed(pipeline)
        params = RunParams(
            dataset=cfg.dataset_id,
            method=cfg.method,
            n_clusters=truth.n_clusters,
            k=cfg.k,
            eps=cfg.eps,
            seed=cfg.seed,
            trial=trial,
            sigma=cfg.noise_sigma,
            samples_per_cluster=cfg.samples_per_cluster,
            n_points=x.n_points,
            subsample_hash=digest,
        )
        report = evaluate(c, a, pred, truth, seconds, params)
    except SSCError as e:
        raise TrialError(cfg.dataset_id, cfg.seed, trial, e) from e

    logger.info(
        f"{cfg.method} trial {trial} [{digest}] N={x.n_points} n={truth.n_clusters}: "
        f"ACCR={report.accr:.2f} TIME={seconds:.3f}s PERC={report.perc:.2f} SSR={report.ssr:.2f}"
    )
    if keep_outputs:
        return report, (c, a, pred)
    return report


def _attempt_trial(cfg, trial, dataset):
    try:
        return run_trial(cfg, trial, dataset)
    except TrialError as e:
        logger.error(str(e))
        return e


def run_trials(
    cfg: ExperimentConfig,
    dataset: tuple[DataMatrix, Labels] | None = None,
) -> tuple[list[MetricsReport], list[TrialError]]:
    """All ``cfg.trials`` trials through the worker pool; reports come back ordered by trial index."""
    if dataset is None:
        dataset = load_dataset(cfg)
    outcomes = Parallel(n_jobs=cfg.workers)(
        delayed(_attempt_trial)(cfg, trial, dataset) for trial in range(cfg.trials)
    )
    reports = sorted((o for o in outcomes if isinstance(o, MetricsReport)), key=lambda r: r.params.trial)
    errors = [o for o in outcomes if isinstance(o, TrialError)]
    return reports, errors


def aggregate(reports: list[MetricsReport]) -> dict[str, float]:
    """Mean of every metric over successful trials (SEA over trials where it is defined)."""
    if not reports:
        return {m: float("nan") for m in METRIC_COLUMNS}
    seas = [r.sea for r in reports if r.sea is not None]
    return {
        "accr": float(np.mean([r.accr for r in reports])),
        "time": float(np.mean([r.time_seconds for r in reports])),
        "conn": float(np.mean([r.conn for r in reports])),
        "perc": float(np.mean([r.perc for r in reports])),
        "ssr": float(np.mean([r.ssr for r in reports])),
        "sea": float(np.mean(seas)) if seas else float("nan"),
    }


def aggregate_row(cfg: ExperimentConfig, reports: list[MetricsReport], errors: list[TrialError]) -> dict:
    n = reports[0].params.n_clusters if reports else cfg.n_clusters
    return {
        "dataset": cfg.dataset_id,
        "n": n if n is not None else ALL_SAMPLES,
        "samples": cfg.samples_per_cluster if cfg.samples_per_cluster is not None else ALL_SAMPLES,
        "K": cfg.k,
        "eps": cfg.eps,
        "sigma": cfg.noise_sigma,
        "seed": cfg.seed,
        "method": cfg.method,
        **aggregate(reports),
        "trials": len(reports),
        "error": "; ".join(str(e) for e in errors),
    }


def run_sweep(
    base: ExperimentConfig,
    sweep: SweepSpec,
    dataset: tuple[DataMatrix, Labels] | None = None,
    progress: bool = False,
) -> pd.DataFrame:
    """One aggregated row per sweep value and method, both methods on identical subsamples."""
    if dataset is None:
        dataset = load_dataset(base)
    rows = []
    for value in tqdm(sweep.values, desc=f"sweep {sweep.axis}", disable=not progress):
        for method in METHODS:
            try:
                cfg = base.with_updates(**{sweep.axis: value, "method": method})
            except SSCError as e:
                logger.error(f"Skipping {sweep.axis}={value} ({method}): {e}")
                row = aggregate_row(base, [], [])
                row.update({AXIS_COLUMNS[sweep.axis]: value, "method": method, "error": str(e)})
                rows.append(row)
                continue
            reports, errors = run_trials(cfg, dataset)
            rows.append(aggregate_row(cfg, reports, errors))
    column = AXIS_COLUMNS[sweep.axis]
    rows.sort(key=lambda row: (_sort_key(row[column]), row["method"]))
    return pd.DataFrame(rows, columns=AGGREGATE_COLUMNS)


def _sort_key(value):
    # numbers before the "all" marker
    if isinstance(value, str):
        return (1, 0.0, value)
    return (0, float(value), "")


def split_methods(frame: pd.DataFrame) -> tuple[pd.DataFrame, pd.DataFrame]:
    methods = set(frame["method"])
    if not set(METHODS) <= methods:
        raise ContractError(f"Sweep table must hold both methods {METHODS}, found {sorted(methods)}")
    return frame[frame["method"] == "omp"], frame[frame["method"] == "adaptive-omp"]


def compare(baseline: pd.DataFrame, adaptive: pd.DataFrame) -> pd.DataFrame:
    """Per-row deltas (adaptive - baseline) for every metric, the runtime ratio and a loss flag."""
    left = baseline.assign(**{k: baseline[k].astype(str) for k in KEY_COLUMNS})
    right = adaptive.assign(**{k: adaptive[k].astype(str) for k in KEY_COLUMNS})
    left_keys = set(map(tuple, left[KEY_COLUMNS].to_numpy()))
    right_keys = set(map(tuple, right[KEY_COLUMNS].to_numpy()))
    if left_keys != right_keys or len(left_keys) != len(left) or len(right_keys) != len(right):
        raise ContractError("Aggregates do not share the same sweep rows; cannot compare")

    merged = left[KEY_COLUMNS + METRIC_COLUMNS].merge(
        right[KEY_COLUMNS + METRIC_COLUMNS], on=KEY_COLUMNS, suffixes=("_baseline", "_adaptive"), sort=False
    )
    out = merged[KEY_COLUMNS].copy()
    for metric in METRIC_COLUMNS:
        out[f"{metric}_baseline"] = merged[f"{metric}_baseline"]
        out[f"{metric}_adaptive"] = merged[f"{metric}_adaptive"]
        out[f"{metric}_delta"] = merged[f"{metric}_adaptive"] - merged[f"{metric}_baseline"]
    out["time_ratio"] = merged["time_adaptive"] / merged["time_baseline"]
    out["adaptive_loses"] = out["accr_delta"] < 0
    return out


def write_trial_reports(reports: list[MetricsReport], out_dir: str | Path) -> list[str]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for report in reports:
        path = out_dir / f"{report.params.method}_trial_{report.params.trial:03d}.json"
        path.write_bytes(report.to_json())
        paths.append(str(path))
    return paths


def write_table(frame: pd.DataFrame, path: str | Path) -> str:
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    if "eps" in frame.columns:
        # shortest round-trip repr; %.6f would write 1e-7 as 0.000000
        frame = frame.assign(eps=frame["eps"].map(lambda v: repr(float(v))))
    frame.to_csv(out_path, index=False, float_format="%.6f")
    return str(out_path)


def plot_data(frame: pd.DataFrame, axis: str) -> pd.DataFrame:
    """Long format (x, series, value) with one series per method and metric."""
    column = AXIS_COLUMNS[axis]
    long = frame.melt(id_vars=[column, "method"], value_vars=METRIC_COLUMNS, var_name="metric")
    return pd.DataFrame({
        "x": long[column],
        "series": long["method"] + ":" + long["metric"],
        "value": long["value"],
    })


__all__ = [
    "KEY_COLUMNS",
    "METRIC_COLUMNS",
    "AGGREGATE_COLUMNS",
    "AXIS_COLUMNS",
    "load_dataset",
    "subsample",
    "subsample_hash",
    "run_trial",
    "run_trials",
    "aggregate",
    "aggregate_row",
    "run_sweep",
    "split_methods",
    "compare",
    "write_trial_reports",
    "write_table",
    "plot_data",
]
