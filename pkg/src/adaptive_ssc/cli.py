"""Command-line surface: cluster, sweep, compare, k-array, synth, noise."""
import logging
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
import typer
from rich.console import Console
from rich.table import Table

from .adaptive import compute_k_array
from .config import SWEEP_AXES, ExperimentConfig, SweepSpec, default_log_level, resolve_config
from .data import SyntheticSpec, add_gaussian_noise, generate_synthetic, load_matrix, normalize_columns, write_csv, write_labels_csv
from .errors import SSCError
from .experiment import (
    AXIS_COLUMNS,
    METRIC_COLUMNS,
    aggregate,
    compare as compare_tables,
    load_dataset,
    plot_data,
    run_sweep,
    run_trial,
    run_trials,
    split_methods,
    write_table,
    write_trial_reports,
)
from .numeric import build_model

app = typer.Typer(help="Data-adaptive SSC-OMP experiments.", no_args_is_help=True, add_completion=False)
console = Console()
logger = logging.getLogger(__name__)

ConfigOpt = typer.Option(None, "--config", "-c", help="YAML file supplying any experiment field")
DatasetOpt = typer.Option(None, "--dataset", "-d", help="CSV/NPZ path, or 'synthetic'")
MethodOpt = typer.Option(None, "--method", "-m", help="omp | adaptive-omp")
KOpt = typer.Option(None, "--k", "-k", help="Dictionary size K (default 8)")
EpsOpt = typer.Option(None, "--eps", help="Residual threshold (default 1e-6)")
ClustersOpt = typer.Option(None, "--n-clusters", "-n", help="Clusters drawn per trial (default: all)")
TrialsOpt = typer.Option(None, "--trials", "-t")
SamplesOpt = typer.Option(None, "--samples", help="Points drawn per cluster (default: all)")
SigmaOpt = typer.Option(None, "--sigma", help="Noise rate in [0, 1]")
VarianceOpt = typer.Option(None, "--noise-variance")
NoiseModeOpt = typer.Option(None, "--noise-mode", help="fraction | blend")
SeedOpt = typer.Option(None, "--seed", "-s")
RestartsOpt = typer.Option(None, "--kmeans-restarts")
WorkersOpt = typer.Option(None, "--workers", "-w", help="Worker-pool size (env SSC_WORKERS)")


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging")):
    logging.basicConfig(
        level=logging.DEBUG if verbose else default_log_level(),
        format="%(asctime)s - %(levelname)s - %(message)s",
        force=True,
    )


def _fail(e: Exception):
    console.print(f"[bold red]Error:[/] {e}")
    raise typer.Exit(code=1)


def _experiment_config(config, **fields) -> ExperimentConfig:
    rename = {"samples": "samples_per_cluster", "sigma": "noise_sigma"}
    return resolve_config(config, **{rename.get(k, k): v for k, v in fields.items()})


def _fmt(value) -> str:
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return "-"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def _reports_table(reports, title: str) -> Table:
    table = Table(title=title)
    for col in ["trial", "N", "n", "ACCR %", "TIME s", "CONN", "PERC %", "SSR %", "SEA"]:
        table.add_column(col, justify="right")
    for r in reports:
        table.add_row(
            str(r.params.trial), str(r.params.n_points), str(r.params.n_clusters),
            _fmt(r.accr), _fmt(r.time_seconds), _fmt(r.conn), _fmt(r.perc), _fmt(r.ssr), _fmt(r.sea),
        )
    if len(reports) > 1:
        mean = aggregate(reports)
        table.add_row("mean", "", "", *[_fmt(mean[m]) for m in METRIC_COLUMNS], style="bold")
    return table


def _frame_table(frame: pd.DataFrame, title: str) -> Table:
    table = Table(title=title)
    for col in frame.columns:
        table.add_column(str(col), justify="right")
    for row in frame.itertuples(index=False):
        table.add_row(*[_fmt(v) for v in row])
    return table


@app.command()
def cluster(
    config: Optional[Path] = ConfigOpt,
    dataset: Optional[str] = DatasetOpt,
    method: Optional[str] = MethodOpt,
    k: Optional[int] = KOpt,
    eps: Optional[float] = EpsOpt,
    n_clusters: Optional[int] = ClustersOpt,
    trials: Optional[int] = TrialsOpt,
    samples: Optional[int] = SamplesOpt,
    sigma: Optional[float] = SigmaOpt,
    noise_variance: Optional[float] = VarianceOpt,
    noise_mode: Optional[str] = NoiseModeOpt,
    seed: Optional[int] = SeedOpt,
    kmeans_restarts: Optional[int] = RestartsOpt,
    workers: Optional[int] = WorkersOpt,
    out_dir: Optional[Path] = typer.Option(None, "--out-dir", help="Write one JSON report per trial"),
    dump_dir: Optional[Path] = typer.Option(None, "--dump-dir", help="Dump C, A and labels of trial 0"),
):
    """Run one configuration for the requested number of trials."""
    try:
        cfg = _experiment_config(
            config, dataset=dataset, method=method, k=k, eps=eps, n_clusters=n_clusters, trials=trials,
            samples=samples, sigma=sigma, noise_variance=noise_variance, noise_mode=noise_mode, seed=seed,
            kmeans_restarts=kmeans_restarts, workers=workers,
        )
        data = load_dataset(cfg)
        reports, errors = run_trials(cfg, data)
        if out_dir:
            write_trial_reports(reports, out_dir)
        if dump_dir and reports:
            _, (c, a, pred) = run_trial(cfg, 0, data, keep_outputs=True)
            c.to_csv(dump_dir / "coefficients.csv")
            a.to_csv(dump_dir / "affinity.csv")
            write_labels_csv(dump_dir / "labels.csv", pred)
    except SSCError as e:
        _fail(e)

    console.print(_reports_table(reports, f"{cfg.method} on {cfg.dataset_id} (K={cfg.k}, eps={cfg.eps:g})"))
    if errors:
        for e in errors:
            console.print(f"[red]{e}[/]")
        raise typer.Exit(code=1)


@app.command()
def sweep(
    axis: str = typer.Option(..., "--axis", "-a", help=" | ".join(SWEEP_AXES)),
    values: str = typer.Option(..., "--values", help="Comma-separated sweep values, e.g. 5,15,25,35"),
    out: Path = typer.Option(Path("results/aggregate.csv"), "--out", "-o"),
    plot_out: Optional[Path] = typer.Option(None, "--plot-out", help="Long-format (x, series, value) CSV"),
    config: Optional[Path] = ConfigOpt,
    dataset: Optional[str] = DatasetOpt,
    k: Optional[int] = KOpt,
    eps: Optional[float] = EpsOpt,
    n_clusters: Optional[int] = ClustersOpt,
    trials: Optional[int] = TrialsOpt,
    samples: Optional[int] = SamplesOpt,
    sigma: Optional[float] = SigmaOpt,
    noise_variance: Optional[float] = VarianceOpt,
    noise_mode: Optional[str] = NoiseModeOpt,
    seed: Optional[int] = SeedOpt,
    kmeans_restarts: Optional[int] = RestartsOpt,
    workers: Optional[int] = WorkersOpt,
):
    """Grid over one axis; both methods per value on paired subsamples."""
    try:
        spec = build_model(SweepSpec, axis=axis, values=[float(v) for v in values.split(",") if v.strip()])
        cfg = _experiment_config(
            config, dataset=dataset, k=k, eps=eps, n_clusters=n_clusters, trials=trials, samples=samples,
            sigma=sigma, noise_variance=noise_variance, noise_mode=noise_mode, seed=seed,
            kmeans_restarts=kmeans_restarts, workers=workers,
        )
        frame = run_sweep(cfg, spec, progress=True)
    except (SSCError, ValueError) as e:
        _fail(e)

    write_table(frame, out)
    if plot_out:
        write_table(plot_data(frame, spec.axis), plot_out)
    console.print(_frame_table(frame.drop(columns=["error"]), f"Sweep over {spec.axis} -> {out}"))
    failed = frame[frame["error"].astype(str).str.len() > 0]
    if len(failed):
        for _, row in failed.iterrows():
            console.print(f"[red]{row['method']} {spec.axis}={row[AXIS_COLUMNS[spec.axis]]}: {row['error']}[/]")
        raise typer.Exit(code=1)


@app.command()
def compare(
    baseline: Path = typer.Argument(..., help="Aggregate CSV (or a sweep CSV holding both methods)"),
    adaptive: Optional[Path] = typer.Argument(None, help="Aggregate CSV of the adaptive method"),
    out: Optional[Path] = typer.Option(None, "--out", "-o"),
):
    """Per-row deltas adaptive - baseline, runtime ratio and rows where adaptive loses."""
    try:
        left = pd.read_csv(baseline, keep_default_na=True)
        if adaptive is None:
            left, right = split_methods(left)
        else:
            right = pd.read_csv(adaptive, keep_default_na=True)
        table = compare_tables(left, right)
    except (SSCError, OSError, KeyError) as e:
        _fail(e)

    if out:
        write_table(table, out)
    shown = ["n", "samples", "K", "sigma", "accr_baseline", "accr_adaptive", "accr_delta",
             "sea_delta", "ssr_delta", "time_ratio", "adaptive_loses"]
    console.print(_frame_table(table[shown], "adaptive-omp vs omp"))
    losses = int(table["adaptive_loses"].sum())
    if losses:
        console.print(f"[yellow]adaptive loses ACCR on {losses} of {len(table)} rows[/]")


@app.command("k-array")
def k_array(
    input_path: Path = typer.Argument(..., help="CSV/NPZ data file"),
    k: int = typer.Option(8, "--k", "-k"),
    has_labels: bool = typer.Option(True, "--labels/--no-labels"),
    out: Path = typer.Option(Path("k_array.csv"), "--out", "-o"),
):
    """Dump the per-point dictionary sizes."""
    try:
        x, _ = load_matrix(input_path, has_labels=has_labels)
        sizes = compute_k_array(normalize_columns(x), k)
    except SSCError as e:
        _fail(e)
    sizes.to_csv(out)
    console.print(
        f"K={k}: min={sizes.sizes.min()} max={sizes.sizes.max()} mean={sizes.sizes.mean():.3f} -> {out}"
    )


@app.command()
def synth(
    n_subspaces: int = typer.Option(5, "--subspaces"),
    subspace_dim: int = typer.Option(5, "--subspace-dim"),
    ambient_dim: int = typer.Option(50, "--ambient-dim"),
    points: int = typer.Option(100, "--points", help="Points per subspace"),
    seed: int = typer.Option(0, "--seed", "-s"),
    random_bases: bool = typer.Option(False, "--random-bases", help="Non-orthogonal subspaces"),
    out: Path = typer.Option(Path("synthetic.csv"), "--out", "-o"),
):
    """Write a labeled union-of-subspaces CSV."""
    try:
        spec = build_model(
            SyntheticSpec, n_subspaces=n_subspaces, subspace_dim=subspace_dim, ambient_dim=ambient_dim,
            points_per_subspace=points, rng_seed=seed, orthogonal=not random_bases,
        )
        x, labels = generate_synthetic(spec)
    except SSCError as e:
        _fail(e)
    write_csv(out, x, labels)
    console.print(f"{x.n_points} points in {x.dim} dims, {labels.n_clusters} subspaces -> {out}")


@app.command()
def noise(
    input_path: Path = typer.Argument(..., help="CSV/NPZ data file"),
    sigma: float = typer.Option(..., "--sigma"),
    variance: float = typer.Option(0.01, "--variance"),
    seed: int = typer.Option(0, "--seed", "-s"),
    mode: str = typer.Option("fraction", "--mode", help="fraction | blend"),
    has_labels: bool = typer.Option(True, "--labels/--no-labels"),
    out: Path = typer.Option(Path("noisy.csv"), "--out", "-o"),
):
    """Corrupt a data file with Gaussian noise (output is unit-normalized)."""
    try:
        x, labels = load_matrix(input_path, has_labels=has_labels)
        noisy = add_gaussian_noise(x, sigma, variance, seed, mode=mode)
    except SSCError as e:
        _fail(e)
    write_csv(out, noisy, labels)
    console.print(f"sigma={sigma} ({mode}) applied to {noisy.n_points} points -> {out}")


__all__ = ["app"]
