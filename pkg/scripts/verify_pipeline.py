"""Standalone end-to-end check on the orthogonal-subspace oracle.

Runs both methods on 5 orthogonal 5-dim subspaces in R^50 (100 points each, K=8,
eps=1e-6) and expects ACCR = PERC = 100 and SSR = 0.
Exit code 0 on success, non-zero on failure.
"""
from src.adaptive_ssc.config import ExperimentConfig
from src.adaptive_ssc.errors import SSCError
from src.adaptive_ssc.experiment import load_dataset, run_trial


def main():
    base = ExperimentConfig()
    try:
        dataset = load_dataset(base)
    except SSCError as e:
        print(f"[FAIL] dataset generation error: {e}")
        raise SystemExit(1)
    failures = []
    for method in ("omp", "adaptive-omp"):
        try:
            report = run_trial(base.with_updates(method=method), 0, dataset)
        except SSCError as e:
            print(f"[FAIL] {method}: {e}")
            raise SystemExit(1)
        ok = report.accr == 100.0 and report.perc == 100.0 and report.ssr == 0.0
        print(
            f"[{'OK' if ok else 'FAIL'}] {method}: ACCR={report.accr:.2f} PERC={report.perc:.2f} "
            f"SSR={report.ssr:.4f} SEA={report.sea} TIME={report.time_seconds:.3f}s"
        )
        if not ok:
            failures.append(method)
    raise SystemExit(2 if failures else 0)


if __name__ == "__main__":
    main()
