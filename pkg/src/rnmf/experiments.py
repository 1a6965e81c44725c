"""Recovery sweeps over (SNR, seed) cells on synthetic separable data."""

import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import datagen, extraction, oracle
from .errors import RnmfError
from .solver import SolverConfig, solve, with_overrides


@dataclass(frozen=True)
class CellResult:
    snr_db: float
    seed: int
    hits: int | None
    total: int
    false_positives: int | None = None
    iterations: int | None = None
    converged: bool | None = None
    oracle_agree: bool | None = None
    error: str | None = None
    wall_time: float = 0.0

    @property
    def ok(self):
        return self.error is None


def select(C, method="diagonal", tol=0.05, threshold=0.5, linkage="generators"):
    if method == "diagonal":
        return extraction.extract_diagonal(C, tol)
    if method == "offdiag":
        return extraction.extract_offdiag(C, threshold, linkage)
    raise ValueError(f"unknown extraction method {method!r}")


def run_cell(m, n, r, snr_db, seed, config=None, method="diagonal", tol=0.05,
             threshold=0.5, linkage="generators", check_oracle=False):
    """Generate, (optionally) corrupt, solve, extract and score one instance.

    The dataset and the solver both use ``seed``.
    """
    t0 = time.perf_counter()
    config = with_overrides(config or SolverConfig(), seed=seed)
    try:
        ds = datagen.with_noise(datagen.generate(m, n, r, seed), snr_db)
        rep = solve(ds.X, config)
        sel = select(rep.C, method, tol, threshold, linkage)
        hits, total = extraction.recovery_score(sel, ds.truth)
        agree = None
        if check_oracle and n <= oracle.MAX_BRUTE_FORCE_COLS:
            agree = set(sel.indices) == oracle.brute_force_rays(ds.X)
        return CellResult(snr_db, seed, hits, total, extraction.false_positives(sel, ds.truth),
                          rep.iterations, rep.converged, agree,
                          wall_time=time.perf_counter() - t0)
    except (RnmfError, FloatingPointError, ValueError) as exc:
        return CellResult(snr_db, seed, None, r, error=f"{type(exc).__name__}: {exc}",
                          wall_time=time.perf_counter() - t0)


def _run_cell_args(args):
    return run_cell(*args[0], **args[1])


def run_sweep(m, n, r, snr_list, seeds, config=None, jobs=1, **cell_kw):
    """Run every (snr, seed) cell; results are ordered by (snr position, seed)."""
    tasks = [((m, n, r, snr, seed), dict(config=config, **cell_kw))
             for snr in snr_list for seed in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_cell_args, tasks))
    return [_run_cell_args(t) for t in tasks]


def median_hits(results, snr_db):
    """Lower median of hits over the successful seeds of one SNR column."""
    hits = [c.hits for c in results if c.snr_db == snr_db and c.ok]
    return statistics.median_low(hits) if hits else None


def snr_label(snr_db):
    return "noiseless" if snr_db == math.inf else f"{snr_db:g}dB"


def table1_summary(m, n, r, snr_list, results):
    """Text block laid out like a recovery table: one row, one column per SNR."""
    head = ["Data Set"] + [snr_label(s) for s in snr_list]
    cells = [f"{m}x{n} ({r})"]
    for s in snr_list:
        med = median_hits(results, s)
        cells.append("n/a" if med is None else f"{med}/{r}")
    widths = [max(len(a), len(b)) for a, b in zip(head, cells)]
    fmt = " | ".join(f"{{:<{w}}}" for w in widths)
    return fmt.format(*head) + "\n" + fmt.format(*cells) + "\n"


CSV_FIELDS = ("snr_db", "seed", "hits", "total", "false_positives", "iterations", "converged",
              "oracle_agree", "error")


def results_csv(results):
    rows = [",".join(CSV_FIELDS)]
    for c in results:
        vals = []
        for f in CSV_FIELDS:
            v = getattr(c, f)
            vals.append("" if v is None else (f"{v:g}" if isinstance(v, float) else str(v)))
        rows.append(",".join(v.replace(",", ";") for v in vals))
    return "\n".join(rows) + "\n"
