"""Command-line interface.

Subcommands: ``synth``, ``solve``, ``extract``, ``eval``, ``dedup``, ``render``.
Option values resolve as built-in default < config file < command-line flag;
the config file is ``--config PATH`` or ``$RNMF_CONFIG``.

Exit codes: 0 ok, 1 usage, 2 I/O, 3 numeric failure, 4 no convergence,
5 empty selection.
"""

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import datagen, experiments, extraction
from . import io as rio
from .errors import EmptySelection, NumericFailure, RnmfError
from .matcore import NO_NOISE, column_normalize
from .solver import DEFAULT_BETA, DEFAULT_DELTA, DEFAULT_LAMBDA, DEFAULT_MAX_ITER, SolverConfig, solve

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC, EXIT_NOCONV, EXIT_EMPTY = range(6)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _snr(text):
    text = str(text).strip().lower()
    if text in ("inf", "+inf", "none", "clean"):
        return NO_NOISE
    return float(text)


def _snr_list(text):
    return [_snr(t) for t in str(text).split(",") if t.strip()]


def _bool(text):
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


# name -> (type, default, help); names double as config-file keys
SOLVER_OPTS = {
    "beta": (float, DEFAULT_BETA, "weight of the squared fit term"),
    "lambda": (float, DEFAULT_LAMBDA, "weight of the l1 buffer term"),
    "delta": (float, DEFAULT_DELTA, "stop once ||C_k+1 - C_k||_F <= delta"),
    "max_iter": (int, DEFAULT_MAX_ITER, "iteration cap"),
    "tau_mode": (str, "exact", "Q shrinkage level: exact = lambda/(2 beta), raw = lambda"),
    "lip_mode": (str, "entrywise", "Lipschitz estimate: entrywise or spectral"),
    "lip": (float, None, "fixed Lipschitz constant (overrides lip-mode)"),
    "theta0": (float, 1.0, "initial momentum weight in (0, 1]"),
    "init_scale": (float, None, "upper bound of the random initial entries (default 1/n)"),
    "seed": (int, 0, "random seed"),
}
CHOICES = {"tau_mode": ("exact", "raw"), "lip_mode": ("entrywise", "spectral"),
           "method": ("diagonal", "offdiag"), "norm_kind": ("l2", "l1", "none"),
           "format": ("bin", "csv"), "linkage": ("generators", "touched"),
           "w_rule": ("rows", "nnls")}

COMMAND_OPTS = {
    "synth": {
        "m": (int, None, "rows"), "n": (int, None, "columns"), "r": (int, None, "extreme rays"),
        "seed": (int, 0, "random seed"), "snr_db": (_snr, NO_NOISE, "noise level in dB (inf = none)"),
        "dups": (int, 0, "jittered copies per ray"), "jitter": (float, 0.02, "copy perturbation length"),
        "norm_kind": (str, "l2", "column normalization"), "out": (str, ".", "output directory"),
        "format": (str, "bin", "matrix file format"),
    },
    "solve": {
        "input": (str, None, "data matrix file"), "out": (str, ".", "output directory"),
        "norm_kind": (str, "l2", "normalize input columns first (none to skip)"),
        "trace": (_bool, False, "write trace.csv (k, objective, step delta)"),
        "format": (str, "bin", "matrix file format"), **SOLVER_OPTS,
    },
    "extract": {
        "c": (str, None, "localization matrix file"), "x": (str, None, "data matrix file"),
        "method": (str, "diagonal", "diagonal or offdiag"),
        "threshold": (float, 0.5, "offdiag entry threshold in (0, 1]"),
        "tol": (float, 0.05, "diagonal rule keeps C_ii >= 1 - tol"),
        "linkage": (str, "generators", "offdiag grouping vertices"),
        "w_rule": (str, "rows", "W from rows of C, or an nnls refit on F"),
        "out": (str, ".", "output directory"), "format": (str, "bin", "matrix file format"),
    },
    "eval": {
        "m": (int, None, "rows"), "n": (int, None, "columns"), "r": (int, None, "extreme rays"),
        "snr_list": (_snr_list, None, "comma-separated SNRs in dB, inf = noiseless"),
        "seeds": (int, None, "number of seeds per SNR"), "seed_base": (int, 0, "first seed"),
        "method": (str, "diagonal", "extraction rule"), "tol": (float, 0.05, "diagonal tolerance"),
        "threshold": (float, 0.5, "offdiag threshold"), "linkage": (str, "generators", "offdiag grouping"),
        "oracle": (_bool, False, "also compare against brute force (n <= 16)"),
        "jobs": (int, 1, "parallel worker processes"), "out": (str, ".", "output directory"),
        **{k: v for k, v in SOLVER_OPTS.items() if k != "seed"},
    },
    "dedup": {
        "input": (str, None, "data matrix file"), "gamma": (float, 0.1, "minimum column distance"),
        "out": (str, ".", "output directory"), "format": (str, "bin", "matrix file format"),
    },
    "render": {
        "input": (str, None, "matrix file"), "out": (str, None, "output .pgm path"),
    },
}
REQUIRED = {"synth": ("m", "n", "r"), "solve": ("input",), "extract": ("c", "x"),
            "eval": ("m", "n", "r", "snr_list", "seeds"), "dedup": ("input",),
            "render": ("input", "out")}


def build_parser():
    parser = _Parser(prog="rnmf", description="Separable NMF by entropic accelerated first-order LP.")
    parser.add_argument("--config", help="key = value config file (default $RNMF_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for cmd, opts in COMMAND_OPTS.items():
        p = sub.add_parser(cmd, help=f"{cmd} command")
        p.add_argument("--config", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
        for name, (_typ, default, help_) in opts.items():
            flag = "--" + name.replace("_", "-")
            extra = {"choices": CHOICES[name]} if name in CHOICES else {}
            if _typ is _bool:
                extra = {"action": "store_const", "const": True}
            shown = "" if default is None else f" (default {default})"
            p.add_argument(flag, dest=name, default=None, help=help_ + shown, **extra)
    return parser


def resolve(command, args, config):
    """Merge defaults, config-file values and flags into one dict."""
    out = {}
    for name, (typ, default, _help) in COMMAND_OPTS[command].items():
        raw = getattr(args, name)
        if raw is None:
            raw = config.get(name)
        if raw is None:
            out[name] = default
            continue
        try:
            out[name] = typ(raw)
        except (TypeError, ValueError):
            raise UsageError(f"bad value for {name}: {raw!r}") from None
        if name in CHOICES and out[name] not in CHOICES[name]:
            raise UsageError(f"{name} must be one of {CHOICES[name]}")
    missing = [k for k in REQUIRED[command] if out[k] is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))
    return out


def solver_config(opts, seed=None):
    try:
        return SolverConfig(
            beta=opts["beta"], lam=opts["lambda"], delta=opts["delta"], max_iter=opts["max_iter"],
            lip=opts["lip"], lip_mode=opts["lip_mode"], tau_mode=opts["tau_mode"],
            theta0=opts["theta0"], init_scale=opts["init_scale"],
            seed=opts["seed"] if seed is None else seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _mat_path(out, stem, fmt):
    return Path(out) / f"{stem}.{fmt}"


def _manifest(command, opts, inputs, outputs, t0, **extra):
    m = {
        "command": command,
        "options": opts,
        "inputs": {str(p): rio.file_digest(p) for p in inputs},
        "outputs": {str(p): rio.file_digest(p) for p in outputs},
        "wall_time": time.perf_counter() - t0,
    }
    m.update(extra)
    return m


def cmd_synth(opts, t0):
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    norm = opts["norm_kind"] if opts["norm_kind"] != "none" else "l2"
    try:
        ds = datagen.generate(opts["m"], opts["n"], opts["r"], opts["seed"], norm_kind=norm)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if opts["dups"]:
        ds = datagen.with_duplicates(ds, opts["dups"], opts["jitter"])
    ds = datagen.with_noise(ds, opts["snr_db"])
    xp = _mat_path(out, "X", opts["format"])
    tp = out / "truth.txt"
    rio.write_matrix(xp, ds.X)
    rio.write_indices(tp, ds.truth)
    rio.write_manifest(out / "manifest.json",
                       _manifest("synth", opts, [], [xp, tp], t0, dataset=ds.metadata()))
    return EXIT_OK


def cmd_solve(opts, t0):
    config = solver_config(opts)
    X = rio.read_matrix(opts["input"])
    if opts["norm_kind"] != "none":
        X = column_normalize(X, opts["norm_kind"])
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    failure = None
    try:
        rep = solve(X, config)
    except NumericFailure as exc:
        failure, rep = exc, exc.report
    cp, qp = _mat_path(out, "C", opts["format"]), _mat_path(out, "Q", opts["format"])
    rio.write_matrix(cp, rep.C)
    rio.write_matrix(qp, rep.Q)
    outputs = [cp, qp]
    if opts["trace"]:
        tr = out / "trace.csv"
        lines = ["# k,objective,step_delta"]
        lines += [f"{k + 1},{f:.17g},{d:.17g}" for k, (f, d) in
                  enumerate(zip(rep.objective_trace, rep.step_deltas))]
        tr.write_text("\n".join(lines) + "\n")
        outputs.append(tr)
    extra = dict(config=config.to_dict(), norm_kind=opts["norm_kind"], p=rep.p, **rep.summary())
    if failure is not None:
        extra["error"] = str(failure)
    rio.write_manifest(out / "manifest.json",
                       _manifest("solve", opts, [opts["input"]], outputs, t0, **extra))
    if failure is not None:
        print(f"numeric failure: {failure}", file=sys.stderr)
        return EXIT_NUMERIC
    if not rep.converged:
        print(f"no convergence after {rep.iterations} iterations", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


def cmd_extract(opts, t0):
    if not 0.0 < opts["threshold"] <= 1.0:
        raise UsageError("--threshold must lie in (0, 1]")
    if not 0.0 <= opts["tol"] < 1.0:
        raise UsageError("--tol must lie in [0, 1)")
    C = rio.read_matrix(opts["c"])
    X = rio.read_matrix(opts["x"])
    sel = experiments.select(C, opts["method"], opts["tol"], opts["threshold"], opts["linkage"])
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    ip = out / "indices.txt"
    rio.write_indices(ip, sel.indices)
    if not sel.indices:
        rio.write_manifest(out / "manifest.json",
                           _manifest("extract", opts, [opts["c"], opts["x"]], [ip], t0, count=0))
        print("empty selection", file=sys.stderr)
        return EXIT_EMPTY
    fac = extraction.recover_factors(X, C, sel, opts["w_rule"])
    err = extraction.reconstruction_error(X, fac.F, fac.W)
    fp, wp = _mat_path(out, "F", opts["format"]), _mat_path(out, "W", opts["format"])
    rio.write_matrix(fp, fac.F)
    rio.write_matrix(wp, fac.W)
    rio.write_manifest(out / "manifest.json", _manifest(
        "extract", opts, [opts["c"], opts["x"]], [ip, fp, wp], t0,
        count=len(sel), indices=list(sel.indices), reconstruction_error=err,
        relative_error=math.sqrt(err) / max(np.linalg.norm(X), 1e-300), clamp_mass=fac.clamp_mass))
    return EXIT_OK


def cmd_eval(opts, t0):
    config = solver_config({**opts, "seed": 0})
    seeds = list(range(opts["seed_base"], opts["seed_base"] + opts["seeds"]))
    if opts["seeds"] < 1:
        raise UsageError("--seeds must be >= 1")
    out = Path(opts["out"])
    cell_dir = out / "cells"
    cell_dir.mkdir(parents=True, exist_ok=True)
    results = experiments.run_sweep(
        opts["m"], opts["n"], opts["r"], opts["snr_list"], seeds, config=config, jobs=opts["jobs"],
        method=opts["method"], tol=opts["tol"], threshold=opts["threshold"],
        linkage=opts["linkage"], check_oracle=opts["oracle"])
    # per-cell manifests are the record the table is rebuilt from
    paths = []
    for c in results:
        p = cell_dir / f"snr_{experiments.snr_label(c.snr_db)}_seed_{c.seed}.json"
        rio.write_manifest(p, {"command": "eval-cell", "snr_db": c.snr_db, "seed": c.seed,
                               "hits": c.hits, "total": c.total, "false_positives": c.false_positives,
                               "iterations": c.iterations, "converged": c.converged,
                               "oracle_agree": c.oracle_agree, "error": c.error,
                               "wall_time": c.wall_time})
        paths.append(p)
    reread = [_cell_from_manifest(rio.read_manifest(p)) for p in paths]
    table = out / "table.csv"
    table.write_text(experiments.results_csv(reread))
    summary = experiments.table1_summary(opts["m"], opts["n"], opts["r"], opts["snr_list"], reread)
    (out / "summary.txt").write_text(summary)
    sys.stdout.write(summary)
    failed = [c for c in reread if not c.ok]
    for c in failed:
        print(f"cell snr={c.snr_db} seed={c.seed} failed: {c.error}", file=sys.stderr)
    rio.write_manifest(out / "manifest.json", _manifest(
        "eval", opts, [], [table, out / "summary.txt"], t0, config=config.to_dict(),
        medians={experiments.snr_label(s): experiments.median_hits(reread, s) for s in opts["snr_list"]},
        failed_cells=len(failed)))
    return EXIT_NUMERIC if failed else EXIT_OK


def _cell_from_manifest(d):
    snr = d["snr_db"]
    return experiments.CellResult(
        snr_db=_snr(snr), seed=d["seed"], hits=d["hits"], total=d["total"],
        false_positives=d["false_positives"], iterations=d["iterations"], converged=d["converged"],
        oracle_agree=d["oracle_agree"], error=d["error"], wall_time=d["wall_time"])


def cmd_dedup(opts, t0):
    if not opts["gamma"] > 0:
        raise UsageError("--gamma must be positive")
    X = rio.read_matrix(opts["input"])
    reduced, kept = extraction.dedup(X, opts["gamma"])
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    xp = _mat_path(out, "X", opts["format"])
    kp = out / "kept.txt"
    rio.write_matrix(xp, reduced)
    rio.write_indices(kp, kept)
    rio.write_manifest(out / "manifest.json", _manifest(
        "dedup", opts, [opts["input"]], [xp, kp], t0, kept=len(kept), original=X.shape[1]))
    return EXIT_OK


def render_pgm(C):
    """Map ``C`` linearly onto 0..255; a constant matrix maps to all zeros."""
    C = np.asarray(C, dtype=np.float64)
    lo, hi = float(C.min()), float(C.max())
    if hi > lo:
        pix = np.rint((C - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        pix = np.zeros(C.shape, dtype=np.uint8)
    header = f"P5\n{C.shape[1]} {C.shape[0]}\n255\n".encode("ascii")
    return header + pix.tobytes(order="C"), lo, hi


def read_pgm(path):
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise rio.FormatError("not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    pix = np.frombuffer(parts[4][: w * h], dtype=np.uint8)
    return pix.reshape(h, w), maxval


def decode_heatmap(pgm_path, map_path):
    pix, maxval = read_pgm(pgm_path)
    params = rio.parse_config_text(Path(map_path).read_text())
    lo, hi = float(params["min"]), float(params["max"])
    return lo + pix.astype(np.float64) / maxval * (hi - lo)


def cmd_render(opts, t0):
    C = rio.read_matrix(opts["input"])
    blob, lo, hi = render_pgm(C)
    out = Path(opts["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(blob)
    side = out.with_suffix(".map.txt")
    side.write_text(f"# value = min + pixel / levels * (max - min)\nmin = {lo:.17g}\nmax = {hi:.17g}\n"
                    f"levels = 255\nrows = {C.shape[0]}\ncols = {C.shape[1]}\n")
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "solve": cmd_solve, "extract": cmd_extract, "eval": cmd_eval,
            "dedup": cmd_dedup, "render": cmd_render}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        config = rio.load_config(getattr(args, "config", None))
    except (OSError, rio.FormatError) as exc:
        print(f"config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        opts = resolve(args.command, args, config)
        return COMMANDS[args.command](opts, t0)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rnmf {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, rio.FormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EmptySelection as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_EMPTY
    except (NumericFailure, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except RnmfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
