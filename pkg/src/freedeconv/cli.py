"""Command-line interface: deconvolve, bound, simulate, weingarten-check.

Exit codes: 0 on success, 2 when some grid points did not converge (or a
Weingarten word failed its 3 SE check), 1 on any error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import tempfile
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .additive_solver import CauchyEstimate, additive_cauchy_estimator
from .bounds import BoundInputs, bound
from .cauchy_deconv import TAPERS, fourier_deconvolve, sparse_deconvolve
from .errors import DeconvError, EtaBelowThreshold, UnsupportedWord
from .moments import (
    WORD_PAIRS,
    MomentSet,
    NoiseModel,
    finite_n_mixed_moment,
    moment_set,
)
from .multiplicative_solver import multiplicative_cauchy_estimator
from .randmat import (
    FIG4_KAPPA,
    PRESETS,
    bound_inputs_for,
    monte_carlo_mixed_moment,
    preset,
    rng_stream,
    run_experiment,
)
from .transforms import Atomic, Empirical, MarchenkoPastur, Semicircle

log = logging.getLogger("freedeconv")

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2
NOISE_KINDS = ("semicircle", "marchenko-pastur", "atoms", "empirical-file")


class CliError(Exception):
    """User-facing error; the message goes to stderr and the exit code is 1."""


# ---------------------------------------------------------------------------
# formats


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.16e}"


def read_eigenvalues(path) -> np.ndarray:
    """One real number per line; blank lines and ``#`` comments are ignored."""
    vals = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            vals.append(float(line))
        except ValueError:
            raise CliError(f"{path}:{lineno}: not a number: {line!r}") from None
    if not vals:
        raise CliError("no eigenvalues")
    arr = np.asarray(vals)
    if not np.all(np.isfinite(arr)):
        raise CliError(f"{path}: eigenvalues must be finite")
    return arr


def _atomic_write(path: Path, data: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path, obj) -> None:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest(args, argv, started: float, inputs=(), extra=None) -> dict:
    flags = {k: v for k, v in vars(args).items() if k != "func"}
    out = {
        "command": args.command,
        "argv": list(argv),
        "flags": flags,
        "seed": flags.get("seed"),
        "version": __version__,
        "inputs": {str(p): _digest(p) for p in inputs},
        "elapsed_seconds": time.perf_counter() - started,
    }
    if extra:
        out.update(extra)
    return out


# ---------------------------------------------------------------------------
# noise configuration


def _parse_params(text: str) -> dict:
    params = {}
    for item in filter(None, text.split(",")):
        if "=" not in item:
            raise CliError(f"noise parameter {item!r} is not key=value")
        k, v = item.split("=", 1)
        params[k.strip()] = v.strip()
    return params


def _float(params, key, default=None) -> float:
    if key not in params:
        if default is None:
            raise CliError(f"noise parameter {key!r} is required")
        return default
    try:
        return float(params[key])
    except ValueError:
        raise CliError(f"noise parameter {key}={params[key]!r} is not a number") from None


def parse_noise(spec: str, moments: Optional[str] = None, sup_norm: Optional[float] = None
                ) -> NoiseModel:
    """Parse ``kind:key=value,...`` into a :class:`NoiseModel`.

    semicircle:variance=V[,mean=M]; marchenko-pastur:ratio=L[,scale=S];
    atoms:values=x1|x2|..[,weights=w1|w2|..]; empirical-file:path=FILE.
    """
    kind, _, rest = spec.partition(":")
    if kind not in NOISE_KINDS:
        raise CliError(f"unknown noise kind {kind!r}; choose from {', '.join(NOISE_KINDS)}")
    p = _parse_params(rest)
    if kind == "semicircle":
        measure = Semicircle(_float(p, "mean", 0.0), _float(p, "variance"))
    elif kind == "marchenko-pastur":
        measure = MarchenkoPastur(_float(p, "ratio"), _float(p, "scale", 1.0))
    elif kind == "atoms":
        if "values" not in p:
            raise CliError("atoms noise needs values=x1|x2|...")
        try:
            locs = np.array([float(v) for v in p["values"].split("|")])
            w = (np.array([float(v) for v in p["weights"].split("|")]) if "weights" in p
                 else np.full(locs.size, 1.0 / locs.size))
        except ValueError:
            raise CliError("atoms values and weights must be numbers") from None
        measure = Atomic(locs, w)
    else:
        if "path" not in p:
            raise CliError("empirical-file noise needs path=FILE")
        measure = Empirical(read_eigenvalues(p["path"]))
    if sup_norm is None and isinstance(measure, MarchenkoPastur):
        sup_norm = measure.edges[1]
    if moments is not None:
        raw = _parse_moments(moments, "noise moments")
        return NoiseModel(measure, MomentSet(raw, sup_norm), sup_norm)
    return NoiseModel(measure, sup_norm=sup_norm)


def _parse_moments(text: str, what: str) -> np.ndarray:
    try:
        raw = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise CliError(f"{what} must be six comma-separated numbers") from None
    if raw.size != 6:
        raise CliError(f"{what} must have exactly six entries, got {raw.size}")
    return raw


# ---------------------------------------------------------------------------
# deconvolve


def _grid_arg(text: Optional[str]):
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 3:
        raise CliError("--grid is start,stop,num")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise CliError("--grid is start,stop,num") from None


def cmd_deconvolve(args, argv) -> int:
    started = time.perf_counter()
    eigs = Empirical(read_eigenvalues(args.eigs))
    noise = parse_noise(args.noise, args.noise_moments, args.noise_sup_norm)
    grid = _grid_arg(args.grid)
    if args.case == "additive":
        est = additive_cauchy_estimator(eigs, noise, eta=args.eta, grid=grid, num=args.num)
        extra = {}
    else:
        if args.eta is None:
            raise CliError("the multiplicative case needs --eta")
        try:
            est, profile = multiplicative_cauchy_estimator(
                eigs, noise, args.eta, grid=grid, num=args.num,
                allow_below_threshold=args.force, negative="clip" if args.clip_negative else "reject")
        except EtaBelowThreshold as exc:
            raise CliError(f"{exc} (use --force to override)") from None
        b1 = eigs.mean / noise.moments.m(1)
        extra = {} if profile is None else {"xi0": profile.xi0, "eta0": profile.eta0 * b1}
    out = Path(args.out)
    stage1 = out.with_name(out.name + "_stage1.csv")
    rows = [(t, v, p.converged, p.iterations, p.residual)
            for t, v, p in zip(est.grid, est.values, est.points)]
    write_csv(stage1, ("t", "c_hat", "converged", "iterations", "residual"), rows)

    if args.method == "fourier":
        cutoff = "auto" if args.cutoff is None else args.cutoff
        dens = fourier_deconvolve(est, cutoff, mse_estimate=args.mse, taper=args.taper)
        stage2 = out.with_name(out.name + "_density.csv")
        write_csv(stage2, ("x", "density"), zip(dens.grid, dens.values))
        extra.update(cutoff=dens.cutoff, mass_before_renormalisation=dens.mass)
    else:
        atoms = np.linspace(est.grid[0], est.grid[-1], args.atoms)
        fit = sparse_deconvolve(est, args.lam, atoms)
        stage2 = out.with_name(out.name + "_atoms.csv")
        keep = fit.weights > 0
        write_csv(stage2, ("x", "weight"), zip(fit.atoms[keep], fit.weights[keep]))
        extra.update(objective=fit.objective, sweeps=fit.sweeps)
    n_bad = int(np.sum(~est.converged)) if est.points else 0
    extra.update(eta=est.eta, unconverged=n_bad, outputs=[str(stage1), str(stage2)])
    inputs = [args.eigs]
    write_json(out.with_name(out.name + "_manifest.json"),
               manifest(args, argv, started, inputs, extra))
    if n_bad:
        print(f"warning: {n_bad} of {est.grid.size} grid points did not converge", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


# ---------------------------------------------------------------------------
# bound


def _bound_inputs(args) -> BoundInputs:
    if args.model is not None:
        spec = preset(args.model, N=args.N)
        kappa = args.kappa
        if kappa is None and args.model == "fig4":
            kappa = FIG4_KAPPA
        inp = bound_inputs_for(spec, kappa)
        if args.C_A is not None:
            inp = BoundInputs(inp.case, inp.N, inp.momentsA, inp.momentsB, inp.mu1_moments,
                              inp.momentsObserved, args.C_A, inp.c, inp.kappa)
        return inp
    if args.case is None or args.noise_moments is None or args.signal_moments is None:
        raise CliError("give --model, or --case with --noise-moments and --signal-moments")
    a = MomentSet(_parse_moments(args.noise_moments, "noise moments"), args.noise_sup_norm)
    b = MomentSet(_parse_moments(args.signal_moments, "signal moments"), args.signal_sup_norm)
    return BoundInputs(args.case, args.N, a, b, a, C_A=1.0 if args.C_A is None else args.C_A,
                       c=args.c, kappa=args.kappa)


def cmd_bound(args, argv) -> int:
    started = time.perf_counter()
    report = bound(_bound_inputs(args))
    text = json.dumps(report.as_dict(), indent=2, sort_keys=True, default=_json_default)
    if args.out:
        out = Path(args.out)
        _atomic_write(out, text + "\n")
        write_json(out.with_name(out.stem + "_manifest.json"), manifest(args, argv, started))
    else:
        print(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args, argv) -> int:
    started = time.perf_counter()
    if args.samples < 1:
        raise CliError("--samples must be at least 1")
    try:
        sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else [None]
    except ValueError:
        raise CliError("--sizes is a comma-separated list of integers") from None
    kappa = args.kappa
    if kappa is None and args.eta is None and PRESETS[args.preset].case == "multiplicative":
        kappa = FIG4_KAPPA
    rows = []
    for n in sizes:
        spec = preset(args.preset, N=n, seed=args.seed)
        res = run_experiment(spec, args.samples, eta=args.eta, kappa=kappa, threads=args.threads)
        nan = float("nan")
        rows.append((res.N, res.sqrt_mse, res.se,
                     nan if res.bound_sqrt_mse is None else res.bound_sqrt_mse,
                     nan if res.ratio is None else res.ratio, len(res.failed)))
        log.info("N=%d sqrt_mse=%.3e ratio=%s", res.N, res.sqrt_mse, res.ratio)
    header = ("N", "empirical_sqrt_mse", "se", "bound_sqrt_mse", "ratio", "failed")
    out = Path(args.out)
    csv_path = out.with_name(out.name + ".csv")
    write_csv(csv_path, header, rows)
    write_json(out.with_name(out.name + "_manifest.json"),
               manifest(args, argv, started, extra={"kappa": kappa, "outputs": [str(csv_path)]}))
    for r in rows:
        print(",".join(fmt(v) for v in r))
    return EXIT_OK


# ---------------------------------------------------------------------------
# weingarten-check


def cmd_weingarten_check(args, argv) -> int:
    words = args.words.split(";") if args.words else list(WORD_PAIRS)
    for w in words:
        if w not in WORD_PAIRS:
            raise UnsupportedWord(f"unsupported word pair {w!r}; choose from {', '.join(WORD_PAIRS)}")
    if args.samples < 2:
        raise CliError("--samples must be at least 2")
    rng = rng_stream(args.seed, 0)
    if args.identity:
        a = b = np.ones(args.N)
    else:
        a = rng.uniform(0.2, 2.0, args.N)
        b = rng.uniform(0.2, 2.0, args.N)
        b /= b.mean()
    ma, mb = moment_set(Empirical(a)), moment_set(Empirical(b))
    failures = 0
    print("word,formula,monte_carlo,se,z,result")
    for i, w in enumerate(words):
        exact = finite_n_mixed_moment(ma, mb, w, args.N)
        est, se = monte_carlo_mixed_moment(a, b, w, args.samples, rng_stream(args.seed, i + 1))
        diff = abs(est - exact)
        ok = diff <= 3.0 * se or diff <= 1e-12 * max(1.0, abs(exact))
        z = diff / se if se > 0 else 0.0
        failures += not ok
        print(f"{w},{fmt(exact)},{fmt(est)},{fmt(se)},{z:.3f},{'pass' if ok else 'FAIL'}")
    return EXIT_PARTIAL if failures else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="freedeconv", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("deconvolve", help="two-stage recovery of the signal spectrum")
    d.add_argument("case", choices=("additive", "multiplicative"))
    d.add_argument("--eigs", required=True, help="eigenvalue file, one value per line")
    d.add_argument("--noise", required=True, help="e.g. semicircle:variance=1")
    d.add_argument("--noise-moments", help="override m1..m6 of the noise law")
    d.add_argument("--noise-sup-norm", type=float, help="operator-norm bound of the noise")
    d.add_argument("--eta", type=float, help="line height (additive default 2*sqrt(2)*sigma1)")
    d.add_argument("--grid", help="start,stop,num")
    d.add_argument("--num", type=int, default=512, help="grid points when --grid is absent")
    d.add_argument("--method", choices=("fourier", "sparse"), default="fourier")
    d.add_argument("--cutoff", type=float, help="spectral cutoff (default: automatic)")
    d.add_argument("--mse", type=float, help="MSE estimate for the automatic cutoff")
    d.add_argument("--taper", choices=TAPERS, default="sharp")
    d.add_argument("--lam", type=float, default=1e-6, help="sparse penalty")
    d.add_argument("--atoms", type=int, default=400, help="sparse atom-grid size")
    d.add_argument("--force", action="store_true", help="accept eta at or below eta_0")
    d.add_argument("--clip-negative", action="store_true",
                   help="clip small negative eigenvalues of M to zero")
    d.add_argument("--out", default="deconv", help="output prefix")
    d.set_defaults(func=cmd_deconvolve)

    b = sub.add_parser("bound", help="concentration-bound constants as JSON")
    b.add_argument("--model", choices=sorted(PRESETS))
    b.add_argument("--case", choices=("additive", "multiplicative"))
    b.add_argument("--N", type=int, required=True)
    b.add_argument("--noise-moments")
    b.add_argument("--signal-moments")
    b.add_argument("--noise-sup-norm", type=float)
    b.add_argument("--signal-sup-norm", type=float)
    b.add_argument("--C-A", dest="C_A", type=float, help="concentration constant of the noise")
    b.add_argument("--c", type=float, default=0.0, help="bias constant")
    b.add_argument("--kappa", type=float)
    b.add_argument("--out", help="write the report here instead of stdout")
    b.set_defaults(func=cmd_bound)

    s = sub.add_parser("simulate", help="Monte-Carlo error against the bound")
    s.add_argument("--preset", choices=sorted(PRESETS), required=True)
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--sizes", help="comma-separated matrix sizes")
    s.add_argument("--seed", type=int)
    s.add_argument("--eta", type=float)
    s.add_argument("--kappa", type=float)
    s.add_argument("--threads", type=int)
    s.add_argument("--out", default="simulate", help="output prefix")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("weingarten-check", help="closed-form mixed moments against Monte Carlo")
    w.add_argument("--N", type=int, default=5)
    w.add_argument("--words", help=f"';'-separated subset of {', '.join(WORD_PAIRS)}")
    w.add_argument("--samples", type=int, default=100_000)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--identity", action="store_true", help="use A = B = identity")
    w.set_defaults(func=cmd_weingarten_check)
    return ap


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except DeconvError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
