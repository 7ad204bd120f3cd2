"""Command-line interface: ``rfl <subcommand> [flags]``.

Output is JSON or CSV with floats printed to 17 significant digits, so runs
with the same flags and seed are byte-identical.  Exit codes: 0 success,
2 invalid input, 3 parameters outside a supported regime, 1 other failures.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .core import LINEAR, NONLINEAR, VARIANTS, ModelParams
from .dynamics import run_p0
from .errors import DomainError, RegimeError, RflError
from .lambda_ge2 import MuMeasure, word_intervals
from .lyapunov import (
    DEFAULT_STEPS,
    DEFAULT_TOL,
    DEFAULT_TRIALS,
    GammaResult,
    gamma,
    letters_chunk,
    mc_gamma,
    params_for_lambda,
    pstar,
    scan,
    signflip_empirical,
    trial_rng,
)
from .reduction import block_decompose, enumerate_excursions, reduce_linear, reduce_nonlinear, word_probability
from .stern_brocot import NuMeasure, rank_intervals
from .survival import SurvivalParams, excursion_mass, sign_flip_sigma, solve_pr

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_REGIME = 3


class UsageError(Exception):
    """Invalid flag combination; the message names the flag."""


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def to_json(obj: Any) -> str:
    """JSON with floats at 17 significant digits; non-finite floats become null."""
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return fmt_float(x) if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def csv_cell(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return fmt_float(float(x))
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    return str(x)


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(csv_cell(x) for x in row) + "\n")
    return out.getvalue()


def _floats(text: str, flag: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated numbers, got {text!r}") from None


def _ints(text: str, flag: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated integers, got {text!r}") from None


def _require(args, *flags: str) -> None:
    for f in flags:
        if getattr(args, f.lstrip("-").replace("-", "_")) is None:
            raise UsageError(f"{f} is required for '{args.command}'")


def _regime(args) -> ModelParams:
    _require(args, "--p")
    if args.k is not None:
        return ModelParams.hecke(int(args.k), args.p, args.variant)
    if args.lam is not None:
        return params_for_lambda(float(args.lam), args.p, args.variant)
    raise UsageError(f"one of --k or --lambda is required for '{args.command}'")


def gamma_record(r: GammaResult, params: ModelParams) -> dict:
    rec: dict = {"regime": params.regime}
    if params.is_hecke:
        rec["k"] = params.k
    else:
        rec["lambda"] = params.lam
    rec.update(
        p=params.p, variant=params.variant, gamma=r.gamma, method=r.method, error=r.error,
        p_r=r.p_r, rho=r.rho, seed=r.seed,
    )
    return rec


def _emit_record(rec: dict, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(list(rec), [list(rec.values())])
    return to_json(rec) + "\n"


def cmd_gamma(args) -> str:
    params = _regime(args)
    return _emit_record(gamma_record(gamma(params, args.tol), params), args.format)


def cmd_mc(args) -> str:
    params = _regime(args)
    r = mc_gamma(params, args.steps, args.trials, args.seed)
    return _emit_record(gamma_record(r, params), args.format)


def cmd_scan(args) -> str:
    _require(args, "--p-grid")
    ks = _ints(args.k, "--k") if args.k is not None else []
    lams = _floats(args.lam, "--lambda") if args.lam is not None else []
    if not ks and not lams:
        raise UsageError("one of --k or --lambda is required for 'scan'")
    grid = _floats(args.p_grid, "--p-grid")
    variants = VARIANTS if args.variant is None else (args.variant,)
    rows = scan(ks, lams, grid, args.tol, variants)
    header = ["regime", "param", "p", "variant", "gamma", "error"]
    if args.format == "json":
        return to_json([dict(zip(header, (r.regime, r.param, r.p, r.variant, r.gamma, r.error))) for r in rows]) + "\n"
    return to_csv(header, [(r.regime, r.param, r.p, r.variant, r.gamma, r.error) for r in rows])


def cmd_measure(args) -> str:
    _require(args, "--depth")
    if args.depth < 0:
        raise UsageError("--depth must be >= 0")
    header = ["path", "lo", "hi", "mass"]
    if args.k is not None:
        k = int(args.k)
        if args.rho is not None:
            rho = args.rho
        elif args.p is not None:
            rho = SurvivalParams.compute(args.p, k, args.variant).rho
        else:
            raise UsageError("measure with --k needs --rho or --p")
        table = rank_intervals(k, args.depth, NuMeasure(k, rho))
        rows = [(".".join(str(int(d)) for d in path), lo, hi, m)
                for path, lo, hi, m in zip(table.paths, table.lo, table.hi, table.mass)]
    elif args.lam is not None:
        _require(args, "--p")
        mu = MuMeasure(args.p, float(args.lam))
        words, lo, hi = word_intervals(args.depth, mu.lam)
        rows = [(w, a, b, mu.mass(w)) for w, a, b in zip(words, lo, hi)]
    else:
        raise UsageError("one of --k or --lambda is required for 'measure'")
    if args.format == "json":
        return to_json([dict(zip(header, r)) for r in rows]) + "\n"
    return to_csv(header, rows)


def cmd_reduce(args) -> str:
    _require(args, "--k", "--word")
    k = int(args.k)
    reduce = reduce_linear if args.variant == LINEAR else reduce_nonlinear
    rw = reduce(args.word, k)
    blocks = block_decompose(rw, k)
    rec = {
        "k": k, "variant": args.variant, "word": args.word, "reduced": rw.letters, "sign": rw.sign,
        "pending_flip": bool(rw.pending_flip), "deletions": rw.deletions,
        "leading_ls": blocks.leading_ls, "blocks": list(blocks.blocks),
    }
    return _emit_record(rec, args.format)


def cmd_signflip(args) -> str:
    _require(args, "--p")
    if args.k is not None:
        k = int(args.k)
        r = signflip_empirical(k, args.p, args.steps, args.seed)
        sigma = sign_flip_sigma(args.p, k) if args.p > 0 else 0.0
        rec = {"regime": "hecke", "k": k}
    elif args.lam is not None:
        r = signflip_empirical(None, args.p, args.steps, args.seed, lam=float(args.lam))
        sigma = None
        rec = {"regime": "general", "lambda": float(args.lam)}
    else:
        raise UsageError("one of --k or --lambda is required for 'signflip'")
    rec.update(
        p=args.p, steps=args.steps, seed=args.seed, frequency=r.frequency, std_error=r.std_error,
        sigma=sigma, deletion_frequency=r.deletion_frequency, mismatches=r.mismatches,
    )
    return _emit_record(rec, args.format)


def _simulate_p0(args, k: int) -> tuple[list, list]:
    if args.exact:
        _require(args, "--f0", "--f1")
        tr = run_p0(k, args.f0, args.f1, args.steps, "exact", field_m=args.field)
    else:
        f0 = 1.0 if args.f0 is None else _floats(args.f0, "--f0")[0]
        f1 = 1.0 if args.f1 is None else _floats(args.f1, "--f1")[0]
        tr = run_p0(k, f0, f1, args.steps, "numeric")
    vals = tr.floats()
    zero = tr.zero_index
    radii = np.append(tr.radii, math.nan)
    rows = [(n, float(v), float(radii[n]), n == zero) for n, v in enumerate(vals)]
    return ["n", "value", "radius", "zero"], rows


def _simulate_random(args, params: ModelParams) -> tuple[list, list]:
    letters = letters_chunk(trial_rng(args.seed, 0), args.steps, params.p)
    f0 = 1.0 if args.f0 is None else _floats(args.f0, "--f0")[0]
    f1 = 1.0 if args.f1 is None else _floats(args.f1, "--f1")[0]
    if params.is_hecke and params.variant == NONLINEAR and params.p * params.k <= 1.0:
        vals, stack, times, st = _kernels.nonlinear_with_reduction(letters, f0, f1, 0, params.lam, params.k)
        append = np.zeros(args.steps, dtype=bool)
        first_r = np.flatnonzero(stack == 1)
        s = int(first_r[0]) if first_r.size else stack.size
        append[times[:s]] = True
        with np.errstate(divide="ignore"):
            logs = np.log(np.abs(vals[: args.steps]))
    else:
        logs, signs, *_, st = _kernels.series(letters, f0, f1, 0, params.lam, params.variant == NONLINEAR)
        append = np.zeros(args.steps, dtype=bool)
    if st:
        raise DomainError("trajectory reached (0, 0)")
    rows = [(i + 2, float(logs[i]), bool(append[i])) for i in range(len(logs))]
    return ["n", "log_abs", "l_append"], rows


def cmd_simulate(args) -> str:
    if args.k is None and args.lam is None:
        raise UsageError("one of --k or --lambda is required for 'simulate'")
    p = 0.0 if args.p is None else args.p
    if p == 0.0 and args.k is not None:
        header, rows = _simulate_p0(args, int(args.k))
    else:
        if args.exact:
            raise UsageError("--exact applies only to p = 0 with --k")
        args.p = p
        header, rows = _simulate_random(args, _regime(args))
    if args.format == "json":
        return to_json([dict(zip(header, r)) for r in rows]) + "\n"
    return to_csv(header, rows)


def cmd_pstar(args) -> str:
    if args.k is not None:
        params = ModelParams.hecke(int(args.k), 0.5)
        rec = {"regime": "hecke", "k": int(args.k)}
    elif args.lam is not None:
        params = params_for_lambda(float(args.lam), 0.5)
        rec = {"regime": params.regime, "lambda": float(args.lam)}
    else:
        raise UsageError("one of --k or --lambda is required for 'pstar'")
    r = pstar(params, args.tol_p, args.tol)
    rec.update(pstar=r.pstar, boundary=r.boundary, bracket=list(r.bracket), log_lambda=r.log_lambda)
    return _emit_record(rec, args.format)


def cmd_excursions(args) -> str:
    _require(args, "--k", "--max-len")
    k = int(args.k)
    words = enumerate_excursions(k, args.max_len)
    p = 0.5 if args.p is None else args.p
    if args.format == "csv":
        return to_csv(["word", "length", "probability"], [(w, len(w), word_probability(w, p)) for w in words])
    counts: dict[int, int] = {}
    for w in words:
        counts[len(w)] = counts.get(len(w), 0) + 1
    partial = sum(word_probability(w, p) for w in words)
    limit = excursion_mass(p, solve_pr(p, k)) if 0.0 < p < 1.0 else None
    rec = {"k": k, "max_len": args.max_len, "p": p, "count": len(words),
           "counts_by_length": {str(n): c for n, c in sorted(counts.items())},
           "partial_mass": partial, "limit_mass": limit}
    return to_json(rec) + "\n"


COMMANDS = {
    "gamma": cmd_gamma,
    "mc": cmd_mc,
    "scan": cmd_scan,
    "measure": cmd_measure,
    "reduce": cmd_reduce,
    "signflip": cmd_signflip,
    "simulate": cmd_simulate,
    "pstar": cmd_pstar,
    "excursions": cmd_excursions,
}

_HELP = {
    "gamma": "growth rate by quadrature of the invariant measure",
    "mc": "growth rate by Monte Carlo",
    "scan": "quadrature growth rates over a p grid (CSV for plotting)",
    "measure": "intervals and masses of the invariant measure at a given depth",
    "reduce": "reduce a sign word",
    "signflip": "empirical sign-flip frequency against the closed form",
    "simulate": "trajectory CSV (p = 0 map, or a random trajectory)",
    "pstar": "threshold p where the growth rate crosses log(lambda)",
    "excursions": "enumerate words that reduce to the empty word",
}


def _uint64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rfl", description="Growth rates of random Fibonacci-type sequences.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=_HELP[name])
        group = sp.add_mutually_exclusive_group()
        many = name == "scan"
        group.add_argument("--k", type=str if many else int, help="Hecke index k >= 3" + (" (comma list)" if many else ""))
        group.add_argument("--lambda", dest="lam", type=str if many else float,
                           help="lambda >= 2 or 2cos(pi/k)" + (" (comma list)" if many else ""))
        sp.add_argument("--p", type=float, help="probability of a + sign")
        sp.add_argument("--variant", choices=VARIANTS, default=None if many else LINEAR)
        sp.add_argument("--tol", type=float, default=DEFAULT_TOL, help="quadrature error bound")
        sp.add_argument("--steps", type=int, default=1000 if name == "simulate" else DEFAULT_STEPS)
        sp.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
        sp.add_argument("--seed", type=_uint64, default=0)
        sp.add_argument("--format", choices=("json", "csv"), default="csv" if name in ("scan", "measure", "simulate") else "json")
        sp.add_argument("--out", help="write output to this path instead of stdout")
        if name == "measure":
            sp.add_argument("--depth", type=int)
            sp.add_argument("--rho", type=float, help="block parameter rho (Hecke case)")
        if name == "scan":
            sp.add_argument("--p-grid", help="comma-separated p values")
        if name == "reduce":
            sp.add_argument("--word", help="word over {R, L}")
        if name == "excursions":
            sp.add_argument("--max-len", type=int)
        if name == "simulate":
            sp.add_argument("--exact", action="store_true", help="exact arithmetic (p = 0 only)")
            sp.add_argument("--f0", help="F_0 (exact grammar, e.g. '1+2*l-3/2*l^2')")
            sp.add_argument("--f1", help="F_1")
            sp.add_argument("--field", type=int, default=None, help="exact mode works in Q(2cos(pi/FIELD))")
        if name == "pstar":
            sp.add_argument("--tol-p", type=float, default=1e-3)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tol is not None and not args.tol > 0:
            raise UsageError("--tol must be positive")
        if args.p is not None and not 0.0 <= args.p <= 1.0:
            raise UsageError("--p must lie in [0, 1]")
        text = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"rfl {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RegimeError as exc:
        print(f"rfl {args.command}: regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except DomainError as exc:
        print(f"rfl {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RflError as exc:
        print(f"rfl {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
