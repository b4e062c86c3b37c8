"""Command line interface: ``fzk`` subcommands.

Thin wrappers over the library; no logic beyond argument parsing,
dispatch, and CSV formatting.  FZK_THREADS caps internal FFT parallelism.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, load_config, run_experiment
from .evolve import load_checkpoint
from .kernels import BesselKernel, k_alpha_multiplier, psi_series
from .spectral import Grid
from .weights import ConeCondition, GridBumpWeight, check_cone, smoothing_lambda


def _fmt(x) -> str:
    return format(float(x), ".12g")


def _parse_floats(text: str):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _write_rows(path, header, rows):
    out = sys.stdout if path in (None, "-") else open(path, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (int, float, np.floating))
                        else v for v in row])
    finally:
        if out is not sys.stdout:
            out.close()


def cmd_run(args) -> int:
    """Run one config, or several in sequence (simple batch mode)."""
    if args.output is not None and len(args.config) > 1:
        print("--output applies to a single config; batch runs use each "
              "config's own output directory", file=sys.stderr)
        return 2
    worst = 0
    for path in args.config:
        try:
            cfg = load_config(path)
        except ConfigError as exc:
            json.dump({"error": "config-validation", "config": str(path),
                       "violations": exc.violations}, sys.stdout)
            print()
            worst = max(worst, 2)
            continue
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        try:
            summary = run_experiment(cfg, output_dir=args.output)
        except Exception as exc:  # noqa: BLE001 - runner boundary
            json.dump({"error": "run-failed", "config": str(path),
                       "detail": str(exc)}, sys.stdout)
            print()
            worst = max(worst, 1)
            continue
        out = Path(args.output or cfg.output_dir)
        print(f"wrote {out / 'records.csv'} and {out / 'summary.json'}")
        if summary.get("boundary_warning"):
            print("warning: boundary contamination detected (see summary.json)")
    return worst


def cmd_check_cone(args) -> int:
    nu = tuple(_parse_floats(args.nu))
    cone = ConeCondition(nu, args.alpha, eps=args.eps, C=args.C)
    cls = check_cone(cone)
    print(f"case: {cls.case if cls.admissible else 'inadmissible'}")
    print(f"reason: {cls.reason}")
    if cls.admissible:
        lam = smoothing_lambda(cone)
        print(f"lambda: {_fmt(lam)}")
        if cls.case == 2:
            print(f"eps: {_fmt(cls.details['eps'])}")
            lo, hi = cls.details["eps_interval"]
            print(f"eps_interval: ({_fmt(lo)}, {_fmt(hi)})")
    return 0 if cls.admissible else 1


def cmd_bessel_table(args) -> int:
    K = BesselKernel(args.delta, args.n)
    rows = []
    for r in _parse_floats(args.radii):
        val = K.eval(r)
        if r < 0.1:
            regime = "near-zero"
        elif r > 10.0:
            regime = "infinity"
        else:
            regime = ""
        asym = K.asymptotic(regime, r) if regime else float("nan")
        rows.append([r, val, asym, val / asym if regime else float("nan")])
    _write_rows(args.out, ["radius", "kernel", "asymptotic", "ratio"], rows)
    return 0


def cmd_psi_series_table(args) -> int:
    radii = _parse_floats(args.radii) if args.radii else [0.0, 0.25, 0.5, 1.0,
                                                          2.0, 4.0, 8.0]
    rows = []
    for rho in radii:
        xi = (np.array([rho]),) + (np.array([0.0]),)
        exact = float(k_alpha_multiplier(args.alpha, xi)[0])
        series, last = psi_series(args.alpha, xi, args.J)
        bracket = (1.0 + (2 * np.pi * rho) ** 2) ** ((args.alpha - 2.0) / 2.0)
        approx = float(bracket * series[0])
        rows.append([rho, exact, approx, abs(exact - approx), float(last[0])])
    _write_rows(args.out,
                ["xi_radius", "exact_multiplier", "series_value",
                 "abs_error", "last_term"], rows)
    return 0


def cmd_order_probe(args) -> int:
    from .symbols import (SymbolExpansion, commutator_apply,
                          commutator_minus_principal, order_probe)

    grid = Grid.square(2, args.points, 1.0)
    weight = GridBumpWeight(grid, (1.0, 0.0), up=(0.06, 0.38), down=(0.56, 0.38))
    rng = np.random.default_rng(args.seed)
    scales = [int(s) for s in _parse_floats(args.scales)]
    alpha = args.alpha
    if args.op == "commutator":
        op = lambda f: commutator_apply(alpha, weight, f)
        expect = alpha
    elif args.op == "remainder":
        exp = SymbolExpansion.build(alpha, weight, 2)
        op = commutator_minus_principal(alpha, exp, ["alpha"])
        expect = alpha - 1.0
    elif args.op == "remainder2":
        exp = SymbolExpansion.build(alpha, weight, 2)
        op = commutator_minus_principal(alpha, exp, ["alpha", "alpha_minus_1"])
        expect = alpha - 2.0
    else:
        print(f"unknown operator {args.op!r}", file=sys.stderr)
        return 2
    result = order_probe(op, grid, scales, rng, probes_per_scale=args.probes)
    rows = [[s, m] for s, m in zip(result.scales, result.median_norms)]
    _write_rows(args.out, ["scale", "median_norm"], rows)
    print(f"slope: {_fmt(result.slope)} (nominal order {_fmt(expect)})")
    return 0


def cmd_convert_checkpoint(args) -> int:
    field, header = load_checkpoint(args.input)
    grid = field.grid
    if args.output.endswith(".npy"):
        np.save(args.output, field.values)
    else:
        coords = grid.coordinates
        with open(args.output, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"# t={header['t']} alpha={header['alpha']} "
                        f"config_hash={header['config_hash']}"])
            w.writerow([f"x{i+1}" for i in range(grid.ndim)] + ["u"])
            flat = [c.ravel() for c in coords] + [field.values.ravel()]
            for row in zip(*flat):
                w.writerow([_fmt(v) for v in row])
    print(f"converted {args.input} -> {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fzk",
        description="Pseudo-spectral laboratory for the fractional "
                    "Zakharov-Kuznetsov equation.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("run", help="run one or more configured experiments")
    q.add_argument("config", nargs="+")
    q.add_argument("--output", default=None, help="output directory override")
    q.add_argument("--seed", type=int, default=None, help="seed override")
    q.set_defaults(func=cmd_run)

    q = sub.add_parser("check-cone", help="classify a direction vector")
    q.add_argument("--nu", required=True, help="comma-separated direction")
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--C", type=float, default=1.0)
    q.add_argument("--eps", type=float, default=None)
    q.set_defaults(func=cmd_check_cone)

    q = sub.add_parser("bessel-table", help="kernel vs asymptotic values")
    q.add_argument("--delta", type=float, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--radii", required=True, help="comma-separated radii")
    q.add_argument("--out", default=None, help="CSV path (default stdout)")
    q.set_defaults(func=cmd_bessel_table)

    q = sub.add_parser("psi-series-table",
                       help="corrector series vs exact multiplier")
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--J", type=int, default=50)
    q.add_argument("--radii", default=None)
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_psi_series_table)

    q = sub.add_parser("order-probe", help="operator order scaling probe")
    q.add_argument("--op", default="commutator",
                   choices=["commutator", "remainder", "remainder2"])
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--points", type=int, default=256)
    q.add_argument("--scales", default="4,8,16,32")
    q.add_argument("--probes", type=int, default=8)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_order_probe)

    q = sub.add_parser("convert-checkpoint", help="checkpoint to CSV/NPY")
    q.add_argument("input")
    q.add_argument("output")
    q.set_defaults(func=cmd_convert_checkpoint)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
