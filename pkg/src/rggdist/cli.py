"""Command-line front end.

Single evaluations print JSON; sweeps print CSV with a ``# seed=...``
comment line echoing every setting.  All numeric output uses 12
significant digits with a plain decimal point, and every command is a
deterministic function of its flags (including ``--seed``), so repeated
runs are byte-identical.

Exit codes: 0 success, 1 validation/accuracy failure, 2 usage error,
3 unsupported request.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from .bounds import bound_chain, shearer_factor
from .connection import ExponentialSoft, HardDisk, parse_model
from .distances import (
    classify_triple,
    joint_pdf3,
    joint_pdf3_cell_masses,
    joint_pdf3_values,
    joint_pdf3_via_conditioning_many,
    pair_pdf,
)
from .errors import AccuracyError, DomainError, UnsupportedError
from .geometry import (
    DiskDomain,
    TriangleSides,
    sample_points_in_disk,
    triangle_quantities,
)
from .graphdist import (
    connected_outcome_mask,
    entropy_bits,
    entropy_error_bound,
    exact_pmf,
    pmf_n2,
    pmf_n3,
)
from .montecarlo import (
    RNG_NAME,
    McSettings,
    distance_histogram3,
    estimate_entropy,
    estimate_entropy_sweep_hard,
    estimate_pmf,
    substream,
)
from .quadrature import QuadratureSettings, integrate_many

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_UNSUPPORTED = 3

MAX_MC_SWEEP_NODES = 6


def _fmt(x) -> str:
    """Locale-independent rendering at 12 significant digits."""
    return format(float(x), ".12g")


def _jnum(x):
    if x is None:
        return None
    return float(_fmt(x))


def _write(out_path: str, text: str) -> None:
    if out_path == "-":
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _emit_json(args, record) -> None:
    _write(args.out, json.dumps(record, indent=2) + "\n")


def _emit_csv(args, settings_pairs, header, rows) -> None:
    pairs = [("seed", args.seed)] + [(k, v) for k, v in settings_pairs if k != "seed"]
    comment = "# " + " ".join(f"{k}={v}" for k, v in pairs)
    lines = [comment, ",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row))
    _write(args.out, "\n".join(lines) + "\n")


def _quad_settings(args):
    if getattr(args, "abs_tol", None) is None:
        return None
    return QuadratureSettings(abs_tol=args.abs_tol, rel_tol=0.0, max_subdivisions=600)


# ---------------------------------------------------------------------------
# single evaluations
# ---------------------------------------------------------------------------

def _cmd_pdf3(args) -> int:
    domain = DiskDomain(args.diameter)
    sides = TriangleSides(args.r12, args.r13, args.r23)
    tq = triangle_quantities(sides)
    record = {
        "density": _jnum(joint_pdf3(sides, domain)),
        "case_tag": classify_triple(sides, domain).value,
        "Q": _jnum(tq.q),
        "d": _jnum(tq.circumdiameter) if tq.circumdiameter is not None else None,
        "rbar": _jnum(tq.longest),
        "settings": {"diameter": _jnum(args.diameter), "seed": args.seed},
    }
    _emit_json(args, record)
    return EXIT_OK


def _cmd_pairpdf(args) -> int:
    domain = DiskDomain(args.diameter)
    record = {
        "r": _jnum(args.r),
        "density": _jnum(pair_pdf(args.r, domain)),
        "settings": {"diameter": _jnum(args.diameter), "seed": args.seed},
    }
    _emit_json(args, record)
    return EXIT_OK


def _cmd_pmf(args) -> int:
    domain = DiskDomain(args.diameter)
    model = parse_model(args.model)
    pmf = exact_pmf(args.n, model, domain, _quad_settings(args))
    record = {
        "n": args.n,
        "method": pmf.method,
        "probs": [_jnum(p) for p in pmf.probs],
        "error_estimate": _jnum(pmf.error_estimate),
        "p_connected": _jnum(float(np.sum(pmf.probs[connected_outcome_mask(pmf.n)]))),
        "p_complete": _jnum(float(pmf.probs[-1])),
        "entropy_bits": _jnum(entropy_bits(pmf)),
        "settings": {
            "model": model.spec_string(),
            "diameter": _jnum(args.diameter),
            "abs_tol": _jnum(args.abs_tol) if args.abs_tol is not None else None,
            "seed": args.seed,
        },
    }
    _emit_json(args, record)
    return EXIT_OK


def _cmd_entropy(args) -> int:
    domain = DiskDomain(args.diameter)
    model = parse_model(args.model)
    pmf = exact_pmf(args.n, model, domain, _quad_settings(args))
    record = {
        "n": args.n,
        "entropy_bits": _jnum(entropy_bits(pmf)),
        "error_bound_bits": _jnum(entropy_error_bound(pmf)),
        "method": pmf.method,
        "settings": {
            "model": model.spec_string(),
            "diameter": _jnum(args.diameter),
            "abs_tol": _jnum(args.abs_tol) if args.abs_tol is not None else None,
            "seed": args.seed,
        },
    }
    _emit_json(args, record)
    return EXIT_OK


def _cmd_entropy_mc(args) -> int:
    domain = DiskDomain(args.diameter)
    model = parse_model(args.model)
    mc = McSettings(samples=args.samples, seed=args.seed, workers=args.workers)
    est = estimate_entropy(
        args.n, model, domain, mc, bias_correction=not args.no_bias_correction
    )
    record = {
        "n": args.n,
        "entropy_bits": _jnum(est.bits),
        "std_error": _jnum(est.std_error),
        "bias_correction": not args.no_bias_correction,
        "settings": {
            "model": model.spec_string(),
            "diameter": _jnum(args.diameter),
            "samples": args.samples,
            "seed": args.seed,
            "workers": args.workers,
            "rng": RNG_NAME,
        },
    }
    _emit_json(args, record)
    return EXIT_OK


def _cmd_bounds(args) -> int:
    domain = DiskDomain(args.diameter)
    model = parse_model(args.model)
    quad = _quad_settings(args)
    h_values = {2: entropy_bits(pmf_n2(model, domain, quad))}
    provenance = {2: "quadrature"}
    if args.n > 3:
        h_values[3] = entropy_bits(pmf_n3(model, domain, quad))
        provenance[3] = "quadrature"
    chain = bound_chain(args.n, h_values, provenance)
    record = {
        "n": args.n,
        "entries": [
            {
                "m": e.m,
                "h_m_bits": _jnum(e.h_m_bits),
                "bound_on_h_n_bits": _jnum(e.bound_on_h_n_bits),
                "provenance": e.provenance,
            }
            for e in chain.entries
        ],
        "tightest_bound_bits": _jnum(chain.tightest_bound_bits),
        "monotonic": chain.monotonic,
        "settings": {
            "model": model.spec_string(),
            "diameter": _jnum(args.diameter),
            "seed": args.seed,
        },
    }
    if args.samples is not None:
        mc = McSettings(samples=args.samples, seed=args.seed, workers=args.workers)
        est = estimate_entropy(args.n, model, domain, mc)
        record["h_n_estimate_bits"] = _jnum(est.bits)
        record["h_n_std_error"] = _jnum(est.std_error)
        record["settings"]["samples"] = args.samples
        record["settings"]["workers"] = args.workers
        record["settings"]["rng"] = RNG_NAME
    _emit_json(args, record)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def _sweep_grid(args, D):
    start = args.r0_start
    stop = args.r0_stop if args.r0_stop is not None else D
    if not (0.0 <= start < stop <= D):
        raise DomainError(
            f"need 0 <= r0-start < r0-stop <= diameter, got [{start}, {stop}] with D={D}"
        )
    if args.steps < 2:
        raise DomainError(f"steps must be at least 2, got {args.steps}")
    return np.linspace(start, stop, args.steps)


def _sweep_model(args, r0):
    if args.model_kind == "hard":
        return HardDisk(r0=r0)
    if r0 <= 0.0:
        raise DomainError("exponential sweeps need --r0-start > 0")
    return ExponentialSoft(r0=r0, beta=args.beta)


def _check_sweep_n(args) -> None:
    if args.mc:
        if not (2 <= args.n <= MAX_MC_SWEEP_NODES):
            raise UnsupportedError(
                f"Monte Carlo sweeps support 2 <= n <= {MAX_MC_SWEEP_NODES}, got n={args.n}"
            )
    elif args.n not in (2, 3):
        raise UnsupportedError(
            f"exact sweeps support n in (2, 3); pass --mc for n={args.n}"
        )


def _sweep_settings_pairs(args, D):
    stop = args.r0_stop if args.r0_stop is not None else D
    return [
        ("diameter", _fmt(D)),
        ("n", args.n),
        ("model-kind", args.model_kind),
        ("beta", _fmt(args.beta)),
        ("r0-start", _fmt(args.r0_start)),
        ("r0-stop", _fmt(stop)),
        ("steps", args.steps),
        ("mc", str(bool(args.mc)).lower()),
        ("samples", args.samples),
        ("workers", args.workers),
        ("rng", RNG_NAME),
    ]


def _cmd_sweep_connectivity(args) -> int:
    domain = DiskDomain(args.diameter)
    _check_sweep_n(args)
    grid = _sweep_grid(args, domain.diameter)
    quad = _quad_settings(args)
    rows = []
    for idx, r0 in enumerate(grid):
        model = _sweep_model(args, float(r0))
        if args.mc:
            mc = McSettings(samples=args.samples, seed=args.seed + idx, workers=args.workers)
            pmf = estimate_pmf(args.n, model, domain, mc)
            method = "monte_carlo"
        else:
            pmf = exact_pmf(args.n, model, domain, quad)
            method = "quadrature"
        mask = connected_outcome_mask(pmf.n)
        rows.append(
            (
                float(r0),
                float(np.sum(pmf.probs[mask])),
                float(pmf.probs[-1]),
                method,
                float(pmf.error_estimate),
            )
        )
    _emit_csv(
        args,
        _sweep_settings_pairs(args, domain.diameter),
        ("r0", "p_connected", "p_complete", "method", "err_est"),
        rows,
    )
    return EXIT_OK


def _cmd_sweep_entropy(args) -> int:
    domain = DiskDomain(args.diameter)
    _check_sweep_n(args)
    grid = _sweep_grid(args, domain.diameter)
    quad = _quad_settings(args)
    n = args.n
    mc_estimates = None
    if args.mc and args.model_kind == "hard":
        # Hard-disk sweeps share one distance pool across the grid.
        mc = McSettings(samples=args.samples, seed=args.seed, workers=args.workers)
        mc_estimates = estimate_entropy_sweep_hard(n, grid, domain, mc)
    rows = []
    for idx, r0 in enumerate(grid):
        model = _sweep_model(args, float(r0))
        h2 = entropy_bits(pmf_n2(model, domain, quad))
        h3 = entropy_bits(pmf_n3(model, domain, quad)) if n >= 3 else None
        if mc_estimates is not None:
            h, std = mc_estimates[idx]
        elif args.mc:
            mc = McSettings(samples=args.samples, seed=args.seed + idx, workers=args.workers)
            est = estimate_entropy(n, model, domain, mc)
            h, std = est.bits, est.std_error
        elif n == 2:
            pmf = pmf_n2(model, domain, quad)
            h, std = entropy_bits(pmf), entropy_error_bound(pmf)
        else:
            pmf = pmf_n3(model, domain, quad)
            h, std = entropy_bits(pmf), entropy_error_bound(pmf)
        bound3 = float(shearer_factor(n, 3) * Fraction(h3)) if n > 3 else float("nan")
        bound2 = float(shearer_factor(n, 2) * Fraction(h2)) if n > 2 else float("nan")
        rows.append((float(r0), h, std, bound3, bound2))
    _emit_csv(
        args,
        _sweep_settings_pairs(args, domain.diameter),
        ("r0", "H_exact_or_mc", "H_std_err", "bound_from_G3", "bound_from_G2"),
        rows,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# validation oracles
# ---------------------------------------------------------------------------

def _validate_pair(args, domain) -> dict:
    nbins = 50
    D = domain.diameter
    edges = np.linspace(0.0, D, nbins + 1)
    rng = substream(args.seed, 0)
    counts = np.zeros(nbins, dtype=np.int64)
    remaining = args.samples
    while remaining > 0:
        c = min(remaining, 1 << 19)
        p1 = sample_points_in_disk(domain, rng, c)
        p2 = sample_points_in_disk(domain, rng, c)
        r = np.hypot(p1[:, 0] - p2[:, 0], p1[:, 1] - p2[:, 1])
        idx = np.minimum((r / D * nbins).astype(np.int64), nbins - 1)
        counts += np.bincount(idx, minlength=nbins)
        remaining -= c

    settings = QuadratureSettings(abs_tol=1e-12, rel_tol=1e-12, max_subdivisions=200)
    masses, _ = integrate_many(
        lambda r, which: pair_pdf(r, domain),
        [(edges[i], edges[i + 1]) for i in range(nbins)],
        settings,
    )
    expected = masses * args.samples
    qualifying = expected >= 10.0
    if not np.any(qualifying):
        return {
            "name": "pair-distance histogram vs density",
            "pass": False,
            "detail": "no bin reaches the minimum expected count; increase --samples",
        }
    z = np.abs(counts[qualifying] - expected[qualifying]) / np.sqrt(expected[qualifying])
    return {
        "name": "pair-distance histogram vs density",
        "pass": bool(np.all(z <= 4.0)),
        "bins_checked": int(np.sum(qualifying)),
        "worst_z": _jnum(float(np.max(z))),
    }


def _validate_pdf3(args, domain) -> dict:
    bins = 20
    mc = McSettings(samples=args.samples, seed=args.seed, workers=args.workers)
    hist = distance_histogram3(domain, mc, bins=bins)
    masses = joint_pdf3_cell_masses(domain, hist.bin_edges)
    expected = masses * mc.samples
    qualifying = expected >= 100.0
    nq = int(np.sum(qualifying))
    if nq == 0:
        return {
            "name": "three-distance histogram vs joint density",
            "pass": False,
            "detail": "no cell reaches the minimum expected count; increase --samples",
        }
    dev = np.abs(hist.counts[qualifying] - expected[qualifying])
    z = dev / np.sqrt(expected[qualifying])
    frac_ok = float(np.mean(z <= 4.0))
    return {
        "name": "three-distance histogram vs joint density",
        "pass": bool(frac_ok >= 0.99),
        "cells_checked": nq,
        "fraction_within_4sigma": _jnum(frac_ok),
        "worst_z": _jnum(float(np.max(z))),
    }


def _validate_condpdf(args, domain) -> dict:
    D = domain.diameter
    grid = np.linspace(0.1, 0.9, 10) * D
    triples = []
    for a in grid:
        for b in grid:
            lo, hi = abs(a - b), min(a + b, D)
            margin = 0.04 * (hi - lo)
            for c in np.linspace(lo + margin, hi - margin, 10):
                triples.append((a, b, c))
    arr = np.asarray(triples)
    direct = joint_pdf3_values(arr[:, 0], arr[:, 1], arr[:, 2], domain)
    via, _ = joint_pdf3_via_conditioning_many(arr[:, 0], arr[:, 1], arr[:, 2], domain)
    scale = np.maximum(np.abs(direct), 1e-12)
    rel = np.abs(via - direct) / scale
    return {
        "name": "conditional reconstruction vs closed form",
        "pass": bool(np.all(rel <= 1e-6)),
        "triples_checked": len(arr),
        "worst_rel_dev": _jnum(float(np.max(rel))),
    }


def _validate_pmf3(args, domain) -> dict:
    model = parse_model(args.model) if args.model else HardDisk(r0=0.4 * domain.diameter)
    exact = pmf_n3(model, domain)
    mc = McSettings(samples=args.samples, seed=args.seed, workers=args.workers)
    est = estimate_pmf(3, model, domain, mc)
    se = np.sqrt(exact.probs * (1.0 - exact.probs) / mc.samples)
    tol = 4.0 * se + 5.0 / mc.samples + exact.error_estimate
    dev = np.abs(est.probs - exact.probs)
    return {
        "name": "three-node pmf vs sampled outcome frequencies",
        "pass": bool(np.all(dev <= tol)),
        "worst_excess": _jnum(float(np.max(dev - tol))),
    }


def _cmd_validate(args) -> int:
    domain = DiskDomain(args.diameter)
    runners = {
        "pair": _validate_pair,
        "pdf3": _validate_pdf3,
        "condpdf": _validate_condpdf,
        "pmf3": _validate_pmf3,
    }
    check = runners[args.target](args, domain)
    report = {
        "target": args.target,
        "pass": check["pass"],
        "checks": [check],
        "settings": {
            "diameter": _jnum(args.diameter),
            "seed": args.seed,
            "samples": args.samples,
            "workers": args.workers,
            "model": args.model,
            "rng": RNG_NAME,
        },
    }
    _emit_json(args, report)
    return EXIT_OK if check["pass"] else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rggdist",
        description=(
            "Distributions, connectivity, and entropy of random geometric "
            "graphs on uniform points in a disk."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--diameter", type=float, default=1.0, help="disk diameter (default 1)")
    common.add_argument("--seed", type=int, default=1, help="random seed (echoed in output)")
    common.add_argument("--out", default="-", help="output path, '-' for stdout")

    p = sub.add_parser("pdf3", parents=[common], help="evaluate the three-distance joint density")
    p.add_argument("--r12", type=float, required=True)
    p.add_argument("--r13", type=float, required=True)
    p.add_argument("--r23", type=float, required=True)
    p.set_defaults(handler=_cmd_pdf3)

    p = sub.add_parser("pairpdf", parents=[common], help="evaluate the two-point distance density")
    p.add_argument("--r", type=float, required=True)
    p.set_defaults(handler=_cmd_pairpdf)

    p = sub.add_parser("pmf", parents=[common], help="exact graph pmf (n = 2 or 3)")
    p.add_argument("--n", type=int, choices=(2, 3), required=True)
    p.add_argument("--model", required=True, help="hard:r0=..., exp:r0=...,beta=..., table:@file")
    p.add_argument("--abs-tol", type=float, default=None, help="per-entry quadrature tolerance")
    p.set_defaults(handler=_cmd_pmf)

    p = sub.add_parser("entropy", parents=[common], help="exact graph entropy (n = 2 or 3)")
    p.add_argument("--n", type=int, choices=(2, 3), required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--abs-tol", type=float, default=None)
    p.set_defaults(handler=_cmd_entropy)

    p = sub.add_parser("entropy-mc", parents=[common], help="Monte Carlo graph entropy")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument(
        "--no-bias-correction", action="store_true",
        help="disable the Miller-Madow correction",
    )
    p.set_defaults(handler=_cmd_entropy_mc)

    p = sub.add_parser("bounds", parents=[common], help="entropy bound chain for n nodes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--abs-tol", type=float, default=None)
    p.add_argument(
        "--samples", type=int, default=None,
        help="also Monte Carlo estimate H(G_n) with this many samples",
    )
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(handler=_cmd_bounds)

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--n", type=int, default=3)
    sweep.add_argument("--model-kind", choices=("hard", "exp"), default="hard")
    sweep.add_argument("--beta", type=float, default=2.0, help="exponent for --model-kind exp")
    sweep.add_argument("--r0-start", type=float, default=0.0)
    sweep.add_argument("--r0-stop", type=float, default=None, help="default: the diameter")
    sweep.add_argument("--steps", type=int, default=40)
    sweep.add_argument("--mc", action="store_true", help="estimate by Monte Carlo")
    sweep.add_argument("--samples", type=int, default=1_000_000)
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--abs-tol", type=float, default=None)

    p = sub.add_parser(
        "sweep-connectivity", parents=[common, sweep],
        help="connectedness and completeness probabilities over a range grid",
    )
    p.set_defaults(handler=_cmd_sweep_connectivity)

    p = sub.add_parser(
        "sweep-entropy", parents=[common, sweep],
        help="graph entropy and its upper bounds over a range grid",
    )
    p.set_defaults(handler=_cmd_sweep_entropy)

    p = sub.add_parser("validate", parents=[common], help="run a sampling or consistency oracle")
    p.add_argument("target", choices=("pdf3", "pair", "condpdf", "pmf3"))
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--model", default=None, help="model for the pmf3 target")
    p.set_defaults(handler=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.handler(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnsupportedError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except AccuracyError as exc:
        print(f"accuracy failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
