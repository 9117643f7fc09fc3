"""Deterministic adaptive quadrature in one to three dimensions.

The building block is a 15-point Kronrod rule with its embedded 7-point
Gauss rule; the difference of the two estimates on a panel is the panel's
error estimate.  Panels are refined worst-first with a deterministic
tie-break (panel lower bound, then upper bound), so identical inputs give
bit-identical results.  Supplied breakpoints become initial panel edges,
which restores fast convergence on piecewise-smooth integrands.

Boxes in two or three dimensions are integrated as iterated 1-d integrals
(last axis innermost), with inner levels run to a tolerance that keeps
their contribution a small fraction of the requested one.  Iterated
refinement concentrates panels geometrically around integrable
singularities, which axis-aligned box bisection cannot do at the
tolerances needed here.

Integrands are evaluated in batches: a 1-d integrand receives an array of
abscissae, an n-d integrand an array of shape ``(npoints, ndim)``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import AccuracyError, DomainError

# 15-point Kronrod nodes on [-1, 1] (positive half; the rule is symmetric)
# with their weights, and the weights of the embedded 7-point Gauss rule,
# which lives on nodes 1, 3, 5, 7 of the positive half.
_XGK_HALF = (
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
)
_WGK_HALF = (
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
)
_WG_HALF = (
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
)


def _build_rule():
    xs = [-x for x in _XGK_HALF[:-1]] + [0.0] + [x for x in reversed(_XGK_HALF[:-1])]
    wk = list(_WGK_HALF[:-1]) + [_WGK_HALF[-1]] + list(reversed(_WGK_HALF[:-1]))
    # Gauss nodes sit at indices 1, 3, 5, 7, 9, 11, 13 of the sorted rule.
    wg = [0.0] * 15
    gauss_weights = list(_WG_HALF[:3]) + [_WG_HALF[3]] + list(reversed(_WG_HALF[:3]))
    for idx, w in zip(range(1, 14, 2), gauss_weights):
        wg[idx] = w
    return np.asarray(xs), np.asarray(wk), np.asarray(wg)


GK15_NODES, GK15_WEIGHTS, G7_WEIGHTS = _build_rule()

# The same rule mapped to [0, 1]; convenient for substituted integrals.
GK15_NODES01 = 0.5 * (GK15_NODES + 1.0)
GK15_WEIGHTS01 = 0.5 * GK15_WEIGHTS
G7_WEIGHTS01 = 0.5 * G7_WEIGHTS

_DIFF_WEIGHTS = GK15_WEIGHTS - G7_WEIGHTS


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances and refinement budget for :func:`integrate`.

    ``breakpoints`` holds one sorted sequence per axis; values outside the
    integration interval are ignored.  ``max_subdivisions`` bounds the
    number of panel bisections per 1-d integration.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 1000
    breakpoints: tuple[tuple[float, ...], ...] = ()

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise DomainError("tolerances must be nonnegative")
        if self.abs_tol == 0 and self.rel_tol == 0:
            raise DomainError("at least one of abs_tol, rel_tol must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")


class QuadratureResult(NamedTuple):
    value: float
    error_estimate: float


def _panel_batch(f, owners, los, his):
    """Evaluate the embedded rule on a batch of panels in one integrand call.

    Returns per-panel Kronrod values and |Kronrod - Gauss| error estimates.
    """
    half = 0.5 * (his - los)
    mid = 0.5 * (his + los)
    pts = mid[:, None] + half[:, None] * GK15_NODES[None, :]
    vals = np.asarray(f(pts.ravel(), np.repeat(owners, 15)), dtype=float)
    vals = vals.reshape(len(los), 15)
    kron = (vals @ GK15_WEIGHTS) * half
    err = np.abs((vals @ _DIFF_WEIGHTS) * half)
    return kron, err


def integrate_many(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    intervals: Sequence[tuple[float, float]],
    settings: QuadratureSettings = QuadratureSettings(),
    breakpoints: Sequence[Sequence[float]] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Adaptively integrate many 1-d integrals in lockstep.

    ``f(x, which)`` receives a flat batch of abscissae together with the
    index of the integral each abscissa belongs to and must return the
    integrand values.  ``breakpoints``, when given, supplies one sequence
    per integral.  Returns (values, error_estimates) arrays.

    Raises :class:`AccuracyError` (carrying the best values and estimates)
    if any integral exhausts ``max_subdivisions`` bisections without
    meeting ``max(abs_tol, rel_tol * |value|)``.
    """
    m = len(intervals)
    heaps: list[list] = [[] for _ in range(m)]
    totals = np.zeros(m)
    errors = np.zeros(m)
    splits = np.zeros(m, dtype=int)

    init_owner, init_lo, init_hi = [], [], []
    for idx, (lo, hi) in enumerate(intervals):
        lo = float(lo)
        hi = float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError(f"interval {idx} has non-finite bounds ({lo}, {hi})")
        if hi <= lo:
            continue  # empty interval integrates to zero
        edges = [lo]
        if breakpoints is not None and breakpoints[idx] is not None:
            edges.extend(b for b in sorted(breakpoints[idx]) if lo < b < hi)
        edges.append(hi)
        for a, b in zip(edges[:-1], edges[1:]):
            if b > a:
                init_owner.append(idx)
                init_lo.append(a)
                init_hi.append(b)

    if init_owner:
        owners = np.asarray(init_owner)
        los = np.asarray(init_lo)
        his = np.asarray(init_hi)
        vals, errs = _panel_batch(f, owners, los, his)
        for k in range(len(owners)):
            i = owners[k]
            heapq.heappush(heaps[i], (-errs[k], los[k], his[k], vals[k]))
            totals[i] += vals[k]
            errors[i] += errs[k]

    failed: set[int] = set()
    while True:
        tols = np.maximum(settings.abs_tol, settings.rel_tol * np.abs(totals))
        active = [
            i
            for i in range(m)
            if i not in failed and heaps[i] and errors[i] > tols[i]
        ]
        if not active:
            break
        parents = []
        for i in active:
            if splits[i] >= settings.max_subdivisions:
                failed.add(i)
                continue
            neg_err, lo, hi, val = heapq.heappop(heaps[i])
            parents.append((i, -neg_err, lo, hi, val))
            splits[i] += 1
        if not parents:
            break
        owners = np.asarray([p[0] for p in parents for _ in range(2)])
        los = np.empty(2 * len(parents))
        his = np.empty(2 * len(parents))
        for k, (_, _, lo, hi, _) in enumerate(parents):
            mid = 0.5 * (lo + hi)
            los[2 * k], his[2 * k] = lo, mid
            los[2 * k + 1], his[2 * k + 1] = mid, hi
        vals, errs = _panel_batch(f, owners, los, his)
        for k, (i, perr, lo, hi, pval) in enumerate(parents):
            totals[i] += vals[2 * k] + vals[2 * k + 1] - pval
            errors[i] += errs[2 * k] + errs[2 * k + 1] - perr
            heapq.heappush(heaps[i], (-errs[2 * k], los[2 * k], his[2 * k], vals[2 * k]))
            heapq.heappush(
                heaps[i], (-errs[2 * k + 1], los[2 * k + 1], his[2 * k + 1], vals[2 * k + 1])
            )

    # Recombine each integral from its panels in position order: removes the
    # drift of incremental updates and is a deterministic summation order.
    for i in range(m):
        if heaps[i]:
            panels = sorted(heaps[i], key=lambda p: (p[1], p[2]))
            totals[i] = math.fsum(p[3] for p in panels)
            errors[i] = math.fsum(-p[0] for p in panels)

    if failed:
        worst = max(failed, key=lambda i: errors[i])
        raise AccuracyError(
            f"{len(failed)} of {m} integrals did not converge within "
            f"{settings.max_subdivisions} subdivisions "
            f"(worst error estimate {errors[worst]:.3e})",
            value=totals,
            error_estimate=errors,
        )
    return totals, errors


def _scaled_inner(settings: QuadratureSettings, width: float) -> QuadratureSettings:
    # Inner integrals feed the outer integrand; keep their contribution to
    # a quarter of the outer budget.
    abs_tol = settings.abs_tol * 0.25 / max(width, 1.0) if settings.abs_tol > 0 else 0.0
    rel_tol = settings.rel_tol * 0.25 if settings.rel_tol > 0 else 0.0
    if abs_tol == 0 and rel_tol == 0:
        abs_tol = 1e-14
    return QuadratureSettings(
        abs_tol=abs_tol,
        rel_tol=rel_tol,
        max_subdivisions=settings.max_subdivisions,
    )


def integrate(
    f: Callable,
    box: Sequence[tuple[float, float]],
    settings: QuadratureSettings = QuadratureSettings(),
) -> QuadratureResult:
    """Adaptive integration of ``f`` over an axis-aligned box in <= 3 dims.

    In one dimension ``f`` receives an array of abscissae; in higher
    dimensions an array of shape ``(npoints, ndim)``.  The reported error
    estimate includes the budget allotted to inner levels.
    """
    box = [(float(lo), float(hi)) for lo, hi in box]
    ndim = len(box)
    if ndim < 1 or ndim > 3:
        raise DomainError(f"box must have 1 to 3 axes, got {ndim}")
    for lo, hi in box:
        if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
            raise DomainError(f"box axis ({lo}, {hi}) is degenerate")

    breaks = settings.breakpoints

    def axis_breaks(axis):
        if breaks and axis < len(breaks) and breaks[axis]:
            return tuple(breaks[axis])
        return ()

    if ndim == 1:
        def g(x, which):
            return np.asarray(f(x), dtype=float)

        values, errors = integrate_many(
            g, [box[0]], settings, breakpoints=[axis_breaks(0)]
        )
        return QuadratureResult(float(values[0]), float(errors[0]))

    def level(prefixes: np.ndarray, axis: int, lvl_settings: QuadratureSettings) -> np.ndarray:
        """Integrate out axes ``axis:`` for every prefix row; returns values."""
        n_int = len(prefixes)
        width = box[axis][1] - box[axis][0]
        if axis == ndim - 1:
            def g(x, which):
                pts = np.column_stack((prefixes[which], x))
                return np.asarray(f(pts), dtype=float)
        else:
            inner = _scaled_inner(lvl_settings, width)

            def g(x, which):
                new_prefixes = np.column_stack((prefixes[which], x))
                return level(new_prefixes, axis + 1, inner)

        values, _ = integrate_many(
            g, [box[axis]] * n_int, lvl_settings, breakpoints=[axis_breaks(axis)] * n_int
        )
        return values

    top = _scaled_inner(settings, 1.0)  # budget split mirrors the 1-d case

    def g_top(x, which):
        prefixes = x[:, None]
        return level(prefixes, 1, top)

    values, errors = integrate_many(
        g_top, [box[0]], settings, breakpoints=[axis_breaks(0)]
    )
    value = float(values[0])
    # Inner levels were run to a fraction of the requested tolerance; fold
    # that budget into the reported estimate.
    budget = (settings.abs_tol + settings.rel_tol * abs(value)) / 3.0
    return QuadratureResult(value, float(errors[0]) + budget)
