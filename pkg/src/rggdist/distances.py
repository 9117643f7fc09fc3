"""Closed-form distance densities for uniform points in a disk.

Covers the density of the distance between two uniform points, the joint
density of the three pairwise distances among three uniform points, and
the conditional machinery behind it: the distance density when one point
sits on a circle, the trapezoidal density of the angle at that point, the
density of the smallest concentric circle enclosing all three points, and
the conditional joint density given that diameter.  Integrating the
conditional form against the enclosing-diameter density reproduces the
closed form exactly, which makes :func:`joint_pdf3_via_conditioning` an
independent numerical oracle for :func:`joint_pdf3`.

The joint density splits into four cases.  Writing ``rbar`` for the
longest side and ``d`` for the circumscribed-circle diameter
``2*r12*r13*r23/sqrt(Q)``:

* obtuse triangle (``2*rbar**2 > sum of squares``) with ``d <= D``,
* acute-or-right triangle with ``d <= D``,
* obtuse triangle with ``d > D`` (the enclosing circle is the one whose
  diameter is the longest side, so the triple is still realizable),
* acute triangle with ``d > D``: density zero, because the minimal
  enclosing circle of an acute triangle is its circumcircle.

The density is continuous across the case boundaries but its gradient is
not, and it blows up like ``1/sqrt(Q)`` toward degenerate (collinear)
triples; that rim is integrable.  The integration helpers below therefore
split the innermost axis at the analytic case-boundary points and map
each piece through a cosine substitution that absorbs the rim
singularity, which keeps every panel smooth.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .errors import DomainError
from .geometry import (
    DEGENERATE_Q_EPS,
    DiskDomain,
    TriangleSides,
    _phi_clipped,
    triangle_quantities,
)
from .quadrature import (
    G7_WEIGHTS01,
    GK15_NODES01,
    GK15_WEIGHTS01,
    QuadratureSettings,
    integrate_many,
)

_PI2 = math.pi * math.pi


class JointPdfCase(Enum):
    """Which branch of the three-distance joint density applied."""

    OBTUSE_INSCRIBED = "obtuse_inscribed"
    ACUTE_INSCRIBED = "acute_inscribed"
    OBTUSE_OUTSCRIBED = "obtuse_outscribed"
    ZERO = "zero"


_CASE_BY_CODE = {
    0: JointPdfCase.ZERO,
    1: JointPdfCase.OBTUSE_INSCRIBED,
    2: JointPdfCase.ACUTE_INSCRIBED,
    3: JointPdfCase.OBTUSE_OUTSCRIBED,
}


def _as_length_array(name, value):
    arr = np.asarray(value, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be finite and nonnegative, got {value!r}")
    return arr


# ---------------------------------------------------------------------------
# two-point density
# ---------------------------------------------------------------------------

def pair_pdf(r, domain: DiskDomain):
    """Density of the distance between two uniform points in the disk.

    ``(16*r / (pi*D**2)) * phi(r/D)`` on [0, D], zero beyond D.  Accepts
    scalars or arrays; negative or non-finite distances raise.
    """
    arr = _as_length_array("r", r)
    D = domain.diameter
    inside = arr <= D
    out = np.where(inside, 16.0 * arr / (math.pi * D * D) * _phi_clipped(arr / D), 0.0)
    if np.isscalar(r) or arr.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# three-point joint density (closed form)
# ---------------------------------------------------------------------------

def _density_inscribed(a, b, c, d, D):
    """Common part of the two d <= D branches; sides sorted ascending."""
    d2D2 = (d / D) ** 2
    s_outer = _phi_clipped(a / D) + _phi_clipped(b / D) + _phi_clipped(c / D)
    s_inner = _phi_clipped(a / d) + _phi_clipped(b / d) + _phi_clipped(c / d)
    return (
        64.0
        * d
        / (_PI2 * D**4)
        * (s_outer - d2D2 * s_inner - 0.5 * math.pi * (1.0 - d2D2))
    )


def _density_obtuse_extra(c, d, D):
    """Term added to the inscribed density when the triangle is obtuse."""
    return 64.0 * d / (_PI2 * D**4) * 2.0 * (d / D) ** 2 * _phi_clipped(c / d)


def _density_outscribed(c, d, D):
    """Obtuse branch for d > D: only the longest side matters."""
    return 128.0 * d / (_PI2 * D**4) * _phi_clipped(c / D)


def _pdf3_batch(r12, r13, r23, D, degenerate_eps=DEGENERATE_Q_EPS, with_case=False):
    """Vectorized four-branch evaluation; assumes inputs already validated.

    Sides are sorted per point before evaluation so the result is exactly
    invariant under permutations of the three arguments.
    """
    triples = np.stack(np.broadcast_arrays(
        np.asarray(r12, float), np.asarray(r13, float), np.asarray(r23, float)
    ), axis=-1)
    shape = triples.shape[:-1]
    triples = triples.reshape(-1, 3)
    triples.sort(axis=1)
    a, b, c = triples[:, 0], triples[:, 1], triples[:, 2]

    q = (a + b + c) * (b + c - a) * (a + c - b) * (a + b - c)
    valid = (c > 0.0) & (c <= D) & (q > degenerate_eps * (c * c) ** 2)

    out = np.zeros(len(a))
    codes = np.zeros(len(a), dtype=np.uint8)
    if np.any(valid):
        va, vb, vc, vq = a[valid], b[valid], c[valid], q[valid]
        d = 2.0 * va * vb * vc / np.sqrt(vq)
        obtuse = vc * vc > va * va + vb * vb
        inscribed = d <= D
        base = _density_inscribed(va, vb, vc, d, D)
        vals = np.where(
            inscribed,
            base + np.where(obtuse, _density_obtuse_extra(vc, d, D), 0.0),
            np.where(obtuse, _density_outscribed(vc, d, D), 0.0),
        )
        out[valid] = np.maximum(vals, 0.0)
        vcodes = np.where(
            inscribed,
            np.where(obtuse, 1, 2),
            np.where(obtuse, 3, 0),
        ).astype(np.uint8)
        codes[valid] = vcodes

    out = out.reshape(shape)
    codes = codes.reshape(shape)
    if with_case:
        return out, codes
    return out


def joint_pdf3(
    sides: TriangleSides, domain: DiskDomain, degenerate_eps: float = DEGENERATE_Q_EPS
) -> float:
    """Joint density of the three pairwise distances at the given triple.

    Returns 0 outside the support (triangle inequalities violated, or the
    longest side exceeding the disk diameter, or the acute/outscribed
    case).  Exactly symmetric in the three side lengths.
    """
    val = _pdf3_batch(
        np.float64(sides.r12), np.float64(sides.r13), np.float64(sides.r23),
        domain.diameter, degenerate_eps,
    )
    return float(val)


def classify_triple(
    sides: TriangleSides, domain: DiskDomain, degenerate_eps: float = DEGENERATE_Q_EPS
) -> JointPdfCase:
    """Which case of the joint density applies at this triple."""
    _, code = _pdf3_batch(
        np.float64(sides.r12), np.float64(sides.r13), np.float64(sides.r23),
        domain.diameter, degenerate_eps, with_case=True,
    )
    return _CASE_BY_CODE[int(code)]


def joint_pdf3_values(r12, r13, r23, domain: DiskDomain) -> np.ndarray:
    """Vectorized :func:`joint_pdf3` over broadcastable arrays."""
    a = _as_length_array("r12", r12)
    b = _as_length_array("r13", r13)
    c = _as_length_array("r23", r23)
    return _pdf3_batch(a, b, c, domain.diameter)


# ---------------------------------------------------------------------------
# conditional machinery (point on a circle of diameter s)
# ---------------------------------------------------------------------------

def pair_pdf_on_circle(r, s):
    """Density of the distance from a point on a circle of diameter ``s``
    to a uniform point inside it: ``(8r / (pi*s**2)) * arccos(r/s)`` on
    [0, s], zero beyond."""
    if not (np.isscalar(s) and math.isfinite(float(s)) and float(s) > 0):
        raise DomainError(f"s must be a positive length, got {s!r}")
    s = float(s)
    arr = _as_length_array("r", r)
    inside = arr <= s
    ratio = np.clip(np.where(inside, arr / s, 1.0), 0.0, 1.0)
    out = np.where(inside, 8.0 * arr / (math.pi * s * s) * np.arccos(ratio), 0.0)
    if np.isscalar(r) or arr.ndim == 0:
        return float(out)
    return out


def angle_pdf_trapezoid(theta, half_range_a, half_range_b):
    """Density of the difference of two independent uniform angles.

    The two angles are uniform on ``(-half_range_a, half_range_a)`` and
    ``(-half_range_b, half_range_b)`` with both half-ranges in
    (0, pi/2); the difference has the trapezoidal density

    * ``1 / (2*max(ha, hb))``            for |theta| <= |ha - hb|,
    * ``(ha + hb - |theta|)/(4*ha*hb)``  for |ha - hb| <= |theta| < ha + hb,
    * 0                                  for ha + hb <= |theta| < pi.
    """
    ha = float(half_range_a)
    hb = float(half_range_b)
    for name, h in (("half_range_a", ha), ("half_range_b", hb)):
        if not math.isfinite(h) or not (0.0 < h < 0.5 * math.pi):
            raise DomainError(f"{name} must lie in (0, pi/2), got {h!r}")
    arr = np.abs(np.asarray(theta, dtype=float))
    if np.any(~np.isfinite(arr)) or np.any(arr >= math.pi):
        raise DomainError(f"theta must satisfy |theta| < pi, got {theta!r}")
    lo = abs(ha - hb)
    hi = ha + hb
    out = np.where(
        arr <= lo,
        1.0 / (2.0 * max(ha, hb)),
        np.where(arr < hi, (hi - arr) / (4.0 * ha * hb), 0.0),
    )
    if np.isscalar(theta) or arr.ndim == 0:
        return float(out)
    return out


def enclosing_diameter_pdf(s, domain: DiskDomain):
    """Density of the smallest concentric-circle diameter enclosing three
    uniform points: ``6*s**5 / D**6`` on [0, D]."""
    arr = np.asarray(s, dtype=float)
    D = domain.diameter
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > D):
        raise DomainError(f"s must lie in [0, D], got {s!r}")
    out = 6.0 * arr**5 / D**6
    if np.isscalar(s) or arr.ndim == 0:
        return float(out)
    return out


def enclosing_diameter_cdf(s, domain: DiskDomain):
    """Distribution function matching :func:`enclosing_diameter_pdf`: (s/D)**6."""
    arr = np.asarray(s, dtype=float)
    D = domain.diameter
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > D):
        raise DomainError(f"s must lie in [0, D], got {s!r}")
    out = (arr / D) ** 6
    if np.isscalar(s) or arr.ndim == 0:
        return float(out)
    return out


def _cond_pdf3_batch(r12, r13, r23, s, degenerate_eps=DEGENERATE_Q_EPS):
    """Conditional joint density given the enclosing diameter equals s.

    Three branches: ``d <= s`` uses the sum of arccos(r/s) minus pi/2;
    ``d > s`` is possible only for obtuse triangles (the vertex at the
    obtuse angle cannot lie on the circle), and acute triples with
    ``d > s`` have density zero.
    """
    triples = np.stack(np.broadcast_arrays(
        np.asarray(r12, float), np.asarray(r13, float), np.asarray(r23, float)
    ), axis=-1)
    s_arr = np.broadcast_to(np.asarray(s, float), triples.shape[:-1]).reshape(-1)
    shape = triples.shape[:-1]
    triples = triples.reshape(-1, 3)
    triples = np.sort(triples, axis=1)
    a, b, c = triples[:, 0], triples[:, 1], triples[:, 2]

    q = (a + b + c) * (b + c - a) * (a + c - b) * (a + b - c)
    valid = (c > 0.0) & (c <= s_arr) & (q > degenerate_eps * (c * c) ** 2)

    out = np.zeros(len(a))
    if np.any(valid):
        va, vb, vc, vq, vs = a[valid], b[valid], c[valid], q[valid], s_arr[valid]
        d = 2.0 * va * vb * vc / np.sqrt(vq)
        obtuse = vc * vc > va * va + vb * vb
        acos_sum = (
            np.arccos(np.clip(va / vs, 0.0, 1.0))
            + np.arccos(np.clip(vb / vs, 0.0, 1.0))
            + np.arccos(np.clip(vc / vs, 0.0, 1.0))
        )
        pref = 64.0 * d / (3.0 * _PI2 * vs**4)
        vals = np.where(
            d <= vs,
            pref * (acos_sum - 0.5 * math.pi),
            np.where(obtuse, 2.0 * pref * np.arccos(np.clip(vc / vs, 0.0, 1.0)), 0.0),
        )
        out[valid] = np.maximum(vals, 0.0)
    return out.reshape(shape)


def conditional_joint_pdf3(sides: TriangleSides, s: float) -> float:
    """Joint density of the three distances conditioned on the enclosing
    concentric-circle diameter being ``s`` (one point is then on that
    circle).  Zero when the longest side exceeds ``s``."""
    sf = float(s)
    if not math.isfinite(sf) or sf <= 0:
        raise DomainError(f"s must be a positive length, got {s!r}")
    val = _cond_pdf3_batch(
        np.float64(sides.r12), np.float64(sides.r13), np.float64(sides.r23), sf
    )
    return float(val)


_VIA_CONDITIONING_SETTINGS = QuadratureSettings(
    abs_tol=0.0, rel_tol=1e-9, max_subdivisions=300
)


def joint_pdf3_via_conditioning(
    sides: TriangleSides,
    domain: DiskDomain,
    settings: QuadratureSettings = _VIA_CONDITIONING_SETTINGS,
) -> float:
    """Joint density reconstructed by integrating the conditional density
    against the enclosing-diameter density.

    Mathematically identical to :func:`joint_pdf3`; computed by adaptive
    quadrature over the diameter, with the interval split at the
    circumdiameter where the conditional density changes branch.  Serves
    as an independent oracle for the closed form.  Raises
    :class:`AccuracyError` if the quadrature cannot converge.
    """
    values, _ = joint_pdf3_via_conditioning_many(
        [sides.r12], [sides.r13], [sides.r23], domain, settings
    )
    return float(values[0])


def joint_pdf3_via_conditioning_many(
    r12, r13, r23, domain: DiskDomain,
    settings: QuadratureSettings = _VIA_CONDITIONING_SETTINGS,
) -> tuple[np.ndarray, np.ndarray]:
    """Batch form of :func:`joint_pdf3_via_conditioning`.

    All triples are integrated in lockstep; returns (values, error
    estimates).
    """
    a = _as_length_array("r12", r12).ravel()
    b = _as_length_array("r13", r13).ravel()
    c = _as_length_array("r23", r23).ravel()
    if not (len(a) == len(b) == len(c)):
        raise DomainError("r12, r13, r23 must have equal lengths")
    D = domain.diameter

    intervals = []
    breaks = []
    for k in range(len(a)):
        tq = triangle_quantities(TriangleSides(a[k], b[k], c[k]))
        if tq.circumdiameter is None or tq.longest > D:
            intervals.append((0.0, 0.0))  # integrates to zero
            breaks.append(())
            continue
        intervals.append((tq.longest, D))
        d = tq.circumdiameter
        breaks.append((d,) if tq.longest < d < D else ())

    def integrand(svals, which):
        return _cond_pdf3_batch(a[which], b[which], c[which], svals) * (
            6.0 * svals**5 / D**6
        )

    values, errors = integrate_many(integrand, intervals, settings, breakpoints=breaks)
    return values, errors


# ---------------------------------------------------------------------------
# integration engine for the joint density
# ---------------------------------------------------------------------------

def _inner_breakpoint_candidates(p, q, D):
    """Interior points where the joint density changes branch along the
    third-side axis, for fixed first two sides p, q.

    Right-angle crossings sit at ``sqrt(|p**2 - q**2|)`` and
    ``sqrt(p**2 + q**2)``; the circumdiameter equals D at the roots of a
    quadratic in the squared third side.
    """
    p2 = p * p
    q2 = q * q
    m2 = np.maximum(p2, q2)
    n2 = np.minimum(p2, q2)
    right_lo = np.sqrt(np.maximum(m2 - n2, 0.0))
    right_hi = np.sqrt(m2 + n2)

    A = D * D
    B = 2.0 * A * (p2 + q2) - 4.0 * p2 * q2
    C = A * (p2 - q2) ** 2
    disc = B * B - 4.0 * A * C
    has_roots = disc > 0.0
    sq = np.sqrt(np.maximum(disc, 0.0))
    u_minus = np.maximum((B - sq) / (2.0 * A), 0.0)
    u_plus = np.maximum((B + sq) / (2.0 * A), 0.0)
    t_d_lo = np.where(has_roots, np.sqrt(u_minus), 0.0)
    t_d_hi = np.where(has_roots, np.sqrt(u_plus), 0.0)
    return np.stack([right_lo, right_hi, t_d_lo, t_d_hi], axis=-1)


def _inner_lines(
    p, q, lo, hi, D,
    weight=None,
    extra_breaks=(),
    line_tol=1e-11,
    max_rounds=6,
):
    """Integrals over the third side t of joint density times weight.

    One line per (p, q) pair, integrated over [lo, hi] intersected with
    the triangle-inequality interval and [0, D].  Each smooth piece is
    mapped through ``t = mid - half*cos(pi*u)``, whose Jacobian vanishes
    like u at the endpoints and therefore cancels the ``1/sqrt`` blow-up
    of the density at degenerate triples.  Pieces whose embedded-rule
    error exceeds the per-line budget are bisected for up to
    ``max_rounds`` rounds.  Returns (values, error_estimates).
    """
    p = np.asarray(p, float).ravel()
    q = np.asarray(q, float).ravel()
    k = len(p)
    lo = np.broadcast_to(np.asarray(lo, float), (k,))
    hi = np.broadcast_to(np.asarray(hi, float), (k,))

    tri_lo = np.abs(p - q)
    tri_hi = p + q
    a = np.maximum(lo, tri_lo)
    b = np.minimum(np.minimum(hi, tri_hi), D)

    cands = _inner_breakpoint_candidates(p, q, D)
    if extra_breaks:
        extra = np.broadcast_to(
            np.asarray(extra_breaks, float), (k, len(extra_breaks))
        )
        cands = np.concatenate([cands, extra], axis=1)
    cands = np.clip(cands, a[:, None], b[:, None])
    edges = np.sort(np.concatenate([a[:, None], cands, b[:, None]], axis=1), axis=1)

    seg_lo = edges[:, :-1].ravel()
    seg_hi = edges[:, 1:].ravel()
    owner = np.repeat(np.arange(k), edges.shape[1] - 1)
    keep = seg_hi > seg_lo
    seg_lo, seg_hi, owner = seg_lo[keep], seg_hi[keep], owner[keep]

    values = np.zeros(k)
    errors = np.zeros(k)
    if len(owner) == 0:
        return values, errors

    def eval_segments(s_lo, s_hi, own):
        half = 0.5 * (s_hi - s_lo)
        mid = 0.5 * (s_hi + s_lo)
        u = GK15_NODES01[None, :]
        t = mid[:, None] - half[:, None] * np.cos(math.pi * u)
        jac = half[:, None] * math.pi * np.sin(math.pi * u)
        g = _pdf3_batch(p[own][:, None], q[own][:, None], t, D)
        if weight is not None:
            g = g * weight(t)
        g = g * jac
        vals = g @ GK15_WEIGHTS01
        errs = np.abs(g @ (GK15_WEIGHTS01 - G7_WEIGHTS01))
        return vals, errs

    seg_val, seg_err = eval_segments(seg_lo, seg_hi, owner)
    for _ in range(max_rounds):
        line_err = np.bincount(owner, weights=seg_err, minlength=k)
        line_val = np.bincount(owner, weights=seg_val, minlength=k)
        budget = np.maximum(line_tol, 1e-13 * np.abs(line_val))
        needy_line = line_err > budget
        if not np.any(needy_line):
            break
        nsegs = np.bincount(owner, minlength=k)
        split = needy_line[owner] & (seg_err > budget[owner] / np.maximum(nsegs[owner], 1))
        if not np.any(split):
            break
        keep_lo, keep_hi = seg_lo[~split], seg_hi[~split]
        keep_own, keep_val, keep_err = owner[~split], seg_val[~split], seg_err[~split]
        mid = 0.5 * (seg_lo[split] + seg_hi[split])
        new_lo = np.concatenate([seg_lo[split], mid])
        new_hi = np.concatenate([mid, seg_hi[split]])
        new_own = np.concatenate([owner[split], owner[split]])
        new_val, new_err = eval_segments(new_lo, new_hi, new_own)
        seg_lo = np.concatenate([keep_lo, new_lo])
        seg_hi = np.concatenate([keep_hi, new_hi])
        owner = np.concatenate([keep_own, new_own])
        seg_val = np.concatenate([keep_val, new_val])
        seg_err = np.concatenate([keep_err, new_err])

    values = np.bincount(owner, weights=seg_val, minlength=k)
    errors = np.bincount(owner, weights=seg_err, minlength=k)
    return values, errors


def triple_product_integral(
    domain: DiskDomain,
    box12=(0.0, None),
    box13=(0.0, None),
    box23=(0.0, None),
    w12=None,
    w13=None,
    w23=None,
    abs_tol: float = 1e-6,
    inner_breaks=(),
    mid_breaks=(),
    outer_breaks=(),
    max_subdivisions: int = 400,
) -> tuple[float, float]:
    """Triple integral of the joint density times separable weights.

    The outer two axes use adaptive panels (the middle axis in lockstep
    across each outer panel's nodes); the innermost axis uses the
    substituted piecewise rule of :func:`_inner_lines`.  ``None`` box ends
    default to the disk diameter; weights default to 1.  Returns (value,
    error estimate); the estimate includes the budgets allotted to the
    inner levels.
    """
    D = domain.diameter

    def clip_box(box):
        lo = 0.0 if box[0] is None else max(0.0, float(box[0]))
        hi = D if box[1] is None else min(D, float(box[1]))
        return lo, hi

    (lo1, hi1), (lo2, hi2), (lo3, hi3) = map(clip_box, (box12, box13, box23))
    if hi1 <= lo1 or hi2 <= lo2 or hi3 <= lo3:
        return 0.0, 0.0

    width1 = hi1 - lo1
    width2 = hi2 - lo2
    tol_outer = 0.5 * abs_tol
    tol_mid = 0.25 * abs_tol / width1
    tol_inner = 0.05 * abs_tol / (width1 * width2)

    mid_settings = QuadratureSettings(
        abs_tol=tol_mid, rel_tol=0.0, max_subdivisions=max_subdivisions
    )

    def mid_break_list(pv):
        raw = (pv, pv - lo3, pv + lo3, hi3 - pv, D - pv) + tuple(mid_breaks)
        return tuple(x for x in raw if lo2 < x < hi2)

    def outer_integrand(p_batch):
        n = len(p_batch)

        def mid_integrand(q_flat, own):
            pp = p_batch[own]
            vals, _ = _inner_lines(
                pp, q_flat, lo3, hi3, D,
                weight=w23, extra_breaks=tuple(inner_breaks), line_tol=tol_inner,
            )
            if w13 is not None:
                vals = vals * w13(q_flat)
            return vals

        mid_vals, _ = integrate_many(
            mid_integrand,
            [(lo2, hi2)] * n,
            mid_settings,
            breakpoints=[mid_break_list(pv) for pv in p_batch],
        )
        if w12 is not None:
            mid_vals = mid_vals * w12(p_batch)
        return mid_vals

    outer_settings = QuadratureSettings(
        abs_tol=tol_outer, rel_tol=0.0, max_subdivisions=max_subdivisions
    )
    values, errors = integrate_many(
        lambda x, which: outer_integrand(x),
        [(lo1, hi1)],
        outer_settings,
        breakpoints=[tuple(x for x in outer_breaks if lo1 < x < hi1)],
    )
    return float(values[0]), float(errors[0]) + 0.3 * abs_tol


def marginal_pair_density(r12_values, domain: DiskDomain, abs_tol: float = 1e-6):
    """Double integral of the joint density over the other two sides.

    Should reproduce :func:`pair_pdf` at each requested first-side value;
    exposed for exactly that consistency check.  Returns an array.
    """
    p_arr = _as_length_array("r12", r12_values).ravel()
    D = domain.diameter
    tol_mid = 0.5 * abs_tol
    tol_inner = 0.1 * abs_tol / D

    def mid_integrand(q_flat, own):
        pp = p_arr[own]
        vals, _ = _inner_lines(pp, q_flat, 0.0, D, D, line_tol=tol_inner)
        return vals

    settings = QuadratureSettings(abs_tol=tol_mid, rel_tol=0.0, max_subdivisions=400)
    breaks = [tuple(x for x in (pv, D - pv) if 0.0 < x < D) for pv in p_arr]
    values, _ = integrate_many(
        mid_integrand, [(0.0, D)] * len(p_arr), settings, breakpoints=breaks
    )
    return values


def _per_cell_line_integrals(p, q, edges, D, line_tol=1e-9, max_rounds=4):
    """Third-side integrals of the joint density bucketed per grid cell.

    Like :func:`_inner_lines` over the full admissible interval, but with
    the grid edges added as segment boundaries and each segment's
    contribution accumulated into the cell containing it.  Returns an
    array of shape ``(len(p), len(edges) - 1)``.
    """
    p = np.asarray(p, float).ravel()
    q = np.asarray(q, float).ravel()
    k = len(p)
    nb = len(edges) - 1

    a = np.abs(p - q)
    b = np.minimum(p + q, min(edges[-1], D))

    cands = _inner_breakpoint_candidates(p, q, D)
    grid = np.broadcast_to(edges[1:-1], (k, nb - 1))
    cands = np.concatenate([cands, grid], axis=1)
    cands = np.clip(cands, a[:, None], b[:, None])
    seg_edges = np.sort(
        np.concatenate([a[:, None], cands, b[:, None]], axis=1), axis=1
    )

    seg_lo = seg_edges[:, :-1].ravel()
    seg_hi = seg_edges[:, 1:].ravel()
    owner = np.repeat(np.arange(k), seg_edges.shape[1] - 1)
    keep = seg_hi > seg_lo
    seg_lo, seg_hi, owner = seg_lo[keep], seg_hi[keep], owner[keep]

    out = np.zeros((k, nb))
    if len(owner) == 0:
        return out

    def eval_segments(s_lo, s_hi, own):
        half = 0.5 * (s_hi - s_lo)
        mid = 0.5 * (s_hi + s_lo)
        u = GK15_NODES01[None, :]
        t = mid[:, None] - half[:, None] * np.cos(math.pi * u)
        jac = half[:, None] * math.pi * np.sin(math.pi * u)
        g = _pdf3_batch(p[own][:, None], q[own][:, None], t, D) * jac
        return g @ GK15_WEIGHTS01, np.abs(g @ (GK15_WEIGHTS01 - G7_WEIGHTS01))

    seg_val, seg_err = eval_segments(seg_lo, seg_hi, owner)
    for _ in range(max_rounds):
        line_err = np.bincount(owner, weights=seg_err, minlength=k)
        needy_line = line_err > line_tol
        if not np.any(needy_line):
            break
        nsegs = np.bincount(owner, minlength=k)
        split = needy_line[owner] & (seg_err > line_tol / np.maximum(nsegs[owner], 1))
        if not np.any(split):
            break
        mid = 0.5 * (seg_lo[split] + seg_hi[split])
        new_lo = np.concatenate([seg_lo[split], mid])
        new_hi = np.concatenate([mid, seg_hi[split]])
        new_own = np.concatenate([owner[split], owner[split]])
        new_val, new_err = eval_segments(new_lo, new_hi, new_own)
        seg_lo = np.concatenate([seg_lo[~split], new_lo])
        seg_hi = np.concatenate([seg_hi[~split], new_hi])
        owner = np.concatenate([owner[~split], new_own])
        seg_val = np.concatenate([seg_val[~split], new_val])
        seg_err = np.concatenate([seg_err[~split], new_err])

    cell = np.clip(
        np.searchsorted(edges, 0.5 * (seg_lo + seg_hi), side="right") - 1, 0, nb - 1
    )
    np.add.at(out, (owner, cell), seg_val)
    return out


def joint_pdf3_cell_masses(
    domain: DiskDomain, edges, gauss_order: int = 5, inner_tol: float = 1e-9
) -> np.ndarray:
    """Probability mass of the joint density in every cell of a cubic grid.

    The third axis is integrated with the substituted piecewise rule and
    bucketed per cell; the middle axis is split exactly at the lines where
    the admissible third-side interval crosses a grid edge (the per-cell
    mass has square-root edges there) with the same cosine substitution;
    the first axis uses a per-cell Gauss rule, its kinks having been
    smoothed by the inner integrations.  Used to build expected histogram
    counts for Monte Carlo validation.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError("edges must be a strictly increasing 1-d grid")
    D = domain.diameter
    nb = len(edges) - 1
    nodes, weights = np.polynomial.legendre.leggauss(gauss_order)
    u01 = 0.5 * (nodes + 1.0)
    w01 = 0.5 * weights

    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    p_pts = mid[:, None] + half[:, None] * nodes[None, :]
    p_wts = half[:, None] * weights[None, :]

    masses = np.zeros((nb, nb, nb))
    for i in range(nb):
        for u in range(gauss_order):
            pv = float(p_pts[i, u])
            # q values where |p - q| or p + q crosses a grid edge: the
            # per-cell third-side mass has square-root kinks there.
            cand = np.concatenate([pv - edges, pv + edges, edges - pv, [pv]])
            cand = np.unique(cand[(cand > edges[0]) & (cand < edges[-1])])
            piece_lo, piece_hi, piece_j = [], [], []
            for j in range(nb):
                qa, qb = edges[j], edges[j + 1]
                inner = cand[(cand > qa) & (cand < qb)]
                qedges = np.concatenate([[qa], inner, [qb]])
                for lo, hi in zip(qedges[:-1], qedges[1:]):
                    piece_lo.append(lo)
                    piece_hi.append(hi)
                    piece_j.append(j)
            piece_lo = np.asarray(piece_lo)
            piece_hi = np.asarray(piece_hi)
            piece_j = np.asarray(piece_j)

            ph = 0.5 * (piece_hi - piece_lo)
            pm = 0.5 * (piece_hi + piece_lo)
            qs = pm[:, None] - ph[:, None] * np.cos(math.pi * u01[None, :])
            wq = ph[:, None] * math.pi * np.sin(math.pi * u01[None, :]) * w01[None, :]

            q_flat = qs.ravel()
            per_cell = _per_cell_line_integrals(
                np.full(len(q_flat), pv), q_flat, edges, D, line_tol=inner_tol
            )
            weighted = per_cell * wq.ravel()[:, None]
            rows = np.zeros((nb, nb))
            np.add.at(rows, np.repeat(piece_j, gauss_order), weighted)
            masses[i] += p_wts[i, u] * rows
    return masses
