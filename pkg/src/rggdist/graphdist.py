"""Exact graph distributions for two and three nodes, and derived quantities.

The random graph is encoded as a vector of edge indicators in pair-slot
order (see :func:`rggdist.geometry.pair_index`); an outcome is the integer
whose k-th bit is the k-th indicator.  The pmf over all outcomes is
computed by quadrature for n = 2 and n = 3; for larger n no closed form
of the joint distance density exists and :func:`exact_pmf` refuses with
:class:`UnsupportedError` (the Monte Carlo estimators cover that case).

For n = 3 the eight outcome probabilities are assembled from three
product moments of the joint distance density,

    M1 = E[p(R12)],  M2 = E[p(R12) p(R13)],  M3 = E[p(R12) p(R13) p(R23)],

via inclusion-exclusion; the density is exchangeable in its three
arguments, so these three numbers determine everything.  Two consequences
are used deliberately: the probabilities sum to one up to floating-point
rounding (not up to quadrature error), and outcomes related by a node
relabeling get exactly equal probabilities.  M1 reduces to a
one-dimensional integral against the two-point density.  Near-zero
entries may come out epsilon-negative from quadrature noise; they are
clipped to zero and the deficit is folded into the largest entry, which
keeps the exact unit total while staying inside the per-entry error
estimates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .connection import ConnectionModel, HardDisk
from .distances import pair_pdf, triple_product_integral
from .errors import AccuracyError, DomainError, UnsupportedError
from .geometry import DiskDomain, pair_array, pair_count, pair_index
from .quadrature import QuadratureSettings, integrate

# Absolute tolerance per pmf entry used when no settings are supplied.
DEFAULT_PMF_ENTRY_TOL = 1e-4


@dataclass(frozen=True)
class EdgeVector:
    """Edge indicators of a realized graph, in pair-slot order."""

    n: int
    bits: tuple[int, ...]

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"need at least two nodes, got n={self.n}")
        bits = tuple(int(b) for b in self.bits)
        if len(bits) != pair_count(self.n):
            raise DomainError(
                f"expected {pair_count(self.n)} edge bits for n={self.n}, got {len(bits)}"
            )
        if any(b not in (0, 1) for b in bits):
            raise DomainError("edge bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    def encode(self) -> int:
        """Integer whose k-th bit is the k-th pair slot."""
        code = 0
        for k, b in enumerate(self.bits):
            code |= b << k
        return code

    @classmethod
    def from_int(cls, n: int, code: int) -> "EdgeVector":
        m = pair_count(n)
        if not (0 <= code < (1 << m)):
            raise DomainError(f"code {code} out of range for n={n}")
        return cls(n=n, bits=tuple((code >> k) & 1 for k in range(m)))

    def edge(self, i: int, j: int) -> int:
        return self.bits[pair_index(i, j, self.n)]


@dataclass(frozen=True)
class GraphPmf:
    """Distribution over all edge-vector outcomes for n nodes."""

    n: int
    probs: np.ndarray
    method: str
    error_estimate: float
    ingredients: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        m = pair_count(self.n)
        if probs.shape != (1 << m,):
            raise DomainError(
                f"expected {1 << m} outcome probabilities for n={self.n}, got {probs.shape}"
            )
        if np.any(probs < -1e-9) or np.any(probs > 1.0 + 1e-9):
            raise DomainError("probabilities must lie in [0, 1]")
        if self.method not in ("quadrature", "monte_carlo"):
            raise DomainError(f"unknown method {self.method!r}")
        object.__setattr__(self, "probs", probs)

    def prob(self, vector: EdgeVector) -> float:
        return float(self.probs[vector.encode()])


def _pair_connect_prob(model, domain, settings) -> tuple[float, float]:
    """P(edge) for one pair: integral of pair density times connection prob."""
    D = domain.diameter
    if isinstance(model, HardDisk):
        # The indicator truncates the integral; no discontinuity remains.
        hi = min(model.r0, D)
        if hi <= 0.0:
            return 0.0, 0.0
        value, err = integrate(
            lambda r: pair_pdf(r, domain), [(0.0, hi)], settings
        )
        return value, err

    def integrand(r):
        return pair_pdf(r, domain) * model.probability(r)

    breaks = tuple(b for b in model.breakpoints() if 0.0 < b < D)
    settings = QuadratureSettings(
        abs_tol=settings.abs_tol,
        rel_tol=settings.rel_tol,
        max_subdivisions=settings.max_subdivisions,
        breakpoints=(breaks,),
    )
    return integrate(integrand, [(0.0, D)], settings)


_PAIR_SETTINGS = QuadratureSettings(abs_tol=1e-11, rel_tol=1e-11, max_subdivisions=400)


def pmf_n2(
    model: ConnectionModel, domain: DiskDomain, quad: QuadratureSettings | None = None
) -> GraphPmf:
    """Exact two-node pmf: a single Bernoulli edge."""
    settings = quad if quad is not None else _PAIR_SETTINGS
    p1, err = _pair_connect_prob(model, domain, settings)
    p1 = min(max(p1, 0.0), 1.0)
    probs = np.array([1.0 - p1, p1])
    return GraphPmf(
        n=2, probs=probs, method="quadrature", error_estimate=2.0 * err,
        ingredients={"edge_prob": p1},
    )


def pmf_n3(
    model: ConnectionModel, domain: DiskDomain, quad: QuadratureSettings | None = None
) -> GraphPmf:
    """Exact three-node pmf over the eight edge-vector outcomes.

    The per-entry absolute tolerance is ``quad.abs_tol`` (default
    ``DEFAULT_PMF_ENTRY_TOL``); the reported ``error_estimate`` is the sum
    of the per-entry estimates.  Entries are clipped to [0, 1]; clipping
    never exceeds the per-entry estimate.
    """
    entry_tol = quad.abs_tol if quad is not None and quad.abs_tol > 0 else DEFAULT_PMF_ENTRY_TOL
    max_sub = quad.max_subdivisions if quad is not None else 400
    D = domain.diameter
    moment_tol = entry_tol / 4.0

    m1, e1 = _pair_connect_prob(
        model, domain,
        QuadratureSettings(abs_tol=1e-11, rel_tol=1e-11, max_subdivisions=max(max_sub, 200)),
    )

    if isinstance(model, HardDisk):
        hi = min(model.r0, D)
        if hi <= 0.0:
            m2 = m3 = 0.0
            e2 = e3 = 0.0
        else:
            m2, e2 = triple_product_integral(
                domain, box12=(0.0, hi), box13=(0.0, hi), box23=(0.0, None),
                abs_tol=moment_tol, inner_breaks=(hi,), max_subdivisions=max_sub,
            )
            m3, e3 = triple_product_integral(
                domain, box12=(0.0, hi), box13=(0.0, hi), box23=(0.0, hi),
                abs_tol=moment_tol, max_subdivisions=max_sub,
            )
    else:
        pfun = model.probability
        model_breaks = tuple(b for b in model.breakpoints() if 0.0 < b < D)
        kwargs = dict(
            abs_tol=moment_tol,
            inner_breaks=model_breaks,
            mid_breaks=model_breaks,
            outer_breaks=model_breaks,
            max_subdivisions=max_sub,
        )
        m2, e2 = triple_product_integral(domain, w12=pfun, w13=pfun, **kwargs)
        m3, e3 = triple_product_integral(domain, w12=pfun, w13=pfun, w23=pfun, **kwargs)

    # Inclusion-exclusion over the number of present edges; exchangeability
    # of the distance density makes all outcomes of equal weight identical.
    by_weight = {
        3: m3,
        2: m2 - m3,
        1: m1 - 2.0 * m2 + m3,
        0: 1.0 - 3.0 * m1 + 3.0 * m2 - m3,
    }
    err_by_weight = {
        3: e3,
        2: e2 + e3,
        1: e1 + 2.0 * e2 + e3,
        0: 3.0 * e1 + 3.0 * e2 + e3,
    }
    multiplicity = {0: 1, 1: 3, 2: 3, 3: 1}
    for w, v in by_weight.items():
        if v < -err_by_weight[w] - 1e-9 or v > 1.0 + err_by_weight[w] + 1e-9:
            raise AccuracyError(
                "three-node pmf entries left [0, 1] beyond their error estimates; "
                "tighten the quadrature settings",
                value=by_weight,
                error_estimate=err_by_weight,
            )
    # Quadrature noise can push near-zero classes epsilon-negative; clip
    # them and fold the (sub-error-estimate) deficit into the largest
    # class, so the table remains an exact, exactly exchangeable
    # distribution.
    by_weight = {w: min(max(v, 0.0), 1.0) for w, v in by_weight.items()}
    total = sum(v * multiplicity[w] for w, v in by_weight.items())
    w_star = max(by_weight, key=lambda w: by_weight[w])
    by_weight[w_star] -= (total - 1.0) / multiplicity[w_star]

    probs = np.empty(8)
    entry_errs = np.empty(8)
    for code in range(8):
        w = bin(code).count("1")
        probs[code] = by_weight[w]
        entry_errs[code] = err_by_weight[w]
    return GraphPmf(
        n=3, probs=probs, method="quadrature",
        error_estimate=float(np.sum(entry_errs)),
        ingredients={"m1": m1, "m2": m2, "m3": m3},
    )


def exact_pmf(
    n: int, model: ConnectionModel, domain: DiskDomain, quad: QuadratureSettings | None = None
) -> GraphPmf:
    """Dispatch to the exact pmf; refuses n >= 4.

    No closed form of the joint distance density is known beyond three
    nodes; use :func:`rggdist.montecarlo.estimate_pmf` instead.
    """
    if n == 2:
        return pmf_n2(model, domain, quad)
    if n == 3:
        return pmf_n3(model, domain, quad)
    raise UnsupportedError(
        f"exact pmf is only available for n in (2, 3); got n={n}. "
        "Use the Monte Carlo estimator for larger graphs."
    )


def entropy_bits(pmf: GraphPmf) -> float:
    """Shannon entropy of the outcome distribution, in bits."""
    p = pmf.probs
    mask = p > 0.0
    # + 0.0 turns the -0.0 of a point mass into +0.0
    return float(-np.sum(p[mask] * np.log2(p[mask]))) + 0.0


def entropy_error_bound(pmf: GraphPmf) -> float:
    """Crude propagation of the pmf error estimate into the entropy."""
    p = np.maximum(pmf.probs, 1e-300)
    sens = np.abs(np.log2(p) + 1.0 / np.log(2.0))
    per_entry = pmf.error_estimate / max(len(p), 1)
    return float(per_entry * np.sum(sens))


class _UnionFind:
    """Array union-find with path halving; enough for tiny graphs."""

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[ry] = rx


def _outcome_is_connected(n, code, pairs) -> bool:
    uf = _UnionFind(n)
    for k in range(len(pairs)):
        if (code >> k) & 1:
            uf.union(int(pairs[k, 0]), int(pairs[k, 1]))
    root = uf.find(0)
    return all(uf.find(v) == root for v in range(1, n))


def connected_outcome_mask(n: int) -> np.ndarray:
    """Boolean mask over all outcomes: is the decoded graph connected?"""
    pairs = pair_array(n)
    m = pair_count(n)
    return np.fromiter(
        (_outcome_is_connected(n, code, pairs) for code in range(1 << m)),
        dtype=bool,
        count=1 << m,
    )


def prob_connected(pmf: GraphPmf) -> float:
    """Probability that the realized graph is connected."""
    mask = connected_outcome_mask(pmf.n)
    return float(np.sum(pmf.probs[mask]))


def prob_complete(pmf: GraphPmf) -> float:
    """Probability that every edge is present."""
    return float(pmf.probs[-1])


def relabel_orbit_map(n: int) -> np.ndarray:
    """Canonical orbit representative of each outcome under node relabeling.

    Two outcomes share a representative exactly when some permutation of
    the node labels maps one edge set onto the other.  Used to test the
    exchangeability of computed pmfs.
    """
    from itertools import permutations

    pairs = pair_array(n)
    m = pair_count(n)
    slot = {(int(i), int(j)): k for k, (i, j) in enumerate(pairs)}
    perm_maps = []
    for perm in permutations(range(n)):
        mapping = np.empty(m, dtype=np.intp)
        for k, (i, j) in enumerate(pairs):
            a, b = perm[int(i)], perm[int(j)]
            mapping[k] = slot[(min(a, b), max(a, b))]
        perm_maps.append(mapping)

    reps = np.empty(1 << m, dtype=np.int64)
    for code in range(1 << m):
        best = code
        for mapping in perm_maps:
            image = 0
            for k in range(m):
                if (code >> k) & 1:
                    image |= 1 << int(mapping[k])
            best = min(best, image)
        reps[code] = best
    return reps
