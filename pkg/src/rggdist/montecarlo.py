"""Sampling-based estimators for graphs of any size.

These are the universal cross-checks for every closed form in the
package: empirical outcome tables, entropy with bias correction, and
distance histograms.

Reproducibility: all randomness comes from counter-based Philox streams.
Worker ``w`` of a run seeded with ``seed`` uses the stream
``Philox(key=seed).jumped(w)``; the bootstrap uses the next jump index
after the workers.  Jumps advance the counter by 2**128 draws, so the
streams cannot overlap, and a fixed (samples, seed, workers) triple gives
bit-identical results no matter how the work is scheduled.  The generator
name is recorded in every estimate so outputs are auditable.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .connection import ConnectionModel, HardDisk, sample_edge
from .errors import DomainError, UnsupportedError
from .geometry import DiskDomain, pair_array, pair_count
from .graphdist import EdgeVector, GraphPmf

RNG_NAME = "philox"

_CHUNK = 1 << 19

# Largest exponent of the outcome table kept in memory (2**20 entries).
MAX_OUTCOME_BITS = 20


@dataclass(frozen=True)
class McSettings:
    """Sample count, seed, and worker split of one Monte Carlo run."""

    samples: int
    seed: int
    workers: int = 1

    def __post_init__(self):
        if not isinstance(self.samples, int) or self.samples < 1:
            raise DomainError(f"samples must be a positive integer, got {self.samples!r}")
        if not isinstance(self.seed, int) or not (0 <= self.seed < 2**64):
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise DomainError(f"workers must be a positive integer, got {self.workers!r}")


class EntropyEstimate(NamedTuple):
    bits: float
    std_error: float


@dataclass(frozen=True)
class Histogram3:
    """Raw counts of sampled distance triples on a cubic grid over [0, D]."""

    bin_edges: np.ndarray
    counts: np.ndarray
    total: int

    def density(self) -> np.ndarray:
        """Per-cell density estimate: count / (total * cell volume)."""
        width = float(self.bin_edges[1] - self.bin_edges[0])
        return self.counts / (self.total * width**3)


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent Philox stream number ``index`` of the given seed."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)).jumped(index))


def _worker_share(total: int, workers: int) -> list[int]:
    base, extra = divmod(total, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def sample_graph(
    n: int, model: ConnectionModel, domain: DiskDomain, rng: np.random.Generator
) -> EdgeVector:
    """One realized graph: n uniform points, one Bernoulli draw per pair."""
    if n < 2:
        raise DomainError(f"need at least two nodes, got n={n}")
    u = rng.random(n)
    v = rng.random(n)
    rho = domain.radius * np.sqrt(u)
    ang = 2.0 * math.pi * v
    xs = rho * np.cos(ang)
    ys = rho * np.sin(ang)
    bits = []
    for i, j in pair_array(n):
        r = math.hypot(xs[i] - xs[j], ys[i] - ys[j])
        bits.append(sample_edge(model, r, rng))
    return EdgeVector(n=n, bits=tuple(bits))


def _distance_sq_chunk(n, domain, rng, count, pairs):
    """Squared pair distances of ``count`` sampled point sets.

    Squared form so that hard-disk thresholding can skip the square root.
    """
    u = rng.random((count, n))
    v = rng.random((count, n))
    rho = domain.radius * np.sqrt(u)
    ang = 2.0 * math.pi * v
    xs = rho * np.cos(ang)
    ys = rho * np.sin(ang)
    dx = xs[:, pairs[:, 0]] - xs[:, pairs[:, 1]]
    dy = ys[:, pairs[:, 0]] - ys[:, pairs[:, 1]]
    return dx * dx + dy * dy


def _worker_outcome_counts(n, model, domain, seed, windex, count):
    pairs = pair_array(n)
    m = len(pairs)
    pows = (np.int64(1) << np.arange(m, dtype=np.int64))
    rng = substream(seed, windex)
    counts = np.zeros(1 << m, dtype=np.int64)
    hard = isinstance(model, HardDisk)
    remaining = count
    while remaining > 0:
        c = min(remaining, _CHUNK)
        dist_sq = _distance_sq_chunk(n, domain, rng, c, pairs)
        if hard:
            # The indicator can be evaluated exactly on squared distances;
            # no per-edge uniforms are consumed.
            bits = dist_sq < model.r0 * model.r0
        else:
            dists = np.sqrt(dist_sq)
            bits = rng.random(dists.shape) < model.probability(dists)
        codes = bits.astype(np.int64) @ pows
        counts += np.bincount(codes, minlength=1 << m)
        remaining -= c
    return counts


def _outcome_counts(n, model, domain, mc: McSettings) -> np.ndarray:
    m = pair_count(n)
    if m > MAX_OUTCOME_BITS:
        raise UnsupportedError(
            f"outcome table for n={n} has 2**{m} entries; "
            f"only up to 2**{MAX_OUTCOME_BITS} is supported"
        )
    shares = _worker_share(mc.samples, mc.workers)
    if mc.workers == 1:
        return _worker_outcome_counts(n, model, domain, mc.seed, 0, shares[0])
    with ThreadPoolExecutor(max_workers=mc.workers) as pool:
        parts = list(
            pool.map(
                lambda w: _worker_outcome_counts(n, model, domain, mc.seed, w, shares[w]),
                range(mc.workers),
            )
        )
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    return total


def estimate_pmf(
    n: int, model: ConnectionModel, domain: DiskDomain, mc: McSettings
) -> GraphPmf:
    """Empirical outcome distribution from ``mc.samples`` sampled graphs.

    Probabilities are exact outcome frequencies (they sum to one by
    construction); the error estimate is the largest per-entry binomial
    standard error.
    """
    counts = _outcome_counts(n, model, domain, mc)
    probs = counts / mc.samples
    se = np.sqrt(probs * (1.0 - probs) / mc.samples)
    return GraphPmf(
        n=n,
        probs=probs,
        method="monte_carlo",
        error_estimate=float(np.max(se)),
        ingredients={
            "samples": mc.samples,
            "seed": mc.seed,
            "workers": mc.workers,
            "rng": RNG_NAME,
        },
    )


def _entropy_bits_from_counts(counts, total, bias_correction) -> float:
    nz = counts[counts > 0]
    if len(nz) <= 1:
        return 0.0
    p = nz / total
    h = float(-np.sum(p * np.log2(p)))
    if bias_correction:
        h += (len(nz) - 1) / (2.0 * total * math.log(2.0))
    return h


def estimate_entropy(
    n: int,
    model: ConnectionModel,
    domain: DiskDomain,
    mc: McSettings,
    bias_correction: bool = True,
    bootstrap_resamples: int = 100,
) -> EntropyEstimate:
    """Outcome entropy in bits with Miller-Madow bias correction.

    The correction adds ``(K - 1) / (2 N ln 2)`` bits, K being the number
    of observed outcomes; disable it with ``bias_correction=False``.  The
    standard error comes from a multinomial bootstrap of the observed
    counts (a degenerate table returns exactly (0, 0)).
    """
    if bootstrap_resamples < 2:
        raise DomainError("bootstrap_resamples must be at least 2")
    counts = _outcome_counts(n, model, domain, mc)
    h = _entropy_bits_from_counts(counts, mc.samples, bias_correction)
    nz = counts[counts > 0]
    if len(nz) <= 1:
        return EntropyEstimate(0.0, 0.0)
    rng = substream(mc.seed, mc.workers)
    phat = nz / mc.samples
    resampled = rng.multinomial(mc.samples, phat, size=bootstrap_resamples)
    hs = np.array([
        _entropy_bits_from_counts(row, mc.samples, bias_correction) for row in resampled
    ])
    return EntropyEstimate(h, float(np.std(hs, ddof=1)))


def estimate_entropy_sweep_hard(
    n: int,
    r0_values,
    domain: DiskDomain,
    mc: McSettings,
    bias_correction: bool = True,
    bootstrap_resamples: int = 100,
) -> list[EntropyEstimate]:
    """Hard-disk entropy estimates at many connection ranges from one
    shared pool of sampled distances.

    Point sets are sampled once per worker and thresholded at every
    ``r0``; each grid point therefore gets a full ``mc.samples``-sample
    estimate, with common random numbers across the grid (the estimates
    are correlated between grid points, identically distributed to
    independent runs at each one).  Far cheaper than calling
    :func:`estimate_entropy` per point.
    """
    if bootstrap_resamples < 2:
        raise DomainError("bootstrap_resamples must be at least 2")
    r0_arr = np.asarray(list(r0_values), dtype=float)
    if np.any(~np.isfinite(r0_arr)) or np.any(r0_arr < 0):
        raise DomainError("r0 values must be finite and nonnegative")
    m = pair_count(n)
    if m > MAX_OUTCOME_BITS:
        raise UnsupportedError(
            f"outcome table for n={n} has 2**{m} entries; "
            f"only up to 2**{MAX_OUTCOME_BITS} is supported"
        )
    pairs = pair_array(n)
    pows = (np.int64(1) << np.arange(m, dtype=np.int64))
    r0_sq = r0_arr * r0_arr

    def worker(windex, count):
        rng = substream(mc.seed, windex)
        counts = np.zeros((len(r0_arr), 1 << m), dtype=np.int64)
        remaining = count
        while remaining > 0:
            c = min(remaining, _CHUNK)
            dist_sq = _distance_sq_chunk(n, domain, rng, c, pairs)
            for i, rsq in enumerate(r0_sq):
                codes = (dist_sq < rsq).astype(np.int64) @ pows
                counts[i] += np.bincount(codes, minlength=1 << m)
            remaining -= c
        return counts

    shares = _worker_share(mc.samples, mc.workers)
    if mc.workers == 1:
        counts = worker(0, shares[0])
    else:
        with ThreadPoolExecutor(max_workers=mc.workers) as pool:
            parts = list(pool.map(lambda w: worker(w, shares[w]), range(mc.workers)))
        counts = parts[0]
        for part in parts[1:]:
            counts = counts + part

    boot_rng = substream(mc.seed, mc.workers)
    estimates = []
    for i in range(len(r0_arr)):
        row = counts[i]
        h = _entropy_bits_from_counts(row, mc.samples, bias_correction)
        nz = row[row > 0]
        if len(nz) <= 1:
            estimates.append(EntropyEstimate(0.0, 0.0))
            continue
        resampled = boot_rng.multinomial(
            mc.samples, nz / mc.samples, size=bootstrap_resamples
        )
        hs = np.array([
            _entropy_bits_from_counts(rrow, mc.samples, bias_correction)
            for rrow in resampled
        ])
        estimates.append(EntropyEstimate(h, float(np.std(hs, ddof=1))))
    return estimates


def distance_histogram3(
    domain: DiskDomain, mc: McSettings, bins: int = 20, sorted_triples: bool = False
) -> Histogram3:
    """Histogram of the three pairwise distances of sampled point triples.

    Cells are raw (r12, r13, r23) coordinates by default so that the
    permutation symmetry of the joint density is itself testable; with
    ``sorted_triples=True`` each triple is sorted ascending first.
    """
    if bins < 2:
        raise DomainError(f"need at least 2 bins per axis, got {bins}")
    D = domain.diameter
    pairs = pair_array(3)
    edges = np.linspace(0.0, D, bins + 1)

    def worker(windex, count):
        rng = substream(mc.seed, windex)
        counts = np.zeros(bins**3, dtype=np.int64)
        remaining = count
        while remaining > 0:
            c = min(remaining, _CHUNK)
            dists = np.sqrt(_distance_sq_chunk(3, domain, rng, c, pairs))
            if sorted_triples:
                dists = np.sort(dists, axis=1)
            idx = np.minimum((dists / D * bins).astype(np.int64), bins - 1)
            flat = (idx[:, 0] * bins + idx[:, 1]) * bins + idx[:, 2]
            counts += np.bincount(flat, minlength=bins**3)
            remaining -= c
        return counts

    shares = _worker_share(mc.samples, mc.workers)
    if mc.workers == 1:
        total_counts = worker(0, shares[0])
    else:
        with ThreadPoolExecutor(max_workers=mc.workers) as pool:
            parts = list(pool.map(lambda w: worker(w, shares[w]), range(mc.workers)))
        total_counts = parts[0]
        for part in parts[1:]:
            total_counts = total_counts + part
    return Histogram3(
        bin_edges=edges,
        counts=total_counts.reshape(bins, bins, bins),
        total=mc.samples,
    )
