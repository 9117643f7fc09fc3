"""Shared oracle helpers for the test suite."""

import numpy as np

from rggdist import DiskDomain, McSettings, estimate_pmf


def obtuse_boundary_triples(count, rng, diameter=1.0):
    """Random obtuse triangles whose circumscribed-circle diameter equals
    the disk diameter exactly.

    Built by inscribing: pick interior angles summing to pi with one angle
    obtuse; the side opposite angle t has length diameter * sin(t).
    """
    triples = []
    while len(triples) < count:
        t1 = rng.uniform(0.5 * np.pi + 0.05, np.pi - 0.2)
        rest = np.pi - t1
        t2 = rng.uniform(0.1 * rest, 0.9 * rest)
        t3 = rest - t2
        if min(t2, t3) < 0.05:
            continue
        triples.append(tuple(diameter * np.sin(t) for t in (t1, t2, t3)))
    return triples


def right_triangles(count, rng, diameter=1.0):
    """Random right triangles with hypotenuse below the disk diameter.

    The circumscribed-circle diameter of a right triangle is its
    hypotenuse, so these sit exactly on the acute/obtuse case boundary.
    """
    triples = []
    while len(triples) < count:
        hyp = rng.uniform(0.3, 0.95) * diameter
        ang = rng.uniform(0.15, np.pi / 2 - 0.15)
        a = hyp * np.sin(ang)
        b = hyp * np.cos(ang)
        triples.append((a, b, hyp))
    return triples


def valid_triple_grid(diameter=1.0, per_axis=10, margin_frac=0.04):
    """Deterministic grid of triples satisfying the triangle inequalities.

    For each (r12, r13) on a grid, the third side runs over a grid of the
    admissible interval shrunk by a small margin, keeping all points
    strictly inside the support.
    """
    grid = np.linspace(0.1, 0.9, per_axis) * diameter
    triples = []
    for a in grid:
        for b in grid:
            lo, hi = abs(a - b), min(a + b, diameter)
            margin = margin_frac * (hi - lo)
            for c in np.linspace(lo + margin, hi - margin, per_axis):
                triples.append((a, b, c))
    return np.asarray(triples)


def mc_pmf_tolerance(exact_probs, samples):
    """Per-entry comparison tolerance for an empirical pmf.

    Four binomial standard errors under the exact distribution plus a
    small-count guard that keeps near-empty outcomes from failing on
    single stray observations.
    """
    exact_probs = np.asarray(exact_probs)
    se = np.sqrt(exact_probs * (1.0 - exact_probs) / samples)
    return 4.0 * se + 5.0 / samples


def sample_pmf(n, model, seed, samples, workers=1, diameter=1.0):
    return estimate_pmf(
        n, model, DiskDomain(diameter), McSettings(samples=samples, seed=seed, workers=workers)
    )
