"""Geometric and combinatorial primitives shared by the whole package.

Everything here is a pure function of its inputs: the circular-segment
function ``phi``, triangle quantities derived from three side lengths
(the quartic positivity form, the circumscribed-circle diameter, the
obtuseness test), uniform sampling inside a disk, and the codec that maps
node pairs ``(i, j)`` to slots of an edge vector.

Node ids are 1-based in the public API; internal storage is 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError

# Absolute slack applied before rejecting phi() inputs: ratios such as
# r / d may exceed 1 by a few ulp when r mathematically equals d.
PHI_SLACK = 1e-12

# Relative threshold below which Q is treated as degenerate (collinear
# points): Q <= eps * rbar**4 means the circumdiameter is undefined.
DEGENERATE_Q_EPS = 1e-14


@dataclass(frozen=True)
class DiskDomain:
    """Disk of the given diameter centered at the origin.

    Node locations are assumed independent and uniform over the disk, so the
    diameter is the only free parameter of the spatial model.
    """

    diameter: float = 1.0

    def __post_init__(self):
        d = self.diameter
        if not isinstance(d, (int, float)) or isinstance(d, bool):
            raise DomainError(f"diameter must be a real number, got {d!r}")
        d = float(d)
        if not math.isfinite(d) or d <= 0.0:
            raise DomainError(f"diameter must be positive and finite, got {d}")
        object.__setattr__(self, "diameter", d)

    @property
    def radius(self) -> float:
        return 0.5 * self.diameter


class Point2D(NamedTuple):
    x: float
    y: float


def _validate_length(name, value):
    v = float(value)
    if not math.isfinite(v) or v < 0.0:
        raise DomainError(f"{name} must be a finite nonnegative length, got {value!r}")
    return v


@dataclass(frozen=True)
class TriangleSides:
    """Three candidate inter-node distances.

    The lengths need not satisfy the triangle inequalities; whether they do
    is exactly what :func:`triangle_quantities` reports via the sign of Q.
    """

    r12: float
    r13: float
    r23: float

    def __post_init__(self):
        object.__setattr__(self, "r12", _validate_length("r12", self.r12))
        object.__setattr__(self, "r13", _validate_length("r13", self.r13))
        object.__setattr__(self, "r23", _validate_length("r23", self.r23))

    def sorted(self) -> tuple[float, float, float]:
        """Side lengths in ascending order."""
        a, b, c = sorted((self.r12, self.r13, self.r23))
        return a, b, c


class TriangleQuantities(NamedTuple):
    q: float
    longest: float
    circumdiameter: float | None
    obtuse: bool


def phi(x):
    """arccos(x) - x*sqrt(1 - x**2) for x in [0, 1].

    Equals twice the area of the circular segment of a unit circle cut off
    by a chord at distance x from the center.  Nonincreasing, with
    phi(0) = pi/2 and phi(1) = 0.  Inputs within ``PHI_SLACK`` of the
    interval are clamped; anything further out raises :class:`DomainError`.
    Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < -PHI_SLACK) or np.any(arr > 1.0 + PHI_SLACK):
        raise DomainError(f"phi argument must lie in [0, 1], got {x!r}")
    out = _phi_clipped(arr)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def _phi_clipped(x):
    # Hot path used by the density evaluators: clamps silently.
    x = np.clip(x, 0.0, 1.0)
    return np.arccos(x) - x * np.sqrt(1.0 - x * x)


def triangle_quantities(
    sides: TriangleSides, degenerate_eps: float = DEGENERATE_Q_EPS
) -> TriangleQuantities:
    """Quartic form Q, longest side, circumdiameter, and obtuseness.

    Q is computed in the factored form
    ``(a+b+c) * (-a+b+c) * (a-b+c) * (a+b-c)``, which avoids the
    catastrophic cancellation of the quartic expansion near collinear
    triples and is positive exactly when the triangle inequalities hold
    (it equals 16 times the squared triangle area).

    The circumdiameter ``2*a*b*c / sqrt(Q)`` is reported as ``None`` when
    ``Q <= degenerate_eps * longest**4``; the triple is then treated as
    degenerate.  The obtuseness flag compares the squared longest side with
    the sum of the other two squares and is reported regardless of
    degeneracy.
    """
    a, b, c = sides.sorted()
    q = (a + b + c) * (b + c - a) * (a + c - b) * (a + b - c)
    obtuse = c * c > a * a + b * b
    if q <= degenerate_eps * c**4 or c == 0.0:
        return TriangleQuantities(q=q, longest=c, circumdiameter=None, obtuse=obtuse)
    d = 2.0 * a * b * c / math.sqrt(q)
    return TriangleQuantities(q=q, longest=c, circumdiameter=d, obtuse=obtuse)


def sample_point_in_disk(domain: DiskDomain, rng: np.random.Generator) -> Point2D:
    """One point uniform over the disk.

    Uses the exact inverse-CDF construction (radius = R*sqrt(u), then a
    uniform angle), so the output is a deterministic function of the stream
    state: two draws per point, radius first.
    """
    u = rng.random()
    v = rng.random()
    rho = domain.radius * math.sqrt(u)
    ang = 2.0 * math.pi * v
    return Point2D(rho * math.cos(ang), rho * math.sin(ang))


def sample_points_in_disk(domain: DiskDomain, rng: np.random.Generator, count: int) -> np.ndarray:
    """Vectorized disk sampler; returns an array of shape ``(count, 2)``.

    Draw order is one block of radii followed by one block of angles, so a
    given (generator state, count) pair always yields the same points.
    """
    if count < 0:
        raise DomainError(f"count must be nonnegative, got {count}")
    u = rng.random(count)
    v = rng.random(count)
    rho = domain.radius * np.sqrt(u)
    ang = 2.0 * np.pi * v
    return np.column_stack((rho * np.cos(ang), rho * np.sin(ang)))


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(i: int, j: int, n: int) -> int:
    """Slot of the pair (i, j), 1 <= i < j <= n, in lexicographic order.

    (1,2) -> 0, (1,3) -> 1, ..., (1,n) -> n-2, (2,3) -> n-1, ...
    """
    if not (isinstance(i, int) and isinstance(j, int) and isinstance(n, int)):
        raise DomainError("pair_index arguments must be integers")
    if not (1 <= i < j <= n):
        raise DomainError(f"need 1 <= i < j <= n, got i={i}, j={j}, n={n}")
    return (i - 1) * (2 * n - i) // 2 + (j - i - 1)


def pair_from_index(k: int, n: int) -> tuple[int, int]:
    """Inverse of :func:`pair_index`."""
    if not (isinstance(k, int) and isinstance(n, int)):
        raise DomainError("pair_from_index arguments must be integers")
    if not (0 <= k < pair_count(n)):
        raise DomainError(f"index {k} out of range for n={n}")
    i = 1
    offset = 0
    while k >= offset + (n - i):
        offset += n - i
        i += 1
    j = i + 1 + (k - offset)
    return i, j


def pair_array(n: int) -> np.ndarray:
    """All pairs in slot order as a 0-based integer array of shape (m, 2)."""
    if n < 2:
        raise DomainError(f"need at least two nodes, got n={n}")
    pairs = [(i, j) for i in range(n - 1) for j in range(i + 1, n)]
    return np.asarray(pairs, dtype=np.intp)
