"""Pair connection functions: probability of an edge as a function of distance.

Three families are provided.  The hard-disk model connects exactly when the
distance is strictly less than the range ``r0`` (distance equal to ``r0``
does not connect).  The exponential soft model uses
``exp(-(r/r0)**beta)``.  Tabulated models interpolate linearly between
``(r, p)`` knots and clamp to the end values outside the knot range.

Models are immutable and evaluation is pure, so instances can be shared
freely between threads.  ``parse_model`` builds a model from the textual
form used by the command line: ``hard:r0=0.3``, ``exp:r0=0.3,beta=2`` or
``table:@knots.csv`` (CSV with a required ``r,p`` header).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class ConnectionModel:
    """Base class; subclasses implement ``probability`` for array input."""

    def probability(self, r):
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        """Distances where the function is not smooth (quadrature hints)."""
        return ()

    def spec_string(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class HardDisk(ConnectionModel):
    r0: float

    def __post_init__(self):
        r0 = float(self.r0)
        if not math.isfinite(r0) or r0 < 0:
            raise DomainError(f"r0 must be a finite nonnegative length, got {self.r0!r}")
        object.__setattr__(self, "r0", r0)

    def probability(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r < self.r0, 1.0, 0.0)

    def breakpoints(self):
        return (self.r0,)

    def spec_string(self):
        return f"hard:r0={self.r0:g}"


@dataclass(frozen=True)
class ExponentialSoft(ConnectionModel):
    r0: float
    beta: float

    def __post_init__(self):
        r0 = float(self.r0)
        beta = float(self.beta)
        if not math.isfinite(r0) or r0 <= 0:
            raise DomainError(f"r0 must be a positive length, got {self.r0!r}")
        if not math.isfinite(beta) or beta <= 0:
            raise DomainError(f"beta must be positive, got {self.beta!r}")
        object.__setattr__(self, "r0", r0)
        object.__setattr__(self, "beta", beta)

    def probability(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(-((r / self.r0) ** self.beta))

    def spec_string(self):
        return f"exp:r0={self.r0:g},beta={self.beta:g}"


@dataclass(frozen=True)
class Tabulated(ConnectionModel):
    knots: tuple[tuple[float, float], ...]

    def __post_init__(self):
        knots = tuple((float(r), float(p)) for r, p in self.knots)
        if len(knots) < 2:
            raise DomainError("tabulated model needs at least two knots")
        rs = [r for r, _ in knots]
        if any(b <= a for a, b in zip(rs[:-1], rs[1:])):
            raise DomainError("tabulated knots must be strictly increasing in r")
        for r, p in knots:
            if not math.isfinite(r) or r < 0:
                raise DomainError(f"knot distance {r!r} is not a nonnegative length")
            if not math.isfinite(p) or not (0.0 <= p <= 1.0):
                raise DomainError(f"knot probability {p!r} outside [0, 1]")
        object.__setattr__(self, "knots", knots)

    def probability(self, r):
        r = np.asarray(r, dtype=float)
        rs = np.asarray([k[0] for k in self.knots])
        ps = np.asarray([k[1] for k in self.knots])
        return np.interp(r, rs, ps)  # np.interp clamps to the end values

    def breakpoints(self):
        return tuple(r for r, _ in self.knots)

    def spec_string(self):
        pairs = ";".join(f"{r:g}:{p:g}" for r, p in self.knots)
        return f"table:{pairs}"


def connect_prob(model: ConnectionModel, r: float) -> float:
    """Connection probability at distance ``r`` (r >= 0)."""
    rf = float(r)
    if not math.isfinite(rf) or rf < 0:
        raise DomainError(f"distance must be a finite nonnegative length, got {r!r}")
    return float(model.probability(rf))


def sample_edge(model: ConnectionModel, r: float, rng: np.random.Generator) -> int:
    """One Bernoulli edge indicator; always consumes exactly one draw."""
    p = connect_prob(model, r)
    return int(rng.random() < p)


def parse_model(text: str) -> ConnectionModel:
    """Build a model from its textual spec (see module docstring)."""
    if ":" not in text:
        raise DomainError(f"malformed model spec {text!r}: expected kind:params")
    kind, _, params = text.partition(":")
    kind = kind.strip().lower()
    if kind == "hard":
        fields = _parse_fields(params, required=("r0",))
        return HardDisk(r0=fields["r0"])
    if kind == "exp":
        fields = _parse_fields(params, required=("r0", "beta"))
        return ExponentialSoft(r0=fields["r0"], beta=fields["beta"])
    if kind == "table":
        if not params.startswith("@"):
            raise DomainError(f"table spec must reference a CSV file: table:@path, got {text!r}")
        return _load_table(params[1:])
    raise DomainError(f"unknown connection model kind {kind!r}")


def _parse_fields(params: str, required):
    fields = {}
    for item in params.split(","):
        if "=" not in item:
            raise DomainError(f"malformed model parameter {item!r}")
        key, _, value = item.partition("=")
        try:
            fields[key.strip()] = float(value)
        except ValueError as exc:
            raise DomainError(f"non-numeric model parameter {item!r}") from exc
    missing = [k for k in required if k not in fields]
    if missing:
        raise DomainError(f"model spec missing parameters: {', '.join(missing)}")
    extra = [k for k in fields if k not in required]
    if extra:
        raise DomainError(f"model spec has unknown parameters: {', '.join(extra)}")
    return fields


def _load_table(path: str) -> Tabulated:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip().lower() for h in header[:2]] != ["r", "p"]:
                raise DomainError(f"{path}: table CSV must start with an 'r,p' header")
            knots = []
            for row in reader:
                if not row or all(not cell.strip() for cell in row):
                    continue
                try:
                    knots.append((float(row[0]), float(row[1])))
                except (IndexError, ValueError) as exc:
                    raise DomainError(f"{path}: malformed knot row {row!r}") from exc
    except OSError as exc:
        raise DomainError(f"cannot read table file {path}: {exc}") from exc
    return Tabulated(knots=tuple(knots))
