"""Similarity distributions on [0, 1] and the similarity machinery built on them.

A similarity distribution describes how similar the source optima of a
generated problem are to the target optimum.  Eight built-in shapes cover
high / mixed / low similarity regimes; arbitrary piecewise-linear densities
are supported as well.  Sampling uses inverse transform sampling, so the
realized similarity values are exact draws from the requested distribution.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np


class SimilarityKind(Enum):
    """Built-in similarity densities plus the custom piecewise-linear escape hatch.

    Tokens follow the benchmark naming scheme (h1h ... h2l); the short aliases
    (m1 ... m4, l1, l2) are accepted anywhere a kind is parsed.
    """

    H1H = "h1h"  # point mass at s = 1
    H2H = "h2h"  # density max(8s - 4, 0)
    M1 = "h1m"  # uniform
    M2 = "h2m"  # density 2s
    M3 = "h3m"  # density 2 - 2s
    M4 = "h4m"  # triangular, mode 0.5
    L1 = "h1l"  # point mass at s = 0
    L2 = "h2l"  # density max(4 - 8s, 0)
    CUSTOM = "custom"

    @property
    def token(self) -> str:
        return self.value


_KIND_ALIASES = {
    "h1h": SimilarityKind.H1H,
    "h2h": SimilarityKind.H2H,
    "h1m": SimilarityKind.M1,
    "h2m": SimilarityKind.M2,
    "h3m": SimilarityKind.M3,
    "h4m": SimilarityKind.M4,
    "h1l": SimilarityKind.L1,
    "h2l": SimilarityKind.L2,
    "m1": SimilarityKind.M1,
    "m2": SimilarityKind.M2,
    "m3": SimilarityKind.M3,
    "m4": SimilarityKind.M4,
    "l1": SimilarityKind.L1,
    "l2": SimilarityKind.L2,
    "custom": SimilarityKind.CUSTOM,
}


def parse_kind(name: str) -> SimilarityKind:
    """Resolve a distribution name (token, alias or enum name) to its kind."""
    key = name.strip().lower()
    if key in _KIND_ALIASES:
        return _KIND_ALIASES[key]
    for member in SimilarityKind:
        if member.name.lower() == key:
            return member
    raise ValueError(f"unknown similarity distribution {name!r}")


@dataclass(frozen=True)
class SimilaritySpec:
    """A named or custom density h(s) on [0, 1] with exact sampling support."""

    kind: SimilarityKind
    custom_knots: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        if self.kind is SimilarityKind.CUSTOM:
            if not self.custom_knots:
                raise ValueError("a custom spec requires knots")
            knots = tuple((float(s), float(d)) for s, d in self.custom_knots)
            _validate_knots(knots)
            object.__setattr__(self, "custom_knots", knots)
        elif self.custom_knots is not None:
            raise ValueError("knots are only valid for the custom kind")

    @property
    def token(self) -> str:
        return self.kind.token

    @classmethod
    def named(cls, name: str) -> "SimilaritySpec":
        return cls(parse_kind(name))

    @classmethod
    def custom(cls, knots) -> "SimilaritySpec":
        return cls(SimilarityKind.CUSTOM, tuple((float(s), float(d)) for s, d in knots))


def _validate_knots(knots: tuple[tuple[float, float], ...]) -> None:
    if len(knots) < 2:
        raise ValueError("a custom density needs at least two knots")
    s = np.array([p[0] for p in knots])
    dens = np.array([p[1] for p in knots])
    if np.any(np.diff(s) <= 0):
        raise ValueError("knot positions must be strictly increasing")
    if abs(s[0]) > 1e-12 or abs(s[-1] - 1.0) > 1e-12:
        raise ValueError("knots must span [0, 1]")
    if np.any(dens < 0):
        raise ValueError("density must be nonnegative at every knot")
    area = np.trapezoid(dens, s)
    if abs(area - 1.0) > 1e-9:
        raise ValueError(f"density must integrate to 1, got {area}")


def _custom_tables(spec: SimilaritySpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Knot positions, knot densities (area-normalized) and cumulative CDF at knots."""
    s = np.array([p[0] for p in spec.custom_knots], dtype=float)
    dens = np.array([p[1] for p in spec.custom_knots], dtype=float)
    s[0], s[-1] = 0.0, 1.0
    seg = np.diff(s) * (dens[:-1] + dens[1:]) / 2.0
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    dens /= cum[-1]
    cum /= cum[-1]
    cum[-1] = 1.0
    return s, dens, cum


def cdf(spec: SimilaritySpec, s):
    """Exact cumulative distribution H(s) of the spec, for s in [0, 1]."""
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("s must lie in [0, 1]")
    kind = spec.kind
    if kind is SimilarityKind.H1H:
        out = np.where(arr >= 1.0, 1.0, 0.0)
    elif kind is SimilarityKind.H2H:
        out = np.where(arr <= 0.5, 0.0, (2.0 * arr - 1.0) ** 2)
    elif kind is SimilarityKind.M1:
        out = arr
    elif kind is SimilarityKind.M2:
        out = arr**2
    elif kind is SimilarityKind.M3:
        out = 1.0 - (1.0 - arr) ** 2
    elif kind is SimilarityKind.M4:
        out = np.where(arr <= 0.5, 2.0 * arr**2, 1.0 - 2.0 * (1.0 - arr) ** 2)
    elif kind is SimilarityKind.L1:
        out = np.ones_like(arr)
    elif kind is SimilarityKind.L2:
        out = np.where(arr <= 0.5, 1.0 - (1.0 - 2.0 * arr) ** 2, 1.0)
    else:
        knot_s, knot_d, knot_cum = _custom_tables(spec)
        seg = np.clip(np.searchsorted(knot_s, arr, side="right") - 1, 0, len(knot_s) - 2)
        t = arr - knot_s[seg]
        slope = (knot_d[seg + 1] - knot_d[seg]) / (knot_s[seg + 1] - knot_s[seg])
        out = np.minimum(knot_cum[seg] + knot_d[seg] * t + slope * t * t / 2.0, 1.0)
    if np.isscalar(s) or np.ndim(s) == 0:
        return float(out)
    return out


def _inverse_cdf(spec: SimilaritySpec, u: np.ndarray) -> np.ndarray:
    """Generalized inverse H^{-1}(u) for u in [0, 1); closed forms for built-ins."""
    kind = spec.kind
    if kind is SimilarityKind.H1H:
        return np.ones_like(u)
    if kind is SimilarityKind.H2H:
        return (1.0 + np.sqrt(u)) / 2.0
    if kind is SimilarityKind.M1:
        return u.copy()
    if kind is SimilarityKind.M2:
        return np.sqrt(u)
    if kind is SimilarityKind.M3:
        return 1.0 - np.sqrt(1.0 - u)
    if kind is SimilarityKind.M4:
        return np.where(u <= 0.5, np.sqrt(u / 2.0), 1.0 - np.sqrt((1.0 - u) / 2.0))
    if kind is SimilarityKind.L1:
        return np.zeros_like(u)
    if kind is SimilarityKind.L2:
        return (1.0 - np.sqrt(1.0 - u)) / 2.0
    return _invert_custom(spec, u)


def _invert_custom(spec: SimilaritySpec, u: np.ndarray) -> np.ndarray:
    knot_s, knot_d, knot_cum = _custom_tables(spec)
    # leftmost segment whose right-end CDF reaches u (generalized inverse)
    seg = np.clip(np.searchsorted(knot_cum[1:], u, side="left"), 0, len(knot_s) - 2)
    width = knot_s[seg + 1] - knot_s[seg]
    slope = (knot_d[seg + 1] - knot_d[seg]) / width
    du = np.maximum(u - knot_cum[seg], 0.0)
    # solve (slope/2) t^2 + d t = du, rationalized for stability near slope = 0
    disc = np.sqrt(np.maximum(knot_d[seg] ** 2 + 2.0 * slope * du, 0.0))
    denom = knot_d[seg] + disc
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(denom > 0.0, 2.0 * du / np.where(denom > 0.0, denom, 1.0), 0.0)
    return knot_s[seg] + np.clip(t, 0.0, width)


def sample_similarities(spec: SimilaritySpec, k: int, rng: np.random.Generator) -> np.ndarray:
    """Draw k similarity values S_i = H^{-1}(U_i) with U_i i.i.d. uniform."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    return _inverse_cdf(spec, rng.random(k))


def similarity(o_s: np.ndarray, o_t: np.ndarray) -> float:
    """Chebyshev similarity 1 - max_j |o_s^j - o_t^j| between two points of [0, 1]^d."""
    a = np.asarray(o_s, dtype=float)
    b = np.asarray(o_t, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    for v in (a, b):
        if np.any(v < 0.0) or np.any(v > 1.0):
            raise ValueError("coordinates must lie in [0, 1]")
    return float(1.0 - np.max(np.abs(a - b)))


@dataclass(frozen=True)
class HistogramEstimate:
    """Rescaled-histogram density estimate over n equal-width bins of [0, 1].

    ``mass`` holds per-bin probability mass (sums to 1); ``density`` rescales
    it by the bin count so it can be compared against a continuous density.
    """

    n_bins: int
    mass: np.ndarray

    @property
    def bin_low(self) -> np.ndarray:
        return np.arange(self.n_bins) / self.n_bins

    @property
    def bin_high(self) -> np.ndarray:
        return np.arange(1, self.n_bins + 1) / self.n_bins

    @property
    def density(self) -> np.ndarray:
        return self.mass * self.n_bins

    def to_csv(self, path: str | Path, analytic_density: np.ndarray | None = None) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = ["bin_low", "bin_high", "mass", "density"]
            if analytic_density is not None:
                header.append("analytic_density")
            writer.writerow(header)
            for b in range(self.n_bins):
                row = [
                    repr(float(self.bin_low[b])),
                    repr(float(self.bin_high[b])),
                    repr(float(self.mass[b])),
                    repr(float(self.density[b])),
                ]
                if analytic_density is not None:
                    row.append(repr(float(analytic_density[b])))
                writer.writerow(row)


def estimate_density(values: np.ndarray, n: int = 20) -> HistogramEstimate:
    """Histogram mass over bins ((b-1)/n, b/n], with bin 1 closed at 0.

    The closed first bin keeps point masses at s = 0 inside the estimate.
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("cannot estimate a density from an empty sample")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if np.any(values < 0.0) or np.any(values > 1.0):
        raise ValueError("similarity values must lie in [0, 1]")
    idx = np.ceil(values * n).astype(int)
    idx[idx < 1] = 1
    counts = np.bincount(idx, minlength=n + 1)[1:]
    return HistogramEstimate(n_bins=n, mass=counts / values.size)


def analytic_bin_masses(spec: SimilaritySpec, n: int = 20) -> np.ndarray:
    """Exact per-bin masses H(b/n) - H((b-1)/n) of the spec on the same bins.

    The left edge uses H(0-) = 0, mirroring the estimator's closed first bin,
    so a point mass at s = 0 lands in bin 1.
    """
    edges = np.arange(n + 1) / n
    h = np.asarray(cdf(spec, edges), dtype=float).copy()
    h[0] = 0.0
    return np.diff(h)
