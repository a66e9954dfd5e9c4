"""Probability measures on the line, the half-line and the unit circle.

Two concrete representations are supported: finitely many atoms, and a
density sampled on a grid (linearly interpolated between nodes).  Circle
positions are angles in [0, 2*pi); grid densities on the circle are taken
with respect to normalized arclength d(theta)/(2*pi).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi
ATOMIC_TOL = 1e-12
GRID_TOL = 1e-8


class Domain(enum.Enum):
    LINE = "line"
    HALFLINE = "halfline"
    CIRCLE = "circle"


class MeasureError(ValueError):
    pass


class InvalidWeights(MeasureError):
    pass


class InvalidSupport(MeasureError):
    pass


class NotNormalized(MeasureError):
    pass


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype).ravel()
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    domain: Domain
    positions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "positions", _frozen(self.positions))
        object.__setattr__(self, "weights", _frozen(self.weights))

    @property
    def multipliers(self):
        """Atoms as complex numbers (unimodular on the circle)."""
        if self.domain is Domain.CIRCLE:
            return np.exp(1j * self.positions)
        return self.positions.astype(complex)

    def __eq__(self, other):
        return (isinstance(other, AtomicMeasure) and self.domain is other.domain
                and np.array_equal(self.positions, other.positions)
                and np.array_equal(self.weights, other.weights))

    def __hash__(self):
        return hash((self.domain, self.positions.tobytes(), self.weights.tobytes()))


@dataclass(frozen=True, eq=False)
class GridMeasure:
    domain: Domain
    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "values", _frozen(self.values))

    def trapezoid_mass(self):
        mass = np.trapezoid(self.values, self.nodes)
        if self.domain is Domain.CIRCLE:
            mass /= TWO_PI
        return float(mass)


Measure = AtomicMeasure | GridMeasure


@dataclass(frozen=True)
class ArrayRow:
    """Row n of a triangular array: k_n measures on a common domain."""

    measures: tuple
    n: int = 0
    domain: Domain = field(init=False)

    def __post_init__(self):
        ms = tuple(self.measures)
        if not ms:
            raise MeasureError("a row needs at least one measure")
        dom = ms[0].domain
        if any(m.domain is not dom for m in ms):
            raise InvalidSupport("row members must share one domain")
        object.__setattr__(self, "measures", ms)
        object.__setattr__(self, "domain", dom)

    @property
    def length(self):
        return len(self.measures)

    def __len__(self):
        return len(self.measures)

    def __iter__(self):
        return iter(self.measures)


def _check_positions(domain, x):
    if not np.all(np.isfinite(x)):
        raise InvalidSupport("positions must be finite")
    if domain is Domain.HALFLINE and np.any(x < 0):
        raise InvalidSupport("half-line positions must be nonnegative")
    if domain is Domain.CIRCLE and (np.any(x < 0) or np.any(x >= TWO_PI)):
        raise InvalidSupport("circle positions are angles in [0, 2pi)")


def validate(m):
    """Return `m` unchanged if every invariant of its type holds, else raise."""
    if isinstance(m, AtomicMeasure):
        x, w = m.positions, m.weights
        if x.shape != w.shape or x.size == 0:
            raise InvalidWeights("positions and weights must be nonempty and aligned")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise InvalidWeights("atom weights must be strictly positive")
        _check_positions(m.domain, x)
        if np.unique(x).size != x.size:
            raise InvalidSupport("atom positions must be pairwise distinct")
        if abs(w.sum() - 1.0) > ATOMIC_TOL:
            raise NotNormalized(f"weights sum to {w.sum()!r}")
        return m
    if isinstance(m, GridMeasure):
        x, v = m.nodes, m.values
        if x.shape != v.shape or x.size < 2:
            raise InvalidSupport("grid needs at least two aligned nodes")
        if np.any(np.diff(x) <= 0):
            raise InvalidSupport("grid nodes must be strictly increasing")
        if m.domain is Domain.CIRCLE:
            if x[0] < 0 or x[-1] > TWO_PI:
                raise InvalidSupport("circle grid nodes must lie in [0, 2pi]")
        else:
            _check_positions(m.domain, x)
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise InvalidWeights("grid density values must be nonnegative")
        mass = m.trapezoid_mass()
        if abs(mass - 1.0) > GRID_TOL:
            raise NotNormalized(f"trapezoid mass is {mass!r}")
        return m
    raise TypeError(f"not a measure: {type(m).__name__}")


def atomic(domain, positions, weights):
    positions = np.atleast_1d(np.asarray(positions, dtype=float))
    if Domain(domain) is Domain.CIRCLE:
        positions = np.mod(positions, TWO_PI)
    return validate(AtomicMeasure(Domain(domain), positions, weights))


def point_mass(a, domain=Domain.LINE):
    return atomic(domain, [a], [1.0])


def two_point(a, b, p, domain=Domain.LINE):
    """(1-p) delta_a + p delta_b."""
    if p == 0:
        return point_mass(a, domain)
    if p == 1:
        return point_mass(b, domain)
    return atomic(domain, [a, b], [1.0 - p, p])


def symmetric_bernoulli(a):
    """1/2 (delta_{-a} + delta_a); collapses to delta_0 when a == 0."""
    if a == 0:
        return point_mass(0.0)
    return atomic(Domain.LINE, [-a, a], [0.5, 0.5])


def grid(domain, nodes, values, normalize=True):
    """Grid density; with `normalize` the trapezoid mass is rescaled to one."""
    m = GridMeasure(Domain(domain), nodes, values)
    if normalize:
        m = GridMeasure(m.domain, m.nodes, m.values / m.trapezoid_mass())
    return validate(m)


def semicircle_grid(num=2001, variance=1.0):
    r = 2.0 * np.sqrt(variance)
    x = np.linspace(-r, r, num)
    v = np.sqrt(np.clip(r * r - x * x, 0.0, None))
    return grid(Domain.LINE, x, v)


def haar_grid(num=2001):
    return grid(Domain.CIRCLE, np.linspace(0.0, TWO_PI, num), np.ones(num))


# Gauss-Legendre rule shared by grid quadratures.
GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def grid_rule(m, lo=None, hi=None):
    """Quadrature nodes/weights (w.r.t. the measure) for a grid density.

    Each cell between consecutive nodes gets a 32-point Gauss-Legendre rule
    applied to the linear interpolant, so polynomial moments are exact.
    """
    x, v = m.nodes, m.values
    a, b = x[:-1], x[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    t = mid[:, None] + half[:, None] * GL_NODES[None, :]
    lam = (t - a[:, None]) / (b - a)[:, None]
    dens = v[:-1, None] * (1 - lam) + v[1:, None] * lam
    w = half[:, None] * GL_WEIGHTS[None, :] * dens
    if m.domain is Domain.CIRCLE:
        w = w / TWO_PI
    return t.ravel(), w.ravel()


def moment(m, k):
    """Raw moment of order k (complex on the circle: integral of zeta**k)."""
    if not 0 <= k <= 4:
        raise ValueError("moment order must be in 0..4")
    if isinstance(m, AtomicMeasure):
        pts, w = m.positions, m.weights
    else:
        pts, w = grid_rule(m)
    if m.domain is Domain.CIRCLE:
        return complex(np.sum(w * np.exp(1j * k * pts)))
    if isinstance(m, AtomicMeasure):
        # scalar pow keeps moment(delta_a, k) == a**k to the last bit
        return float(np.sum(w * np.array([p ** k for p in pts.tolist()])))
    return float(np.sum(w * pts ** k))


def mean(m):
    return moment(m, 1)


def variance(m):
    mu = moment(m, 1)
    return moment(m, 2) - mu * mu


def ball_mass(m, eps):
    """Mass of the eps-neighbourhood of the neutral element (0 or 1)."""
    if isinstance(m, AtomicMeasure):
        pts, w = m.positions, m.weights
    else:
        pts, w = grid_rule(m)
    if m.domain is Domain.LINE:
        inside = np.abs(pts) < eps
    elif m.domain is Domain.HALFLINE:
        inside = np.abs(pts - 1.0) < eps
    else:
        inside = np.abs(np.exp(1j * pts) - 1.0) < eps
    return float(np.sum(w[inside]))


def infinitesimality_deficit(row, eps):
    """1 - min_i mu_i(B_eps); zero means every member sits inside B_eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    d = 1.0 - min(ball_mass(m, eps) for m in row)
    return float(min(1.0, max(0.0, d)))
