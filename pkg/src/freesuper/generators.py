"""Triangular arrays with non-identically distributed rows, and a weak
distance between reciprocal Cauchy transforms."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import inversion as inv
from .measures import ArrayRow, Domain, atomic, point_mass, symmetric_bernoulli, two_point

KINDS = ("bernoulli_variances", "poisson_bernoulli", "halfline_two_point", "circle_two_point")


class GeneratorError(ValueError):
    pass


def profile_weights(profile, n, seed=0):
    """Positive per-index weights normalized to sum 1.

    ``uniform`` gives equal weights, ``linear`` gives v_i proportional to
    1 + i/(2n), ``random`` draws v_i uniformly from [0.5, 1.5].
    """
    i = np.arange(1, n + 1)
    if profile == "uniform":
        v = np.ones(n)
    elif profile == "linear":
        v = 1.0 + i / (2.0 * n)
    elif profile == "random":
        v = np.random.default_rng([seed, n]).uniform(0.5, 1.5, n)
    else:
        raise GeneratorError(f"unknown profile {profile!r}")
    return v / v.sum()


@dataclass(frozen=True)
class ArrayGenerator:
    kind: str
    params: dict = field(default_factory=dict)
    profile: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GeneratorError(f"unknown generator {self.kind!r}")

    @property
    def domain(self):
        return {"halfline_two_point": Domain.HALFLINE,
                "circle_two_point": Domain.CIRCLE}.get(self.kind, Domain.LINE)

    def limit_data(self):
        """Closed-form limit of the array, as oracle name or representation data."""
        from . import limits as L
        p = self.params
        if self.kind == "bernoulli_variances":
            return L.semicircle_data(p.get("variance", 1.0))
        if self.kind == "poisson_bernoulli":
            return L.marchenko_pastur_data(p.get("lam", 1.0))
        if self.kind == "halfline_two_point":
            return L.halfline_poisson_data(p.get("lam", 1.0), p.get("c", 2.0))
        return L.circle_poisson_data(p.get("lam", 1.0), p.get("alpha", 1.0))


def generate_row(gen: ArrayGenerator, n):
    """Row n: k_n = n members whose inhomogeneity follows the profile."""
    if n < 1:
        raise GeneratorError("n must be at least 1")
    v = profile_weights(gen.profile, n, gen.seed)
    p = gen.params
    if gen.kind == "bernoulli_variances":
        a = np.sqrt(p.get("variance", 1.0) * v)
        ms = [symmetric_bernoulli(x) for x in a]
    else:
        prob = p.get("lam", 1.0) * v
        if np.any(prob > 1):
            raise GeneratorError(f"row {n} would need probabilities above 1")
        if gen.kind == "poisson_bernoulli":
            ms = [two_point(0.0, 1.0, q) for q in prob]
        elif gen.kind == "halfline_two_point":
            ms = [two_point(1.0, p.get("c", 2.0), q, Domain.HALFLINE) for q in prob]
        else:
            ms = [two_point(0.0, p.get("alpha", 1.0), q, Domain.CIRCLE) for q in prob]
    return ArrayRow(ms, n)


def point_mass_row(n, a=0.0):
    return ArrayRow([point_mass(a)] * n, n)


def default_probe():
    x, y = np.meshgrid(np.linspace(-3, 3, 13), np.linspace(1, 3, 5))
    return (x + 1j * y).ravel()


def F_from_provider(provider):
    """Reciprocal Cauchy transform of a convolution, by Newton on its H."""
    def H(w):
        return provider.evaluate(np.atleast_1d(w))[0]

    def dH(w):
        return provider.evaluate(np.atleast_1d(w))[1]

    mean = getattr(provider, "mean", 0.0)

    def F(z):
        # continue downward from high above z, where F(z) ~ z - mean
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        lift = np.array([8.0, 4.0, 2.0, 1.0, 0.5, 0.25, 0.0])
        w = z + 1j * lift[0] - mean
        for h in lift:
            w = inv.solve_map(H, dH, z + 1j * h, w)
        return w
    return F


def f_distance(ev1, ev2, probe=None):
    """max over the probe of |F_1(z) - F_2(z)|."""
    z = default_probe() if probe is None else np.asarray(probe, dtype=complex)
    return float(np.max(np.abs(np.asarray(ev1(z)) - np.asarray(ev2(z)))))
