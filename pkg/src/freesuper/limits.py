"""Infinitely divisible limit laws given by finitely many representation atoms,
plus closed-form densities used as independent oracles."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .sweep import ClosedForm

_rng_probe = np.random.default_rng(12345)
_UHP_SAMPLE = (_rng_probe.uniform(-5, 5, 200) + 1j * np.geomspace(1e-3, 1e2, 200))
_DISK_SAMPLE = np.sqrt(_rng_probe.uniform(0, 0.998, 200)) * np.exp(2j * np.pi * _rng_probe.uniform(size=200))
_NEG_SAMPLE = -np.linspace(0.01, 0.99, 50) + 0j


class LimitError(ValueError):
    pass


class OutOfSupport(LimitError):
    pass


class PoleAtAtom(LimitError):
    pass


class NotInRegion(LimitError):
    pass


class LemmaViolation(AssertionError):
    pass


def _arr(a):
    return np.atleast_1d(np.asarray(a, dtype=float))


@dataclass(frozen=True, eq=False)
class NevanlinnaData(ClosedForm):
    """phi(z) = c + sum_j w_j (1 + z x_j) / (z - x_j); H(z) = z + phi(z)."""

    c: float
    x: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _arr(self.x))
        object.__setattr__(self, "w", _arr(self.w))
        if self.x.shape != self.w.shape or np.any(self.w < 0):
            raise LimitError("Nevanlinna atoms need aligned, nonnegative weights")
        if np.any(self.phi(_UHP_SAMPLE).imag > 1e-12):
            raise LimitError("phi must map the upper half-plane into the closed lower one")

    def phi(self, z):
        z = np.asarray(z, dtype=complex)
        d = z[..., None] - self.x
        return self.c + np.sum(self.w * (1 + z[..., None] * self.x) / d, axis=-1)

    def H(self, z):
        return np.asarray(z, dtype=complex) + self.phi(z)

    def dH(self, z):
        z = np.asarray(z, dtype=complex)
        return 1.0 - np.sum(self.w * (1 + self.x ** 2) / (z[..., None] - self.x) ** 2, axis=-1)

    map = H
    derivative = dH

    def defined(self, z):
        return np.isfinite(z) & (np.asarray(z).imag > 0)

    @property
    def mean(self):
        return float(self.c + np.sum(self.w * self.x))


def semicircle_data(variance=1.0):
    return NevanlinnaData(0.0, [0.0], [variance])


def marchenko_pastur_data(lam=1.0):
    return NevanlinnaData(lam / 2, [1.0], [lam / 2])


def point_mass_data(a):
    return NevanlinnaData(a, [], [])


def random_nevanlinna(rng, max_atoms=4):
    k = int(rng.integers(1, max_atoms + 1))
    return NevanlinnaData(float(rng.uniform(-1, 1)), rng.uniform(-2, 2, k), rng.uniform(0.1, 1.0, k))


def phi_ID(data, z):
    z = complex(z) if np.ndim(z) == 0 else np.asarray(z, dtype=complex)
    if np.any(np.asarray(z).imag <= 0):
        raise NotInRegion("phi_ID is evaluated on the upper half-plane")
    out = data.phi(z)
    return complex(out) if np.ndim(z) == 0 else out


def H_ID(data, z):
    return z + phi_ID(data, z)


class LemmaCheck(NamedTuple):
    re_dH: float
    im_H: float
    on_boundary: bool
    f: float


def lemma_derivative_check(data, s, t):
    """Re H'(s+it) for t >= f(s), where the crossing f(s) > 0 is located numerically."""
    from .additive import boundary_f
    f = boundary_f(data, s)
    if t < f * (1 - 1e-12):
        raise NotInRegion(f"t={t} lies below the boundary f({s})={f}")
    z = complex(s, t)
    d = complex(data.dH(z))
    if d.real <= 0:
        raise LemmaViolation(f"Re H'({z}) = {d.real} is not positive")
    return LemmaCheck(d.real, complex(data.H(z)).imag, abs(t - f) <= 1e-9 * max(1, f), f)


# -- multiplicative representation data ------------------------------------

@dataclass(frozen=True, eq=False)
class ExpSigmaDataHalfline(ClosedForm):
    """Sigma(z) = gamma exp(sum_j w_j (1 + t_j z)/(z - t_j)); t_j = inf gives exp(-w_j z)."""

    gamma: float
    t: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", _arr(self.t))
        object.__setattr__(self, "w", _arr(self.w))
        if self.gamma <= 0 or self.t.shape != self.w.shape or np.any(self.w < 0):
            raise LimitError("need gamma > 0 and aligned nonnegative weights")
        if np.any(self.t < 0):
            raise LimitError("atoms live on [0, +inf]")
        s = self.sigma(_NEG_SAMPLE)
        if np.any(np.abs(s.imag) > 1e-12 * np.abs(s)) or np.any(s.real <= 0):
            raise LimitError("Sigma must be real positive on (-1, 0)")

    def _exponent(self, z, order=0):
        z = np.asarray(z, dtype=complex)
        fin = np.isfinite(self.t)
        tf, wf = self.t[fin], self.w[fin]
        winf = self.w[~fin].sum()
        d = z[..., None] - tf
        if order == 0:
            return np.sum(wf * (1 + tf * z[..., None]) / d, axis=-1) - winf * z
        return -np.sum(wf * (1 + tf ** 2) / d ** 2, axis=-1) - winf

    def sigma(self, z):
        return self.gamma * np.exp(self._exponent(z))

    def map(self, z):
        z = np.asarray(z, dtype=complex)
        return z * self.sigma(z)

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return self.sigma(z) * (1 + z * self._exponent(z, 1))

    def defined(self, z):
        z = np.asarray(z)
        return np.isfinite(z) & ~((z.imag == 0) & (z.real > 0))

    @property
    def mean(self):
        return float(1.0 / self.sigma(0.0).real)


@dataclass(frozen=True, eq=False)
class HerglotzSigmaDataCircle(ClosedForm):
    """Sigma(z) = gamma exp(sum_j w_j (zeta_j + z)/(zeta_j - z)), zeta_j = e^{i angle_j}."""

    gamma: complex
    angles: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "angles", _arr(self.angles))
        object.__setattr__(self, "w", _arr(self.w))
        if abs(abs(self.gamma) - 1) > 1e-12:
            raise LimitError("gamma must be unimodular")
        if self.angles.shape != self.w.shape or np.any(self.w < 0):
            raise LimitError("need aligned nonnegative weights")
        if np.any(self._exponent(_DISK_SAMPLE).real < -1e-12):
            raise LimitError("exponent must have nonnegative real part on the disk")

    @property
    def zetas(self):
        return np.exp(1j * self.angles)

    def _exponent(self, z, order=0):
        z = np.asarray(z, dtype=complex)
        zj = self.zetas
        d = zj - z[..., None]
        if order == 0:
            return np.sum(self.w * (zj + z[..., None]) / d, axis=-1)
        return np.sum(self.w * 2 * zj / d ** 2, axis=-1)

    def sigma(self, z):
        return self.gamma * np.exp(self._exponent(z))

    def map(self, z):
        z = np.asarray(z, dtype=complex)
        return z * self.sigma(z)

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return self.sigma(z) * (1 + z * self._exponent(z, 1))

    def defined(self, z):
        return np.isfinite(z) & (np.abs(z) < 1)

    @property
    def first_moment(self):
        return complex(1.0 / self.sigma(0.0))

    def rotated(self, alpha):
        """Data of the measure rotated by e^{i alpha}."""
        return HerglotzSigmaDataCircle(self.gamma * np.exp(-1j * alpha), self.angles, self.w)


def sigma_ID(data, z):
    z = complex(z) if np.ndim(z) == 0 else np.asarray(z, dtype=complex)
    if isinstance(data, ExpSigmaDataHalfline):
        zz = np.asarray(z)
        if np.any(np.isin(zz, data.t[np.isfinite(data.t)])):
            raise PoleAtAtom("Sigma has an essential singularity at an atom")
        if np.any((zz.imag == 0) & (zz.real > 0)):
            raise NotInRegion("Sigma lives on the complement of the positive half-line")
    elif np.any(np.abs(z) >= 1):
        raise NotInRegion("Sigma lives on the open unit disk")
    out = data.sigma(z)
    return complex(out) if np.ndim(z) == 0 else out


def halfline_poisson_data(lam, c):
    """Limit of rows (1 - p_i) delta_1 + p_i delta_c with sum p_i -> lam."""
    w = lam * (c - 1) ** 2 / (c * c + 1)
    gamma = np.exp(-lam * (c * c - 1) / (c * c + 1))
    return ExpSigmaDataHalfline(gamma, [1.0 / c], [w])


def circle_poisson_data(lam, alpha):
    """Limit of rows (1 - p_i) delta_1 + p_i delta_{e^{i alpha}} with sum p_i -> lam."""
    return HerglotzSigmaDataCircle(np.exp(-1j * lam * np.sin(alpha)), [-alpha],
                                   [lam * (1 - np.cos(alpha))])


# -- closed-form densities -------------------------------------------------

def _support_check(x, lo, hi):
    x = np.asarray(x, dtype=float)
    if np.any(x < lo) or np.any(x > hi):
        raise OutOfSupport(f"points outside [{lo}, {hi}]")
    return x


def oracle_density(kind, x, lam=1.0, d=3):
    """Closed-form densities: semicircle, marchenko_pastur, kesten (unit variance), arcsine."""
    if kind == "semicircle":
        x = _support_check(x, -2, 2)
        out = np.sqrt(np.clip(4 - x * x, 0, None)) / (2 * np.pi)
    elif kind == "marchenko_pastur":
        a, b = (1 - np.sqrt(lam)) ** 2, (1 + np.sqrt(lam)) ** 2
        x = _support_check(x, a, b)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.sqrt(np.clip((b - x) * (x - a), 0, None)) / (2 * np.pi * x)
    elif kind == "kesten":
        edge = 2 * np.sqrt(d - 1) / np.sqrt(d)
        x = _support_check(x, -edge, edge)
        y = np.sqrt(d) * x
        out = np.sqrt(d) * d * np.sqrt(np.clip(4 * (d - 1) - y * y, 0, None)) / (2 * np.pi * (d * d - y * y))
    elif kind == "arcsine":
        x = _support_check(x, -2, 2)
        with np.errstate(divide="ignore"):
            out = 1.0 / (np.pi * np.sqrt(4 - x * x))
    else:
        raise LimitError(f"unknown oracle {kind!r}")
    return float(out) if np.ndim(out) == 0 else out
