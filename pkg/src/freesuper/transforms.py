"""Cauchy-type transforms G, F (line) and psi, eta (half-line, circle).

Atomic measures are evaluated as exact rational sums.  Grid measures use a
32-point Gauss-Legendre rule per cell of the linear interpolant; cells close
to the pole of the kernel are subdivided until the panel width is below the
distance to the pole.
"""
from __future__ import annotations

import enum
from typing import Callable, NamedTuple

import numpy as np

from .measures import (AtomicMeasure, Domain, GL_NODES, GL_WEIGHTS, GridMeasure,
                       TWO_PI, grid_rule)


class Kind(enum.Enum):
    G = "G"
    F = "F"
    PSI = "psi"
    ETA = "eta"


class TransformError(ArithmeticError):
    pass


class OutOfDomain(TransformError):
    pass


class DegenerateMeasure(TransformError):
    pass


class NonConvergent(TransformError):
    pass


def _check_kind(domain, kind):
    if domain is Domain.LINE and kind not in (Kind.G, Kind.F):
        raise OutOfDomain(f"{kind.value} is not defined for measures on the line")
    if domain is not Domain.LINE and kind not in (Kind.PSI, Kind.ETA):
        raise OutOfDomain(f"{kind.value} needs a measure on the line")


def in_domain(domain, z):
    z = np.asarray(z, dtype=complex)
    if domain is Domain.LINE:
        return z.imag != 0
    if domain is Domain.HALFLINE:
        return ~((z.imag == 0) & (z.real > 0))
    return np.abs(z) < 1


def _check_domain(domain, z):
    if not np.all(in_domain(domain, z)):
        raise OutOfDomain(f"point outside the natural domain of a {domain.value} transform")


# -- kernel sums -----------------------------------------------------------

def cauchy_sums(pos, wts, z, order=0):
    """d^order/dz^order of sum_j wts_j / (z - pos_j), broadcast over z."""
    d = z[..., None] - pos
    if order == 0:
        return np.sum(wts / d, axis=-1)
    if order == 1:
        return -np.sum(wts / d ** 2, axis=-1)
    return 2.0 * np.sum(wts / d ** 3, axis=-1)


def psi_sums(mult, wts, z, order=0):
    """d^order/dz^order of sum_j wts_j c_j z / (1 - c_j z)."""
    cz = 1.0 - z[..., None] * mult
    if order == 0:
        return np.sum(wts * mult * z[..., None] / cz, axis=-1)
    if order == 1:
        return np.sum(wts * mult / cz ** 2, axis=-1)
    return 2.0 * np.sum(wts * mult ** 2 / cz ** 3, axis=-1)


# -- grid quadrature -------------------------------------------------------

def _pole(domain, z):
    """Location on the support parameter axis nearest the kernel pole, and its distance."""
    if domain is Domain.LINE:
        return z.real, abs(z.imag)
    if domain is Domain.HALFLINE:
        if z == 0:
            return 0.0, np.inf
        u = 1.0 / z
        return u.real, abs(u.imag)
    return float(np.mod(-np.angle(z), TWO_PI)), 1.0 - abs(z)


def _refined_rule(m, z):
    t, w = grid_rule(m)
    x = m.nodes
    h = np.diff(x)
    centre, dist = _pole(m.domain, z)
    if not np.isfinite(dist) or dist >= 4 * h.max():
        return t, w
    near = np.abs(0.5 * (x[:-1] + x[1:]) - centre) < 8 * h + 8 * dist
    if m.domain is Domain.CIRCLE:
        gap = np.abs(np.mod(0.5 * (x[:-1] + x[1:]) - centre + np.pi, TWO_PI) - np.pi)
        near = gap < 8 * h + 8 * dist
    if not near.any():
        return t, w
    levels = int(np.clip(np.ceil(np.log2(h[near].max() / max(dist, 1e-14))) + 1, 1, 14))
    pieces = 2 ** levels
    keep = np.repeat(~near, GL_NODES.size)
    ts, ws = [t[keep]], [w[keep]]
    for i in np.flatnonzero(near):
        a, b = x[i], x[i + 1]
        edges = np.linspace(a, b, pieces + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        tt = (mid[:, None] + half[:, None] * GL_NODES).ravel()
        lam = (tt - a) / (b - a)
        dens = m.values[i] * (1 - lam) + m.values[i + 1] * lam
        ww = (half[:, None] * GL_WEIGHTS).ravel() * dens
        if m.domain is Domain.CIRCLE:
            ww = ww / TWO_PI
        ts.append(tt)
        ws.append(ww)
    return np.concatenate(ts), np.concatenate(ws)


def _grid_sums(m, z, order):
    out = np.empty(z.shape, dtype=complex)
    for idx, zz in np.ndenumerate(z):
        t, w = _refined_rule(m, zz)
        zz = np.asarray(zz)
        if m.domain is Domain.LINE:
            out[idx] = cauchy_sums(t, w, zz, order)
        else:
            c = np.exp(1j * t) if m.domain is Domain.CIRCLE else t.astype(complex)
            out[idx] = psi_sums(c, w, zz, order)
    return out


def _base_sums(m, z, order):
    if isinstance(m, GridMeasure):
        return _grid_sums(m, z, order)
    if m.domain is Domain.LINE:
        return cauchy_sums(m.positions, m.weights, z, order)
    return psi_sums(m.multipliers, m.weights, z, order)


def _is_delta_zero(m):
    return (isinstance(m, AtomicMeasure) and m.domain is Domain.HALFLINE
            and np.all(m.positions == 0))


def _scalar_out(z, val):
    return complex(val) if np.ndim(z) == 0 else val


def evaluate(m, kind, z):
    """Evaluate G/F (line) or psi/eta (half-line, circle) at z."""
    kind = Kind(kind)
    _check_kind(m.domain, kind)
    zz = np.asarray(z, dtype=complex)
    _check_domain(m.domain, zz)
    if kind in (Kind.PSI, Kind.ETA) and _is_delta_zero(m):
        raise DegenerateMeasure("psi/eta are not informative for delta_0")
    s = _base_sums(m, zz, 0)
    if kind is Kind.F:
        s = 1.0 / s
    elif kind is Kind.ETA:
        s = s / (1.0 + s)
    return _scalar_out(z, s)


def evaluate_derivative(m, kind, z, order=1):
    """First or second complex derivative of the transform."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    kind = Kind(kind)
    _check_kind(m.domain, kind)
    zz = np.asarray(z, dtype=complex)
    _check_domain(m.domain, zz)
    if kind in (Kind.PSI, Kind.ETA) and _is_delta_zero(m):
        raise DegenerateMeasure("psi/eta are not informative for delta_0")
    d1 = _base_sums(m, zz, 1)
    if kind in (Kind.G, Kind.PSI):
        out = d1 if order == 1 else _base_sums(m, zz, 2)
    elif kind is Kind.F:
        g = _base_sums(m, zz, 0)
        out = -d1 / g ** 2 if order == 1 else -_base_sums(m, zz, 2) / g ** 2 + 2 * d1 ** 2 / g ** 3
    else:
        q = 1.0 + _base_sums(m, zz, 0)
        out = d1 / q ** 2 if order == 1 else _base_sums(m, zz, 2) / q ** 2 - 2 * d1 ** 2 / q ** 3
    return _scalar_out(z, out)


# -- Stieltjes inversion ---------------------------------------------------

DEFAULT_LADDER = 1e-2 * 2.0 ** -np.arange(9)


class StieltjesEstimate(NamedTuple):
    density: float
    error: float


def richardson(values, ratio=2.0, order=4):
    """Richardson table for a sequence sampled at eps_k = eps_0 / ratio**k.

    Assumes an error expansion in integer powers of eps.  Returns the final
    extrapolant together with the difference to its predecessor.
    """
    col = np.asarray(values, dtype=float)
    order = min(order, col.size - 2)
    for j in range(1, order + 1):
        fac = ratio ** j
        col = (fac * col[1:] - col[:-1]) / (fac - 1.0)
    return float(col[-1]), float(abs(col[-1] - col[-2]))


def stieltjes_density(F: Callable[[complex], complex], x, ladder=None) -> StieltjesEstimate:
    """Density at x from -(1/pi) Im(1/F(x + i eps)), extrapolated to eps -> 0."""
    eps = DEFAULT_LADDER if ladder is None else np.asarray(ladder, dtype=float)
    vals = [-(1.0 / complex(F(x + 1j * e))).imag / np.pi for e in eps]
    value, err = richardson(vals, ratio=eps[0] / eps[1])
    if err > 1e-4:
        raise NonConvergent(f"Richardson extrapolants at x={x} differ by {err:.3g}")
    if value < -1e-10:
        raise NonConvergent(f"negative density {value:.3g} at x={x}")
    return StieltjesEstimate(max(value, 0.0), err)
