"""Free additive convolution of a row and density recovery from the boundary
of the image of the upper half-plane under H_row."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import inversion as inv
from .measures import ArrayRow, AtomicMeasure, Domain
from .sweep import (BRANCH_LOST, NO_CROSSING, NOT_MONOTONE, OK, ClosedForm, NoCrossing,
                    TrackedProvider, cosine_gauss, find_edges, locate_crossings, status_error)

T_FLOOR = 1e-9


class NonMonotoneAbscissae(ArithmeticError):
    pass


class WindowNotCovered(ValueError):
    pass


class RowH(TrackedProvider):
    """H_row(z) = z + sum_i (H_i(z) - z), with H_i tracked from the Stolz anchor."""

    def values(self, state):
        z = state.z
        with np.errstate(all="ignore"):
            m = z + np.sum(self.mult * (state.w - z), axis=0)
            d = 1.0 + np.sum(self.mult * (self.member_derivatives(state.w) - 1.0), axis=0)
        return m, d

    @property
    def beta(self):
        return self.gamma.beta

    @property
    def mean(self):
        return float(np.sum(self.mult[:, 0] * self.stack.first_moment.real))


def line_provider(obj):
    """Provider of H for a row, a list of measures, a single measure or ID data."""
    if isinstance(obj, (ClosedForm, RowH)):
        return obj
    if isinstance(obj, AtomicMeasure):
        obj = [obj]
    measures = list(obj)
    if measures[0].domain is not Domain.LINE:
        raise ValueError("additive pipeline needs measures on the line")
    return RowH(measures)


def phi_sum(row, z):
    """Sum of the Voiculescu transforms of the row members at z."""
    prov = line_provider(row)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    m, _, ok = prov.evaluate(z)
    if not np.all(ok):
        raise inv.BranchLost("continuation failed for some member")
    out = m - z
    return complex(out[0]) if out.size == 1 else out


def _top(provider, s):
    if isinstance(provider, RowH):
        g = provider.gamma
        return max(g.beta, g.alpha * float(np.max(np.abs(s)))) * 1.5 + 1.0
    return 4.0 * (1.0 + float(np.max(np.abs(s))))


def t_levels(top):
    a = top * 0.95 ** np.arange(int(np.ceil(np.log(0.05 / top) / np.log(0.95))) + 1)
    a = a[a >= 0.05]
    b = a[-1] * 0.7 ** np.arange(1, 60)
    return np.concatenate([a, b[b > T_FLOOR], [T_FLOOR]])


@dataclass
class BoundaryCurve:
    s: np.ndarray
    f: np.ndarray
    t_lo: np.ndarray
    t_hi: np.ndarray
    status: np.ndarray
    H: np.ndarray
    dH: np.ndarray

    @property
    def accepted(self):
        return self.status == OK


def boundary_curve(provider, s):
    """f(s) for every s: the crossing of Im H_row(s+it) = 0 sweeping t down."""
    provider = line_provider(provider)
    s = np.asarray(s, dtype=float)
    cr = locate_crossings(provider, s, lambda u, v: u + 1j * v, t_levels(_top(provider, s)),
                          lambda m: m.imag, +1)
    status = cr.status.copy()
    ok = status == OK
    bad = ok & ~((cr.deriv.real > 0) & (np.abs(cr.value.imag) <= 1e-9 * (1 + np.abs(cr.value))))
    status[bad] = NOT_MONOTONE
    return BoundaryCurve(s, cr.v, cr.v_lo, cr.v_hi, status, cr.value, cr.deriv)


def boundary_f(provider, s):
    bc = boundary_curve(provider, np.array([float(s)]))
    if bc.status[0] != OK:
        raise status_error(bc.status[0], f"at s={s}")
    return float(bc.f[0])


@dataclass
class DensityCurve:
    """Parametric density (x_j, p_j) with the parameters that produced it."""

    x: np.ndarray
    p: np.ndarray
    params: np.ndarray
    boundary: np.ndarray
    excluded: int = 0
    domain: Domain = Domain.LINE
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return self.x.size


def density_from_boundary(bc: BoundaryCurve):
    ok = bc.accepted
    s, f = bc.s[ok], bc.f[ok]
    x = bc.H[ok].real
    p = f / (np.pi * (s * s + f * f))
    if x.size > 1 and np.any(np.diff(x) <= 0):
        raise NonMonotoneAbscissae("abscissae are not increasing; refine the s-grid")
    return DensityCurve(x, p, s, f, int((~ok).sum()))


def density_curve(provider, s_grid):
    """x_j = Re H(s_j + i f_j) and p_j = f_j / (pi (s_j^2 + f_j^2)) on accepted points."""
    return density_from_boundary(boundary_curve(provider, s_grid))


def dx_ds(dH):
    """Speed of x(s) = H(s + i f(s)) along the boundary: |H'|^2 / Re H'."""
    return np.abs(dH) ** 2 / dH.real


def s_window(provider, J, coarse=161, margin=0.04):
    """Parameter interval whose image under s -> x covers J with some slack.

    Returns (a, b, closed).  When the image falls short of J but the whole
    support was captured (no crossing on either side of the accepted
    parameters), the interval spans the support and ``closed`` is True: the
    density vanishes outside it.
    """
    provider = line_provider(provider)
    lo, hi = J
    shift = provider.mean if hasattr(provider, "mean") else 0.0
    L = 2 * max(abs(lo - shift), abs(hi - shift)) + 4
    s = np.linspace(-L, L, coarse)
    bc = boundary_curve(provider, s)
    return _window_from_scan(s, bc.accepted, bc.H.real, bc.status, J, margin)


def _window_from_scan(u, ok, x, status, J, margin, increasing=True):
    lo, hi = J
    span = (hi - lo) * margin
    low_side = np.flatnonzero(ok & (x <= lo - span))
    high_side = np.flatnonzero(ok & (x >= hi + span))
    idx = np.flatnonzero(ok)
    if low_side.size and high_side.size:
        a, b = (u[low_side[-1]], u[high_side[0]]) if increasing else (u[high_side[-1]], u[low_side[0]])
        return float(min(a, b)), float(max(a, b)), False
    if idx.size and idx[0] > 0 and idx[-1] < u.size - 1 and np.all(status[:idx[0]] == NO_CROSSING) \
            and np.all(status[idx[-1] + 1:] == NO_CROSSING):
        return float(u[idx[0] - 1]), float(u[idx[-1] + 1]), True
    raise WindowNotCovered(f"the recovered density does not cover {J}")


def curve_on_window(provider, J, num=801):
    provider = line_provider(provider)
    a, b, closed = s_window(provider, J)
    curve = density_curve(provider, np.linspace(a, b, num))
    curve.extra["zero_outside"] = closed
    return curve


def _fd4(y, h):
    """First and second derivatives on the interior of a uniform sample."""
    d1 = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    d2 = (-y[:-4] + 16 * y[1:-3] - 30 * y[2:-2] + 16 * y[3:-1] - y[4:]) / (12 * h * h)
    return d1, d2


def _sampler(limit):
    if isinstance(limit, DensityCurve):
        return _curve_sampler(limit)
    return limit


def _curve_sampler(curve):
    spline = CubicSpline(curve.x, curve.p)
    zero_outside = curve.extra.get("zero_outside", False)

    def f(x):
        inside = (x >= curve.x[0]) & (x <= curve.x[-1])
        if not zero_outside and not inside.all():
            raise WindowNotCovered("curve does not cover the comparison window")
        return np.where(inside, spline(np.clip(x, curve.x[0], curve.x[-1])), 0.0)
    return f


def superconv_metrics(curve, limit, J, num=401):
    """Sup distance of densities and of their first two derivatives on J.

    Both densities are sampled on a uniform grid over J (two extra nodes on
    each side feed the fourth-order difference stencils); curves are
    resampled with a cubic spline in x.
    """
    lo, hi = J
    h = (hi - lo) / (num - 1)
    x = lo + h * np.arange(-2, num + 2)
    a = _curve_sampler(curve)(x) if isinstance(curve, DensityCurve) else curve(x)
    b = _sampler(limit)(x)
    diff = np.asarray(a, float) - np.asarray(b, float)
    d1, d2 = _fd4(diff, h)
    return {"sup_err": float(np.max(np.abs(diff[2:-2]))),
            "d1_err": float(np.max(np.abs(d1))), "d2_err": float(np.max(np.abs(d2)))}


def support_edges(provider, L=None):
    provider = line_provider(provider)
    L = L if L is not None else 2 * abs(getattr(provider, "mean", 0.0)) + 8
    return find_edges(lambda s: boundary_curve(provider, s).accepted, -L, L)


def curve_moments(provider, n=256, edges=None):
    """Mass and mean of the recovered density over its full support.

    Assumes the accepted parameters form a single interval; the cosine
    substitution removes the square-root behaviour of f at its ends.
    """
    provider = line_provider(provider)
    a, b = edges if edges is not None else support_edges(provider)
    s, wq = cosine_gauss(a, b, n)
    bc = boundary_curve(provider, s)
    if not bc.accepted.all():
        raise NoCrossing("boundary lost inside the support interval")
    p = bc.f / (np.pi * (s * s + bc.f ** 2))
    dens = p * dx_ds(bc.dH) * wq
    return float(np.sum(dens)), float(np.sum(bc.H.real * dens))
