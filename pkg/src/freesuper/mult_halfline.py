"""Free multiplicative convolution on the positive half-line through products
of Sigma transforms, the polar boundary h(r) and density recovery."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import inversion as inv
from . import transforms as tr
from .additive import DensityCurve, NonMonotoneAbscissae, WindowNotCovered, _window_from_scan
from .measures import AtomicMeasure, Domain, atomic
from .sweep import (NO_CROSSING, NOT_MONOTONE, OK, ClosedForm, NoCrossing, TrackedProvider,
                    cosine_gauss, find_edges, locate_crossings, map_pair, status_error)

THETA_TOP = np.pi * (1 - 1 / 128)
THETA_LEVELS = np.concatenate([np.linspace(THETA_TOP, 0.025, 64),
                               0.025 * 0.7 ** np.arange(1, 60)])
THETA_LEVELS = np.append(THETA_LEVELS[THETA_LEVELS > 1e-9], 1e-9)


class RowPhi(TrackedProvider):
    """Phi_row(z) = z prod_i Sigma_i(z) = z prod_i (eta_i^{-1}(z) / z)."""

    def values(self, state):
        z = state.z
        w = state.w
        with np.errstate(all="ignore"):
            ratio = w / z
            m = z * np.prod(ratio ** self.mult, axis=0)
            logd = 1.0 / z + np.sum(self.mult * (self.member_derivatives(w) / w - 1.0 / z), axis=0)
        return m, m * logd

    @property
    def first_moment(self):
        return complex(np.prod(self.stack.first_moment ** self.mult[:, 0]))


def halfline_provider(obj):
    if isinstance(obj, (ClosedForm, RowPhi)):
        return obj
    if isinstance(obj, AtomicMeasure):
        obj = [obj]
    measures = list(obj)
    if measures[0].domain is not Domain.HALFLINE:
        raise ValueError("pipeline needs measures on the half-line")
    return RowPhi(measures)


def scaled(m: AtomicMeasure, c):
    """Pushforward of a half-line measure under t -> c t."""
    return atomic(Domain.HALFLINE, m.positions * c, m.weights)


def scale_row(row, c):
    """Row whose convolution is the pushforward of the original under t -> c t."""
    return list(row) + [atomic(Domain.HALFLINE, [c], [1.0])]


def phi_map(provider, z):
    prov = halfline_provider(provider)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    m, _, ok = prov.evaluate(z)
    if not np.all(ok):
        raise inv.BranchLost("continuation failed for some member")
    return complex(m[0]) if m.size == 1 else m


def sigma_product(row, z):
    """Product of the Sigma transforms of the row members at z."""
    return phi_map(row, z) / np.asarray(z, dtype=complex)


@dataclass
class PolarBoundaryCurve:
    r: np.ndarray
    h: np.ndarray
    h_lo: np.ndarray
    h_hi: np.ndarray
    status: np.ndarray
    Phi: np.ndarray
    dPhi: np.ndarray

    @property
    def accepted(self):
        return self.status == OK

    @property
    def w(self):
        return self.r * np.exp(1j * self.h)


def polar_boundary(provider, r):
    """h(r): where Im Phi(r e^{i theta}) turns negative as theta decreases from pi."""
    provider = halfline_provider(provider)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    cr = locate_crossings(provider, r, lambda u, v: u * np.exp(1j * v), THETA_LEVELS,
                          lambda m: m.imag, +1)
    status = cr.status.copy()
    ok = status == OK
    with np.errstate(all="ignore"):
        real_pos = cr.value.real > 0
        mono = (cr.z * cr.deriv / cr.value).real > 0
        flat = np.abs(cr.value.imag) <= 1e-9 * (1 + np.abs(cr.value))
    status[ok & ~real_pos] = NO_CROSSING
    status[ok & real_pos & ~(mono & flat)] = NOT_MONOTONE
    return PolarBoundaryCurve(r, cr.v, cr.v_lo, cr.v_hi, status, cr.value, cr.deriv)


def boundary_h(provider, r):
    bc = polar_boundary(provider, [float(r)])
    if bc.status[0] != OK:
        raise status_error(bc.status[0], f"at r={r}")
    return float(bc.h[0])


def density_halfline(r, h, Phi):
    """(x, p) at the boundary point w = r e^{ih} with Phi(w) real positive."""
    r, h = np.asarray(r, float), np.asarray(h, float)
    x = 1.0 / np.asarray(Phi).real
    w = r * np.exp(1j * h)
    p = r * np.sin(h) / (np.pi * x * np.abs(1 - w) ** 2)
    return x, p


def dx_dlogr(bc: PolarBoundaryCurve):
    """|dx/d log r| along the boundary, with x = 1/Phi."""
    A = bc.dPhi * np.exp(1j * bc.h)
    dX = np.abs(A) ** 2 / A.real
    return bc.r * dX / bc.Phi.real ** 2


def curve_from_boundary(bc: PolarBoundaryCurve):
    ok = bc.accepted
    x, p = density_halfline(bc.r[ok], bc.h[ok], bc.Phi[ok])
    order = np.argsort(x)
    x, p = x[order], p[order]
    if x.size > 1 and np.any(np.diff(x) <= 0):
        raise NonMonotoneAbscissae("abscissae are not strictly monotone; refine the r-grid")
    return DensityCurve(x, p, bc.r[ok][order], bc.h[ok][order], int((~ok).sum()), Domain.HALFLINE)


def density_curve_halfline(provider, r_grid):
    return curve_from_boundary(polar_boundary(provider, r_grid))


def r_window(provider, J, coarse=241, span=8.0, margin=0.04):
    """log-r interval whose image covers J = [a, b] (0 < a < b); see additive.s_window."""
    provider = halfline_provider(provider)
    u = np.linspace(-span, span, coarse)
    bc = polar_boundary(provider, np.exp(u))
    with np.errstate(all="ignore"):
        x = 1.0 / bc.Phi.real
    # x decreases as r grows
    return _window_from_scan(u, bc.accepted, x, bc.status, J, margin, increasing=False)


def curve_on_window(provider, J, num=801):
    provider = halfline_provider(provider)
    a, b, closed = r_window(provider, J)
    curve = density_curve_halfline(provider, np.exp(np.linspace(a, b, num)))
    curve.extra["zero_outside"] = closed
    return curve


def support_edges(provider, span=8.0):
    provider = halfline_provider(provider)
    a, b = find_edges(lambda u: polar_boundary(provider, np.exp(u)).accepted, -span, span)
    return a, b


def curve_moments(provider, n=256, edges=None):
    """Mass and mean of the recovered density over its full support (log r variable)."""
    provider = halfline_provider(provider)
    a, b = edges if edges is not None else support_edges(provider)
    u, wq = cosine_gauss(a, b, n)
    bc = polar_boundary(provider, np.exp(u))
    if not bc.accepted.all():
        raise NoCrossing("boundary lost inside the support interval")
    x, p = density_halfline(bc.r, bc.h, bc.Phi)
    dens = p * dx_dlogr(bc) * wq
    return float(np.sum(dens)), float(np.sum(x * dens))


def log_polar_pair(provider):
    """u -> log Phi(e^u) and its derivative, for contour inversion near the boundary."""
    Pm, dPm = map_pair(halfline_provider(provider))

    def H(u):
        return np.log(Pm(np.exp(u)))

    def dH(u):
        z = np.exp(u)
        return z * dPm(z) / Pm(z)

    return H, dH


def eta_by_contour(provider, Q: inv.ContourRect, zeta):
    """eta(zeta) for zeta in the upper half-plane near the boundary, via the
    contour-integral inverse of u -> log Phi(e^u) over Q (log-polar plane)."""
    H, dH = log_polar_pair(provider)
    u = inv.contour_inverse(H, Q, np.log(complex(zeta)), dH)
    return complex(np.exp(u))


def F_by_contour(provider, Q):
    """Reciprocal Cauchy transform z -> F(z) for Im z > 0, using eta(1/z) = conj eta(1/conj z)."""

    def F(z):
        eta = np.conj(eta_by_contour(provider, Q, 1.0 / np.conj(z)))
        G = (1.0 / z) / (1.0 - eta)
        return 1.0 / G

    return F


def stieltjes_check(provider, r, h, half=0.1, ladder=None):
    """Density at x = 1/Phi(r e^{ih}) by extrapolated Stieltjes inversion."""
    Q = inv.ContourRect.around(complex(np.log(r), h), half)
    x = 1.0 / phi_map(provider, r * np.exp(1j * h)).real
    return x, tr.stieltjes_density(F_by_contour(provider, Q), x, ladder)
