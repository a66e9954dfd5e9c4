"""Free multiplicative convolution on the unit circle: Sigma products on a
disk, the radial boundary R(zeta) and Poisson-kernel density recovery."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import inversion as inv
from . import transforms as tr
from .additive import DensityCurve, NonMonotoneAbscissae
from .measures import TWO_PI, AtomicMeasure, Domain, atomic
from .mult_halfline import RowPhi
from .sweep import (NO_CROSSING, NOT_MONOTONE, OK, ClosedForm, NoCrossing, cosine_gauss, find_edges,
                    locate_crossings, status_error)

R_FLOOR = 1 - 1e-12
# log|Phi| is within rounding of zero this close to the circle
R_NOISE = 1 - 1e-10


class ZeroMeanMeasure(ValueError):
    pass


class AtomDirection(ArithmeticError):
    pass


class RowPhiCircle(RowPhi):
    """Row Phi on the disk, capped at the smallest member radius of Sigma."""

    def __init__(self, measures):
        super().__init__(measures)
        if np.any(np.abs(self.stack.first_moment) < 1e-14):
            raise ZeroMeanMeasure("a member has zero first moment")
        self._rho = None

    @property
    def rho(self):
        if self._rho is None:
            self._rho = inv.estimate_rho(self.stack).rho_mu
        return self._rho


def circle_provider(obj):
    if isinstance(obj, (ClosedForm, RowPhiCircle)):
        return obj
    if isinstance(obj, AtomicMeasure):
        obj = [obj]
    measures = list(obj)
    if measures[0].domain is not Domain.CIRCLE:
        raise ValueError("pipeline needs measures on the circle")
    return RowPhiCircle(measures)


def rotate_row(row, alpha):
    """Row whose convolution is the original rotated by e^{i alpha}."""
    return list(row) + [atomic(Domain.CIRCLE, [alpha], [1.0])]


def sigma_product_circle(row, z):
    prov = circle_provider(row)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(z.shape, dtype=complex)
    zero = z == 0
    if zero.any():
        out[zero] = 1.0 / prov.first_moment if isinstance(prov, RowPhi) else prov.sigma(0.0)
    if (~zero).any():
        if isinstance(prov, RowPhiCircle) and np.any(np.abs(z[~zero]) >= prov.rho):
            raise inv.BranchLost("point outside the disk where every Sigma is available")
        m, _, ok = prov.evaluate(z[~zero])
        if not np.all(ok):
            raise inv.BranchLost("continuation failed for some member")
        out[~zero] = m / z[~zero]
    return complex(out[0]) if out.size == 1 else out


def r_levels(cap):
    lv = np.concatenate([np.linspace(0.01, 0.9, 64), 1 - 0.1 * 0.7 ** np.arange(1, 80)])
    lv = lv[lv < cap]
    return np.append(lv, cap)


@dataclass
class RadialBoundaryCurve:
    zeta: np.ndarray
    R: np.ndarray
    r_lo: np.ndarray
    r_hi: np.ndarray
    status: np.ndarray
    Phi: np.ndarray
    dPhi: np.ndarray

    @property
    def accepted(self):
        return self.status == OK

    @property
    def w(self):
        return self.R * np.exp(1j * self.zeta)


def radial_boundary(provider, zeta):
    """R(zeta): first radius at which |Phi(r e^{i zeta})| reaches 1."""
    provider = circle_provider(provider)
    zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
    cap = min(getattr(provider, "rho", 1.0), R_FLOOR)
    cr = locate_crossings(provider, zeta, lambda u, v: v * np.exp(1j * u), r_levels(cap),
                          lambda m: np.log(np.abs(m)), -1)
    status = cr.status.copy()
    with np.errstate(all="ignore"):
        mono = (cr.z * cr.deriv / cr.value).real > 0
        flat = np.abs(np.abs(cr.value) - 1) <= 1e-9
    status[(status == OK) & ~(mono & flat)] = NOT_MONOTONE
    status[(status == OK) & (cr.v > min(cap, R_NOISE))] = NO_CROSSING
    return RadialBoundaryCurve(zeta, cr.v, cr.v_lo, cr.v_hi, status, cr.value, cr.deriv)


def boundary_R(provider, zeta):
    bc = radial_boundary(provider, [float(zeta)])
    if bc.status[0] != OK:
        raise status_error(bc.status[0], f"at zeta={zeta}")
    return float(bc.R[0])


def density_circle(w, Phi):
    """(xi, p): xi = -arg Phi(w) in [0, 2 pi), p = (1 - |w|^2)/|1 - w|^2."""
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(w) >= 1):
        raise AtomDirection("boundary point on the unit circle")
    xi = np.mod(-np.angle(Phi), TWO_PI)
    p = (1 - np.abs(w) ** 2) / np.abs(1 - w) ** 2
    return xi, p


def dxi_dzeta(bc: RadialBoundaryCurve):
    """|d xi / d zeta| along the boundary: |B|^2 / Re B with B = w Phi'/Phi."""
    B = bc.w * bc.dPhi / bc.Phi
    return np.abs(B) ** 2 / B.real


def curve_from_boundary(bc: RadialBoundaryCurve, center=0.0):
    ok = bc.accepted
    xi, p = density_circle(bc.w[ok], bc.Phi[ok])
    x = np.mod(xi - center + np.pi, TWO_PI) - np.pi + center
    order = np.argsort(x)
    x, p = x[order], p[order]
    if x.size > 1 and np.any(np.diff(x) <= 0):
        raise NonMonotoneAbscissae("angles are not strictly monotone; refine the zeta-grid")
    return DensityCurve(x, p, bc.zeta[ok][order], bc.R[ok][order], int((~ok).sum()),
                        Domain.CIRCLE)


def density_curve_circle(provider, num=721, center=0.0):
    """Density w.r.t. normalized arclength on a uniform zeta-grid; angles are
    reported in [center - pi, center + pi)."""
    zeta = TWO_PI * np.arange(num) / num
    return curve_from_boundary(radial_boundary(provider, zeta), center)


def support_arc(provider, coarse=181):
    """(a, b) in zeta with R < 1 on (a, b), or None when R < 1 on the whole circle."""
    provider = circle_provider(provider)
    zeta = TWO_PI * np.arange(coarse) / coarse
    ok = radial_boundary(provider, zeta).accepted
    if ok.all():
        return None
    if not ok.any():
        raise NoCrossing("no direction with R < 1")
    q = zeta[np.flatnonzero(~ok)[0]]
    return find_edges(lambda u: radial_boundary(provider, u).accepted, q, q + TWO_PI, coarse + 1)


def curve_moments(provider, n=256):
    """Total mass and first moment of the recovered density (w.r.t. m)."""
    provider = circle_provider(provider)
    arc = support_arc(provider)
    if arc is None:
        zeta = TWO_PI * np.arange(n) / n
        wq = np.full(n, TWO_PI / n)
    else:
        zeta, wq = cosine_gauss(arc[0], arc[1], n)
    bc = radial_boundary(provider, zeta)
    ok = bc.accepted
    # nodes next to the arc ends may sit closer to the circle than R can be resolved;
    # the density vanishes there, so they contribute nothing
    if arc is None:
        near_end = np.zeros(n, bool)
    else:
        near_end = np.minimum(zeta - arc[0], arc[1] - zeta) < 1e-4 * (arc[1] - arc[0])
    if not np.all(ok | near_end):
        raise NoCrossing("boundary lost inside the support arc")
    bc = RadialBoundaryCurve(*(getattr(bc, f)[ok] for f in
                               ("zeta", "R", "r_lo", "r_hi", "status", "Phi", "dPhi")))
    xi, p = density_circle(bc.w, bc.Phi)
    dens = p * dxi_dzeta(bc) * wq[ok] / TWO_PI
    return float(np.sum(dens)), complex(np.sum(np.exp(1j * xi) * dens))


def radial_limit_density(provider, xi, w0, ladder=None):
    """lim_{r -> 1} Re((1 + eta(r conj xi)) / (1 - eta(r conj xi))), with eta obtained by
    Newton inversion of Phi started at the boundary point w0, extrapolated in 1 - r."""
    provider = circle_provider(provider)
    eps = tr.DEFAULT_LADDER if ladder is None else np.asarray(ladder, dtype=float)

    def Pm(w):
        return provider.evaluate(np.atleast_1d(w))[0]

    def dPm(w):
        return provider.evaluate(np.atleast_1d(w))[1]

    vals, w = [], np.atleast_1d(complex(w0))
    for e in eps:
        target = (1 - e) * np.exp(-1j * xi)
        w = inv.solve_map(Pm, dPm, target, w)
        vals.append(float(((1 + w[0]) / (1 - w[0])).real))
    value, err = tr.richardson(vals, ratio=eps[0] / eps[1])
    return tr.StieltjesEstimate(value, err)
