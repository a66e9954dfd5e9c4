"""One-parameter sweeps that locate the boundary of an image domain.

Each pipeline looks for the place where a tracked analytic map crosses a
curve: Im H = 0 going down a vertical line (line case), Im Phi = 0 turning
an arc clockwise (half-line), |Phi| = 1 going out along a ray (circle).
Providers hide whether the map is an explicit formula or is assembled
from branch-tracked inverses of the row members.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import inversion as inv

OK, NO_CROSSING, BRANCH_LOST, NOT_MONOTONE = 0, 1, 2, 3
STATUS_NAMES = {OK: "ok", NO_CROSSING: "NoCrossing", BRANCH_LOST: "BranchLost",
                NOT_MONOTONE: "NotMonotone"}


class NoCrossing(ArithmeticError):
    pass


@dataclass
class State:
    z: np.ndarray
    w: np.ndarray | None
    ok: np.ndarray

    def take(self, sel):
        return State(self.z[sel], None if self.w is None else self.w[:, sel], self.ok[sel])

    def merge(self, mask, other):
        """Entries of `other` where mask, else self."""
        w = None if self.w is None else np.where(mask, other.w, self.w)
        return State(np.where(mask, other.z, self.z), w, np.where(mask, other.ok, self.ok))

    @staticmethod
    def concat(states):
        w = None if states[0].w is None else np.concatenate([s.w for s in states], axis=1)
        return State(np.concatenate([s.z for s in states]), w,
                     np.concatenate([s.ok for s in states]))


class ClosedForm:
    """Provider for maps given by formulas; subclasses define map/derivative."""

    def map(self, z):
        raise NotImplementedError

    def derivative(self, z):
        raise NotImplementedError

    def start(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return State(z, None, self.defined(z))

    def move(self, state, z):
        return self.start(z)

    def values(self, state):
        with np.errstate(all="ignore"):
            return self.map(state.z), self.derivative(state.z)

    def defined(self, z):
        return np.isfinite(z)

    def evaluate(self, z):
        st = self.start(z)
        m, d = self.values(st)
        return m, d, st.ok


class TrackedProvider:
    """Provider built from branch-tracked inverses of the row members.

    Identical members are merged and carried with multiplicities.
    """

    def __init__(self, measures):
        uniq, counts = {}, {}
        for m in measures:
            key = hash(m)
            uniq.setdefault(key, m)
            counts[key] = counts.get(key, 0) + 1
        self.stack = inv.AtomicStack(list(uniq.values()))
        self.mult = np.array([counts[k] for k in uniq], dtype=float)[:, None]
        self.domain = self.stack.domain
        self._gamma = None

    @property
    def gamma(self):
        if self._gamma is None:
            self._gamma = inv.stolz_anchor(self.stack)
        return self._gamma

    def start(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        gamma = self.gamma if self.domain is inv.Domain.LINE else None
        w, ok = inv.solve(self.stack, z, gamma)
        return State(z, w, ok)

    def move(self, state, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        w, ok = inv.move(self.stack, state.w, state.z, z)
        return State(z, w, ok & state.ok)

    def member_derivatives(self, w):
        with np.errstate(all="ignore"):
            _, d = self.stack(w)
        return 1.0 / d

    def values(self, state):
        raise NotImplementedError

    def evaluate(self, z):
        st = self.start(z)
        m, d = self.values(st)
        return m, d, st.ok


@dataclass
class Crossings:
    v: np.ndarray
    status: np.ndarray
    z: np.ndarray
    value: np.ndarray
    deriv: np.ndarray
    v_lo: np.ndarray
    v_hi: np.ndarray


def locate_crossings(provider, u, point: Callable, levels, crit: Callable, start_sign,
                     tol=1e-12, max_bisect=80):
    """Sweep every u through `levels` until crit(map) changes sign, then bisect.

    Parameters
    ----------
    point : callable (u, v) -> z for arrays u, v of equal shape.
    levels : 1-D sweep schedule, starting on the `start_sign` side.
    crit : callable (value) -> real array whose sign is monitored.
    """
    u = np.asarray(u, dtype=float)
    P = u.size
    status = np.full(P, NO_CROSSING)
    out_v = np.full(P, np.nan)
    lo = np.full(P, np.nan)
    hi = np.full(P, np.nan)
    out_z = np.full(P, np.nan + 0j)
    out_m = np.full(P, np.nan + 0j)
    out_d = np.full(P, np.nan + 0j)

    st = provider.start(point(u, np.full(P, levels[0])))
    with np.errstate(all="ignore"):
        c = crit(provider.values(st)[0])
    status[~st.ok] = BRANCH_LOST
    good = st.ok & (np.sign(c) == start_sign)
    active = np.flatnonzero(good)
    st = st.take(good)
    found_idx, found_a, found_b, found_st = [], [], [], []
    prev = levels[0]
    for v in levels[1:]:
        if active.size == 0:
            break
        new = provider.move(st, point(u[active], np.full(active.size, v)))
        with np.errstate(all="ignore"):
            c = crit(provider.values(new)[0])
        status[active[~new.ok]] = BRANCH_LOST
        crossed = new.ok & (np.sign(c) != start_sign)
        if crossed.any():
            found_idx.append(active[crossed])
            found_a.append(np.full(crossed.sum(), prev))
            found_b.append(np.full(crossed.sum(), v))
            found_st.append(st.take(crossed))
        keep = new.ok & ~crossed
        active = active[keep]
        st = new.take(keep)
        prev = v

    if found_idx:
        idx = np.concatenate(found_idx)
        a = np.concatenate(found_a)
        b = np.concatenate(found_b)
        sa = State.concat(found_st)
        alive = np.ones(idx.size, bool)
        for _ in range(max_bisect):
            if np.all(np.abs(b - a) <= tol * np.maximum(1.0, np.abs(a))):
                break
            mid = 0.5 * (a + b)
            nst = provider.move(sa, point(u[idx], mid))
            with np.errstate(all="ignore"):
                c = crit(provider.values(nst)[0])
            alive &= nst.ok
            same = nst.ok & (np.sign(c) == start_sign)
            a = np.where(same, mid, a)
            b = np.where(nst.ok & ~same, mid, b)
            sa = sa.merge(same, nst)
        vstar = 0.5 * (a + b)
        fin = provider.move(sa, point(u[idx], vstar))
        m, d = provider.values(fin)
        alive &= fin.ok
        status[idx] = np.where(alive, OK, BRANCH_LOST)
        out_v[idx] = np.where(alive, vstar, np.nan)
        lo[idx], hi[idx] = np.minimum(a, b), np.maximum(a, b)
        out_z[idx], out_m[idx], out_d[idx] = fin.z, m, d
    return Crossings(out_v, status, out_z, out_m, out_d, lo, hi)


def status_error(status, where=""):
    if status == NO_CROSSING:
        return NoCrossing(f"no boundary crossing {where}".strip())
    if status == BRANCH_LOST:
        return inv.BranchLost(f"continuation lost {where}".strip())
    return NoCrossing(f"crossing is not monotone {where}".strip())


def map_pair(provider, cache_size=64):
    """(H, dH) callables for contour work; repeated node sets hit a cache."""
    cache = {}

    def both(z):
        z = np.asarray(z, dtype=complex)
        key = z.tobytes()
        if key not in cache:
            if len(cache) >= cache_size:
                cache.pop(next(iter(cache)))
            m, d, ok = provider.evaluate(z.ravel())
            if not np.all(ok):
                raise inv.BranchLost("map evaluation failed on contour nodes")
            cache[key] = (m.reshape(z.shape), d.reshape(z.shape))
        return cache[key]

    return (lambda z: both(z)[0]), (lambda z: both(z)[1])


def find_edges(accept, lo, hi, coarse=161, tol=1e-12, max_iter=60):
    """Endpoints of the parameter interval on which `accept` holds.

    `accept` maps an array of parameters to a boolean array.  The first and
    last accepted points of a coarse scan are refined by bisection against
    their rejected neighbours.  Returns (a, b) with accept true just inside.
    """
    u = np.linspace(lo, hi, coarse)
    ok = accept(u)
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        raise NoCrossing("no accepted parameter in the scan")
    i, j = idx[0], idx[-1]
    if i == 0 or j == coarse - 1:
        raise NoCrossing("accepted set touches the scan boundary")
    inside = np.array([u[i], u[j]])
    outside = np.array([u[i - 1], u[j + 1]])
    for _ in range(max_iter):
        if np.all(np.abs(inside - outside) <= tol * np.maximum(1, np.abs(inside))):
            break
        mid = 0.5 * (inside + outside)
        good = accept(mid)
        inside = np.where(good, mid, inside)
        outside = np.where(good, outside, mid)
    return float(inside[0]), float(inside[1])


def cosine_gauss(a, b, n=256):
    """Nodes/weights for integrals over [a, b] whose integrand has square-root
    behaviour at both ends: u = (a+b)/2 - (b-a)/2 cos(phi), Gauss-Legendre in phi."""
    x, w = np.polynomial.legendre.leggauss(n)
    ph = 0.5 * np.pi * (x + 1)
    u = 0.5 * (a + b) - 0.5 * (b - a) * np.cos(ph)
    return u, w * 0.5 * np.pi * 0.5 * (b - a) * np.sin(ph)
