"""Branch-tracked inversion of F (line) and eta (half-line, circle).

The workhorse is :func:`track`: damped Newton continuation of
``fam(w) = z`` along a path ``z(lam)``, vectorized over a stack of k
measures and P target points (arrays of shape (k, P)).  A point is lost
as soon as any member of the stack fails, since the row transform is then
undefined there.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import transforms as tr
from .measures import AtomicMeasure, Domain, GridMeasure, mean, moment

NEWTON_TOL = 1e-12
MAX_NEWTON = 50
DAMPING_HALVINGS = 6
MIN_STEP = 1e-6
PROBE_POINTS = 64


class InversionError(ArithmeticError):
    pass


class BranchLost(InversionError):
    pass


class AnchorNotFound(InversionError):
    pass


class WindingMismatch(InversionError):
    pass


class QuadratureStall(InversionError):
    pass


class NotInjective(InversionError):
    pass


# -- domain types ----------------------------------------------------------

@dataclass(frozen=True)
class StolzAngle:
    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("Stolz angle needs alpha > 0 and beta > 0")

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        return z.imag >= np.maximum(self.beta, self.alpha * np.abs(z.real))

    def probe(self):
        """64 points on the boundary: the flat top plus both rays."""
        b, a = self.beta, self.alpha
        flat = np.linspace(-b / a, b / a, 16) + 1j * b
        ys = np.geomspace(b, 1e3 * b, 25)[1:]
        return np.concatenate([flat, ys / a + 1j * ys, -ys / a + 1j * ys])


@dataclass(frozen=True)
class AngularDomain:
    rho: float
    theta: float

    def __post_init__(self):
        if not (0 < self.rho < 1 and 0 < self.theta < np.pi):
            raise ValueError("need rho in (0,1) and theta in (0,pi)")

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        t = np.mod(np.angle(z), 2 * np.pi)
        return (r > self.rho) & (r < 1 / self.rho) & (t > self.theta) & (t < 2 * np.pi - self.theta)


@dataclass(frozen=True)
class DiskDomain:
    rho_mu: float

    def __post_init__(self):
        if not 0 < self.rho_mu:
            raise ValueError("disk radius must be positive")

    def contains(self, z):
        return np.abs(np.asarray(z, dtype=complex)) < self.rho_mu


@dataclass
class ContinuationPath:
    """Waypoints from an anchor to the query point, with solved values.

    When constructed empty, the default path of the relevant inverse is
    used and recorded.  The first waypoint must be an admissible anchor.
    """

    waypoints: list = field(default_factory=list)
    values: list = field(default_factory=list)


@dataclass(frozen=True)
class ContourRect:
    s_range: tuple
    t_range: tuple

    def __post_init__(self):
        (a, b), (lo, hi) = self.s_range, self.t_range
        if not (b > a and hi > lo):
            raise ValueError("degenerate rectangle")

    @classmethod
    def around(cls, w, half_width, half_height=None):
        half_height = half_width if half_height is None else half_height
        return cls((w.real - half_width, w.real + half_width),
                   (w.imag - half_height, w.imag + half_height))

    def corners(self):
        (a, b), (lo, hi) = self.s_range, self.t_range
        return [complex(a, lo), complex(b, lo), complex(b, hi), complex(a, hi)]

    def contains(self, z):
        (a, b), (lo, hi) = self.s_range, self.t_range
        return a < z.real < b and lo < z.imag < hi


# -- transform families ----------------------------------------------------

class AtomicStack:
    """k atomic measures padded to a common atom count.

    Calling the stack on w of shape (k, P) returns the transform being
    inverted (F on the line, eta otherwise) and its derivative.
    """

    def __init__(self, measures):
        measures = list(measures)
        if not measures or not all(isinstance(m, AtomicMeasure) for m in measures):
            raise TypeError("AtomicStack needs atomic measures")
        self.domain = measures[0].domain
        k, na = len(measures), max(m.weights.size for m in measures)
        self.k = k
        self.wts = np.zeros((k, na))
        self.pos = np.zeros((k, na), dtype=complex)
        for i, m in enumerate(measures):
            self.wts[i, :m.weights.size] = m.weights
            src = m.positions if self.domain is Domain.LINE else m.multipliers
            self.pos[i, :m.weights.size] = src
        self.first_moment = np.sum(self.wts * self.pos, axis=1)
        self.second_moment = np.sum(self.wts * self.pos ** 2, axis=1)
        self.measures = measures

    def subset(self, idx):
        return AtomicStack([self.measures[i] for i in np.atleast_1d(idx)])

    def __call__(self, w):
        p = self.pos[:, :, None]
        wt = self.wts[:, :, None]
        w3 = w[:, None, :]
        if self.domain is Domain.LINE:
            d = w3 - p
            g = np.sum(wt / d, axis=1)
            dg = -np.sum(wt / d ** 2, axis=1)
            return 1.0 / g, -dg / g ** 2
        q = 1.0 - w3 * p
        psi = np.sum(wt * p * w3 / q, axis=1)
        dpsi = np.sum(wt * p / q ** 2, axis=1)
        one = 1.0 + psi
        return psi / one, dpsi / one ** 2


class GridFamily:
    """Single grid measure behind the same calling convention (slow path)."""

    def __init__(self, m: GridMeasure):
        self.measure = m
        self.domain = m.domain
        self.k = 1
        self.kind = tr.Kind.F if m.domain is Domain.LINE else tr.Kind.ETA
        self.first_moment = np.array([moment(m, 1)], dtype=complex)
        self.second_moment = np.array([moment(m, 2)], dtype=complex)

    def __call__(self, w):
        v = np.full(w.shape, np.nan + 0j)
        d = np.full(w.shape, np.nan + 0j)
        ok = tr.in_domain(self.domain, w) & np.isfinite(w)
        if ok.any():
            v[ok] = tr.evaluate(self.measure, self.kind, w[ok])
            d[ok] = tr.evaluate_derivative(self.measure, self.kind, w[ok], 1)
        return v, d


def family(measures):
    if isinstance(measures, (AtomicMeasure, GridMeasure)):
        measures = [measures]
    measures = list(measures)
    if len(measures) == 1 and isinstance(measures[0], GridMeasure):
        return GridFamily(measures[0])
    return AtomicStack(measures)


# -- Newton and continuation -----------------------------------------------

def newton(fam, w, z, tol=NEWTON_TOL, max_iter=MAX_NEWTON):
    """Damped Newton for fam(w) = z, elementwise on (k, P) arrays."""
    w = np.array(w, dtype=complex)
    z = np.broadcast_to(z, w.shape)
    scale = 1.0 + np.abs(z)
    with np.errstate(all="ignore"):
        val, der = fam(w)
        res = val - z
        conv = np.abs(res) <= tol * scale
        for _ in range(max_iter):
            todo = ~conv & np.isfinite(res)
            if not todo.any():
                break
            step = np.where(todo, res / der, 0)
            lam = np.ones(w.shape)
            trial = w - step
            tval, tder = fam(trial)
            tres = tval - z
            for _ in range(DAMPING_HALVINGS):
                worse = todo & ~(np.abs(tres) < np.abs(res))
                if not worse.any():
                    break
                lam = np.where(worse, lam / 2, lam)
                trial = np.where(worse, w - lam * step, trial)
                tval, tder = fam(trial)
                tres = tval - z
            moved = todo & np.isfinite(tres)
            w = np.where(moved, trial, w)
            res = np.where(moved, tres, res)
            der = np.where(moved, tder, der)
            tiny = np.abs(lam * step) <= 4e-16 * (1 + np.abs(w))
            conv = conv | (np.abs(res) <= tol * scale) | (tiny & (np.abs(res) <= 1e3 * tol * scale))
        # one polishing step: the stopping test is on the residual, so a converged
        # point can still carry an error of order tol * |z|
        trial = w - np.where(conv, res / der, 0)
        tres = fam(trial)[0] - z
        better = conv & (np.abs(tres) < np.abs(res))
        w = np.where(better, trial, w)
    conv &= np.isfinite(w)
    return w, conv


def track(fam, path, w0, valid, h0=0.125, h_min=MIN_STEP, couple=True):
    """Continue solutions of fam(w) = path(lam) from lam = 0 to lam = 1.

    `w0` (shape (k, P)) must solve the equation at lam = 0.  Step length
    halves on failure down to `h_min`; points that still fail are marked
    lost.  Returns (w, ok); ok has shape (P,) when `couple` (a point dies
    with any of its members) and (k, P) otherwise.
    """
    w = np.array(w0, dtype=complex)
    alive = np.ones(w.shape[1] if couple else w.shape, bool)
    lam, h = 0.0, h0
    z_old = path(0.0)
    with np.errstate(all="ignore"):
        _, der = fam(w)
        while lam < 1.0 and alive.any():
            h = min(h, 1.0 - lam)
            z_new = path(lam + h)
            pred = w + (z_new - z_old) / der
            w_new, conv = newton(fam, pred, z_new)
            corr = np.abs(w_new - pred)
            jump = corr > 0.5 * np.abs(pred - w) + 1e-9 * (1 + np.abs(w))
            good = conv & ~jump & valid(w_new, z_new)
            ok = (good.all(axis=0) if couple else good) | ~alive
            if not ok.all():
                if h / 2 >= h_min:
                    h /= 2
                    continue
                alive &= ok
            w = np.where(alive, w_new, w)
            _, der = fam(w)
            z_old = z_new
            lam += h
            h = min(2 * h, h0)
    return w, alive


def _valid_line(w, z):
    return np.isfinite(w) & (w.imag > 0)


def _valid_halfline(w, z):
    tiny = 1e-13 * (1 + np.abs(w))
    on_axis = np.abs(w.imag) <= tiny
    same_side = w.imag * np.sign(z.imag) >= -tiny
    return np.isfinite(w) & same_side & ~(on_axis & (w.real > 0))


def _valid_circle(w, z):
    return np.isfinite(w) & (np.abs(w) < 1)


VALIDITY = {Domain.LINE: _valid_line, Domain.HALFLINE: _valid_halfline,
            Domain.CIRCLE: _valid_circle}


# -- anchors ---------------------------------------------------------------

def stolz_anchor(m, alpha=1.0, beta0=1.0, max_doublings=60):
    """Smallest beta (beta0 * 2**j) certified on a boundary probe of the angle.

    On every probe point z, Newton started at z must converge to a solution
    of F(w) = z in the upper half-plane and |F(z) - z| <= Im z / 2.
    Accepts a measure, a list of measures, an AtomicStack or any object
    with a closed-form ``phi`` (defined on all of the upper half-plane).
    """
    if hasattr(m, "phi") and not isinstance(m, (AtomicStack, GridFamily)):
        return StolzAngle(alpha, beta0)
    fam = m if isinstance(m, (AtomicStack, GridFamily)) else family(m)
    if fam.domain is not Domain.LINE:
        raise ValueError("Stolz angles belong to measures on the line")
    beta = beta0
    for _ in range(max_doublings + 1):
        gamma = StolzAngle(alpha, beta)
        z = gamma.probe()
        zz = np.broadcast_to(z, (fam.k, z.size))
        with np.errstate(all="ignore"):
            f, _ = fam(np.array(zz))
            w, conv = newton(fam, np.array(zz), zz)
        close = np.abs(f - zz) <= zz.imag / 2
        if np.all(conv & close & (w.imag > 0)):
            return gamma
        beta *= 2
    raise AnchorNotFound(f"no admissible beta up to {beta:g}")


def line_anchor_heights(fam, z, gamma):
    return np.maximum.reduce([np.full(z.shape, gamma.beta), gamma.alpha * np.abs(z.real), z.imag])


def solve_line(fam, z, gamma=None):
    """H for every stack member at every z (upper half-plane), vertical descent."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    gamma = gamma or stolz_anchor(fam)
    top = z.real + 1j * line_anchor_heights(fam, z, gamma)
    mu1 = fam.first_moment.real[:, None]
    var = (fam.second_moment.real - fam.first_moment.real ** 2)[:, None]
    w0 = top[None, :] + mu1 + var / top[None, :]
    w0, conv = newton(fam, w0, top)
    ok0 = conv.all(axis=0) & (w0.imag > 0).all(axis=0)
    w, ok = track(fam, lambda lam: top + lam * (z - top), w0, _valid_line)
    return w, ok & ok0


def _eta_seed(fam, z):
    m1 = fam.first_moment[:, None]
    return z[None, :] / m1


HALFLINE_ANCHOR = 1e-3


def solve_halfline(fam, z):
    """eta^{-1} for every stack member: along (-a, 0) out to -|z|, then around."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    r = np.abs(z)
    a0 = np.minimum(HALFLINE_ANCHOR, 0.5 * r)
    a0 = np.where(a0 > 0, a0, HALFLINE_ANCHOR)
    start = -a0 + 0j
    w0, conv = newton(fam, _eta_seed(fam, start), start)
    ok = conv.all(axis=0)
    valid = _valid_halfline
    w, ok1 = track(fam, lambda lam: -(a0 + lam * (r - a0)) + 0j, w0, valid)
    theta = np.angle(z)
    theta = np.where(theta == -np.pi, np.pi, theta)
    target = np.where(theta >= 0, theta, theta)
    base = np.where(theta >= 0, np.pi, -np.pi)
    arc = lambda lam: r * np.exp(1j * (base + lam * (target - base)))
    need_arc = np.abs(base - target) > 0
    if need_arc.any():
        w2, ok2 = track(fam, arc, w, valid)
        w = np.where(need_arc, w2, w)
        ok1 = ok1 & (ok2 | ~need_arc)
    zero = r == 0
    w[:, zero] = 0
    return w, (ok & ok1) | zero


CIRCLE_ANCHOR = 1e-3


def solve_circle(fam, z):
    """eta^{-1} for every stack member along the ray from 0."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(fam.first_moment) < 1e-14):
        raise tr.DegenerateMeasure("zero first moment: Sigma is undefined")
    r = np.abs(z)
    start = np.where(r > CIRCLE_ANCHOR, CIRCLE_ANCHOR * z / np.where(r > 0, r, 1), z)
    w0, conv = newton(fam, _eta_seed(fam, start), start)
    w, ok = track(fam, lambda lam: start + lam * (z - start), w0, _valid_circle)
    return w, ok & conv.all(axis=0)


def solve(fam, z, gamma=None):
    if fam.domain is Domain.LINE:
        return solve_line(fam, z, gamma)
    if fam.domain is Domain.HALFLINE:
        return solve_halfline(fam, z)
    return solve_circle(fam, z)


def move(fam, w, z_from, z_to):
    """Short straight continuation of an already-solved state."""
    z_from = np.asarray(z_from, dtype=complex)
    z_to = np.asarray(z_to, dtype=complex)
    return track(fam, lambda lam: z_from + lam * (z_to - z_from), w,
                 VALIDITY[fam.domain], h0=1.0)


# -- scalar public API -----------------------------------------------------

def _follow_waypoints(fam, path, z):
    pts = [complex(p) for p in path.waypoints]
    if pts[-1] != z:
        pts.append(complex(z))
    w, ok = solve(fam, np.array([pts[0]]))
    if not ok.all():
        raise BranchLost("anchor waypoint is not admissible")
    values = [complex(w[0, 0])]
    for a, b in zip(pts[:-1], pts[1:]):
        w, ok = track(fam, lambda lam: np.array([a + lam * (b - a)]), w, VALIDITY[fam.domain])
        if not ok.all():
            raise BranchLost(f"continuation failed between {a} and {b}")
        values.append(complex(w[0, 0]))
    path.waypoints, path.values = pts, values
    return values[-1]


def _inverse(m, z, path, domain):
    fam = family(m)
    if fam.domain is not domain and not (domain is None and fam.domain is not Domain.LINE):
        raise ValueError(f"wrong domain {fam.domain.value}")
    if path is not None and path.waypoints:
        return _follow_waypoints(fam, path, z)
    w, ok = solve(fam, np.array([z]))
    if not ok.all():
        raise BranchLost(f"continuation to {z} left the validity region")
    val = complex(w[0, 0])
    if path is not None:
        path.waypoints, path.values = [complex(z)], [val]
    return val


def invert_F(m, z, path=None):
    """H_mu(z): the branch of F_mu^{-1} continued from the Stolz anchor."""
    z = complex(z)
    if z.imag <= 0:
        raise tr.OutOfDomain("H is evaluated in the upper half-plane")
    return _inverse(m, z, path, Domain.LINE)


def phi(m, z, path=None):
    """Voiculescu transform H_mu(z) - z."""
    return invert_F(m, z, path) - complex(z)


def invert_eta(m, w, path=None):
    """eta_mu^{-1}(w) continued from the anchor near 0."""
    return _inverse(m, complex(w), path, None)


def sigma(m, w, path=None):
    """Sigma_mu(w) = eta^{-1}(w) / w; at w = 0 the limit 1/eta'(0) = 1/m_1."""
    w = complex(w)
    if w == 0:
        return 1.0 / complex(mean(m))
    return invert_eta(m, w, path) / w


def estimate_rho(m, rays=PROBE_POINTS, safety=0.95):
    """Conservative radius on which eta^{-1} (hence Sigma) is available.

    Tracks eta^{-1} outward along `rays` rays for every member and keeps
    the smallest radius reached before the continuation fails or leaves the
    disk; members that reach the unit circle on every ray give radius 1.
    """
    fam = m if isinstance(m, (AtomicStack, GridFamily)) else family(m)
    if fam.domain is not Domain.CIRCLE:
        raise ValueError("radius estimate is for circle measures")
    ray = np.exp(2j * np.pi * (np.arange(rays) + 0.5) / rays)
    radii = np.concatenate([np.linspace(0.02, 0.9, 45), 1 - 0.1 * 0.7 ** np.arange(1, 40)])
    z = CIRCLE_ANCHOR * ray
    w, conv = newton(fam, _eta_seed(fam, z), z)
    alive = conv
    best = np.full(w.shape, CIRCLE_ANCHOR)
    for rad in radii:
        w_new, ok = track(fam, lambda lam, a=z, b=rad * ray: a + lam * (b - a), w,
                          _valid_circle, h0=1.0, couple=False)
        alive &= ok
        if not alive.any():
            break
        best = np.where(alive, rad, best)
        w = np.where(alive, w_new, w)
        z = rad * ray
    if alive.all():
        return DiskDomain(1.0)
    return DiskDomain(float(min(1.0, safety * best[~alive].min())))


# -- generic analytic maps ---------------------------------------------------

def fd_derivative(H, zeta):
    h = 1e-5 * (1 + np.abs(zeta))
    return (-H(zeta + 2 * h) + 8 * H(zeta + h) - 8 * H(zeta - h) + H(zeta - 2 * h)) / (12 * h)


def solve_map(H, dH, z, w0, tol=1e-13, max_iter=60):
    """Newton for H(w) = z with a closed-form or tracked evaluator."""
    w = np.array(w0, dtype=complex)
    z = np.asarray(z, dtype=complex)
    for _ in range(max_iter):
        res = H(w) - z
        step = res / dH(w)
        w = w - step
        if np.all(np.abs(step) <= tol * (1 + np.abs(w))):
            break
    else:
        raise BranchLost("Newton iteration on the analytic map did not settle")
    return w


def _edge_rule(a, b, panels):
    x, wq = np.polynomial.legendre.leggauss(64)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    u = (mid[:, None] + half[:, None] * x).ravel()
    wu = (half[:, None] * wq).ravel()
    return a + u * (b - a), wu * (b - a)


def contour_rule(Q: ContourRect, panels):
    c = Q.corners()
    nodes, weights = [], []
    for a, b in zip(c, c[1:] + c[:1]):
        n, w = _edge_rule(a, b, panels)
        nodes.append(n)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def _as_pair(H, dH):
    dH = dH if dH is not None else (lambda zeta: fd_derivative(H, zeta))
    return H, dH


def check_monotone(H, Q, dH=None, samples=9):
    _, dH = _as_pair(H, dH)
    (a, b), (lo, hi) = Q.s_range, Q.t_range
    s, t = np.meshgrid(np.linspace(a, b, samples), np.linspace(lo, hi, samples))
    return bool(np.all(dH((s + 1j * t).ravel()).real > 0))


def contour_inverse(H, Q: ContourRect, z, dH=None, validate=True, tol=1e-11, max_panels=256):
    """H^{-1}(z) as (1/2 pi i) * contour integral of zeta H'/(H - z) over dQ."""
    H, dH = _as_pair(H, dH)
    if validate and not check_monotone(H, Q, dH):
        raise NotInjective("d/dt Im H is not positive on the rectangle")
    z = complex(z)
    prev = None
    panels = 1
    while panels <= max_panels:
        zeta, wq = contour_rule(Q, panels)
        hv, dv = H(zeta), dH(zeta)
        kern = dv / (hv - z) * wq / (2j * np.pi)
        wind = np.sum(kern)
        val = np.sum(zeta * kern)
        if prev is not None and abs(val - prev) < tol * (1 + abs(val)):
            if abs(wind - 1) > 1e-6:
                raise WindingMismatch(f"winding number {wind.real:.6f} around {z}")
            return complex(val)
        prev = val
        panels *= 2
    if abs(wind - 1) > 1e-3:
        raise WindingMismatch(f"winding number {wind.real:.6f} around {z}")
    raise QuadratureStall("contour quadrature did not settle")
