"""End-to-end acceptance checks.

Each check prints one PASS/FAIL line.  Run ``pytest tests/test_acceptance.py -v``
(the lines are repeated in the terminal summary) or ``python tests/test_acceptance.py``.
"""
import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
import oracles as O  # noqa: E402
from freesuper import additive as A  # noqa: E402
from freesuper import cli  # noqa: E402
from freesuper import experiment as E  # noqa: E402
from freesuper import generators as G  # noqa: E402
from freesuper import inversion as inv  # noqa: E402
from freesuper import limits as L  # noqa: E402
from freesuper import measures as M  # noqa: E402
from freesuper import mult_circle as C  # noqa: E402
from freesuper import mult_halfline as H  # noqa: E402
from freesuper import sweep  # noqa: E402
from freesuper import transforms as T  # noqa: E402
from freesuper.measures import Domain  # noqa: E402

KESTEN = [M.symmetric_bernoulli(1 / np.sqrt(3))] * 3
HALFLINE_ID = L.ExpSigmaDataHalfline(1.0, [1.0], [0.25])
CIRCLE_ID = L.HerglotzSigmaDataCircle(1.0, [0.0], [0.5])
RESULTS = []


def record(k, ok, detail):
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def _decreasing(v):
    return all(a is not None for a in v) and all(a > b for a, b in zip(v, v[1:]))


def _fmt(v):
    return "[" + ", ".join("None" if a is None else f"{a:.3g}" for a in v) + "]"


# -- checks -----------------------------------------------------------------

def check_1():
    c = A.curve_on_window(KESTEN, (-1, 1))
    err = A.superconv_metrics(c, lambda x: L.oracle_density("kesten", x), (-1, 1))["sup_err"]
    p0 = A.density_curve(KESTEN, np.array([0.0])).p[0]
    f0 = O.kesten_f0()
    ok = err <= 1e-6 and abs(p0 - np.sqrt(6) / (3 * np.pi)) <= 1e-6 \
        and abs(f0 - np.sqrt(1.5)) < 1e-12 and abs(A.boundary_f(KESTEN, 0.0) - f0) < 1e-10
    return record(1, ok, f"sup_err={err:.2e} p(0)={p0:.9f}")


def _superconv(kind, params, limit, J):
    cfg = {"generator": {"kind": kind, "params": params, "profile": "linear"},
           "limit": limit, "window": {"J": J}, "schedule": [8, 32, 128]}
    return E.run_experiment(cfg)


def check_2():
    r = _superconv("bernoulli_variances", {}, {"kind": "oracle", "name": "semicircle"},
                   [-1.5, 1.5])
    sup, d1 = r.column("sup_err"), r.column("d1_err")
    ok = _decreasing(sup) and sup[-1] < 0.02 and _decreasing(d1)
    return record(2, ok, f"sup_err={_fmt(sup)} d1_err={_fmt(d1)}")


def check_3():
    r = _superconv("poisson_bernoulli", {"lam": 1.0},
                   {"kind": "oracle", "name": "marchenko_pastur", "lam": 1.0}, [0.5, 3.5])
    sup = r.column("sup_err")
    spot = float(L.oracle_density("marchenko_pastur", 1.0, lam=1.0))
    ok = _decreasing(sup) and abs(spot - np.sqrt(3) / (2 * np.pi)) <= 1e-9
    return record(3, ok, f"sup_err={_fmt(sup)} MP(1) at 1={spot:.12f}")


def check_4():
    rng = np.random.default_rng(2024)
    s = np.linspace(-3, 3, 25)
    checked = violations = 0
    for _ in range(200):
        d = L.random_nevanlinna(rng)
        bc = A.boundary_curve(d, s)
        for si, f in zip(s[bc.accepted], bc.f[bc.accepted]):
            if f <= 0:
                continue
            for t in (f, 1.5 * f, 2 * f):
                checked += 1
                violations += not d.dH(complex(si, t)).real > 0
    ok = violations == 0 and checked > 1000
    return record(4, ok, f"{checked} evaluations, {violations} violations")


def check_5():
    b = M.symmetric_bernoulli(1.0)
    z = inv.StolzAngle(1.0, 4.0).probe()[::3][:20]
    got = A.phi_sum([b, b], z)
    err = np.max(np.abs(got - (z * np.sqrt(1 + 4 / (z * z)) - z)))
    return record(5, z.size == 20 and err <= 1e-10, f"max deviation {err:.2e} at 20 points")


def check_6():
    z = G.default_probe()[::3][:20]
    worst = 0.0
    for prov in (L.semicircle_data(), A.line_provider(KESTEN)):
        Hm, dH = sweep.map_pair(prov)
        w_newton = G.F_from_provider(prov)(z)
        for zk, wk in zip(z, w_newton):
            Q = inv.ContourRect.around(complex(round(wk.real, 1), round(wk.imag, 1)), 0.1)
            worst = max(worst, abs(inv.contour_inverse(Hm, Q, zk, dH) - wk))
    Hm, dH = sweep.map_pair(L.semicircle_data())
    w = G.F_from_provider(L.semicircle_data())(np.array([2j]))[0]
    try:
        inv.contour_inverse(Hm, inv.ContourRect.around(w + 0.5, 0.1), 2j, dH)
        rejected = False
    except inv.WindingMismatch:
        rejected = True
    ok = worst <= 1e-9 and rejected
    return record(6, ok, f"max deviation {worst:.2e} at 40 points, offset rectangle "
                         f"{'rejected' if rejected else 'accepted'}")


def _kesten_stieltjes(s):
    prov = A.line_provider(KESTEN)
    Hm, dH = sweep.map_pair(prov)
    bc = A.boundary_curve(prov, np.array([s]))
    c = A.density_from_boundary(bc)
    Q = inv.ContourRect.around(complex(s, bc.f[0]), 0.05)

    def F(zz):
        return inv.contour_inverse(Hm, Q, zz, dH)
    return abs(T.stieltjes_density(F, c.x[0]).density - c.p[0])


def check_7():
    dev_line = max(_kesten_stieltjes(s) for s in np.linspace(-0.35, 0.35, 11))
    dev_half = 0.0
    for r in np.exp(np.linspace(-0.6, 0.6, 11)):
        bc = H.polar_boundary(HALFLINE_ID, [r])
        x, p = H.density_halfline(bc.r, bc.h, bc.Phi)
        xs, est = H.stieltjes_check(HALFLINE_ID, r, bc.h[0])
        dev_half = max(dev_half, abs(est.density - p[0]), abs(xs - x[0]))
    ok = max(dev_line, dev_half) <= 1e-6
    return record(7, ok, f"line {dev_line:.2e}, half-line {dev_half:.2e}")


def check_8():
    row = [M.two_point(1.0, 2.0, 0.05, Domain.HALFLINE)] * 10
    r = np.exp(np.linspace(-0.9, -0.3, 40))
    b1 = H.polar_boundary(row, r)
    b2 = H.polar_boundary(H.scale_row(row, 2.0), r)
    x1, p1 = H.density_halfline(b1.r, b1.h, b1.Phi)
    x2, p2 = H.density_halfline(b2.r, b2.h, b2.Phi)
    dev = max(np.max(np.abs(x2 - 2 * x1)), np.max(np.abs(p2 - p1 / 2)))
    mass, mean = H.curve_moments(HALFLINE_ID)
    ok = b1.accepted.all() and dev <= 1e-8 and abs(mean - np.exp(0.25)) <= 1e-5
    return record(8, ok, f"scaling deviation {dev:.2e}, mean={mean:.9f}")


def check_9():
    R1 = C.boundary_R(CIRCLE_ID, 0.0)
    r_ok = abs(R1 - O.circle_R1()) <= 1e-6
    mass, m1 = C.curve_moments(CIRCLE_ID)
    mom_ok = abs(mass - 1) <= 1e-6 and abs(m1 - np.exp(-0.5)) <= 1e-5
    alpha = 0.7
    c0 = C.density_curve_circle(CIRCLE_ID, 361)
    c1 = C.density_curve_circle(CIRCLE_ID.rotated(alpha), 361, center=alpha)
    rot = max(np.max(np.abs(c1.x - alpha - c0.x)), np.max(np.abs(c1.p - c0.p)))
    cfg = {"generator": {"kind": "circle_two_point", "params": {"lam": 1.0, "alpha": 1.0},
                         "profile": "linear"},
           "limit": {"kind": "cauchy", "reference_n": 512}, "window": {"J": [0.5, 2.5]},
           "schedule": [8, 32, 128], "grids": {"param": 361}}
    sup = E.run_experiment(cfg).column("sup_err")
    ok = r_ok and mom_ok and rot <= 1e-9 and _decreasing(sup)
    return record(9, ok, f"R(1)={R1:.9f} mass={mass:.9f} m1={m1.real:.9f}{m1.imag:+.1e}i "
                         f"rotation {rot:.1e} cauchy sup={_fmt(sup)}")


def check_10(tmp=None):
    import tempfile
    cfg = {"generator": {"kind": "poisson_bernoulli", "params": {"lam": 1.0},
                         "profile": "random"},
           "limit": {"kind": "oracle", "name": "marchenko_pastur"},
           "window": {"J": [0.5, 3.5]}, "schedule": [8, 16], "grids": {"param": 401}}
    with tempfile.TemporaryDirectory(dir=tmp) as d:
        d = Path(d)
        (d / "c.json").write_text(json.dumps(cfg))
        codes = [cli.main(["superconv", "--config", str(d / "c.json"), "--out", str(d / k),
                           "--seed", "7", "--no-figures", "--format", "csv", "--format", "json"])
                 for k in ("a", "b")]
        same = all((d / "a" / f).read_bytes() == (d / "b" / f).read_bytes()
                   for f in ("report.csv", "report.json"))
    return record(10, codes == [0, 0] and same, f"exit codes {codes}, identical={same}")


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9,
          check_10]


@pytest.mark.parametrize("k", range(1, 11))
def test_criterion(k):
    assert CHECKS[k - 1]()


if __name__ == "__main__":
    results = [chk() for chk in CHECKS]
    sys.exit(0 if all(results) else 1)
