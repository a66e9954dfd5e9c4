import numpy as np
import pytest

import oracles as O
from freesuper import additive as A
from freesuper import limits as L


def test_phi_examples():
    assert abs(L.phi_ID(L.semicircle_data(), 3j) + 1j / 3) < 1e-15
    assert abs(L.phi_ID(L.point_mass_data(1.3), 2 + 1j) - 1.3) < 1e-15
    lam = 1.7
    for z in (0.5 + 1j, -2 + 0.1j, 3j):
        assert abs(L.phi_ID(L.marchenko_pastur_data(lam), z) - lam * z / (z - 1)) < 1e-13
    assert abs(L.H_ID(L.semicircle_data(), 3j) - (3j + 1 / 3j)) < 1e-15


def test_phi_rejects_lower_half_plane():
    with pytest.raises(L.NotInRegion):
        L.phi_ID(L.semicircle_data(), -1j)


def test_invalid_data():
    with pytest.raises(L.LimitError):
        L.NevanlinnaData(0.0, [1.0], [-0.1])
    with pytest.raises(L.LimitError):
        L.ExpSigmaDataHalfline(-1.0, [1.0], [0.1])
    with pytest.raises(L.LimitError):
        L.HerglotzSigmaDataCircle(2.0, [0.0], [0.1])


def test_dH_matches_finite_difference():
    rng = np.random.default_rng(5)
    for _ in range(20):
        d = L.random_nevanlinna(rng)
        z, h = complex(rng.uniform(-2, 2), rng.uniform(0.2, 2)), 1e-6
        fd = (d.H(z + h) - d.H(z - h)) / (2 * h)
        assert abs(d.dH(z) - fd) < 1e-7


def test_lemma_check_examples():
    chk = L.lemma_derivative_check(L.semicircle_data(), 0.0, 1.0)
    assert abs(chk.re_dH - 2) < 1e-12 and chk.on_boundary
    chk = L.lemma_derivative_check(L.semicircle_data(), 0.3, 1e6)
    assert abs(chk.re_dH - 1) < 1e-9
    with pytest.raises(L.NotInRegion):
        L.lemma_derivative_check(L.semicircle_data(), 0.0, 0.5)


def test_lemma_property_sweep():
    rng = np.random.default_rng(21)
    checked = 0
    for _ in range(30):
        d = L.random_nevanlinna(rng)
        s = rng.uniform(-1, 1, 5)
        bc = A.boundary_curve(d, s)
        for si, f in zip(s[bc.accepted], bc.f[bc.accepted]):
            for t in (f, 1.5 * f, 2 * f):
                assert d.dH(complex(si, t)).real > 0
                checked += 1
    assert checked > 50


def test_oracle_values():
    assert abs(L.oracle_density("semicircle", 0.0) - 1 / np.pi) < 1e-15
    assert abs(L.oracle_density("marchenko_pastur", 1.0) - O.MP1_AT_1) < 1e-15
    assert abs(L.oracle_density("kesten", 0.0, d=3) - O.KESTEN_P0) < 1e-15
    assert abs(L.oracle_density("arcsine", 0.0) - 1 / (2 * np.pi)) < 1e-15
    with pytest.raises(L.OutOfSupport):
        L.oracle_density("semicircle", 2.5)


@pytest.mark.parametrize("kind,lo,hi,kw", [("semicircle", -2, 2, {}), ("marchenko_pastur", 0, 4, {}),
                                           ("kesten", -np.sqrt(8 / 3), np.sqrt(8 / 3), {}),
                                           ("marchenko_pastur", 0.25 * (1 - np.sqrt(0.5)) ** 2 * 4,
                                            (1 + np.sqrt(0.5)) ** 2, {"lam": 0.5})])
def test_oracles_integrate(kind, lo, hi, kw):
    from scipy.integrate import quad
    mass = quad(lambda x: L.oracle_density(kind, x, **kw), lo, hi, limit=200)[0]
    expected = 0.5 if kw.get("lam") == 0.5 else 1.0
    assert abs(mass - expected) < 1e-6


def test_sigma_examples():
    d = L.ExpSigmaDataHalfline(1.0, [1.0], [0.7])
    assert abs(L.sigma_ID(d, -1.0) - 1) < 1e-15
    d = L.ExpSigmaDataHalfline(1.0, [1.0], [0.25])
    assert abs(1 / L.sigma_ID(d, 0.0) - O.HALFLINE_MEAN) < 1e-14
    c = L.HerglotzSigmaDataCircle(1.0, [0.0], [0.5])
    assert abs(L.sigma_ID(c, 0.0) - np.exp(0.5)) < 1e-14
    assert abs(c.first_moment - O.CIRCLE_M1) < 1e-14
    with pytest.raises(L.PoleAtAtom):
        L.sigma_ID(d, 1.0)
    with pytest.raises(L.NotInRegion):
        L.sigma_ID(c, 1.5)


def test_infinite_atom():
    d = L.ExpSigmaDataHalfline(2.0, [np.inf], [0.3])
    z = -0.4 + 0.2j
    assert abs(d.sigma(z) - 2 * np.exp(-0.3 * z)) < 1e-15


def test_semicircle_density_curve_matches_oracle():
    c = A.curve_on_window(L.semicircle_data(), (-1.8, 1.8))
    keep = np.abs(c.x) <= 1.8
    assert np.max(np.abs(c.p[keep] - L.oracle_density("semicircle", c.x[keep]))) < 1e-8


def test_mp_density_curve_matches_oracle():
    c = A.curve_on_window(L.marchenko_pastur_data(1.0), (0.3, 3.7))
    keep = (c.x >= 0.3) & (c.x <= 3.7)
    assert np.max(np.abs(c.p[keep] - L.oracle_density("marchenko_pastur", c.x[keep]))) < 1e-8


def test_two_point_limits_have_expected_means():
    d = L.halfline_poisson_data(1.0, 2.0)
    assert abs(d.mean - np.e) < 1e-12
    c = L.circle_poisson_data(1.0, 1.0)
    assert abs(c.first_moment - np.exp(np.exp(1j) - 1)) < 1e-12
