import numpy as np
import pytest

import oracles as O
from freesuper import additive as A
from freesuper import inversion as inv
from freesuper import limits as L
from freesuper import measures as M
from freesuper.sweep import NoCrossing

KESTEN = [M.symmetric_bernoulli(1 / np.sqrt(3))] * 3


def test_phi_sum_examples():
    assert abs(A.phi_sum([M.point_mass(a) for a in (1.0, -0.5, 2.0)], 1 + 4j) - 2.5) < 1e-12
    b = M.symmetric_bernoulli(1.0)
    assert abs(A.phi_sum([b, b], 3j) - 2 * O.PHI_BERNOULLI_3I) < 1e-12
    assert abs(A.phi_sum(KESTEN, 3j) - 3 * O.PHI_KESTEN_MEMBER_3I) < 1e-12


def test_linearization_against_arcsine():
    b = M.symmetric_bernoulli(1.0)
    g = inv.StolzAngle(1.0, 4.0)
    z = g.probe()[::3][:20]
    got = A.phi_sum([b, b], z)
    # branch of sqrt(z^2 + 4) that behaves like z at infinity
    assert np.max(np.abs(got - (z * np.sqrt(1 + 4 / (z * z)) - z))) < 1e-10
    assert np.all(got.imag <= 1e-10)


def test_boundary_f_examples():
    assert abs(A.boundary_f(KESTEN, 0.0) - O.KESTEN_F0) < 1e-12
    assert abs(A.boundary_f(L.semicircle_data(), 0.6) - 0.8) < 1e-12
    with pytest.raises(NoCrossing):
        A.boundary_f([M.point_mass(1.0)], 0.0)


def test_boundary_bracket_metadata():
    bc = A.boundary_curve(KESTEN, np.linspace(-0.4, 0.4, 11))
    assert bc.accepted.all()
    prov = A.line_provider(KESTEN)
    assert np.all((bc.t_lo <= bc.f) & (bc.f <= bc.t_hi))
    assert np.all(bc.t_hi - bc.t_lo <= 1e-12 * np.maximum(1, bc.f))
    # the bracket is resolved to rounding level; the signs are checked just outside it
    hi, _, _ = prov.evaluate(bc.s + 1j * (bc.t_hi + 1e-7))
    lo, _, _ = prov.evaluate(bc.s + 1j * (bc.t_lo - 1e-7))
    assert np.all(hi.imag > 0) and np.all(lo.imag < 0)
    # crossing monotonicity: d/dt Im H > 0 at every accepted point, checked by differences
    h = 1e-6
    up, _, _ = prov.evaluate(bc.s + 1j * (bc.f + h))
    dn, _, _ = prov.evaluate(bc.s + 1j * (bc.f - h))
    assert np.all((up.imag - dn.imag) / (2 * h) > 0)


def test_density_curve_examples():
    c = A.density_curve(KESTEN, np.array([0.0]))
    assert abs(c.x[0]) < 1e-12 and abs(c.p[0] - O.KESTEN_P0) < 1e-12
    c = A.density_curve(L.semicircle_data(), np.array([0.6]))
    assert abs(c.x[0] - 1.2) < 1e-12 and abs(c.p[0] - 0.8 / np.pi) < 1e-12


def test_density_formula_and_symmetry():
    s = np.linspace(-0.4, 0.4, 61)
    c = A.density_curve(KESTEN, s)
    assert np.all(np.diff(c.x) > 0)
    assert np.max(np.abs(c.p - c.boundary / (np.pi * (s ** 2 + c.boundary ** 2)))) <= 1e-14
    assert np.max(np.abs(c.p - c.p[::-1])) < 1e-10
    assert np.max(np.abs(c.x + c.x[::-1])) < 1e-10


def test_translation_equivariance():
    a = 0.75
    s = np.linspace(-0.4, 0.4, 21)
    c0 = A.density_curve(KESTEN, s)
    c1 = A.density_curve(KESTEN + [M.point_mass(a)], s)
    assert np.max(np.abs(c1.x - c0.x - a)) < 1e-10
    assert np.max(np.abs(c1.p - c0.p)) < 1e-10


def test_non_monotone_abscissae_raised():
    bc = A.boundary_curve(L.semicircle_data(), np.array([0.5, 0.2]))
    with pytest.raises(A.NonMonotoneAbscissae):
        A.density_from_boundary(bc)


def test_superconv_metrics():
    c = A.curve_on_window(KESTEN, (-1, 1))
    assert A.superconv_metrics(c, c, (-1, 1)) == {"sup_err": 0.0, "d1_err": 0.0, "d2_err": 0.0}
    m = A.superconv_metrics(c, lambda x: L.oracle_density("semicircle", x), (-1, 1))
    assert m["sup_err"] > 0.01
    with pytest.raises(A.WindowNotCovered):
        A.superconv_metrics(c, c, (-3, 1))


def test_kesten_curve_vs_oracle():
    c = A.curve_on_window(KESTEN, (-1, 1))
    assert c.excluded == 0
    keep = np.abs(c.x) <= 1
    assert np.max(np.abs(c.p[keep] - L.oracle_density("kesten", c.x[keep]))) < 1e-10


def test_window_not_covered():
    with pytest.raises(A.WindowNotCovered):
        A.s_window([M.point_mass(0.0)], (-1, 1))


def test_zero_extension_outside_support():
    # the density of three members vanishes beyond sqrt(8/3)
    c = A.curve_on_window(KESTEN, (-1.5, 2.0))
    assert c.extra["zero_outside"]
    assert c.x[-1] < np.sqrt(8 / 3) + 1e-9
    sample = A._curve_sampler(c)
    assert np.all(sample(np.array([1.7, 1.9, 2.0])) == 0)
    m = A.superconv_metrics(c, lambda x: L.oracle_density("kesten", x), (-1.5, 1.5))
    assert m["sup_err"] < 1e-6


def test_mean_and_mass_of_id_densities():
    rng = np.random.default_rng(3)
    for data in (L.semicircle_data(), L.marchenko_pastur_data(2.0), L.point_mass_data(0.0)):
        if not data.w.size:
            continue
        mass, mean = A.curve_moments(data)
        assert abs(mass - 1) < 1e-6 and abs(mean - data.mean) < 1e-6
    data = L.NevanlinnaData(0.3, [0.5], [0.4])
    mass, mean = A.curve_moments(data)
    assert abs(mass - 1) < 1e-6 and abs(mean - data.mean) < 1e-6
