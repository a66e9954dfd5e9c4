"""Independent reference computations, written without the package's
pipelines, and the values they produce (frozen below)."""
import numpy as np
from scipy.optimize import brentq

# frozen outputs of the functions in this module
KESTEN_F0 = 1.2247448713915890        # sqrt(1.5)
KESTEN_P0 = 0.25989893374455870       # sqrt(6) / (3 pi)
PHI_KESTEN_MEMBER_3I = -0.11556268951365390j
PHI_BERNOULLI_3I = -0.38196601125010515j
SEMICIRCLE_H_INV_2I = 2.4142135623730950j   # (z + sqrt(z^2 - 4)) / 2 at 2i
MP1_AT_1 = 0.27566444771089600        # sqrt(3) / (2 pi)
CIRCLE_R1 = 0.35217506066011667
CIRCLE_P_AT_R1 = 2.087253791183074
HALFLINE_H1 = 0.6927082534074989
HALFLINE_MEAN = 1.2840254166877414    # e^{1/4}
CIRCLE_M1 = 0.60653065971263342       # e^{-1/2}


def two_point_H(z, a):
    """Branch of F^{-1} for (delta_{-a} + delta_a)/2, F(w) = w - a^2/w, with H(z) ~ z."""
    z = np.asarray(z, dtype=complex)
    return 0.5 * (z + z * np.sqrt(1 + 4 * a * a / (z * z)))


def kesten_f0():
    a = 1 / np.sqrt(3)
    return brentq(lambda t: (3 * two_point_H(1j * t, a) - 2j * t).imag, 2 * a + 1e-9, 5.0,
                  xtol=1e-15)


def circle_R1():
    return brentq(lambda r: np.log(r) + 0.5 * (1 + r) / (1 - r), 1e-3, 0.99, xtol=1e-16)


def halfline_phi(z):
    return z * np.exp(0.25 * (1 + z) / (z - 1))


def halfline_h1(step=1e-3):
    """Brute-force scan of Im Phi(e^{i theta}) for theta in (0, pi), refined by bisection."""
    th = np.arange(step, np.pi, step)
    v = halfline_phi(np.exp(1j * th))
    cross = np.flatnonzero((np.sign(v.imag[:-1]) != np.sign(v.imag[1:])) & (v.real[:-1] > 0))
    i = cross[-1]
    return brentq(lambda t: halfline_phi(np.exp(1j * t)).imag, th[i], th[i + 1], xtol=1e-15)
