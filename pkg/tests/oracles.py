"""Brute-force quadrature references used by several test modules."""
import numpy as np
from scipy import integrate


def kinetic_quad(p, q, hbar_omega0):
    """hbar^2/2m* int grad(phi_p) . grad(phi_q) on a box; hbar^2/m* = hbar_omega0 a_B^2."""
    a = p.radius
    cp, cq = np.asarray(p.center), np.asarray(q.center)
    mid = 0.5 * (cp + cq)

    def f(y, x):
        r = np.array([x, y])
        return np.dot(r - cp, r - cq) / a**4 * p(r) * q(r)

    L = 10 * a
    val, _ = integrate.dblquad(f, mid[0] - L, mid[0] + L, -L, L, epsabs=1e-13, epsrel=1e-11)
    return 0.5 * hbar_omega0 * a**2 * val


def overlap_quad(p, q):
    mid = 0.5 * (np.asarray(p.center) + np.asarray(q.center))
    L = 10 * p.radius
    val, _ = integrate.dblquad(lambda y, x: p((x, y)) * q((x, y)), mid[0] - L, mid[0] + L, -L, L,
                               epsabs=1e-14, epsrel=1e-11)
    return val


def gaussian_cloud_coulomb_polar(distance, width, kappa):
    """Coulomb energy of two clouds exp(-|r-P|^2/w^2)/(pi w^2) at separation ``distance``.

    The relative coordinate u = r1 - r2 is Gaussian with variance w^2 per axis about
    the separation vector; integrate kappa/|u| over it in polar coordinates (the
    1/|u| cancels the Jacobian).
    """
    D, w2 = float(distance), 2 * width**2

    def f(theta, r):
        return np.exp(-(r * r + D * D - 2 * r * D * np.cos(theta)) / w2) / (np.pi * w2)

    rmax = D + 12 * width
    val, _ = integrate.dblquad(f, 0.0, rmax, 0.0, 2 * np.pi, epsabs=1e-14, epsrel=1e-12)
    return kappa * val


def density_fourier(D, xs, width, k, theta):
    """Fourier transform of rho(r) = sum_lm D_lm phi_l(r) phi_m(r) for on-axis Gaussians."""
    kx = k * np.cos(theta)
    O = np.exp(-((xs[:, None] - xs[None, :]) ** 2) / (4 * width**2))
    M = 0.5 * (xs[:, None] + xs[None, :])
    return np.exp(-(k * width) ** 2 / 4) * np.sum(D * O * np.exp(-1j * kx * M))


def coulomb_kspace(D1, D2, xs, width, kappa):
    """kappa int rho1(r1) rho2(r2) / |r1 - r2| evaluated in 2D Fourier space.

    Uses FT[1/r] = 2 pi / k, so E = kappa/(2 pi) int dk dtheta Re[rho1(k) conj(rho2(k))].
    """
    xs = np.asarray(xs, dtype=float)

    def f(theta, k):
        return np.real(density_fourier(D1, xs, width, k, theta)
                       * np.conj(density_fourier(D2, xs, width, k, theta)))

    kmax = 14.0 / width
    val, _ = integrate.dblquad(f, 0.0, kmax, 0.0, 2 * np.pi, epsabs=1e-11, epsrel=1e-10)
    return kappa / (2 * np.pi) * val
