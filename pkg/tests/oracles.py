"""Independent reference computations used by the tests.

Nothing here imports the package's numerics: eigenvalues come from the
exactly solvable sech^2 well, integrals from scipy's adaptive quadrature or
mpmath, and Gamma from the standard library.
"""

import math

import numpy as np
from scipy import integrate

# Frozen from mpmath (30 digits) Rayleigh quotients of the bubble profile
# (r^a + r^b)^{-(N-2)/(2-s)} integrated on (0, inf).
FROZEN_RAYLEIGH = {
    (4, 0.5, 1.0): 2.9288406895242900246,
    (3, 0.1, 0.5): 2.998755905057098396,
    (6, 2.0, 1.5): 3.7739349859670329531,
}


def eps(N, g):
    return math.sqrt((N - 2) ** 2 / 4 - g)


def crit(N, s):
    return 2 * (N - s) / (N - 2)


def well_eigenvalues(N, g, s, k, count, el_scale=1.0):
    """Sector-k eigenvalues of -phi'' + eps_k^2 phi = eta W phi, W = sech^2 well.

    With kappa = eps (2-s)/(N-2), nu0 = (N-2)/(2-s), the well is
    nu0 (nu0+1) kappa^2 sech^2(kappa t) in the Euler-Lagrange normalization,
    and bound states sit at nu = eps_k/kappa + n, eta = nu(nu+1)/(nu0(nu0+1)).
    """
    e = eps(N, g)
    kap = e * (2 - s) / (N - 2)
    nu0 = (N - 2) / (2 - s)
    ek = math.sqrt(e * e + k * k + (N - 2) * k)
    nu = ek / kap + np.arange(count)
    return el_scale * nu * (nu + 1) / (nu0 * (nu0 + 1))


def sobolev(N):
    omega = 2 * math.pi ** ((N + 1) / 2) / math.gamma((N + 1) / 2)
    return N * (N - 2) * omega ** (2 / N) / 4


def quad_rayleigh(N, g, s):
    """Rayleigh quotient of the bubble by scipy.quad in t = log r."""
    e = eps(N, g)
    kap = e * (2 - s) / (N - 2)
    nu0 = (N - 2) / (2 - s)
    p = crit(N, s)
    area = 2 * math.pi ** (N / 2) / math.gamma(N / 2)

    # phi(t) = r^{(N-2)/2} U = sech-type profile; the energy is int phi'^2 + eps^2 phi^2
    def phi(t):
        return (2 * math.cosh(kap * t)) ** (-nu0)

    def dphi(t):
        return -nu0 * kap * math.tanh(kap * t) * phi(t)

    L = 60 / e
    num = integrate.quad(lambda t: dphi(t) ** 2 + e * e * phi(t) ** 2, -L, L,
                         epsabs=0, epsrel=1e-13, limit=400)[0]
    den = integrate.quad(lambda t: phi(t) ** p, -L, L, epsabs=0, epsrel=1e-13, limit=400)[0]
    return area * num / (area * den) ** (2 / p)


def gaussian_trial_dual_norm(N, g, k, f, centers, width):
    """sup <f, w>/||w||_gamma over span of Gaussians in t (Rayleigh oracle).

    In phi-variables (w = r^{-(N-2)/2} phi) ||w||_gamma^2 = area int phi'^2 + eps_k^2 phi^2
    and <f, w> = area int g phi with g = r^{(N+2)/2} f; f is a callable of t.
    """
    ek2 = (N - 2) ** 2 / 4 - g + k * k + (N - 2) * k
    area = 2 * math.pi ** (N / 2) / math.gamma(N / 2)
    lo, hi = min(centers) - 12 * width, max(centers) + 12 * width
    t = np.linspace(lo, hi, 20001)
    h = t[1] - t[0]
    Z = (t[None, :] - np.asarray(centers)[:, None]) / width
    B = np.exp(-0.5 * Z * Z)
    dB = -Z / width * B
    w = np.full(len(t), h)
    w[0] = w[-1] = h / 2
    G = area * ((dB * w) @ dB.T + ek2 * (B * w) @ B.T)
    b = area * (B * w) @ f(t)
    return math.sqrt(float(b @ np.linalg.solve(G, b)))
