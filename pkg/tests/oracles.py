"""Independent physical-space oracles used to pin expected values.

Everything here deliberately avoids the package's Fourier machinery: the
weak-form pairing is computed as a (v, v*, theta) integral of analytic
profile callables, with its own angular discretization (panel ratio
1/sqrt(2), different node counts) so that agreement with the spectral
path is a genuine two-route check.
"""

import math

import numpy as np


def beta_power_law(theta, C0=1.0, s=0.25):
    return C0 * np.cos(theta) / np.sin(theta) ** (1.0 + 2.0 * s)


def theta_panels(theta_min, n_nodes=14, ratio=1.0 / math.sqrt(2.0)):
    """Graded panels on [theta_min, pi/2], geometric with ratio 1/sqrt(2)."""
    edges = [math.pi / 2]
    while edges[-1] * ratio > theta_min:
        edges.append(edges[-1] * ratio)
    edges.append(theta_min)
    edges = np.array(edges[::-1])
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def pairing_triple_integral(f_fn, g_fn, h_fn, C0=1.0, s=0.25,
                            v_max=12.0, n_v=161, theta_min=2e-7):
    """(K(f, g), h) as a brute-force physical-space triple integral.

    The theta integrand is symmetrized over +/- theta, which makes it
    vanish quadratically at grazing angles; the remaining tail below
    theta_min is O(theta_min^(2-2s)) and negligible at the default.
    """
    v = np.linspace(-v_max, v_max, n_v)
    dv = v[1] - v[0]
    fv = f_fn(v)
    gv = g_fn(v)
    hv = h_fn(v)
    nodes, weights = theta_panels(theta_min)
    total = 0.0
    wq = weights * beta_power_law(nodes, C0, s)
    for th, w in zip(nodes, wq):
        c, sn = math.cos(th), math.sin(th)
        vm = c * v[:, None] - sn * v[None, :]
        vp = c * v[:, None] + sn * v[None, :]
        inner = h_fn(vm) + h_fn(vp) - 2.0 * hv[:, None]
        # rows: v (g slot), cols: v* (f slot)
        total += w * float(gv @ inner @ fv)
    return total * dv * dv


def pairing_indicator_weakform(half_width, xi0, C0=1.0, s=0.25,
                               n_gauss=120, theta_min=2e-7):
    """(K(f, f), cos(xi0 v)) for the uniform box datum, by Gauss quadrature.

    The box density is smooth inside its support, so per-axis Gauss
    nodes on [-a, a] integrate the cosine products essentially exactly.
    """
    a = half_width
    x, w = np.polynomial.legendre.leggauss(n_gauss)
    v = a * x
    wv = a * w / (2.0 * a)  # includes the 1/(2a) density value
    nodes, weights = theta_panels(theta_min)
    wq = weights * beta_power_law(nodes, C0, s)
    total = 0.0
    for th, ww in zip(nodes, wq):
        c, sn = math.cos(th), math.sin(th)
        vm = np.cos(xi0 * (c * v[:, None] - sn * v[None, :]))
        vp = np.cos(xi0 * (c * v[:, None] + sn * v[None, :]))
        inner = vm + vp - 2.0 * np.cos(xi0 * v)[:, None]
        total += ww * float(wv @ inner @ wv)
    return total


class GaussianMix:
    """Even mixture of centred/cosine-modulated Gaussians with closed forms."""

    def __init__(self, amps, centers, sigmas):
        self.amps = np.asarray(amps, dtype=float)
        self.centers = np.asarray(centers, dtype=float)
        self.sigmas = np.asarray(sigmas, dtype=float)

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        out = np.zeros_like(v)
        for a, c, s in zip(self.amps, self.centers, self.sigmas):
            norm = a / (2.0 * s * math.sqrt(2.0 * math.pi))
            out = out + norm * (np.exp(-0.5 * ((v - c) / s) ** 2)
                                + np.exp(-0.5 * ((v + c) / s) ** 2))
        return out

    def hat(self, xi):
        """Exact transform under fhat(xi) = int exp(-i v xi) f dv."""
        xi = np.asarray(xi, dtype=float)
        out = np.zeros_like(xi)
        for a, c, s in zip(self.amps, self.centers, self.sigmas):
            out = out + a * np.exp(-0.5 * (s * xi) ** 2) * np.cos(c * xi)
        return out


def random_mixture(rng, n_terms=3, max_center=1.5, sigma_range=(0.9, 1.4)):
    amps = rng.uniform(0.3, 1.0, n_terms)
    centers = rng.uniform(0.0, max_center, n_terms)
    sigmas = rng.uniform(*sigma_range, n_terms)
    return GaussianMix(amps, centers, sigmas)
