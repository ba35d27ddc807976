"""Slow, independent reference computations used to check the fast paths.

Nothing here is used by the reconstruction code itself.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from .gaussian import BivariateMarginal, GaussianMarginal, symplectic_form


def dense_bin_masses(marg: GaussianMarginal, sigma: float, per_sd: int = 64, sds: float = 9.0):
    """Bin masses by composite Simpson integration of the pdf on a fine grid.

    The grid has at least ``per_sd`` points per standard deviation.  Returns
    (centers, masses).
    """
    sd = np.sqrt(marg.variance)
    sub = 2 * int(np.ceil(max(32, per_sd * sigma / sd) / 2))
    M = int(np.ceil((sds * sd + abs(marg.mean)) / sigma)) + 1
    centers = np.arange(-M, M + 1) * sigma
    t = np.linspace(-0.5, 0.5, sub + 1) * sigma
    w = np.ones(sub + 1)
    w[1:-1:2], w[2:-1:2] = 4.0, 2.0
    w *= (sigma / sub) / 3.0
    x = centers[:, None] + t[None, :]
    pdf = np.exp(-0.5 * (x - marg.mean) ** 2 / marg.variance) / np.sqrt(2 * np.pi * marg.variance)
    return centers, pdf @ w


def dense_coarse_variance(variance: float, sigma: float, mean: float = 0.0) -> float:
    centers, masses = dense_bin_masses(GaussianMarginal(variance, mean), sigma)
    m1 = float(np.dot(masses, centers))
    # each bin is flat, so its second moment about zero is c^2 + sigma^2/12
    m2 = float(np.dot(masses, centers**2 + sigma**2 / 12))
    return m2 - m1 * m1


def quadrature_bin_log_likelihood(marg: GaussianMarginal, sigma: float, centers, masses) -> np.ndarray:
    """int over each bin of (mass / sigma) * ln P_E(x), by adaptive quadrature."""
    v = marg.variance

    def log_pe(x):
        return -0.5 * np.log(2 * np.pi * v) - (x - marg.mean) ** 2 / (2 * v)

    out = np.empty(len(centers))
    for k, (c, m) in enumerate(zip(centers, masses)):
        val, _ = quad(log_pe, c - sigma / 2, c + sigma / 2, epsabs=1e-14, epsrel=1e-13)
        out[k] = m / sigma * val
    return out


def monte_carlo_cross_moment(marg: BivariateMarginal, sigma: float, samples: int, seed: int,
                             chunk: int = 1_000_000) -> tuple[float, float]:
    """Sample estimate of E[Q(X) Q(Y)] for bin-center rounding Q; returns (mean, standard error)."""
    rng = np.random.default_rng(seed)
    chol = np.linalg.cholesky(marg.cov)
    total = total_sq = 0.0
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        xy = rng.standard_normal((n, 2)) @ chol.T
        q = np.round(xy / sigma) * sigma
        prod = q[:, 0] * q[:, 1]
        total += prod.sum()
        total_sq += (prod * prod).sum()
        done += n
    mean = total / samples
    var = total_sq / samples - mean * mean
    return mean, float(np.sqrt(var / samples))


def williamson_eigenvalues(g) -> np.ndarray:
    """Symplectic eigenvalues via sqrt of the spectrum of -(J g)^2, ascending."""
    g = np.asarray(g, dtype=float)
    J = symplectic_form(g.shape[0] // 2)
    ev = np.sort(np.linalg.eigvals(-(J @ g @ J @ g)).real)
    return np.sqrt(np.maximum(ev[::2], 0.0))


def dense_moments(marg: GaussianMarginal, sigma: float) -> tuple[float, float]:
    """(mean, raw second moment) of the coarse-grained marginal from dense-grid masses."""
    centers, masses = dense_bin_masses(marg, sigma)
    return float(np.dot(masses, centers)), float(np.dot(masses, centers**2 + sigma**2 / 12))


def cell_cross_moment(marg: BivariateMarginal, sigma: float) -> float:
    """E[Q(X) Q(Y)] from explicitly integrated 2-D cell masses."""
    from .binning import bin_bivariate, coarse_cross_moment

    return coarse_cross_moment(bin_bivariate(marg, sigma))
