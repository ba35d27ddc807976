"""Coarse-graining of homodyne marginals into piecewise-flat binned distributions.

Bin m covers [(m - 1/2) sigma, (m + 1/2) sigma] (shifted by an optional
``offset``), and the coarse-grained density is flat on each bin.  Masses of
one-dimensional Gaussians come from error-function differences; bivariate
cells are integrated with tensor Gauss-Legendre quadrature.  Second moments of
the bivariate case are also available in closed form through the Fourier
series of the rounding error, which stays cheap for arbitrarily small bins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf, erfc

from .errors import InvalidSigmaError
from .gaussian import BivariateMarginal, GaussianMarginal

TAIL_SDS = 8.0
GL_RTOL = 1e-10
MAX_CELL_POINTS = 40_000_000


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not sigma > 0:
        raise InvalidSigmaError(f"coarse-graining size must be > 0, got {sigma}")
    return sigma


def _truncation(sd: float, shift: float, sigma: float) -> int:
    return int(np.ceil((TAIL_SDS * sd + abs(shift)) / sigma)) + 1


def gaussian_interval_mass(lo, hi):
    """Standard-normal mass of [lo, hi], accurate in both tails."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    s = np.sqrt(2.0)
    upper = 0.5 * (erfc(lo / s) - erfc(hi / s))
    lower = 0.5 * (erfc(-hi / s) - erfc(-lo / s))
    middle = 0.5 * (erf(hi / s) - erf(lo / s))
    return np.where(lo >= 0, upper, np.where(hi <= 0, lower, middle))


@dataclass(frozen=True, eq=False)
class BinnedDistribution:
    """Piecewise-flat distribution; ``masses[j]`` is the mass P(x_m) of bin m = j - M."""

    sigma: float
    masses: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        masses = np.array(self.masses, dtype=float)
        if masses.ndim != 1 or masses.size % 2 != 1:
            raise ValueError("masses must be a 1-D array of odd length")
        if np.any(masses < 0):
            raise ValueError("bin masses must be non-negative")
        masses.setflags(write=False)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "sigma", _check_sigma(self.sigma))

    @classmethod
    def from_mapping(cls, sigma: float, weights: dict[int, float], offset: float = 0.0):
        M = max(abs(m) for m in weights)
        masses = np.zeros(2 * M + 1)
        for m, w in weights.items():
            masses[m + M] = w
        return cls(sigma, masses, offset)

    @property
    def M(self) -> int:
        return (self.masses.size - 1) // 2

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.indices * self.sigma + self.offset

    @property
    def density(self) -> np.ndarray:
        """Heights P_sigma[m] of the flat steps."""
        return self.masses / self.sigma

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def mass(self, m: int) -> float:
        return float(self.masses[m + self.M]) if abs(m) <= self.M else 0.0


@dataclass(frozen=True, eq=False)
class BinnedJoint:
    """Piecewise-flat 2-D distribution; ``masses[i, j]`` is the mass of cell (i - M1, j - M2)."""

    sigma: float
    masses: np.ndarray

    def __post_init__(self):
        masses = np.array(self.masses, dtype=float)
        if masses.ndim != 2 or masses.shape[0] % 2 != 1 or masses.shape[1] % 2 != 1:
            raise ValueError("masses must be a 2-D array with odd side lengths")
        masses.setflags(write=False)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "sigma", _check_sigma(self.sigma))

    @property
    def M(self) -> tuple[int, int]:
        return tuple((n - 1) // 2 for n in self.masses.shape)

    def centers(self, axis: int) -> np.ndarray:
        M = self.M[axis]
        return np.arange(-M, M + 1) * self.sigma

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def marginal(self, axis: int) -> BinnedDistribution:
        return BinnedDistribution(self.sigma, self.masses.sum(axis=1 - axis))


def bin_gaussian(marg: GaussianMarginal, sigma: float, offset: float = 0.0) -> BinnedDistribution:
    """Bin masses sigma * P_sigma[m] of a Gaussian marginal.

    ``offset`` shifts every bin center; the figure pipelines always use 0.
    """
    sigma = _check_sigma(sigma)
    sd = np.sqrt(marg.variance)
    M = _truncation(sd, marg.mean - offset, sigma)
    centers = np.arange(-M, M + 1) * sigma + offset
    lo = (centers - 0.5 * sigma - marg.mean) / sd
    hi = (centers + 0.5 * sigma - marg.mean) / sd
    return BinnedDistribution(sigma, gaussian_interval_mass(lo, hi), offset)


def _cell_masses(marg: BivariateMarginal, edges1, edges2, sigma: float, order: int):
    t, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * sigma
    x = (edges1[:, None] + half * (t + 1)).ravel()
    y = (edges2[:, None] + half * (t + 1)).ravel()
    f = marg.pdf(x[:, None], y[None, :]).reshape(edges1.size, order, edges2.size, order)
    return half * half * np.einsum("a,iajb,b->ij", w, f, w)


def bin_bivariate(marg: BivariateMarginal, sigma: float) -> BinnedJoint:
    """Cell masses of a zero-mean bivariate Gaussian on the sigma x sigma grid.

    Gauss-Legendre order starts at 8 per axis and doubles until the largest
    change of any cell is below 1e-10 of the largest cell.
    """
    sigma = _check_sigma(sigma)
    M1 = _truncation(np.sqrt(marg.cov[0, 0]), 0.0, sigma)
    M2 = _truncation(np.sqrt(marg.cov[1, 1]), 0.0, sigma)
    edges1 = (np.arange(-M1, M1 + 1) - 0.5) * sigma
    edges2 = (np.arange(-M2, M2 + 1) - 0.5) * sigma
    order = 8
    if edges1.size * edges2.size * (2 * order) ** 2 > MAX_CELL_POINTS:
        raise ValueError(
            f"{edges1.size}x{edges2.size} cells at sigma={sigma} is too many for cell quadrature"
        )
    masses = _cell_masses(marg, edges1, edges2, sigma, order)
    while True:
        order *= 2
        refined = _cell_masses(marg, edges1, edges2, sigma, order)
        converged = np.max(np.abs(refined - masses)) <= GL_RTOL * np.max(refined)
        masses = refined
        if converged or edges1.size * edges2.size * (2 * order) ** 2 > MAX_CELL_POINTS:
            break
    return BinnedJoint(sigma, np.clip(masses, 0.0, None))


def coarse_mean(b: BinnedDistribution) -> float:
    return float(np.dot(b.centers, b.masses))


def coarse_second_moment(b: BinnedDistribution) -> float:
    """Raw second moment of the piecewise-flat density."""
    x = b.centers
    return float(np.dot(b.masses, x * x + b.sigma**2 / 12))


def coarse_variance(b: BinnedDistribution) -> float:
    """Variance of the piecewise-flat density: sigma^2/12 plus the discrete variance."""
    x = b.centers
    mean = np.dot(b.masses, x)
    discrete = np.dot(b.masses, x * x) - mean * mean
    return float(b.sigma**2 / 12 + discrete)


def coarse_cross_moment(b: BinnedJoint) -> float:
    """Raw cross moment; the flat within-cell parts are independent and drop out."""
    return float(b.centers(0) @ b.masses @ b.centers(1))


def coarse_pdf_eval(b: BinnedDistribution, x):
    """Coarse-grained density at x; a point on a bin edge belongs to the bin nearer 0."""
    t = (np.asarray(x, dtype=float) - b.offset) / b.sigma
    m = (np.sign(t) * np.ceil(np.abs(t) - 0.5)).astype(int)
    inside = np.abs(m) <= b.M
    out = np.where(inside, b.density[np.clip(m + b.M, 0, b.masses.size - 1)], 0.0)
    return out if out.ndim else float(out)


def _fourier_cutoff(sigma: float, min_var: float) -> int:
    # terms beyond K carry a factor below exp(-41)
    return int(np.ceil(sigma / (2 * np.pi) * np.sqrt(83.0 / min_var))) + 1


def gaussian_cross_moment(marg: BivariateMarginal, sigma: float) -> float:
    """Coarse-grained cross moment of a zero-mean bivariate Gaussian, bins centered at 0.

    Uses the Fourier series of the rounding error e(x) = x - sigma*round(x/sigma):
    E[Q(X)Q(Y)] = C - E[X e(Y)] - E[e(X) Y] + E[e(X) e(Y)].
    """
    sigma = _check_sigma(sigma)
    vx, vy, c = marg.cov[0, 0], marg.cov[1, 1], marg.cov[0, 1]
    K = _fourier_cutoff(sigma, float(np.linalg.eigvalsh(marg.cov)[0]))
    if K > 4000:
        raise ValueError(f"Fourier series needs {K} terms; joint is too close to singular")
    k = np.arange(1, K + 1)
    om = 2 * np.pi * k / sigma
    alt = np.where(k % 2 == 1, 1.0, -1.0)
    x_e = 2 * c * np.sum(alt * np.exp(-0.5 * om * om * vy))
    e_y = 2 * c * np.sum(alt * np.exp(-0.5 * om * om * vx))
    base = om[:, None] ** 2 * vx + om[None, :] ** 2 * vy
    mix = 2 * om[:, None] * om[None, :] * c
    coef = np.outer(alt / k, alt / k)
    e_e = (sigma / np.pi) ** 2 * 0.5 * np.sum(
        coef * (np.exp(-0.5 * (base - mix)) - np.exp(-0.5 * (base + mix)))
    )
    return float(c - x_e - e_y + e_e)


def gaussian_second_moment(variance: float, sigma: float) -> float:
    """Coarse-grained raw second moment of N(0, variance) via the erf bin masses."""
    return coarse_second_moment(bin_gaussian(GaussianMarginal(variance), sigma))


def gaussian_coarse_cov(marg: BivariateMarginal, sigma: float) -> np.ndarray:
    """2x2 matrix of coarse-grained raw second moments of a zero-mean joint."""
    s11 = gaussian_second_moment(marg.cov[0, 0], sigma)
    s22 = gaussian_second_moment(marg.cov[1, 1], sigma)
    s12 = gaussian_cross_moment(marg, sigma)
    return np.array([[s11, s12], [s12, s22]])
