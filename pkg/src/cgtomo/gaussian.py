"""Zero-mean single- and two-mode Gaussian states and their homodyne marginals.

Conventions: R = (q1, p1, ..., qn, pn), the covariance matrix of the vacuum is
identity/2, and the homodyne quadrature at local-oscillator phase theta is
X_theta = (q cos theta + p sin theta) / sqrt(2), so a coherent state has
Var(X_theta) = 1/4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPhysicalError, NotTmstFormError

PHYS_TOL = 1e-10
DEGENERATE_TOL = 1e-12
TMST_TOL = 1e-9


@dataclass(frozen=True)
class SingleModeParams:
    """Squeezed thermal state S(r, phi) rho_th(nbar) S(r, phi)^dagger."""

    nbar: float
    r: float
    phi: float = 0.0

    def __post_init__(self):
        if not (self.nbar >= 0 and self.r >= 0):
            raise ValueError(f"nbar and r must be non-negative, got {self}")
        object.__setattr__(self, "nbar", float(self.nbar))
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "phi", float(self.phi) % np.pi)


@dataclass(frozen=True)
class TwoModeParams:
    """Two-mode squeezed thermal state with thermal numbers nbar1, nbar2."""

    nbar1: float
    nbar2: float
    r: float
    phi: float = 0.0

    def __post_init__(self):
        if not (self.nbar1 >= 0 and self.nbar2 >= 0 and self.r >= 0):
            raise ValueError(f"thermal numbers and r must be non-negative, got {self}")
        for name in ("nbar1", "nbar2", "r"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "phi", float(self.phi) % (2 * np.pi))


@dataclass(frozen=True)
class GaussianMarginal:
    """One-dimensional homodyne distribution N(mean, variance)."""

    variance: float
    mean: float = 0.0

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError(f"variance must be positive, got {self.variance}")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-((x - self.mean) ** 2) / (2 * self.variance)) / np.sqrt(
            2 * np.pi * self.variance
        )


@dataclass(frozen=True, eq=False)
class BivariateMarginal:
    """Zero-mean joint homodyne distribution of (X1_phi1, X2_phi2)."""

    cov: np.ndarray

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float).reshape(2, 2)
        cov = 0.5 * (cov + cov.T)
        if not (cov[0, 0] > 0 and np.linalg.det(cov) > 0):
            raise ValueError(f"joint covariance must be positive definite:\n{cov}")
        cov.setflags(write=False)
        object.__setattr__(self, "cov", cov)

    @property
    def correlation(self) -> float:
        return self.cov[0, 1] / np.sqrt(self.cov[0, 0] * self.cov[1, 1])

    def marginal(self, axis: int) -> GaussianMarginal:
        return GaussianMarginal(variance=self.cov[axis, axis])

    def pdf(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        inv = np.linalg.inv(self.cov)
        quad = inv[0, 0] * x * x + 2 * inv[0, 1] * x * y + inv[1, 1] * y * y
        return np.exp(-0.5 * quad) / (2 * np.pi * np.sqrt(np.linalg.det(self.cov)))


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(g) -> np.ndarray:
    """Symplectic spectrum (ascending), the moduli of the eigenvalues of iJ g."""
    g = np.asarray(g, dtype=float)
    n = g.shape[0] // 2
    moduli = np.sort(np.abs(np.linalg.eigvals(symplectic_form(n) @ g)))
    # eigenvalues of J g come in pairs +-i nu
    return moduli[::2]


def is_physical(g, tol: float = PHYS_TOL) -> tuple[bool, np.ndarray]:
    """Return (physical?, symplectic spectrum) for a symmetric covariance matrix."""
    g = np.asarray(g, dtype=float)
    nu = symplectic_eigenvalues(g)
    positive = bool(np.all(np.linalg.eigvalsh(0.5 * (g + g.T)) > 0))
    return positive and bool(np.all(nu >= 0.5 - tol)), nu


def cov_from_params1(p: SingleModeParams) -> np.ndarray:
    s = p.nbar + 0.5
    ch, sh = np.cosh(2 * p.r), np.sinh(2 * p.r)
    c2, s2 = np.cos(2 * p.phi), np.sin(2 * p.phi)
    g12 = -s * sh * s2
    return np.array([[s * (ch - sh * c2), g12], [g12, s * (ch + sh * c2)]])


def angle_is_degenerate(g) -> bool:
    """True when the single-mode matrix is isotropic and the squeezing axis is undefined."""
    g = np.asarray(g, dtype=float)
    return (g[1, 1] - g[0, 0]) ** 2 + 4 * g[0, 1] ** 2 < DEGENERATE_TOL


def params_from_cov1(g) -> SingleModeParams:
    """Invert ``cov_from_params1``.

    The angle is 0 for isotropic matrices (see ``angle_is_degenerate``).

    Raises:
        NonPhysicalError: if det g < 1/4 beyond tolerance.
    """
    g = np.asarray(g, dtype=float)
    g11, g22, g12 = g[0, 0], g[1, 1], 0.5 * (g[0, 1] + g[1, 0])
    det = g11 * g22 - g12 * g12
    if det < 0.25 - PHYS_TOL or g11 <= 0:
        raise NonPhysicalError(f"det = {det!r} < 1/4")
    det = max(det, 0.25)
    nbar = np.sqrt(det) - 0.5
    gamma = (g22 - g11) ** 2 + 4 * g12 * g12
    r = 0.5 * np.arcsinh(0.5 * np.sqrt(gamma / det))
    if gamma < DEGENERATE_TOL:
        return SingleModeParams(nbar, r, 0.0)
    # atan2 form of the two arcsin branches (g11 <= g22 / g11 > g22);
    # avoids the loss of precision of arcsin near +-1
    two_phi = np.arctan2(-2 * g12, g22 - g11)
    return SingleModeParams(nbar, r, 0.5 * two_phi)


def tmst_abc(p: TwoModeParams) -> tuple[float, float, complex]:
    ch2, sh2 = np.cosh(p.r) ** 2, np.sinh(p.r) ** 2
    a = p.nbar1 * ch2 + p.nbar2 * sh2 + 0.5 * np.cosh(2 * p.r)
    b = p.nbar1 * sh2 + p.nbar2 * ch2 + 0.5 * np.cosh(2 * p.r)
    c = -0.5 * (p.nbar1 + p.nbar2 + 1) * np.exp(1j * p.phi) * np.sinh(2 * p.r)
    return a, b, c


def tmst_matrix(a: float, b: float, c: complex) -> np.ndarray:
    re, im = c.real, c.imag
    return np.array(
        [
            [a, 0.0, re, im],
            [0.0, a, im, -re],
            [re, im, b, 0.0],
            [im, -re, 0.0, b],
        ]
    )


def cov_from_params2(p: TwoModeParams) -> np.ndarray:
    return tmst_matrix(*tmst_abc(p))


def tmst_residual(g) -> float:
    """Largest deviation of g from the (a, b, c) two-mode squeezed thermal pattern."""
    g = np.asarray(g, dtype=float)
    return float(np.max(np.abs(g - tmst_matrix(*tmst_project(g)))))


def tmst_project(g) -> tuple[float, float, complex]:
    """Least-squares (a, b, c) for a 4x4 matrix."""
    g = np.asarray(g, dtype=float)
    g = 0.5 * (g + g.T)
    a = 0.5 * (g[0, 0] + g[1, 1])
    b = 0.5 * (g[2, 2] + g[3, 3])
    re = 0.5 * (g[0, 2] - g[1, 3])
    im = 0.5 * (g[0, 3] + g[1, 2])
    return float(a), float(b), complex(re, im)


def params_from_cov2(g, tol: float = TMST_TOL) -> TwoModeParams:
    """Invert ``cov_from_params2``.

    Raises:
        NotTmstFormError: if g deviates from the TMST pattern by more than tol.
        NonPhysicalError: if the implied thermal numbers are negative.
    """
    g = np.asarray(g, dtype=float)
    scale = max(1.0, float(np.max(np.abs(g))))
    if g.shape != (4, 4) or tmst_residual(g) > tol * scale:
        raise NotTmstFormError("matrix is not of two-mode squeezed thermal form")
    a, b, c = tmst_project(g)
    gamma = (a + b) ** 2 - 4 * abs(c) ** 2
    if gamma <= 0:
        raise NonPhysicalError(f"(a+b)^2 - 4|c|^2 = {gamma!r} <= 0")
    root = np.sqrt(gamma)
    nbars = [0.5 * (sign * (a - b) - 1 + root) for sign in (1, -1)]
    if min(nbars) < -PHYS_TOL:
        raise NonPhysicalError(f"negative thermal number {min(nbars)!r}")
    nbar1, nbar2 = (max(n, 0.0) for n in nbars)
    r = 0.5 * np.arcsinh(2 * abs(c) / root)
    # c = -|c| exp(i phi); the branch rule on Re[c] is folded into atan2
    phi = np.arctan2(-c.imag, -c.real) if abs(c) > DEGENERATE_TOL else 0.0
    return TwoModeParams(nbar1, nbar2, r, phi)


def quadrature_vector(theta: float) -> np.ndarray:
    return np.array([np.cos(theta), np.sin(theta)]) / np.sqrt(2)


def marginal_from_cov1(g, theta: float) -> GaussianMarginal:
    u = quadrature_vector(theta)
    return GaussianMarginal(variance=float(u @ np.asarray(g) @ u))


def homodyne_marginal1(p: SingleModeParams, phi_lo: float) -> GaussianMarginal:
    two_var = (p.nbar + 0.5) * (
        np.cosh(2 * p.r) - np.sinh(2 * p.r) * np.cos(2 * phi_lo - 2 * p.phi)
    )
    return GaussianMarginal(variance=0.5 * two_var)


def joint_from_cov2(g, phi1: float, phi2: float) -> BivariateMarginal:
    """Project a 4x4 covariance onto the quadrature pair (X1_phi1, X2_phi2)."""
    g = np.asarray(g, dtype=float)
    proj = np.zeros((2, 4))
    proj[0, :2] = quadrature_vector(phi1)
    proj[1, 2:] = quadrature_vector(phi2)
    return BivariateMarginal(proj @ g @ proj.T)


def homodyne_joint2(p: TwoModeParams, phi1: float, phi2: float) -> BivariateMarginal:
    return joint_from_cov2(cov_from_params2(p), phi1, phi2)


def reduced_cov(g, mode: int) -> np.ndarray:
    g = np.asarray(g)
    return g[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2]
