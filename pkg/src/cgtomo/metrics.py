"""Fidelity, nonclassical squeezing and logarithmic negativity of Gaussian states."""

from __future__ import annotations

import numpy as np

from .errors import NonPhysicalError
from .gaussian import (
    SingleModeParams,
    TwoModeParams,
    is_physical,
    symplectic_eigenvalues,
    symplectic_form,
    tmst_abc,
)

RADICAND_TOL = 1e-12


def _require_physical(*mats):
    for g in mats:
        ok, nu = is_physical(g)
        if not ok:
            raise NonPhysicalError(f"symplectic spectrum {nu} has values below 1/2")


def fidelity1(g1, g2) -> float:
    """Uhlmann fidelity between two zero-mean single-mode Gaussian states.

    F^2 = 1 / (sqrt(Delta + Lambda) - sqrt(Lambda)) with Delta = det(g1 + g2)
    and Lambda = 4 (det g1 - 1/4)(det g2 - 1/4); the value returned is F.
    """
    g1, g2 = np.asarray(g1, dtype=float), np.asarray(g2, dtype=float)
    _require_physical(g1, g2)
    delta = np.linalg.det(g1 + g2)
    lam = max(4 * (np.linalg.det(g1) - 0.25) * (np.linalg.det(g2) - 0.25), 0.0)
    f2 = 1.0 / (np.sqrt(delta + lam) - np.sqrt(lam))
    return float(np.sqrt(min(f2, 1.0)))


def _det_plus_iJ(g) -> float:
    # det(g + i/2 J) = prod(nu_k^2 - 1/4) over the symplectic spectrum
    return float(np.prod(symplectic_eigenvalues(g) ** 2 - 0.25))


def fidelity2(g1, g2, *, with_flag: bool = False):
    """Uhlmann fidelity between two zero-mean two-mode Gaussian states.

    With ``with_flag`` returns ``(F, clamped)``, where ``clamped`` reports that
    the inner radicand went negative by rounding and was set to zero.
    """
    g1, g2 = np.asarray(g1, dtype=float), np.asarray(g2, dtype=float)
    _require_physical(g1, g2)
    J = symplectic_form(2)
    delta = np.linalg.det(g1 + g2)
    lam = max(16 * _det_plus_iJ(g1) * _det_plus_iJ(g2), 0.0)
    sig = max(16 * np.linalg.det(J @ g1 @ J @ g2 - 0.25 * np.eye(4)), 0.0)
    outer = np.sqrt(sig) + np.sqrt(lam)
    radicand = outer * outer - delta
    clamped = radicand < 0
    if radicand < -RADICAND_TOL * max(1.0, outer * outer):
        raise ArithmeticError(f"fidelity radicand {radicand!r} is negative beyond rounding")
    f2 = 1.0 / (outer - np.sqrt(max(radicand, 0.0)))
    fid = float(np.sqrt(min(f2, 1.0)))
    return (fid, bool(clamped)) if with_flag else fid


def critical_squeezing(nbar: float) -> float:
    """Squeezing above which a squeezed thermal state is nonclassical."""
    return 0.5 * np.log(2 * nbar + 1)


def nonclassical_squeezing(p: SingleModeParams) -> float:
    return max(0.0, p.r - critical_squeezing(p.nbar))


def entanglement_potential(p: SingleModeParams) -> float:
    return nonclassical_squeezing(p) / np.log(2)


def symplectic_eigs_pt(g) -> tuple[float, float]:
    """Symplectic eigenvalues of the partial transpose (p2 -> -p2) of a 4x4 matrix."""
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    nu = symplectic_eigenvalues(flip @ np.asarray(g, dtype=float) @ flip)
    return float(nu[0]), float(nu[1])


def tmst_nu_minus(a: float, b: float, c: complex) -> float:
    """Smaller partially-transposed symplectic eigenvalue from the (a, b, c) closed form."""
    f = a * a + b * b + 2 * abs(c) ** 2
    g = a * b - abs(c) ** 2
    return float(np.sqrt(0.5 * (f - np.sqrt(max(f * f - 4 * g * g, 0.0)))))


def _log_neg(nu_minus: float) -> float:
    return max(0.0, -np.log2(2 * nu_minus))


def log_negativity(p: TwoModeParams) -> float:
    return _log_neg(tmst_nu_minus(*tmst_abc(p)))


def log_negativity_cov(g) -> float:
    """Logarithmic negativity of an arbitrary two-mode covariance matrix."""
    return _log_neg(symplectic_eigs_pt(g)[0])
