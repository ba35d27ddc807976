"""Closed-form evolution of covariance matrices in Gaussian (squeezed thermal) reservoirs.

Gamma(t) = sqrt(G) (Gamma(0) - Gamma_r) sqrt(G) + Gamma_r with G = diag(exp(-gamma_i t)).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag

from .errors import DegenerateDenominatorError, UnphysicalReservoirError
from .gaussian import SingleModeParams, params_from_cov1

RESERVOIR_TOL = 1e-12
DENOM_TOL = 1e-12


@dataclass(frozen=True)
class ReservoirParams:
    """Mean thermal photon number N and complex squeezing M of a reservoir."""

    N: float
    M: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "M", complex(self.M))
        if self.N < 0 or abs(self.M) ** 2 > self.N * (self.N + 1) + RESERVOIR_TOL:
            raise UnphysicalReservoirError(f"|M|^2 > N(N+1) for {self}")

    @classmethod
    def squeezed_thermal(cls, nbar: float, r: float, phi: float = 0.0) -> "ReservoirParams":
        """Reservoir whose covariance equals that of the squeezed thermal state (nbar, r, phi)."""
        s = nbar + 0.5
        return cls(N=s * np.cosh(2 * r) - 0.5, M=-s * np.sinh(2 * r) * np.exp(2j * phi))

    def as_state(self) -> SingleModeParams:
        return params_from_cov1(reservoir_cov(self))


def reservoir_cov(res: ReservoirParams) -> np.ndarray:
    d = 0.5 + res.N
    return np.array([[d + res.M.real, res.M.imag], [res.M.imag, d - res.M.real]])


def evolve_cov(g0, reservoirs: Sequence[ReservoirParams], gamma_t: Sequence[float]) -> np.ndarray:
    """Covariance after a reservoir interaction of strength gamma_i * t on each mode."""
    g0 = np.asarray(g0, dtype=float)
    n = g0.shape[0] // 2
    if len(reservoirs) != n or len(gamma_t) != n or g0.shape != (2 * n, 2 * n):
        raise ValueError(
            f"{g0.shape} covariance needs {n} reservoirs and rates, "
            f"got {len(reservoirs)} and {len(gamma_t)}"
        )
    if any(gt < 0 for gt in gamma_t):
        raise ValueError("gamma*t must be non-negative")
    g_r = block_diag(*(reservoir_cov(res) for res in reservoirs))
    root = np.repeat(np.exp(-0.5 * np.asarray(gamma_t, dtype=float)), 2)
    return root[:, None] * (g0 - g_r) * root[None, :] + g_r


class MixingClass(enum.Enum):
    IN_RANGE = "in_range"
    ABOVE_ONE = "above_one"
    BELOW_ZERO = "below_zero"


def classify_mixing(y: float) -> MixingClass:
    if y > 1:
        return MixingClass.ABOVE_ONE
    if y < 0:
        return MixingClass.BELOW_ZERO
    return MixingClass.IN_RANGE


def _anisotropy(p: SingleModeParams) -> float:
    return (2 * p.nbar + 1) * np.sinh(2 * p.r)


def mixing_fraction(
    estimated: SingleModeParams, input: SingleModeParams, res: ReservoirParams | None = None
) -> float:
    """Weight y of the input state in y*Gamma_in + (1 - y)*Gamma_r matching the estimate.

    Only the (2 nbar + 1) sinh 2r combination is matched; the reservoir is
    taken as squeezed along the state's axis.  y is not clamped to [0, 1].
    """
    res_term = 0.0 if res is None else _anisotropy(res.as_state())
    denom = _anisotropy(input) - res_term
    if abs(denom) < DENOM_TOL:
        raise DegenerateDenominatorError("input and reservoir have equal anisotropy")
    return float((_anisotropy(estimated) - res_term) / denom)


def mixing_fraction_isotropic(estimated: SingleModeParams, input: SingleModeParams) -> float:
    """y for a thermal (unsqueezed) reservoir."""
    return mixing_fraction(estimated, input, None)


def min_reservoir_squeezing(estimated: SingleModeParams, nbar_r: float) -> float:
    """Boundary r_r above which a squeezed reservoir with nbar_r can give y <= 1."""
    if nbar_r < 0:
        raise ValueError("nbar_r must be non-negative")
    return float(0.5 * np.arcsinh(_anisotropy(estimated) / (2 * nbar_r + 1)))
