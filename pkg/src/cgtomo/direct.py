"""Direct covariance-matrix reconstruction from three coarse-grained quadratures per mode.

Each mode is measured at phases base + {0, pi/4, pi/2}; the two-mode
correlation block uses the four joint pairs from {base, base + pi/2}^2.
With a known frame the base phase follows the input's squeezing axis (plus
an offset, optionally the fidelity-optimal one); with an unknown frame it is
0 in the lab.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .binning import bin_gaussian, coarse_mean, coarse_second_moment, gaussian_cross_moment
from .errors import NonPhysicalError, NotTmstFormError
from .gaussian import (
    BivariateMarginal,
    GaussianMarginal,
    SingleModeParams,
    TwoModeParams,
    angle_is_degenerate,
    cov_from_params1,
    cov_from_params2,
    is_physical,
    joint_from_cov2,
    marginal_from_cov1,
    params_from_cov1,
    params_from_cov2,
    reduced_cov,
    tmst_matrix,
    tmst_project,
    tmst_residual,
)
from .metrics import fidelity1, fidelity2, log_negativity, nonclassical_squeezing

PROJECTION_TOL = 1e-6
DEFAULT_GRID = 36

# (mean, raw second moment) of the coarse-grained marginal
SingleMoments = Callable[[GaussianMarginal, float], tuple[float, float]]
# raw cross moment of the coarse-grained joint
CrossMoment = Callable[[BivariateMarginal, float], float]


def closed_form_moments(marg: GaussianMarginal, sigma: float) -> tuple[float, float]:
    b = bin_gaussian(marg, sigma)
    return coarse_mean(b), coarse_second_moment(b)


@dataclass(frozen=True)
class KnownFrame:
    """Measurement phases set relative to the input's squeezing axis.

    ``offset`` rotates the phase triple away from the axis.  With ``optimize``
    the offset is instead chosen to maximize the fidelity of the estimate.
    """

    offset: float = 0.0
    optimize: bool = False


@dataclass(frozen=True)
class UnknownFrame:
    """Lab-fixed measurement phases; ``grid_size`` input angles when averaging."""

    grid_size: int = DEFAULT_GRID

    def __post_init__(self):
        if self.grid_size < 1:
            raise ValueError("grid_size must be >= 1")


FramePolicy = KnownFrame | UnknownFrame


@dataclass(frozen=True, eq=False)
class ReconResult1:
    params: SingleModeParams
    cov: np.ndarray
    measured_cov: np.ndarray
    angle_deviation: float
    degenerate_angle: bool


@dataclass(frozen=True, eq=False)
class ReconResult2:
    params: TwoModeParams
    cov: np.ndarray
    measured_cov: np.ndarray
    angle_deviation: float
    tmst_residual: float


def wrap_half_pi(angle: float) -> float:
    """Wrap to (-pi/2, pi/2]."""
    w = -((-angle + np.pi / 2) % np.pi) + np.pi / 2
    return float(w)


def wrap_pi(angle: float) -> float:
    """Wrap to (-pi, pi]."""
    return float(-((-angle + np.pi) % (2 * np.pi)) + np.pi)


OFFSET_GRID = 180


def _best_offset(score: Callable[[float], float], period: float) -> float:
    """Offset in [0, period) maximizing ``score``: grid scan, then bounded refinement."""
    step = period / OFFSET_GRID
    grid = np.arange(OFFSET_GRID) * step
    values = [score(d) for d in grid]
    d0 = grid[int(np.argmax(values))]
    res = minimize_scalar(
        lambda d: -score(d), bounds=(d0 - step, d0 + step), method="bounded", options={"xatol": 1e-10}
    )
    return float(res.x) if -res.fun >= max(values) else float(d0)


def _local_block(g_mode, sigma: float, base: float, moments: SingleMoments) -> tuple[np.ndarray, float, float]:
    (m0, s0), (_, s45), (m90, s90) = (
        moments(marginal_from_cov1(g_mode, base + a), sigma) for a in (0.0, np.pi / 4, np.pi / 2)
    )
    g11 = 2 * (s0 - m0 * m0)
    g22 = 2 * (s90 - m90 * m90)
    g12 = 2 * s45 - s0 - s90 - 2 * m0 * m90
    return np.array([[g11, g12], [g12, g22]]), m0, m90


def measured_cov1(g, sigma: float, base: float = 0.0, moments: SingleMoments = closed_form_moments):
    """Covariance assembled from coarse-grained moments, in the frame rotated by ``base``."""
    return _local_block(g, sigma, base, moments)[0]


def reconstruct_single(
    input: SingleModeParams,
    sigma: float,
    frame: FramePolicy = UnknownFrame(),
    moments: SingleMoments = closed_form_moments,
) -> ReconResult1:
    if isinstance(frame, KnownFrame) and frame.optimize:
        target = cov_from_params1(input)
        offset = _best_offset(
            lambda d: fidelity1(target, reconstruct_single(input, sigma, KnownFrame(d), moments).cov),
            np.pi,
        )
        return reconstruct_single(input, sigma, KnownFrame(offset), moments)
    base = input.phi + frame.offset if isinstance(frame, KnownFrame) else 0.0
    measured = measured_cov1(cov_from_params1(input), sigma, base, moments)
    ok, nu = is_physical(measured)
    if not ok:
        raise NonPhysicalError(f"reconstructed matrix has symplectic eigenvalue {nu[0]!r} < 1/2")
    rotated = params_from_cov1(measured)
    est = SingleModeParams(rotated.nbar, rotated.r, rotated.phi + base)
    return ReconResult1(
        params=est,
        cov=cov_from_params1(est),
        measured_cov=measured,
        angle_deviation=wrap_half_pi(est.phi - input.phi),
        degenerate_angle=angle_is_degenerate(measured),
    )


def angle_deviation(input: SingleModeParams, sigma: float, moments: SingleMoments = closed_form_moments) -> float:
    """Signed squeezing-axis rotation of the unknown-frame estimate, wrapped to (-pi/2, pi/2]."""
    return reconstruct_single(input, sigma, UnknownFrame(), moments).angle_deviation


def measured_cov2(
    g,
    sigma: float,
    base: float = 0.0,
    moments: SingleMoments = closed_form_moments,
    cross: CrossMoment = gaussian_cross_moment,
) -> np.ndarray:
    """4x4 covariance from coarse-grained local and joint moments, both modes rotated by ``base``."""
    g = np.asarray(g, dtype=float)
    out = np.zeros((4, 4))
    means = []
    for mode in (0, 1):
        block, m0, m90 = _local_block(reduced_cov(g, mode), sigma, base, moments)
        out[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2] = block
        means.append((m0, m90))
    for i, a1 in enumerate((0.0, np.pi / 2)):
        for j, a2 in enumerate((0.0, np.pi / 2)):
            joint = joint_from_cov2(g, base + a1, base + a2)
            val = 2 * cross(joint, sigma) - 2 * means[0][i] * means[1][j]
            out[i, 2 + j] = out[2 + j, i] = val
    return out


def reconstruct_two(
    input: TwoModeParams,
    sigma: float,
    frame: FramePolicy = UnknownFrame(),
    moments: SingleMoments = closed_form_moments,
    cross: CrossMoment = gaussian_cross_moment,
) -> ReconResult2:
    if isinstance(frame, KnownFrame) and frame.optimize:
        target = cov_from_params2(input)
        offset = _best_offset(
            lambda d: fidelity2(target, reconstruct_two(input, sigma, KnownFrame(d), moments, cross).cov),
            np.pi,
        )
        return reconstruct_two(input, sigma, KnownFrame(offset), moments, cross)
    # rotating both local frames by phi/2 removes the two-mode phase phi
    base = 0.5 * (input.phi + frame.offset) if isinstance(frame, KnownFrame) else 0.0
    measured = measured_cov2(cov_from_params2(input), sigma, base, moments, cross)
    residual = tmst_residual(measured)
    if residual > PROJECTION_TOL * max(1.0, float(np.max(np.abs(measured)))):
        raise NotTmstFormError(f"projection residual {residual:.3g} exceeds {PROJECTION_TOL}")
    projected = tmst_matrix(*tmst_project(measured))
    ok, nu = is_physical(projected)
    if not ok:
        raise NonPhysicalError(f"reconstructed matrix has symplectic eigenvalue {nu[0]!r} < 1/2")
    rotated = params_from_cov2(projected)
    est = TwoModeParams(rotated.nbar1, rotated.nbar2, rotated.r, rotated.phi + 2 * base)
    return ReconResult2(
        params=est,
        cov=cov_from_params2(est),
        measured_cov=measured,
        angle_deviation=wrap_pi(est.phi - input.phi),
        tmst_residual=residual,
    )


@dataclass(frozen=True)
class FrameAverage:
    fidelity: float
    nonclassicality: float
    grid_size: int


def frame_averaged_metrics(nbar: float, r: float, sigma: float, grid_size: int = DEFAULT_GRID) -> FrameAverage:
    """Fidelity and r_nc of unknown-frame estimates averaged over input angles in [0, pi)."""
    if grid_size < 4:
        raise ValueError("grid_size must be >= 4")
    fids, rncs = [], []
    for phi in np.arange(grid_size) * np.pi / grid_size:
        inp = SingleModeParams(nbar, r, phi)
        res = reconstruct_single(inp, sigma, UnknownFrame(grid_size))
        fids.append(fidelity1(cov_from_params1(inp), res.cov))
        rncs.append(nonclassical_squeezing(res.params))
    return FrameAverage(float(np.mean(fids)), float(np.mean(rncs)), grid_size)


def frame_averaged_metrics2(
    nbar1: float, nbar2: float, r: float, sigma: float, grid_size: int = DEFAULT_GRID
) -> FrameAverage:
    """Two-mode analogue over input phases in [0, 2 pi); nonclassicality is E_N."""
    if grid_size < 4:
        raise ValueError("grid_size must be >= 4")
    fids, ens = [], []
    for phi in np.arange(grid_size) * 2 * np.pi / grid_size:
        inp = TwoModeParams(nbar1, nbar2, r, phi)
        res = reconstruct_two(inp, sigma, UnknownFrame(grid_size))
        fids.append(fidelity2(cov_from_params2(inp), res.cov))
        ens.append(log_negativity(res.params))
    return FrameAverage(float(np.mean(fids)), float(np.mean(ens)), grid_size)
