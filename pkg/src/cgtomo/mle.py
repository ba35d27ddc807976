"""Maximum-likelihood Gaussian fits to full angular sets of coarse-grained homodyne data.

The estimated distribution P_E is the smooth Gaussian marginal of the
candidate state.  Since ln P_E is quadratic in x, the integral of the flat
data density against ln P_E over a bin is exact:

    int_bin P_D ln P_E dx = P(x_m) [ -ln(2 pi v)/2 - ((x_m - mu)^2 + sigma^2/12) / (2 v) ]

so the likelihood of each angle only needs the bin mass and the coarse-grained
first and second moments.  The optimizer is a multistart Nelder-Mead simplex
in unconstrained coordinates that keep nbar >= 0 and r >= 0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize, root

from .binning import (
    BinnedDistribution,
    BinnedJoint,
    bin_gaussian,
    coarse_cross_moment,
    coarse_mean,
    coarse_second_moment,
    gaussian_cross_moment,
    gaussian_second_moment,
    gaussian_interval_mass,
)
from .gaussian import (
    GaussianMarginal,
    SingleModeParams,
    TwoModeParams,
    cov_from_params2,
    homodyne_marginal1,
    joint_from_cov2,
    tmst_abc,
)

log = logging.getLogger(__name__)

VAR_FLOOR = 1e-12
INITIAL_STEP = 0.2


@dataclass(frozen=True)
class MleConfig:
    angle_count: int = 60
    restarts: int = 8
    tol: float = 1e-8
    max_iters: int = 2000
    seed: int = 0
    pair_count: int = 12
    coarse_model: bool = False

    def __post_init__(self):
        if self.angle_count < 3 or self.restarts < 1 or self.pair_count < 2:
            raise ValueError(f"invalid MLE configuration {self}")
        if not (self.tol > 0 and self.max_iters > 0):
            raise ValueError(f"invalid MLE configuration {self}")


def angle_set(count: int) -> np.ndarray:
    """Uniform measurement phases on [0, pi)."""
    return np.arange(count) * np.pi / count


@dataclass(frozen=True, eq=False)
class SingleModeData:
    """Per-angle sufficient statistics (mass, mean, raw second moment) of binned data."""

    angles: np.ndarray
    sigma: float
    mass: np.ndarray
    mean: np.ndarray
    second: np.ndarray
    bins: tuple = field(default=(), repr=False)

    @classmethod
    def from_binned(cls, data: Sequence[tuple[float, BinnedDistribution]]) -> "SingleModeData":
        if not data:
            raise ValueError("data must be non-empty")
        angles = np.array([a for a, _ in data], dtype=float)
        bins = tuple(b for _, b in data)
        sigma = bins[0].sigma
        return cls(
            angles=angles,
            sigma=sigma,
            mass=np.array([b.total_mass for b in bins]),
            mean=np.array([coarse_mean(b) for b in bins]),
            second=np.array([coarse_second_moment(b) for b in bins]),
            bins=bins,
        )


def simulate_single(input: SingleModeParams, sigma: float, angle_count: int) -> SingleModeData:
    angles = angle_set(angle_count)
    return SingleModeData.from_binned(
        [(a, bin_gaussian(homodyne_marginal1(input, a), sigma)) for a in angles]
    )


def _candidate_variance(nbar, r, phi, angles) -> np.ndarray:
    v = 0.5 * (nbar + 0.5) * (np.cosh(2 * r) - np.sinh(2 * r) * np.cos(2 * angles - 2 * phi))
    return np.maximum(v, VAR_FLOOR)


def bin_log_likelihood(marg: GaussianMarginal, b: BinnedDistribution) -> np.ndarray:
    """Exact int_bin P_D ln P_E dx for every bin of b."""
    v = max(marg.variance, VAR_FLOOR)
    x = b.centers - marg.mean
    return b.masses * (-0.5 * np.log(2 * np.pi * v) - (x * x + b.sigma**2 / 12) / (2 * v))


def _coarse_log_pe(marg: GaussianMarginal, b: BinnedDistribution) -> np.ndarray:
    sd = np.sqrt(max(marg.variance, VAR_FLOOR))
    lo = (b.centers - 0.5 * b.sigma - marg.mean) / sd
    hi = (b.centers + 0.5 * b.sigma - marg.mean) / sd
    pe = gaussian_interval_mass(lo, hi) / b.sigma
    return np.log(np.maximum(pe, np.finfo(float).tiny))


def log_likelihood1(
    candidate: SingleModeParams,
    data: SingleModeData | Sequence[tuple[float, BinnedDistribution]],
    coarse_model: bool = False,
) -> float:
    """Angle-weighted log-likelihood of coarse-grained single-mode data.

    Each angle carries the weight pi / (number of angles).
    """
    if not isinstance(data, SingleModeData):
        data = SingleModeData.from_binned(data)
    w = np.pi / data.angles.size
    if coarse_model:
        total = 0.0
        for a, b in zip(data.angles, data.bins):
            total += np.dot(b.masses, _coarse_log_pe(homodyne_marginal1(candidate, a), b))
        return float(w * total)
    v = _candidate_variance(candidate.nbar, candidate.r, candidate.phi, data.angles)
    # zero-mean candidate: sum_m P(x_m)((x_m)^2 + sigma^2/12) is the raw second moment
    per_angle = -0.5 * data.mass * np.log(2 * np.pi * v) - data.second / (2 * v)
    return float(w * per_angle.sum())


def relative_entropy(pd: BinnedDistribution, pe: GaussianMarginal | BinnedDistribution) -> float:
    """D(P_D || P_E) for piecewise-flat data against a Gaussian or another binned density."""
    nz = pd.masses > 0
    neg_entropy = float(np.dot(pd.masses[nz], np.log(pd.density[nz])))
    if isinstance(pe, BinnedDistribution):
        if pe.sigma != pd.sigma or pe.offset != pd.offset:
            raise ValueError("binned P_E must share the data's bins")
        dens = np.zeros_like(pd.masses)
        for j, m in enumerate(pd.indices):
            dens[j] = pe.mass(int(m)) / pe.sigma
        if np.any(dens[nz] == 0):
            return float("inf")
        cross = float(np.dot(pd.masses[nz], np.log(dens[nz])))
    else:
        cross = float(bin_log_likelihood(pe, pd).sum())
    return neg_entropy - cross


@dataclass(frozen=True)
class MleResult:
    params: SingleModeParams | TwoModeParams
    log_likelihood: float
    converged: bool
    iterations: int
    restart_values: tuple[float, ...]
    best_restart: int


def _to_params1(z) -> SingleModeParams:
    return SingleModeParams(np.expm1(abs(z[0])), abs(z[1]), z[2])


def _from_params1(p: SingleModeParams) -> np.ndarray:
    return np.array([np.log1p(p.nbar), p.r, p.phi])


def _to_params2(z) -> TwoModeParams:
    return TwoModeParams(np.expm1(abs(z[0])), np.expm1(abs(z[1])), abs(z[2]), z[3])


def _from_params2(p: TwoModeParams) -> np.ndarray:
    return np.array([np.log1p(p.nbar1), np.log1p(p.nbar2), p.r, p.phi])


def _nelder_mead(objective, x0: np.ndarray, cfg: MleConfig):
    simplex = np.vstack([x0, x0 + INITIAL_STEP * np.eye(x0.size)])
    return minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "xatol": cfg.tol,
            "fatol": np.inf,
            "maxiter": cfg.max_iters,
            "maxfev": 4 * cfg.max_iters,
            "adaptive": False,
        },
    )


def _multistart(objective, starts: list[np.ndarray], cfg: MleConfig):
    runs = [_nelder_mead(objective, x0, cfg) for x0 in starts]
    values = [-float(run.fun) for run in runs]
    # max likelihood; ties go to the lowest restart index
    best = int(np.argmax(values))
    run = runs[best]
    if run.status != 0:
        log.warning("Nelder-Mead stopped before tolerance %g: %s", cfg.tol, run.message)
    return run, values, best


def _starts(truth: np.ndarray, random_draw, cfg: MleConfig) -> list[np.ndarray]:
    rng = np.random.default_rng(cfg.seed)
    n_truth = (cfg.restarts + 1) // 2
    starts = [truth + (0.0 if i == 0 else 0.1) * rng.standard_normal(truth.size) for i in range(n_truth)]
    starts += [random_draw(rng) for _ in range(cfg.restarts - n_truth)]
    return starts


def grad_log_likelihood1(candidate: SingleModeParams, data: SingleModeData) -> np.ndarray:
    """Analytic gradient of the smooth-model likelihood in (nbar, r, phi)."""
    s = candidate.nbar + 0.5
    ch, sh = np.cosh(2 * candidate.r), np.sinh(2 * candidate.r)
    arg = 2 * data.angles - 2 * candidate.phi
    c, sn = np.cos(arg), np.sin(arg)
    v = 0.5 * s * (ch - sh * c)
    dl_dv = (np.pi / data.angles.size) * (-0.5 * data.mass / v + 0.5 * data.second / (v * v))
    dv = np.stack([0.5 * (ch - sh * c), s * (sh - ch * c), -s * sh * sn])
    return dv @ dl_dv


def _polish1(data: SingleModeData, p: SingleModeParams) -> SingleModeParams:
    """Refine an interior optimum by solving grad L = 0.

    A simplex resolves parameters only to about sqrt(machine eps) because L is
    flat at the top; the gradient root is accurate to rounding.
    """
    if p.nbar <= 1e-6 or p.r <= 1e-6:
        return p
    x0 = np.array([p.nbar, p.r, p.phi])

    def grad(x):
        if x[0] < 0 or x[1] < 0:
            return np.full(3, 1e6)
        return grad_log_likelihood1(SingleModeParams(x[0], x[1], x[2]), data)

    try:
        sol = root(grad, x0, method="hybr", options={"xtol": 1e-14})
    except (ValueError, FloatingPointError):
        return p
    x = sol.x
    # hybr may flag its own xtol as unreachable after converging; judge by the gradient
    if x[0] < 0 or x[1] < 0 or np.max(np.abs(x - x0)) > 1e-4:
        return p
    if np.linalg.norm(grad(x)) >= np.linalg.norm(grad(x0)):
        return p
    cand = SingleModeParams(x[0], x[1], x[2])
    if log_likelihood1(cand, data) < log_likelihood1(p, data) - 1e-12:
        return p
    return cand


def mle_fit_single(data: SingleModeData, cfg: MleConfig = MleConfig(), guess: SingleModeParams | None = None) -> MleResult:
    guess = guess or SingleModeParams(0.5, 0.5, 0.0)

    def objective(z):
        return -log_likelihood1(_to_params1(z), data, cfg.coarse_model)

    def draw(rng):
        return np.array([np.log1p(rng.uniform(0, 3)), rng.uniform(0, 2.5), rng.uniform(0, np.pi)])

    run, values, best = _multistart(objective, _starts(_from_params1(guess), draw, cfg), cfg)
    params = _to_params1(run.x)
    if not cfg.coarse_model:
        params = _polish1(data, params)
    return MleResult(params, log_likelihood1(params, data, cfg.coarse_model), run.status == 0, int(run.nit),
                     tuple(values), best)


def mle_estimate_single(input: SingleModeParams, sigma: float, cfg: MleConfig = MleConfig()) -> MleResult:
    """Simulate coarse-grained data from ``input`` on the full angle set and fit it."""
    data = simulate_single(input, sigma, cfg.angle_count)
    return mle_fit_single(data, cfg, guess=input)


@dataclass(frozen=True, eq=False)
class TwoModeData:
    """Coarse-grained raw second-moment matrices for every joint phase pair."""

    phi1: np.ndarray
    phi2: np.ndarray
    sigma: float
    mass: np.ndarray
    s11: np.ndarray
    s22: np.ndarray
    s12: np.ndarray

    @classmethod
    def from_binned(cls, data: Sequence[tuple[tuple[float, float], BinnedJoint]]) -> "TwoModeData":
        if not data:
            raise ValueError("data must be non-empty")
        s11, s22 = [], []
        for _, b in data:
            s11.append(coarse_second_moment(b.marginal(0)))
            s22.append(coarse_second_moment(b.marginal(1)))
        return cls(
            phi1=np.array([a for (a, _), _ in data], dtype=float),
            phi2=np.array([a for (_, a), _ in data], dtype=float),
            sigma=data[0][1].sigma,
            mass=np.array([b.total_mass for _, b in data]),
            s11=np.array(s11),
            s22=np.array(s22),
            s12=np.array([coarse_cross_moment(b) for _, b in data]),
        )


def simulate_two(input: TwoModeParams, sigma: float, pair_count: int) -> TwoModeData:
    """Closed-form coarse-grained moments on the pair_count x pair_count phase grid."""
    g = cov_from_params2(input)
    grid = angle_set(pair_count)
    p1, p2 = (a.ravel() for a in np.meshgrid(grid, grid, indexing="ij"))
    local1 = {a: gaussian_second_moment(joint_from_cov2(g, a, 0.0).cov[0, 0], sigma) for a in grid}
    local2 = {a: gaussian_second_moment(joint_from_cov2(g, 0.0, a).cov[1, 1], sigma) for a in grid}
    s12 = [gaussian_cross_moment(joint_from_cov2(g, a, b), sigma) for a, b in zip(p1, p2)]
    return TwoModeData(
        phi1=p1,
        phi2=p2,
        sigma=sigma,
        mass=np.ones(p1.size),
        s11=np.array([local1[a] for a in p1]),
        s22=np.array([local2[b] for b in p2]),
        s12=np.array(s12),
    )


def log_likelihood2(candidate: TwoModeParams, data: TwoModeData) -> float:
    """Pair-weighted log-likelihood, weight (pi / n)^2 per phase pair on an n x n grid."""
    a, b, c = tmst_abc(candidate)
    v1 = max(0.5 * a, VAR_FLOOR)
    v2 = max(0.5 * b, VAR_FLOOR)
    v12 = 0.5 * (c * np.exp(-1j * (data.phi1 + data.phi2))).real
    det = np.maximum(v1 * v2 - v12 * v12, VAR_FLOOR**2)
    quad = (v2 * data.s11 + v1 * data.s22 - 2 * v12 * data.s12) / det
    per_pair = -data.mass * np.log(2 * np.pi * np.sqrt(det)) - 0.5 * quad
    w = (np.pi / np.sqrt(data.phi1.size)) ** 2
    return float(w * per_pair.sum())


def mle_fit_two(data: TwoModeData, cfg: MleConfig = MleConfig(), guess: TwoModeParams | None = None) -> MleResult:
    guess = guess or TwoModeParams(0.5, 0.5, 0.5, 0.0)

    def objective(z):
        return -log_likelihood2(_to_params2(z), data)

    def draw(rng):
        n1, n2 = np.log1p(rng.uniform(0, 3, size=2))
        return np.array([n1, n2, rng.uniform(0, 2.5), rng.uniform(0, 2 * np.pi)])

    run, values, best = _multistart(objective, _starts(_from_params2(guess), draw, cfg), cfg)
    return MleResult(_to_params2(run.x), -float(run.fun), run.status == 0, int(run.nit), tuple(values), best)


def mle_estimate_two(input: TwoModeParams, sigma: float, cfg: MleConfig = MleConfig()) -> MleResult:
    data = simulate_two(input, sigma, cfg.pair_count)
    return mle_fit_two(data, cfg, guess=input)
