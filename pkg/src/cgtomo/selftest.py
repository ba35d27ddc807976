"""Oracle suites and invariants, runnable from the command line."""

from __future__ import annotations

import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .binning import (
    bin_bivariate,
    bin_gaussian,
    coarse_cross_moment,
    coarse_variance,
    gaussian_cross_moment,
)
from .direct import KnownFrame, UnknownFrame, angle_deviation, reconstruct_single, reconstruct_two
from .experiments import SweepConfig, emit_csv, load_csv, run_sweep
from .gaussian import (
    GaussianMarginal,
    SingleModeParams,
    TwoModeParams,
    cov_from_params2,
    homodyne_joint2,
    tmst_abc,
)
from .metrics import symplectic_eigs_pt, tmst_nu_minus
from .mle import bin_log_likelihood
from .oracles import dense_coarse_variance, quadrature_bin_log_likelihood, williamson_eigenvalues


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _binning_vs_dense() -> str:
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(10):
        v, s = rng.uniform(0.05, 5.0), rng.uniform(0.05, 3.0)
        err = abs(coarse_variance(bin_gaussian(GaussianMarginal(v), s)) - dense_coarse_variance(v, s))
        worst = max(worst, err)
    assert worst < 1e-8, worst
    single = coarse_variance(bin_gaussian(GaussianMarginal(1.0), 20.0))
    assert abs(single - 400 / 12) < 1e-10, single
    return f"max |diff| {worst:.2e}"


def _symplectic_vs_closed_form() -> str:
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(20):
        p = TwoModeParams(*rng.uniform(0, 2, 2), rng.uniform(0, 1.5), rng.uniform(0, 2 * np.pi))
        g = cov_from_params2(p)
        closed = tmst_nu_minus(*tmst_abc(p))
        flip = np.diag([1.0, 1.0, 1.0, -1.0])
        worst = max(worst, abs(symplectic_eigs_pt(g)[0] - closed),
                    abs(williamson_eigenvalues(flip @ g @ flip)[0] - closed))
    assert worst < 1e-10, worst
    return f"max |diff| {worst:.2e}"


def _likelihood_bins() -> str:
    worst = 0.0
    for v_data, v_est, s in ((1.0, 0.7, 0.5), (3.0, 2.0, 1.5), (0.2, 0.5, 0.1)):
        b = bin_gaussian(GaussianMarginal(v_data), s)
        fast = bin_log_likelihood(GaussianMarginal(v_est), b)
        slow = quadrature_bin_log_likelihood(GaussianMarginal(v_est), s, b.centers, b.masses)
        worst = max(worst, float(np.max(np.abs(fast - slow))))
    assert worst < 1e-12, worst
    return f"max |diff| {worst:.2e}"


def _cross_moment_paths() -> str:
    worst = 0.0
    for p, s in ((TwoModeParams(0, 0, 1, 0.3), 0.7), (TwoModeParams(1, 0.5, 0.6, 2.0), 1.5)):
        joint = homodyne_joint2(p, 0.2, 1.1)
        worst = max(worst, abs(gaussian_cross_moment(joint, s) - coarse_cross_moment(bin_bivariate(joint, s))))
    assert worst < 1e-9, worst
    return f"max |diff| {worst:.2e}"


def _fixed_points() -> str:
    worst = 0.0
    for k in (1, 2, 3, 5, 6, 7):
        for s in (0.1, 0.5, 1.0, 2.0):
            worst = max(worst, abs(angle_deviation(SingleModeParams(0, 1, k * np.pi / 8), s)))
    assert worst < 1e-9, worst
    off = abs(angle_deviation(SingleModeParams(0, 1, 0.2), 0.8))
    assert off > 1e-4, off
    return f"max |dev| {worst:.2e}, off-grid {off:.2e}"


def _small_sigma_limit() -> str:
    p1 = SingleModeParams(1.0, 1.0, 1.0)
    p2 = TwoModeParams(0.0, 0.0, 1.0, 0.7)
    worst = 0.0
    for frame in (KnownFrame(), UnknownFrame()):
        e1 = reconstruct_single(p1, 1e-4, frame).params
        e2 = reconstruct_two(p2, 1e-4, frame).params
        worst = max(worst, abs(e1.nbar - p1.nbar), abs(e1.r - p1.r), abs(e1.phi - p1.phi),
                    abs(e2.nbar1 - p2.nbar1), abs(e2.r - p2.r), abs(e2.phi - p2.phi))
    assert worst < 1e-6, worst
    return f"max |param err| {worst:.2e}"


def _csv_round_trip() -> str:
    cfg = SweepConfig.for_experiment("custom", sigma_grid=[0.3, 1.2], inputs=[[0.5, 0.8, 0.4]],
                                     methods=["DirectKnown", "DirectUnknown"], grid_size=8)
    records = run_sweep(cfg)
    with tempfile.TemporaryDirectory() as tmp:
        path = emit_csv(records, Path(tmp) / "rt.csv")
        back = load_csv(path)
        assert back == records
        emit_csv(back, Path(tmp) / "rt2.csv")
        assert path.read_bytes() == (Path(tmp) / "rt2.csv").read_bytes()
    return f"{len(records)} records"


CHECKS: list[tuple[str, Callable[[], str]]] = [
    ("binning: erf closed form vs dense grid", _binning_vs_dense),
    ("symplectic: generic paths vs f,g closed form", _symplectic_vs_closed_form),
    ("likelihood: closed-form bins vs quadrature", _likelihood_bins),
    ("cross moment: Fourier series vs cell quadrature", _cross_moment_paths),
    ("invariant: k*pi/8 squeezing-angle fixed points", _fixed_points),
    ("invariant: sigma -> 0 recovers the input", _small_sigma_limit),
    ("csv: emit/load round trip", _csv_round_trip),
]


def self_test(echo: Callable[[str], None] | None = print) -> list[CheckResult]:
    results = []
    for name, fn in CHECKS:
        try:
            res = CheckResult(name, True, fn())
        except Exception as exc:  # report and keep going
            res = CheckResult(name, False, f"{type(exc).__name__}: {exc}")
        results.append(res)
        if echo:
            echo(f"[{'PASS' if res.passed else 'FAIL'}] {name}: {res.detail}")
    return results
