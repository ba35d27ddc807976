"""Configuration-driven sweeps over coarse-graining size, with CSV and SVG output."""

from __future__ import annotations

import csv
import dataclasses
import enum
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .decoherence import mixing_fraction_isotropic
from .direct import (
    DEFAULT_GRID,
    KnownFrame,
    UnknownFrame,
    frame_averaged_metrics,
    frame_averaged_metrics2,
    reconstruct_single,
    reconstruct_two,
)
from .errors import ConfigError, NonPhysicalError
from .gaussian import SingleModeParams, TwoModeParams, cov_from_params1, cov_from_params2
from .metrics import fidelity1, fidelity2, log_negativity, nonclassical_squeezing
from .mle import MleConfig, mle_estimate_single, mle_estimate_two
from .svg import Series, line_chart

log = logging.getLogger(__name__)


class Experiment(str, enum.Enum):
    FIG2C = "fig2c"
    FIG3 = "fig3"
    FIG4 = "fig4"
    FIG5 = "fig5"
    CUSTOM = "custom"


METHODS = ("DirectKnown", "MLE", "DirectUnknown")
SINGLE_INPUTS = ((0.0, 1.0), (1.0, 1.0), (0.0, 2.0))


def default_sigma_grid() -> list[float]:
    grid = set(np.geomspace(0.01, 2.0, 40).tolist()) | {0.1}
    return sorted(grid)


def default_phi_grid(n: int = 80) -> list[float]:
    # multiples of 8 keep every k*pi/8 on the grid
    return (np.arange(n) * np.pi / n).tolist()


@dataclass
class SweepConfig:
    """Everything a sweep needs.  JSON keys are the field names.

    ``inputs`` holds ``[nbar, r]`` or ``[nbar, r, phi]`` for single-mode
    sweeps and ``[nbar1, nbar2, r]`` or ``[nbar1, nbar2, r, phi]`` when
    ``modes`` is 2.  ``phi_grid`` is only used by fig2c.
    """

    experiment: Experiment = Experiment.CUSTOM
    sigma_grid: list[float] = field(default_factory=default_sigma_grid)
    inputs: list[list[float]] = field(default_factory=lambda: [list(p) for p in SINGLE_INPUTS])
    modes: int = 1
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    phi_grid: list[float] = field(default_factory=default_phi_grid)
    grid_size: int = DEFAULT_GRID
    known_optimize: bool = True
    mle: MleConfig = field(default_factory=lambda: MleConfig(restarts=4))
    out_dir: str = "out"
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        try:
            self.experiment = Experiment(self.experiment)
        except ValueError as exc:
            raise ConfigError(f"unknown experiment {self.experiment!r}") from exc
        if not self.sigma_grid:
            raise ConfigError("sigma_grid must be nonempty")
        if any(not (isinstance(s, (int, float)) and math.isfinite(s) and s > 0) for s in self.sigma_grid):
            raise ConfigError("sigma_grid values must be finite and > 0")
        if not self.inputs:
            raise ConfigError("inputs must be nonempty")
        if self.modes not in (1, 2):
            raise ConfigError("modes must be 1 or 2")
        lengths = (2, 3) if self.modes == 1 else (3, 4)
        for p in self.inputs:
            if len(p) not in lengths or any(not math.isfinite(float(v)) for v in p):
                raise ConfigError(f"input {p!r} needs {lengths[0]} or {lengths[1]} finite numbers")
            if any(float(v) < 0 for v in p[: lengths[0]]):
                raise ConfigError(f"input {p!r} has negative nbar or r")
        bad = set(self.methods) - set(METHODS)
        if bad or not self.methods:
            raise ConfigError(f"methods must be a nonempty subset of {METHODS}, got {self.methods!r}")
        if self.experiment is Experiment.FIG2C and not self.phi_grid:
            raise ConfigError("phi_grid must be nonempty")
        if self.grid_size < 4:
            raise ConfigError("grid_size must be >= 4")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if not isinstance(self.threads, int) or self.threads < 1:
            raise ConfigError("threads must be a positive integer")
        if isinstance(self.mle, dict):
            try:
                self.mle = MleConfig(**self.mle)
            except TypeError as exc:
                raise ConfigError(f"bad mle config: {exc}") from exc

    @classmethod
    def for_experiment(cls, experiment: Experiment | str, **overrides) -> "SweepConfig":
        exp = Experiment(experiment)
        base: dict[str, Any] = {"experiment": exp}
        if exp is Experiment.FIG2C:
            base.update(inputs=[[0.0, 1.0]], methods=["DirectUnknown"])
        elif exp is Experiment.FIG3:
            base.update(methods=["MLE"])
        elif exp is Experiment.FIG5:
            base.update(modes=2, inputs=[[n, n, r] for n, r in SINGLE_INPUTS])
        base.update(overrides)
        return cls(**base)

    @classmethod
    def from_dict(cls, data: dict, experiment: Experiment | str | None = None) -> "SweepConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        exp = experiment if experiment is not None else data.pop("experiment", Experiment.CUSTOM)
        data.pop("experiment", None)
        try:
            return cls.for_experiment(exp, **data)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path: str | Path, experiment: Experiment | str | None = None) -> "SweepConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(data, experiment)


@dataclass
class SweepRecord:
    experiment: str
    input_index: int
    nbar1: float
    nbar2: float | None
    r: float
    phi: float
    sigma: float
    method: str
    fidelity: float | None = None
    nonclassicality: float | None = None
    angle_deviation: float | None = None
    y: float | None = None
    est_nbar1: float | None = None
    est_nbar2: float | None = None
    est_r: float | None = None
    est_phi: float | None = None
    nonphysical: bool = False
    error: str = ""
    # excluded from CSV so reruns stay byte-identical
    wall_time: float = field(default=0.0, compare=False)

    def sort_key(self):
        return (self.input_index, self.phi, self.sigma, METHODS.index(self.method))


CSV_FIELDS = [f.name for f in dataclasses.fields(SweepRecord) if f.name != "wall_time"]
_FLOAT_FIELDS = {
    f.name for f in dataclasses.fields(SweepRecord) if "float" in str(f.type) and f.name != "wall_time"
}


def _cell_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence([seed, *key]).generate_state(1)[0])


@dataclass(frozen=True)
class _Cell:
    input_index: int
    params: SingleModeParams | TwoModeParams
    sigma: float
    sigma_index: int
    method: str


def _single_cell(cfg: SweepConfig, cell: _Cell, rec: SweepRecord) -> None:
    p = cell.params
    if cell.method == "DirectUnknown" and cfg.experiment is not Experiment.FIG2C:
        avg = frame_averaged_metrics(p.nbar, p.r, cell.sigma, cfg.grid_size)
        rec.fidelity, rec.nonclassicality = avg.fidelity, avg.nonclassicality
        return
    if cell.method == "MLE":
        mcfg = dataclasses.replace(cfg.mle, seed=_cell_seed(cfg.seed, cell.input_index, cell.sigma_index))
        est = mle_estimate_single(p, cell.sigma, mcfg).params
        rec.y = mixing_fraction_isotropic(est, p)
    else:
        frame = KnownFrame(optimize=cfg.known_optimize) if cell.method == "DirectKnown" else UnknownFrame()
        res = reconstruct_single(p, cell.sigma, frame)
        est = res.params
        rec.angle_deviation = res.angle_deviation
    rec.est_nbar1, rec.est_r, rec.est_phi = est.nbar, est.r, est.phi
    rec.fidelity = fidelity1(cov_from_params1(p), cov_from_params1(est))
    rec.nonclassicality = nonclassical_squeezing(est)


def _two_cell(cfg: SweepConfig, cell: _Cell, rec: SweepRecord) -> None:
    p = cell.params
    if cell.method == "DirectUnknown":
        avg = frame_averaged_metrics2(p.nbar1, p.nbar2, p.r, cell.sigma, cfg.grid_size)
        rec.fidelity, rec.nonclassicality = avg.fidelity, avg.nonclassicality
        return
    if cell.method == "MLE":
        mcfg = dataclasses.replace(cfg.mle, seed=_cell_seed(cfg.seed, cell.input_index, cell.sigma_index))
        est = mle_estimate_two(p, cell.sigma, mcfg).params
    else:
        res = reconstruct_two(p, cell.sigma, KnownFrame(optimize=cfg.known_optimize))
        est = res.params
        rec.angle_deviation = res.angle_deviation
    rec.est_nbar1, rec.est_nbar2, rec.est_r, rec.est_phi = est.nbar1, est.nbar2, est.r, est.phi
    rec.fidelity = fidelity2(cov_from_params2(p), cov_from_params2(est))
    rec.nonclassicality = log_negativity(est)


def _run_cell(cfg: SweepConfig, cell: _Cell) -> SweepRecord:
    p = cell.params
    two = isinstance(p, TwoModeParams)
    rec = SweepRecord(
        experiment=cfg.experiment.value,
        input_index=cell.input_index,
        nbar1=p.nbar1 if two else p.nbar,
        nbar2=p.nbar2 if two else None,
        r=p.r,
        phi=p.phi,
        sigma=cell.sigma,
        method=cell.method,
    )
    start = time.perf_counter()
    try:
        (_two_cell if two else _single_cell)(cfg, cell, rec)
    except NonPhysicalError as exc:
        rec.nonphysical, rec.error = True, f"NonPhysicalError: {exc}"
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    rec.wall_time = time.perf_counter() - start
    if rec.error:
        log.warning("cell %s sigma=%g %s failed: %s", cell.input_index, cell.sigma, cell.method, rec.error)
    return rec


def _parse_input(cfg: SweepConfig, vals: list[float]) -> SingleModeParams | TwoModeParams:
    vals = [float(v) for v in vals]
    if cfg.modes == 1:
        return SingleModeParams(*vals)
    return TwoModeParams(*vals)


def _cells(cfg: SweepConfig) -> list[_Cell]:
    cells = []
    for i, raw in enumerate(cfg.inputs):
        base = _parse_input(cfg, raw)
        if cfg.experiment is Experiment.FIG2C:
            variants = [SingleModeParams(base.nbar, base.r, phi) for phi in cfg.phi_grid]
        else:
            variants = [base]
        for k, p in enumerate(variants):
            idx = i * len(variants) + k if cfg.experiment is Experiment.FIG2C else i
            for j, s in enumerate(cfg.sigma_grid):
                for m in cfg.methods:
                    cells.append(_Cell(i, p, float(s), idx * len(cfg.sigma_grid) + j, m))
    return cells


def run_sweep(cfg: SweepConfig) -> list[SweepRecord]:
    """Evaluate every (input, sigma, method) cell; output order is independent of scheduling."""
    cfg.validate()
    cells = _cells(cfg)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            records = list(pool.map(lambda c: _run_cell(cfg, c), cells))
    else:
        records = [_run_cell(cfg, c) for c in cells]
    return sorted(records, key=SweepRecord.sort_key)


def run_fig2c(cfg: SweepConfig | None = None) -> list[SweepRecord]:
    return run_sweep(cfg or SweepConfig.for_experiment(Experiment.FIG2C))


def run_fig3(cfg: SweepConfig | None = None) -> list[SweepRecord]:
    return run_sweep(cfg or SweepConfig.for_experiment(Experiment.FIG3))


def run_fig4(cfg: SweepConfig | None = None) -> list[SweepRecord]:
    return run_sweep(cfg or SweepConfig.for_experiment(Experiment.FIG4))


def run_fig5(cfg: SweepConfig | None = None) -> list[SweepRecord]:
    return run_sweep(cfg or SweepConfig.for_experiment(Experiment.FIG5))


# --- serialization -----------------------------------------------------------


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def emit_csv(records: Iterable[SweepRecord], path: str | Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_FIELDS)
            for rec in records:
                writer.writerow([_format(getattr(rec, name)) for name in CSV_FIELDS])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def load_csv(path: str | Path) -> list[SweepRecord]:
    path = Path(path)
    try:
        with path.open(encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    out = []
    for row in rows:
        kw: dict[str, Any] = {}
        for name in CSV_FIELDS:
            text = row[name]
            if name in _FLOAT_FIELDS:
                kw[name] = float(text) if text != "" else None
            elif name == "input_index":
                kw[name] = int(text)
            elif name == "nonphysical":
                kw[name] = text == "1"
            else:
                kw[name] = text
        out.append(SweepRecord(**kw))
    return out


_DASH = {"DirectKnown": "dotdash", "MLE": "solid", "DirectUnknown": "dashed"}
_NONCLASSICAL_LABEL = {1: "nonclassical squeezing r_nc", 2: "logarithmic negativity E_N"}


def _input_label(rec: SweepRecord) -> str:
    if rec.nbar2 is None:
        return f"(nbar, r) = ({rec.nbar1:g}, {rec.r:g})"
    return f"(nbar1, nbar2, r) = ({rec.nbar1:g}, {rec.nbar2:g}, {rec.r:g})"


def _series(records: list[SweepRecord], attr: str) -> list[Series]:
    groups: dict[tuple, list[SweepRecord]] = {}
    for rec in records:
        groups.setdefault((rec.input_index, rec.method), []).append(rec)
    out = []
    for (_, method), recs in sorted(groups.items(), key=lambda kv: (kv[0][0], METHODS.index(kv[0][1]))):
        recs = sorted(recs, key=lambda r: r.sigma)
        ys = [getattr(r, attr) if getattr(r, attr) is not None else float("nan") for r in recs]
        out.append(Series(f"{_input_label(recs[0])} {method}", [r.sigma for r in recs], ys, _DASH[method]))
    return out


def emit_svg(records: list[SweepRecord], out_dir: str | Path, experiment: Experiment | str) -> list[Path]:
    """Write the chart(s) for ``experiment``; returns the written paths."""
    exp = Experiment(experiment)
    out_dir = Path(out_dir)
    charts: list[tuple[str, str]] = []
    if exp is Experiment.FIG2C:
        sigmas = sorted({r.sigma for r in records})
        picks = sorted({sigmas[int(round(k * (len(sigmas) - 1) / 4))] for k in range(5)}) if sigmas else []
        series = []
        for s in picks:
            recs = sorted((r for r in records if r.sigma == s), key=lambda r: r.phi)
            ys = [r.angle_deviation if r.angle_deviation is not None else float("nan") for r in recs]
            series.append(Series(f"sigma = {s:.3g}", [r.phi for r in recs], ys))
        charts.append((
            "fig2c.svg",
            line_chart(series, "Squeezing-angle difference, input vs estimate",
                       "input squeezing angle phi_i", "angle difference"),
        ))
    elif exp is Experiment.FIG3:
        charts.append((
            "fig3.svg",
            line_chart(_series(records, "y"), "Fraction y of the input state", "coarse-graining size sigma", "y"),
        ))
    else:
        modes = 2 if any(r.nbar2 is not None for r in records) else 1
        name = exp.value
        charts.append((
            f"{name}_fidelity.svg",
            line_chart(_series(records, "fidelity"), "Fidelity between input and reconstructed state",
                       "coarse-graining size sigma", "fidelity F"),
        ))
        charts.append((
            f"{name}_nonclassicality.svg",
            line_chart(_series(records, "nonclassicality"), "Nonclassicality of the reconstructed state",
                       "coarse-graining size sigma", _NONCLASSICAL_LABEL[modes]),
        ))
    paths = []
    for fname, text in charts:
        path = out_dir / fname
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        paths.append(path)
    return paths


def write_outputs(cfg: SweepConfig, records: list[SweepRecord]) -> list[Path]:
    out = Path(cfg.out_dir)
    csv_path = emit_csv(records, out / f"{cfg.experiment.value}.csv")
    return [csv_path, *emit_svg(records, out, cfg.experiment)]
