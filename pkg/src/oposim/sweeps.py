"""Parameter sweeps, tabular output and run manifests."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Any

import numpy as np

from ._kernels import BACKEND
from .cavity import CAVITY_MODELS, oscillator_noise
from .entanglement import dgcz_value, entanglement_report
from .errors import ConfigError, OPOError
from .fluctuations import PROPAGATOR_MODES
from .medium import GainMedium
from .steadystate import (CavityConfig, continuation_guess, solve_steady_state,
                          threshold_power)

log = logging.getLogger("oposim")

SWEEP_TOPOLOGIES = ("dropo", "tropo", "tropo_general")
DEFAULT_KAPPA = {2: 0.5, 3: 3.0}

CLASSICAL_COLUMNS = ("sigma", "P0in", "P0_intra", "P1_intra", "P1out", "P0out", "eta")
NOISE_COLUMNS = ("sigma", "var_p_s0", "var_p_s1", "var_p_s2", "var_q_s0", "var_q_s1",
                 "var_q_s2", "var_p_minus", "var_q_plus", "dgcz", "nu_0", "nu_1",
                 "nu_01", "nu_12", "nu_sa0", "nu_sa1", "nu_sa01", "nu_sa12", "nu_sa",
                 "nu_2", "nu_02", "var_q_minus")
FREQ_COLUMNS = ("omega_over_bw", "var_p_s_minus", "var_q_s_minus", "product", "dgcz")


@dataclass
class SweepConfig:
    """Everything needed to reproduce a sweep.

    Reflectivities are power reflectivities. ``R0`` is only used by the
    ``tropo_general`` topology; ``tropo`` sets ``R0 = R1``. With
    ``kappa = 0`` there is no threshold and the sigma grid is read as the
    absolute pump power.
    """

    topology: str = "dropo"
    order: int = 2
    kappa: float | None = None
    R1: float = 0.85
    R0: float | None = None
    Rp0: float = 1.0
    Rp1: float = 1.0
    roundtrip_time: float = 1.0
    sigma_min: float = 1.05
    sigma_max: float = 10.0
    sigma_points: int = 100
    sigma: float = 2.0
    omega_over_bw: float = 0.5
    omega_min: float = 0.02
    omega_max: float = 3.0
    omega_points: int = 150
    propagator_mode: str = "ordered_product"
    cavity_model: str = "ring"
    samples: int = 400
    carrier_frame: bool = True
    below_threshold: bool = False
    workers: int = 1
    strict: bool = False

    def __post_init__(self):
        if self.kappa is None:
            self.kappa = DEFAULT_KAPPA.get(self.order, 0.5)

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        try:
            cfg = cls(**data)
            cfg.validate()
        except TypeError as exc:
            raise ConfigError(f"invalid configuration value: {exc}") from exc
        return cfg

    @classmethod
    def from_json(cls, path) -> "SweepConfig":
        return cls.from_dict(load_config_dict(path))

    def validate(self) -> None:
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.topology in SWEEP_TOPOLOGIES, f"topology must be one of {SWEEP_TOPOLOGIES}")
        need(self.order in (2, 3), "order must be 2 or 3")
        need(isinstance(self.kappa, (int, float)) and math.isfinite(self.kappa)
             and self.kappa >= 0, "kappa must be a nonnegative number")
        for name in ("roundtrip_time", "sigma", "omega_over_bw"):
            v = getattr(self, name)
            need(isinstance(v, (int, float)) and math.isfinite(v) and v > 0,
                 f"{name} must be a positive number")
        need(0 < self.R1 < 1, "R1 must be in (0, 1)")
        if self.topology == "tropo_general":
            need(self.R0 is not None and 0 < self.R0 < 1, "tropo_general needs R0 in (0, 1)")
        need(0 < self.Rp0 <= 1 and 0 < self.Rp1 <= 1, "Rp0, Rp1 must be in (0, 1]")
        need(isinstance(self.sigma_points, int) and self.sigma_points >= 1,
             "sigma_points must be a positive integer")
        need(0 < self.sigma_min <= self.sigma_max, "need 0 < sigma_min <= sigma_max")
        need(isinstance(self.omega_points, int) and self.omega_points >= 1,
             "omega_points must be a positive integer")
        need(0 <= self.omega_min <= self.omega_max, "need 0 <= omega_min <= omega_max")
        need(self.propagator_mode in PROPAGATOR_MODES,
             f"propagator_mode must be one of {PROPAGATOR_MODES}")
        need(self.cavity_model in CAVITY_MODELS, f"cavity_model must be one of {CAVITY_MODELS}")
        need(isinstance(self.samples, int) and self.samples >= 2, "samples must be >= 2")
        need(isinstance(self.workers, int) and self.workers >= 1, "workers must be >= 1")

    @property
    def medium(self) -> GainMedium:
        return GainMedium(self.order, float(self.kappa))

    @property
    def solver_topology(self) -> str:
        return "dropo" if self.topology == "dropo" else "tropo"

    @property
    def cavity(self) -> CavityConfig:
        if self.topology == "dropo":
            R0 = 0.0
        elif self.topology == "tropo":
            R0 = self.R1
        else:
            R0 = self.R0
        return CavityConfig(R0=R0, R1=self.R1, Rp0=self.Rp0, Rp1=self.Rp1,
                            roundtrip_time=self.roundtrip_time)

    def pump(self, sigma: float, threshold: float) -> float:
        return sigma if math.isinf(threshold) else sigma * threshold

    def sigmas(self) -> np.ndarray:
        return np.linspace(self.sigma_min, self.sigma_max, self.sigma_points)

    def omegas_over_bw(self) -> np.ndarray:
        return np.linspace(self.omega_min, self.omega_max, self.omega_points)


def load_config_dict(path) -> dict:
    """Raw key/value pairs of a JSON config file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


@dataclass
class SweepResult:
    """Rows of a sweep plus the bookkeeping that goes into the manifest."""

    kind: str
    columns: tuple
    rows: list
    config: SweepConfig
    flagged: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float).reshape(len(self.rows), len(self.columns))


# workers -------------------------------------------------------------------

def _classical_chunk(cfg: SweepConfig, sigmas):
    medium, cavity, top = cfg.medium, cfg.cavity, cfg.solver_topology
    Pth = threshold_power(medium, cavity, top)
    rows, flagged, guess = [], [], None
    for sig in sigmas:
        try:
            st = solve_steady_state(cfg.pump(sig, Pth), medium, cavity, top, guess)
            guess = continuation_guess(st, medium, cavity, top)
            rows.append((float(sig), st.P0in, st.P0_intra, st.P1_intra, st.P1out,
                         st.P0out, st.efficiency))
        except OPOError as exc:
            log.warning("sigma=%g failed: %s", sig, exc)
            flagged.append({"sigma": float(sig), "error": f"{type(exc).__name__}: {exc}"})
            rows.append((float(sig),) + (math.nan,) * (len(CLASSICAL_COLUMNS) - 1))
    return rows, flagged


def _noise_chunk(cfg: SweepConfig, sigmas):
    medium, cavity, top = cfg.medium, cfg.cavity, cfg.solver_topology
    Pth = threshold_power(medium, cavity, top)
    omega = cfg.omega_over_bw * cavity.bandwidth
    rows, flagged, guess = [], [], None
    for sig in sigmas:
        try:
            st = solve_steady_state(cfg.pump(sig, Pth), medium, cavity, top, guess)
            guess = continuation_guess(st, medium, cavity, top)
            pt = oscillator_noise(st, medium, cavity, omega, cfg.propagator_mode,
                                  cfg.cavity_model, cfg.samples, cfg.carrier_frame)
            row = entanglement_report(pt.covariance).as_row()
            row["sigma"] = float(sig)
            rows.append(row)
        except OPOError as exc:
            log.warning("sigma=%g failed: %s", sig, exc)
            flagged.append({"sigma": float(sig), "error": f"{type(exc).__name__}: {exc}"})
            rows.append({"sigma": float(sig)})
    return rows, flagged


def _run_chunks(fn, cfg: SweepConfig, values):
    chunks = [c for c in np.array_split(np.asarray(values, dtype=float),
                                        min(cfg.workers, len(values))) if c.size]
    if cfg.workers <= 1 or len(chunks) <= 1:
        results = [fn(cfg, c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(fn, [cfg] * len(chunks), chunks))
    rows, flagged = [], []
    for r, f in results:
        rows.extend(r)
        flagged.extend(f)
    return rows, flagged


def run_classical_sweep(cfg: SweepConfig) -> SweepResult:
    """Classical operating points on the configured sigma grid.

    Each worker takes a contiguous block of sigma values and continues the
    solution branch from one point to the next. Failed points are kept as
    NaN rows and listed in ``flagged``.
    """
    cfg.validate()
    rows, flagged = _run_chunks(_classical_chunk, cfg, cfg.sigmas())
    return SweepResult("classical", CLASSICAL_COLUMNS, rows, cfg, flagged,
                       {"threshold": threshold_power(cfg.medium, cfg.cavity,
                                                     cfg.solver_topology)})


def run_noise_sweep(cfg: SweepConfig) -> SweepResult:
    """Output noise and entanglement witnesses on the sigma grid."""
    cfg.validate()
    if (cfg.sigma_min <= 1 or cfg.kappa == 0) and not cfg.below_threshold:
        raise ConfigError("noise sweeps need sigma_min > 1 (and kappa > 0) "
                          "unless below_threshold is set")
    dict_rows, flagged = _run_chunks(_noise_chunk, cfg, cfg.sigmas())
    extra_cols = []
    for r in dict_rows:
        for k in r:
            if k not in NOISE_COLUMNS and k not in extra_cols:
                extra_cols.append(k)
    columns = NOISE_COLUMNS + tuple(extra_cols)
    rows = [tuple(float(r.get(c, math.nan)) for c in columns) for r in dict_rows]
    return SweepResult("noise", columns, rows, cfg, flagged)


def _half_width(x, y):
    """Half width at half depth of a dip ``y(x)`` rising from ``y[0]`` to 1."""
    y0 = y[0]
    half = 0.5 * (y0 + 1.0)
    above = np.nonzero(y >= half)[0]
    if y0 >= 1 or above.size == 0 or above[0] == 0:
        return math.nan
    i = above[0]
    return float(x[i - 1] + (half - y[i - 1]) * (x[i] - x[i - 1]) / (y[i] - y[i - 1]))


def ring_difference_noise(omega_over_bw, R, tau=1.0):
    """Signal-idler difference noise of the lossless ring cavity.

    The difference mode sees unit round-trip gain above threshold, so its
    spectrum depends only on the output coupler.
    """
    w = np.asarray(omega_over_bw) * (1 - R) / tau
    s2 = np.sin(0.5 * w * tau) ** 2
    return 4 * R * s2 / ((1 - R) ** 2 + 4 * R * s2)


def run_frequency_sweep(cfg: SweepConfig) -> SweepResult:
    """Difference-mode noise spectrum at fixed pump ``cfg.sigma``."""
    cfg.validate()
    medium, cavity, top = cfg.medium, cfg.cavity, cfg.solver_topology
    Pth = threshold_power(medium, cavity, top)
    st = solve_steady_state(cfg.pump(cfg.sigma, Pth), medium, cavity, top)
    rows, flagged = [], []
    c = np.zeros(12)
    c[2], c[4] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    d = np.zeros(12)
    d[3], d[5] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    for w in cfg.omegas_over_bw():
        try:
            pt = oscillator_noise(st, medium, cavity, w * cavity.bandwidth,
                                  cfg.propagator_mode, cfg.cavity_model, cfg.samples,
                                  cfg.carrier_frame)
            V = pt.covariance.matrix
            vp, vq = float(c @ V @ c), float(d @ V @ d)
            rows.append((float(w), vp, vq, vp * vq, dgcz_value(V)))
        except OPOError as exc:
            log.warning("omega/bw=%g failed: %s", w, exc)
            flagged.append({"omega_over_bw": float(w), "error": f"{type(exc).__name__}: {exc}"})
            rows.append((float(w),) + (math.nan,) * (len(FREQ_COLUMNS) - 1))
    res = SweepResult("freq", FREQ_COLUMNS, rows, cfg, flagged)
    x, y = res.column("omega_over_bw"), res.column("var_p_s_minus")
    ok = np.isfinite(y)
    res.extra["lorentzian"] = {
        "dip_depth": float(y[ok][0]) if ok.any() else math.nan,
        "half_width_over_bw": _half_width(x[ok], y[ok]) if ok.sum() > 1 else math.nan,
        "max_deviation_from_ring_form": float(np.max(np.abs(
            y[ok] - ring_difference_noise(x[ok], cfg.R1, cfg.roundtrip_time)))) if ok.any()
        else math.nan,
    }
    res.extra["steady_state"] = asdict(st)
    return res


# output --------------------------------------------------------------------

def write_csv(result: SweepResult, path) -> None:
    """Comma separated, header row, ``%.16e`` numbers, ``\\n`` line ends."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(result.columns)
        for row in result.rows:
            w.writerow(["%.16e" % v for v in row])


def read_csv(path) -> tuple[tuple, np.ndarray]:
    """Read a sweep table back as ``(columns, array)``."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        try:
            header = tuple(next(r))
        except StopIteration as exc:
            raise ConfigError(f"{path} is empty") from exc
        data = [[float(v) for v in row] for row in r if row]
    return header, np.array(data, dtype=float).reshape(len(data), len(header))


def code_version() -> dict:
    from . import __version__
    return {"package": "oposim", "version": __version__, "kernel_backend": BACKEND,
            "numpy": np.__version__}


def write_manifest(result: SweepResult, path) -> str:
    """Write ``<path>.manifest.json`` and return its name."""
    target = os.fspath(path) + ".manifest.json"
    doc: dict[str, Any] = {
        "kind": result.kind,
        "config": asdict(result.config),
        "code": code_version(),
        "columns": list(result.columns),
        "rows": len(result.rows),
        "flagged": result.flagged,
    }
    doc.update(result.extra)
    with open(target, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return target
