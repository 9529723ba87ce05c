"""Scenario-driven closed-loop runner.

A scenario JSON declares the reference signal, reference model, estimator,
plant, horizon, and evaluation window; `run_scenario` wires them into the
adaptive loop (controller -> plant -> regressor -> estimator) and records a
per-step trace plus MAE / maxAE summary metrics.  Runs are reproducible:
the same config and seed give a byte-identical trace file.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .adaptive import NumericalBreakdownError, RegressorGenerator, make_estimator
from .controller import PidController, as_gains
from .lti import RationalFilter, ReferenceModel
from .plant import BoucWenParams, BoucWenPlant, LtiPlant

log = logging.getLogger(__name__)

TRACE_COLUMNS = [
    "k", "t", "r", "y", "u", "e", "ehat",
    "kp", "ki", "kd", "pmin", "pmax", "deadzone",
]

ESTIMATOR_MODES = ("fixed", "noforget", "ef", "df", "er")


class ConfigError(ValueError):
    """Scenario configuration failed validation."""


@dataclass
class ReferenceSpec:
    kind: str = "constant"
    amplitude: float = 1.0
    offset: float = 0.0
    frequency: float = 0.1
    period: float = 40.0
    levels: list = field(default_factory=lambda: [20.0, 35.0, 50.0, 65.0])
    interval: float = 20.0

    def signal(self):
        if self.kind == "constant":
            return lambda t: self.offset
        if self.kind == "sine":
            w = 2.0 * math.pi * self.frequency
            return lambda t: self.offset + self.amplitude * math.sin(w * t)
        if self.kind == "square":
            half = self.period / 2.0
            return lambda t: self.offset + (
                self.amplitude if (t % self.period) < half else -self.amplitude
            )
        if self.kind == "staircase":
            levels = list(self.levels)
            last = len(levels) - 1
            return lambda t: levels[min(int(t // self.interval), last)]
        raise ConfigError(f"unknown reference kind {self.kind!r}")


@dataclass
class GmSpec:
    tau: float = 1.0
    dc_gain: float = 0.95
    discretization: str = "euler"
    num: list | None = None
    den: list | None = None

    def build(self, ts: float) -> ReferenceModel:
        if self.num is not None or self.den is not None:
            if self.num is None or self.den is None:
                raise ConfigError("explicit gm needs both num and den")
            return ReferenceModel(RationalFilter(self.num, self.den))
        return ReferenceModel.first_order(
            ts, tau=self.tau, dc_gain=self.dc_gain, discretization=self.discretization
        )


@dataclass
class EstimatorSpec:
    mode: str = "df"
    mu: float = 0.9
    epsilon: float = 1e-3
    p0: float = 100.0
    r0: float = 0.01
    r_inf: float = 0.01
    theta0: list = field(default_factory=lambda: [0.1, 0.1, 0.01])

    def build(self):
        if self.mode == "fixed":
            return None
        return make_estimator(
            self.mode, self.theta0, mu=self.mu, epsilon=self.epsilon,
            p0=self.p0, r0=self.r0, r_inf=self.r_inf,
        )


@dataclass
class PlantSpec:
    kind: str = "lti"
    num: list = field(default_factory=lambda: [0.0, 0.0095])
    den: list = field(default_factory=lambda: [1.0, -0.99])
    params: dict = field(default_factory=dict)
    noise_std: float = 0.0
    saturation: list | None = None
    schedule: list = field(default_factory=list)

    def build(self, ts: float):
        sat = None if self.saturation is None else tuple(self.saturation)
        if self.kind == "lti":
            return LtiPlant(
                RationalFilter(self.num, self.den),
                noise_std=self.noise_std, saturation=sat, schedule=self.schedule,
            )
        if self.kind == "bouc_wen":
            return BoucWenPlant(
                BoucWenParams(**self.params), ts=ts,
                noise_std=self.noise_std, saturation=sat, schedule=self.schedule,
            )
        raise ConfigError(f"unknown plant kind {self.kind!r}")


@dataclass
class ScenarioConfig:
    name: str = "scenario"
    duration: float = 80.0
    ts: float = 0.01
    reference: ReferenceSpec = field(default_factory=ReferenceSpec)
    gm: GmSpec = field(default_factory=GmSpec)
    estimator: EstimatorSpec = field(default_factory=EstimatorSpec)
    plant: PlantSpec = field(default_factory=PlantSpec)
    trials: int = 1
    seeds: list | None = None
    evaluation_window: list = field(default_factory=lambda: [0.0, 80.0])

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.duration <= 0:
            raise ConfigError("duration must be positive")
        if self.ts <= 0:
            raise ConfigError("ts must be positive")
        if len(self.evaluation_window) != 2:
            raise ConfigError("evaluation_window must be [t_start, t_end]")
        lo, hi = self.evaluation_window
        if not (0.0 <= lo < hi <= self.duration + 1e-9):
            raise ConfigError("evaluation_window must lie inside [0, duration]")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.estimator.mode not in ESTIMATOR_MODES:
            raise ConfigError(f"unknown estimator mode {self.estimator.mode!r}")

    def trial_seeds(self) -> list[int]:
        if self.seeds is not None:
            if len(self.seeds) < self.trials:
                raise ConfigError("fewer seeds than trials")
            return [int(s) for s in self.seeds[: self.trials]]
        return list(range(self.trials))

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        try:
            return cls(
                name=raw.get("name", "scenario"),
                duration=float(raw.get("duration", 80.0)),
                ts=float(raw.get("ts", 0.01)),
                reference=ReferenceSpec(**raw.get("reference", {})),
                gm=GmSpec(**raw.get("gm", {})),
                estimator=EstimatorSpec(**raw.get("estimator", {})),
                plant=PlantSpec(**raw.get("plant", {})),
                trials=int(raw.get("trials", 1)),
                seeds=raw.get("seeds"),
                evaluation_window=list(
                    raw.get("evaluation_window", [0.0, float(raw.get("duration", 80.0))])
                ),
            )
        except TypeError as exc:
            raise ConfigError(f"bad scenario field: {exc}") from exc

    @classmethod
    def from_json(cls, path) -> "ScenarioConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid scenario JSON: {exc}") from exc
        return cls.from_dict(raw)


class RunTrace:
    """Per-step record of one closed-loop run plus summary metrics."""

    def __init__(self, columns: dict, window: tuple[float, float], name: str, seed: int):
        self.columns = columns
        self.window = window
        self.name = name
        self.seed = seed

    def __getitem__(self, key: str) -> np.ndarray:
        return self.columns[key]

    def __len__(self) -> int:
        return len(self.columns["k"])

    def window_mask(self) -> np.ndarray:
        t = self.columns["t"]
        return (t >= self.window[0]) & (t < self.window[1])

    @property
    def abs_error(self) -> np.ndarray:
        return np.abs(self.columns["r"] - self.columns["y"])

    @property
    def mae(self) -> float:
        return float(np.mean(self.abs_error[self.window_mask()]))

    @property
    def max_ae(self) -> float:
        return float(np.max(self.abs_error[self.window_mask()]))

    def summary(self) -> dict:
        return {
            "name": self.name,
            "seed": self.seed,
            "steps": len(self),
            "window": list(self.window),
            "mae": self.mae,
            "max_ae": self.max_ae,
            "theta_final": [float(self.columns[g][-1]) for g in ("kp", "ki", "kd")],
        }

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            cols = [self.columns[c] for c in TRACE_COLUMNS]
            for row in zip(*cols):
                writer.writerow(
                    [str(int(row[0]))]
                    + [repr(float(v)) for v in row[1:-1]]
                    + [str(int(row[-1]))]
                )

    @classmethod
    def load_csv(cls, path, window=(0.0, math.inf), name="trace", seed=0) -> "RunTrace":
        data = {c: [] for c in TRACE_COLUMNS}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                for c in TRACE_COLUMNS:
                    data[c].append(float(row[c]))
        columns = {c: np.array(v) for c, v in data.items()}
        return cls(columns, tuple(window), name, seed)


def run_scenario(cfg: ScenarioConfig, seed: int | None = None) -> RunTrace:
    """Execute one closed-loop trial and return its trace.

    Per step: read r(k), form e(k) = r(k) - y(k) from the measured output,
    apply u(k) from the current gains, feed the (y(k), u(k)) sample to the
    regressor and estimator (the next step uses the updated gains), then
    advance the plant to produce y(k+1).
    """
    cfg.validate()
    if seed is None:
        seed = cfg.trial_seeds()[0]
    n_steps = int(round(cfg.duration / cfg.ts))
    ts = cfg.ts

    gm = cfg.gm.build(ts)
    reference = cfg.reference.signal()
    plant = cfg.plant.build(ts)
    plant.reset(seed=seed)
    estimator = cfg.estimator.build()
    theta0 = as_gains(cfg.estimator.theta0)
    controller = PidController(theta0, ts)
    regressor = RegressorGenerator(gm.filter, ts)

    cols = {c: np.empty(n_steps) for c in TRACE_COLUMNS}
    cols["k"] = np.arange(n_steps, dtype=float)
    cols["deadzone"] = np.zeros(n_steps)

    theta = theta0
    warned_negative = False
    y = 0.0
    for k in range(n_steps):
        t = k * ts
        r = reference(t)
        e = r - y
        u = controller.step(e)
        phi, d = regressor.step(y, u)
        if estimator is None:
            ehat = float(phi @ theta - d)
            pmin = pmax = math.nan
            deadzone = False
        else:
            try:
                ehat = estimator.update(phi, d)
            except NumericalBreakdownError as exc:
                raise NumericalBreakdownError(f"step {k} (t={t:.3f}s): {exc}") from exc
            theta = estimator.theta
            controller.gains = theta
            pmin, pmax = estimator.eigenvalues()
            deadzone = estimator.deadzone_active
            if not warned_negative and np.any(theta < 0.0):
                log.warning(
                    "%s: gains left the positive orthant at t=%.2fs: %s",
                    cfg.name, t, np.array2string(theta, precision=4),
                )
                warned_negative = True
        cols["t"][k] = t
        cols["r"][k] = r
        cols["y"][k] = y
        cols["u"][k] = u
        cols["e"][k] = e
        cols["ehat"][k] = ehat
        cols["kp"][k], cols["ki"][k], cols["kd"][k] = theta
        cols["pmin"][k] = pmin
        cols["pmax"][k] = pmax
        cols["deadzone"][k] = float(deadzone)
        y = plant.step(u, t)

    window = (float(cfg.evaluation_window[0]), float(cfg.evaluation_window[1]))
    return RunTrace(cols, window, cfg.name, seed)


def method_variants(base: ScenarioConfig, methods=ESTIMATOR_MODES) -> list[ScenarioConfig]:
    """Copies of a scenario differing only in estimator mode."""
    out = []
    for mode in methods:
        est = replace(base.estimator, mode=mode)
        out.append(replace(base, name=f"{base.name}/{mode}", estimator=est))
    return out


def compare_methods(cfgs: list[ScenarioConfig]) -> list[dict]:
    """Run each scenario over its trials; summarize the MAE distribution.

    Returns one row per scenario with min/q1/median/q3/max of MAE and
    maxAE over the evaluation window.
    """
    table = []
    for cfg in cfgs:
        maes, maxes = [], []
        for seed in cfg.trial_seeds():
            trace = run_scenario(cfg, seed=seed)
            maes.append(trace.mae)
            maxes.append(trace.max_ae)
        maes_arr = np.array(maes)
        row = {
            "name": cfg.name,
            "mode": cfg.estimator.mode,
            "trials": cfg.trials,
            "mae_min": float(maes_arr.min()),
            "mae_q1": float(np.percentile(maes_arr, 25)),
            "mae_median": float(np.median(maes_arr)),
            "mae_q3": float(np.percentile(maes_arr, 75)),
            "mae_max": float(maes_arr.max()),
            "maxae_median": float(np.median(maxes)),
        }
        table.append(row)
    return table


def mu_sweep(base: ScenarioConfig, mus) -> list[dict]:
    """Forgetting-factor sweep for the directional-forgetting estimator."""
    cfgs = []
    for mu in mus:
        est = replace(base.estimator, mode="df", mu=float(mu))
        cfgs.append(replace(base, name=f"{base.name}/mu={mu}", estimator=est))
    rows = compare_methods(cfgs)
    for row, mu in zip(rows, mus):
        row["mu"] = float(mu)
    return rows
