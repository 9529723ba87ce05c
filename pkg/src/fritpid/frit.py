"""Offline FRIT: tune PID gains from one closed-loop experiment.

Given recorded (u0, y0, r) and a reference model Gm, the fictitious reference

    r_tilde(theta, k) = C(theta)^-1 u0(k) + y0(k)

is the reference that would have produced the recorded data under C(theta).
The model-reference cost sum[y0 - Gm r_tilde]^2 is nonconvex in theta, so the
tuner solves its linear-regression surrogate sum[phi^T theta - d]^2 by batch
least squares instead and keeps the nonconvex cost as an evaluation metric.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .adaptive import RegressorGenerator
from .controller import as_gains, pid_filter
from .lti import ReferenceModel

PROPERNESS_TOL = 1e-9
CONDITION_LIMIT = 1e12


class InverseNotProperError(ValueError):
    """C(theta) has a (near-)zero constant numerator coefficient, so its
    exact inverse is not realizable."""


class UnstableInverseWarning(UserWarning):
    """C(theta)^-1 has a pole outside the unit circle; the fictitious
    reference is still returned but may grow along the record."""


class RankDeficientError(RuntimeError):
    """The regressor normal matrix is (near-)singular: the experiment does
    not carry enough information to tune three gains."""


@dataclass
class ClosedLoopDataset:
    """One recorded closed-loop experiment (input, output, reference)."""

    u0: np.ndarray
    y0: np.ndarray
    r: np.ndarray
    ts: float

    def __post_init__(self):
        self.u0 = np.asarray(self.u0, dtype=float).reshape(-1)
        self.y0 = np.asarray(self.y0, dtype=float).reshape(-1)
        self.r = np.asarray(self.r, dtype=float).reshape(-1)
        n = len(self.u0)
        if n < 2 or len(self.y0) != n or len(self.r) != n:
            raise ValueError("u0, y0, r must have equal length >= 2")
        if not (
            np.all(np.isfinite(self.u0))
            and np.all(np.isfinite(self.y0))
            and np.all(np.isfinite(self.r))
        ):
            raise ValueError("dataset contains non-finite samples")
        if self.ts <= 0:
            raise ValueError("ts must be positive")

    def __len__(self) -> int:
        return len(self.u0)

    def save(self, path) -> None:
        """Write `k,r,u,y` rows plus a `.json` sidecar holding ts."""
        path = Path(path)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "r", "u", "y"])
            for k in range(len(self)):
                writer.writerow(
                    [k, repr(float(self.r[k])), repr(float(self.u0[k])), repr(float(self.y0[k]))]
                )
        path.with_suffix(".json").write_text(json.dumps({"ts": self.ts}) + "\n")

    @classmethod
    def load(cls, path) -> "ClosedLoopDataset":
        path = Path(path)
        sidecar = json.loads(path.with_suffix(".json").read_text())
        rows = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                rows.append((float(row["r"]), float(row["u"]), float(row["y"])))
        r, u, y = (np.array(col) for col in zip(*rows))
        return cls(u0=u, y0=y, r=r, ts=float(sidecar["ts"]))


def transient_skip(order: int = 2) -> int:
    """Samples dropped from cost sums to suppress filter start-up artifacts."""
    return max(10, 3 * order)


def fictitious_reference(theta, data: ClosedLoopDataset) -> np.ndarray:
    """r_tilde(theta, k) = C(theta)^-1 u0(k) + y0(k)."""
    kp, ki, kd = as_gains(theta)
    ts = data.ts
    if abs(kp * ts + ki * ts**2 + kd) <= PROPERNESS_TOL:
        raise InverseNotProperError(
            "kp*ts + ki*ts^2 + kd is (near) zero: controller inverse is improper"
        )
    c = pid_filter(theta, ts)
    zero_mags = [abs(z) for z in c.zeros()]
    if zero_mags and max(zero_mags) > 1.0 + 1e-12:
        warnings.warn(
            f"controller inverse is unstable (zero magnitude {max(zero_mags):.4f})",
            UnstableInverseWarning,
            stacklevel=2,
        )
    return np.asarray(c.inverse().filter(data.u0)) + data.y0


def frit_cost(theta, data: ClosedLoopDataset, gm: ReferenceModel) -> float:
    """Model-reference cost sum[y0 - Gm r_tilde]^2 over the dataset.

    Evaluation metric only; `batch_tune` minimizes the convex surrogate.
    """
    r_tilde = fictitious_reference(theta, data)
    ref = np.asarray(gm.filter.filter(r_tilde))
    skip = transient_skip()
    resid = data.y0[skip:] - ref[skip:]
    if not np.all(np.isfinite(resid)):
        return math.inf
    return float(resid @ resid)


def regressor_samples(
    data: ClosedLoopDataset, gm: ReferenceModel, skip: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Batch (Phi, d) arrays from a dataset, transient samples dropped."""
    gen = RegressorGenerator(gm.filter, data.ts)
    phis = np.empty((len(data), 3))
    ds = np.empty(len(data))
    for k in range(len(data)):
        phis[k], ds[k] = gen.step(data.y0[k], data.u0[k])
    if skip is None:
        skip = transient_skip()
    return phis[skip:], ds[skip:]


def batch_tune(
    data: ClosedLoopDataset, gm: ReferenceModel, skip: int | None = None
) -> np.ndarray:
    """Gains minimizing the convex surrogate, by normal equations."""
    phis, ds = regressor_samples(data, gm, skip=skip)
    A = phis.T @ phis
    if np.linalg.cond(A) >= CONDITION_LIMIT:
        raise RankDeficientError(
            "regressor normal matrix is ill-conditioned: data is not informative"
        )
    return np.linalg.solve(A, phis.T @ ds)


def polish(
    theta,
    data: ClosedLoopDataset,
    gm: ReferenceModel,
    iterations: int = 50,
    initial_step: float = 0.1,
) -> np.ndarray:
    """Derivative-free touch-up of the nonconvex cost around a tuned point.

    Coordinate search with a shrinking step; never returns gains with a
    higher cost than the starting point.
    """
    theta = as_gains(theta)
    best = frit_cost(theta, data, gm)
    step = initial_step * np.maximum(np.abs(theta), 1e-3)
    for _ in range(iterations):
        improved = False
        for i in range(3):
            for sign in (+1.0, -1.0):
                trial = theta.copy()
                trial[i] += sign * step[i]
                try:
                    cost = frit_cost(trial, data, gm)
                except InverseNotProperError:
                    continue
                if cost < best:
                    theta, best = trial, cost
                    improved = True
                    break
        if not improved:
            step *= 0.5
    return theta
