"""Linearly parameterized PID controller.

The control law is u(k) = theta^T * basis(e)(k) with theta = [kp, ki, kd] and
basis filters [1, ts/(1 - z^-1), (1 - z^-1)/ts].  Because the basis states do
not depend on theta, the gains can be swapped every sample (adaptive use)
without disturbing the integrator or differencer.
"""

from __future__ import annotations

import numpy as np

from .lti import RationalFilter


def as_gains(theta) -> np.ndarray:
    """Validate and return a [kp, ki, kd] gain vector as float64."""
    arr = np.asarray(theta, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"expected 3 gains [kp, ki, kd], got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("gains must be finite")
    return arr.copy()


class PidBasis:
    """The three basis filters applied to a shared scalar input stream."""

    def __init__(self, ts: float):
        if ts <= 0:
            raise ValueError("sampling time must be positive")
        self.ts = float(ts)
        self._filters = _make_basis(self.ts)

    def reset(self) -> None:
        for f in self._filters:
            f.reset()

    def copy(self) -> "PidBasis":
        b = PidBasis(self.ts)
        b._filters = [f.copy() for f in self._filters]
        return b

    def step(self, x: float) -> np.ndarray:
        """Advance all three filters one sample; returns [x, integ, diff]."""
        return np.array([f.step(x) for f in self._filters])

    def regress(self, x) -> np.ndarray:
        """Basis-filter a whole sequence from zero state; returns (N, 3)."""
        fresh = _make_basis(self.ts)
        return np.column_stack([f.filter(x) for f in fresh])


def _make_basis(ts: float) -> list[RationalFilter]:
    return [
        RationalFilter.identity(),
        RationalFilter([ts], [1.0, -1.0]),
        RationalFilter([1.0 / ts, -1.0 / ts], [1.0]),
    ]


class PidController:
    """Positional-form PID; gains are meant to be retuned on the fly."""

    def __init__(self, gains, ts: float):
        self._gains = as_gains(gains)
        self.basis = PidBasis(ts)

    @property
    def gains(self) -> np.ndarray:
        return self._gains

    @gains.setter
    def gains(self, theta) -> None:
        self._gains = as_gains(theta)

    def reset(self) -> None:
        self.basis.reset()

    def step(self, e: float) -> float:
        """One control sample from one tracking-error sample."""
        return float(self._gains @ self.basis.step(e))


def pid_filter(gains, ts: float) -> RationalFilter:
    """The combined controller as a single rational filter over 1 - z^-1.

    num[0] = kp + ki*ts + kd/ts, so the filter is biproper (invertible)
    exactly when kp*ts + ki*ts**2 + kd != 0.
    """
    kp, ki, kd = as_gains(gains)
    num = [kp + ki * ts + kd / ts, -(kp + 2.0 * kd / ts), kd / ts]
    return RationalFilter(num, [1.0, -1.0])
