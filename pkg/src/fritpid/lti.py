"""Discrete-time rational filters in the shift operator.

Coefficient convention: ``num`` and ``den`` are polynomials in z^-1,

    H(z) = (num[0] + num[1] z^-1 + ...) / (den[0] + den[1] z^-1 + ...)

with den[0] != 0, realized as a causal difference equation (direct form II
transposed).  Output at step k depends only on inputs at steps <= k.
"""

from __future__ import annotations

import math

import numpy as np


def _trim(coeffs: list[float]) -> list[float]:
    """Drop exactly-zero trailing coefficients, keeping at least one."""
    out = list(coeffs)
    while len(out) > 1 and out[-1] == 0.0:
        out.pop()
    return out


class RationalFilter:
    """Stateful SISO filter num(z^-1)/den(z^-1)."""

    def __init__(self, num, den):
        num = [float(c) for c in num]
        den = [float(c) for c in den]
        if not den or den[0] == 0.0:
            raise ValueError("den[0] must be nonzero for a causal realization")
        if not num:
            num = [0.0]
        self.num = _trim(num)
        self.den = _trim(den)
        # normalized copies used by the difference equation, padded to equal length
        n = max(len(self.num), len(self.den))
        a0 = self.den[0]
        self._b = [c / a0 for c in self.num] + [0.0] * (n - len(self.num))
        self._a = [c / a0 for c in self.den] + [0.0] * (n - len(self.den))
        self._w = [0.0] * (n - 1)

    @classmethod
    def from_z(cls, num_z, den_z) -> "RationalFilter":
        """Build from polynomials in z (descending powers).

        A shorter numerator is right-aligned, so e.g. ``from_z([0.0095],
        [1, -0.99])``, i.e. 0.0095/(z - 0.99), becomes the strictly proper
        0.0095 z^-1 / (1 - 0.99 z^-1).
        """
        num_z = list(num_z)
        den_z = list(den_z)
        if len(num_z) > len(den_z):
            raise ValueError("numerator degree exceeds denominator: not causal")
        return cls([0.0] * (len(den_z) - len(num_z)) + num_z, den_z)

    @classmethod
    def identity(cls) -> "RationalFilter":
        return cls([1.0], [1.0])

    @classmethod
    def zero(cls) -> "RationalFilter":
        return cls([0.0], [1.0])

    @property
    def order(self) -> int:
        return max(len(self.num), len(self.den)) - 1

    def copy(self) -> "RationalFilter":
        f = RationalFilter(self.num, self.den)
        f._w = list(self._w)
        return f

    def reset(self) -> None:
        self._w = [0.0] * len(self._w)

    def step(self, u: float) -> float:
        """Advance the difference equation one sample and return the output."""
        b, a, w = self._b, self._a, self._w
        if not w:
            return b[0] * u
        y = b[0] * u + w[0]
        for i in range(len(w) - 1):
            w[i] = b[i + 1] * u + w[i + 1] - a[i + 1] * y
        w[-1] = b[len(w)] * u - a[len(w)] * y
        return y

    def filter(self, u) -> list[float]:
        """Filter a whole sequence from zero initial state.

        Runs on a copy, so the caller's filter state is untouched.
        """
        f = RationalFilter(self.num, self.den)
        return [f.step(float(x)) for x in u]

    def __mul__(self, other: "RationalFilter") -> "RationalFilter":
        """Series composition: self * other is 'other then self' (commutes for SISO)."""
        if not isinstance(other, RationalFilter):
            return NotImplemented
        return RationalFilter(
            _poly_mul(self.num, other.num), _poly_mul(self.den, other.den)
        )

    def inverse(self) -> "RationalFilter":
        """Exact rational inverse den/num; requires num[0] != 0 (biproper)."""
        return RationalFilter(self.den, self.num)

    def poles(self) -> list[complex]:
        return _roots_desc(self.den)

    def zeros(self) -> list[complex]:
        return _roots_desc(self.num)

    def __repr__(self):
        return f"RationalFilter(num={self.num}, den={self.den})"


def one_minus(f: RationalFilter) -> RationalFilter:
    """Return 1 - f over the common denominator."""
    n = max(len(f.num), len(f.den))
    num = [0.0] * n
    for i, c in enumerate(f.den):
        num[i] += c
    for i, c in enumerate(f.num):
        num[i] -= c
    return RationalFilter(num, f.den)


def _poly_mul(p, q):
    out = [0.0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _roots_desc(coeffs) -> list[complex]:
    """Roots of a z^-1 coefficient list, interpreted in the z plane.

    [c0, c1, ..., cn] maps to c0 z^n + c1 z^(n-1) + ... + cn.
    """
    c = _trim(list(coeffs))
    if len(c) == 1:
        return []
    return [complex(r) for r in np.roots(c)]


class ReferenceModel:
    """Target closed-loop transfer function; must be strictly stable."""

    def __init__(self, filt: RationalFilter):
        mags = [abs(p) for p in filt.poles()]
        if mags and max(mags) >= 1.0:
            raise ValueError(
                f"reference model has pole magnitude {max(mags):.6f} >= 1"
            )
        self.filter = filt

    @classmethod
    def first_order(
        cls,
        ts: float,
        tau: float = 1.0,
        dc_gain: float = 0.95,
        discretization: str = "euler",
    ) -> "ReferenceModel":
        """First-order lag with a one-step input delay.

        ``euler`` places the pole at 1 - ts/tau, ``zoh`` at exp(-ts/tau).
        The library default (ts=0.01, tau=1, dc_gain=0.95, euler) is
        0.0095 z^-1 / (1 - 0.99 z^-1); pass dc_gain=1.0 with ``zoh`` for an
        exact unit-gain discretization.
        """
        if ts <= 0 or tau <= 0:
            raise ValueError("ts and tau must be positive")
        if discretization == "euler":
            pole = 1.0 - ts / tau
        elif discretization == "zoh":
            pole = math.exp(-ts / tau)
        else:
            raise ValueError(f"unknown discretization {discretization!r}")
        b = dc_gain * (1.0 - pole)
        return cls(RationalFilter([0.0, b], [1.0, -pole]))
