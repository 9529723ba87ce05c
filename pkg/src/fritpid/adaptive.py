"""Recursive tuning engines.

Streaming closed-loop samples (y, u) are turned into regression pairs

    phi(k) = basis(z) * {1 - Gm(z)} y(k),      d(k) = Gm(z) u(k)

and the auxiliary error phi^T theta - d is driven to zero by recursive least
squares.  Four gain-update variants are provided:

* plain RLS (no forgetting, mu = 1) and exponential forgetting (mu < 1),
  which discounts the whole information matrix R <- mu*R + phi*phi^T;
* directional forgetting, which discounts only the rank-one component of R
  along the current regressor, so directions the data stops exciting are
  never forgotten (no estimator windup);
* exponential resetting, which pulls R toward a designer-chosen SPD floor
  R_inf, R <- mu*R + (1-mu)*R_inf + phi*phi^T.

Every estimator keeps the covariance P and information matrix R as an exact
inverse pair (directional forgetting maintains P by rank-one Sherman-Morrison
steps; resetting re-solves P = R^-1 directly).
"""

from __future__ import annotations

import math

import numpy as np

from .controller import PidBasis, as_gains
from .lti import RationalFilter, one_minus


class NumericalBreakdownError(RuntimeError):
    """An update produced a denominator or matrix no algorithm step can use."""


class DenominatorUnderflowError(NumericalBreakdownError):
    """phi^T R phi underflowed although the regressor passed the deadzone."""


class SingularInformationError(NumericalBreakdownError):
    """The information matrix lost positive definiteness."""


class RegressorGenerator:
    """Streaming construction of (phi, d) from one I/O sample per step."""

    def __init__(self, gm: RationalFilter, ts: float):
        self.ts = float(ts)
        self._gm_complement = one_minus(gm)
        self._gm_on_u = gm.copy()
        self._gm_on_u.reset()
        self._basis = PidBasis(ts)

    def reset(self) -> None:
        self._gm_complement.reset()
        self._gm_on_u.reset()
        self._basis.reset()

    def step(self, y: float, u: float) -> tuple[np.ndarray, float]:
        """Advance all internal filters one sample; returns (phi, d)."""
        phi = self._basis.step(self._gm_complement.step(y))
        d = self._gm_on_u.step(u)
        return phi, d


def symmetric_eigen_bounds(P: np.ndarray) -> tuple[float, float]:
    """Extreme eigenvalues of a symmetric 3x3 matrix, in closed form.

    Uses the trigonometric solution of the characteristic cubic; falls back
    to numpy for other sizes.
    """
    if P.shape != (3, 3):
        w = np.linalg.eigvalsh(P)
        return float(w[0]), float(w[-1])
    p1 = P[0, 1] ** 2 + P[0, 2] ** 2 + P[1, 2] ** 2
    q = (P[0, 0] + P[1, 1] + P[2, 2]) / 3.0
    if p1 == 0.0:
        d = (P[0, 0], P[1, 1], P[2, 2])
        return min(d), max(d)
    p2 = (P[0, 0] - q) ** 2 + (P[1, 1] - q) ** 2 + (P[2, 2] - q) ** 2 + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    B = (P - q * np.eye(3)) / p
    r = float(np.linalg.det(B)) / 2.0
    r = min(1.0, max(-1.0, r))
    phi = math.acos(r) / 3.0
    lam_max = q + 2.0 * p * math.cos(phi)
    lam_min = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    return float(lam_min), float(lam_max)


def _symmetrize(M: np.ndarray) -> np.ndarray:
    return (M + M.T) / 2.0


def _check_spd(R: np.ndarray, what: str) -> None:
    try:
        np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        raise SingularInformationError(f"{what} is not positive definite") from None


def _as_sample(phi, d) -> tuple[np.ndarray, float]:
    phi = np.asarray(phi, dtype=float).reshape(-1)
    d = float(d)
    if not (np.all(np.isfinite(phi)) and math.isfinite(d)):
        raise NumericalBreakdownError("regressor sample contains non-finite values")
    return phi, d


class _RecursiveEstimator:
    """Shared plumbing: theta/P/R state, diagnostics, copying."""

    mode = "?"

    theta: np.ndarray
    P: np.ndarray
    R: np.ndarray
    deadzone_active: bool

    def copy(self):
        new = object.__new__(type(self))
        for k, v in self.__dict__.items():
            setattr(new, k, v.copy() if isinstance(v, np.ndarray) else v)
        return new

    def eigenvalues(self) -> tuple[float, float]:
        """(min, max) eigenvalues of the covariance matrix."""
        return symmetric_eigen_bounds(self.P)

    def _residual(self, phi: np.ndarray, d: float) -> float:
        return float(phi @ self.theta - d)

    def _innovate(self, phi: np.ndarray, ehat: float) -> None:
        # run after P has been updated for this sample
        self.theta = self.theta + self.P @ phi * (-ehat)


class RlsEstimator(_RecursiveEstimator):
    """Recursive least squares, optionally with exponential forgetting.

    mu = 1 keeps all past data (no forgetting); mu < 1 discounts it uniformly.
    A shadow information matrix R (the inverse of P) is carried along purely
    for diagnostics: under poor excitation and mu < 1 its smallest eigenvalue
    collapses, which is the estimator-windup signature.
    """

    def __init__(self, theta0, p0=1e4, mu: float = 1.0):
        if not 0.0 < mu <= 1.0:
            raise ValueError("forgetting factor mu must be in (0, 1]")
        self.theta = as_gains(theta0)
        self.P = _as_init_matrix(p0, "P0")
        self.R = _symmetrize(np.linalg.inv(self.P))
        self.mu = float(mu)
        self.mode = "noforget" if self.mu == 1.0 else "ef"
        self.deadzone_active = False

    def update(self, phi, d) -> float:
        """Absorb one sample; returns the pre-update residual phi^T theta - d."""
        phi, d = _as_sample(phi, d)
        ehat = self._residual(phi, d)
        denom = self.mu + float(phi @ self.P @ phi)
        if denom <= 0.0:
            raise NumericalBreakdownError(f"gain denominator {denom} <= 0")
        Pphi = self.P @ phi
        self.P = _symmetrize((self.P - np.outer(Pphi, Pphi) / denom) / self.mu)
        self.R = _symmetrize(self.mu * self.R + np.outer(phi, phi))
        self._innovate(phi, ehat)
        return ehat


class DirectionalForgettingRls(_RecursiveEstimator):
    """RLS that forgets only along the current regressor direction.

    Samples with ||phi|| <= epsilon (deadzone) are skipped outright; theta,
    P, and R are left bit-identical.
    """

    mode = "df"

    def __init__(self, theta0, r0=0.01, mu: float = 0.9, epsilon: float = 1e-3):
        if not 0.0 < mu <= 1.0:
            raise ValueError("forgetting factor mu must be in (0, 1]")
        if epsilon < 0.0:
            raise ValueError("deadzone threshold must be >= 0")
        self.theta = as_gains(theta0)
        self.R = _as_init_matrix(r0, "R0")
        _check_spd(self.R, "R0")
        self.P = _symmetrize(np.linalg.inv(self.R))
        self.mu = float(mu)
        self.epsilon = float(epsilon)
        self.deadzone_active = False

    def update(self, phi, d) -> float:
        phi, d = _as_sample(phi, d)
        ehat = self._residual(phi, d)
        if float(np.linalg.norm(phi)) <= self.epsilon:
            self.deadzone_active = True
            return ehat
        self.deadzone_active = False

        a = float(phi @ self.R @ phi)
        if a < 1e-300:
            raise DenominatorUnderflowError(f"phi^T R phi = {a}")
        # forget the rank-one slice of R along phi, then add the new sample
        Rphi = self.R @ phi
        Rbar = self.R - (1.0 - self.mu) / a * np.outer(Rphi, Rphi)
        self.R = _symmetrize(Rbar + np.outer(phi, phi))
        _check_spd(self.R, "information matrix")
        # P tracks R^-1 exactly: rank-one update for the forgotten slice,
        # then a Sherman-Morrison downdate for the added phi*phi^T
        Pbar = self.P + (1.0 - self.mu) / (self.mu * a) * np.outer(phi, phi)
        Pbar_phi = Pbar @ phi
        self.P = _symmetrize(
            Pbar - np.outer(Pbar_phi, Pbar_phi) / (1.0 + float(phi @ Pbar_phi))
        )
        self._innovate(phi, ehat)
        return ehat


class ExponentialResettingRls(_RecursiveEstimator):
    """Exponential forgetting with a pull toward an SPD information floor.

    Requires R0 >= R_inf (as quadratic forms); with that, R stays above a
    positive floor no matter how poor the excitation, so the covariance can
    never wind up.  No deadzone is applied.
    """

    mode = "er"

    def __init__(self, theta0, r0=0.01, r_inf=0.01, mu: float = 0.99):
        if not 0.0 < mu <= 1.0:
            raise ValueError("forgetting factor mu must be in (0, 1]")
        self.theta = as_gains(theta0)
        self.R = _as_init_matrix(r0, "R0")
        self.R_inf = _as_init_matrix(r_inf, "R_inf")
        _check_spd(self.R_inf, "R_inf")
        gap_min, _ = symmetric_eigen_bounds(_symmetrize(self.R - self.R_inf))
        if gap_min < -1e-12:
            raise ValueError(
                "R0 must dominate R_inf (R0 - R_inf has a negative eigenvalue)"
            )
        _check_spd(self.R, "R0")
        self.P = _symmetrize(np.linalg.inv(self.R))
        self.mu = float(mu)
        self.deadzone_active = False

    def update(self, phi, d) -> float:
        phi, d = _as_sample(phi, d)
        ehat = self._residual(phi, d)
        self.R = _symmetrize(
            self.mu * self.R + (1.0 - self.mu) * self.R_inf + np.outer(phi, phi)
        )
        try:
            self.P = _symmetrize(np.linalg.inv(self.R))
        except np.linalg.LinAlgError:
            raise SingularInformationError("information matrix solve failed") from None
        self._innovate(phi, ehat)
        return ehat


def _as_init_matrix(value, what: str) -> np.ndarray:
    """Scalar -> scaled identity; matrix -> validated symmetric copy."""
    if np.ndim(value) == 0:
        v = float(value)
        if v <= 0.0:
            raise ValueError(f"{what} scale must be positive")
        return v * np.eye(3)
    M = np.asarray(value, dtype=float)
    if M.shape != (3, 3):
        raise ValueError(f"{what} must be a 3x3 matrix or a positive scalar")
    if not np.allclose(M, M.T, atol=1e-10):
        raise ValueError(f"{what} must be symmetric")
    return _symmetrize(M)


def make_estimator(
    mode: str,
    theta0,
    mu: float = 0.99,
    epsilon: float = 1e-3,
    p0=100.0,
    r0=0.01,
    r_inf=0.01,
):
    """Build an estimator by mode name: noforget | ef | df | er."""
    mode = mode.lower()
    if mode == "noforget":
        return RlsEstimator(theta0, p0=p0, mu=1.0)
    if mode == "ef":
        return RlsEstimator(theta0, p0=p0, mu=mu)
    if mode == "df":
        return DirectionalForgettingRls(theta0, r0=r0, mu=mu, epsilon=epsilon)
    if mode == "er":
        return ExponentialResettingRls(theta0, r0=r0, r_inf=r_inf, mu=mu)
    raise ValueError(f"unknown estimator mode {mode!r}")
