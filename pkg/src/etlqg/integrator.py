"""Closed-form optimal sampling for driftless (A = 0) reset systems.

For a pure diffusion with running cost x'Qx and reset price rho, the optimal
continuation value is

    V(x) = -1/4 * (2 sqrt(rho) - x'Px)^2   inside the ellipsoid x'Px < 2 sqrt(rho),
    V(x) = 0                               outside,

where P > 0 solves the quadratic matrix equation

    P R P + 1/2 Tr(RP) P = Q.

The solve reduces to a scalar root problem: with Rt = Q^{1/2} R Q^{1/2} =
U diag(r) U', the trace s = Tr(RP) is the unique positive root of

    h(s) = (n + 4) s - sum_i sqrt(s^2 + 16 r_i),

and P = Q^{1/2} U diag(p) U' Q^{1/2} with p_i = 4 / (s + sqrt(s^2 + 16 r_i)).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotPositiveDefinite
from .linalg import psd_sqrt, spd_check, symmetrize

_ROOT_RTOL = 1e-13          # Newton polish target on |h(s)| / (1 + s)
_BISECT_STEPS = 60          # bracket refinement before Newton
_RESIDUAL_RTOL = 1e-10      # matrix-equation residual vs ||Q||_F


@dataclass(frozen=True, eq=False)
class EllipsoidBound:
    """Optimal trigger set boundary {x : x'Px = 2 sqrt(rho)} for A = 0.

    P is the quadratic-equation solution; rho is the per-sample price.
    """

    P: np.ndarray
    rho: float

    def __post_init__(self):
        P = spd_check(np.atleast_2d(np.asarray(self.P, float)), "P")
        object.__setattr__(self, "P", P)
        if not (self.rho > 0.0 and np.isfinite(self.rho)):
            raise ValueError("rho must be a positive finite scalar")

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def threshold(self) -> float:
        """Trigger fires when x'Px reaches this value."""
        return 2.0 * np.sqrt(self.rho)

    def boundary_points(self, num: int = 256) -> np.ndarray:
        """Angle-parameterized boundary polyline for n = 2, closed, CCW.

        Returns an array of shape (num + 1, 2) with last point equal to the
        first.
        """
        if self.n != 2:
            raise DomainError("boundary_points is defined for n = 2 only")
        d, U = np.linalg.eigh(self.P)
        theta = np.linspace(0.0, 2.0 * np.pi, num + 1)
        radii = np.sqrt(self.threshold / d)
        pts = (U * radii) @ np.stack([np.cos(theta), np.sin(theta)])
        out = pts.T.copy()
        out[-1] = out[0]
        # enforce counterclockwise orientation
        area2 = np.sum(out[:-1, 0] * out[1:, 1] - out[1:, 0] * out[:-1, 1])
        if area2 < 0.0:
            out = out[::-1].copy()
        return out


def scalar_h(s: float, r: np.ndarray) -> float:
    """The scalar root function h(s) = (n+4) s - sum sqrt(s^2 + 16 r_i).

    r holds the eigenvalues of Q^{1/2} R Q^{1/2}; all must be positive.

    Raises:
        DomainError: s <= 0 or any r_i <= 0.
    """
    r = np.asarray(r, dtype=float).ravel()
    if s <= 0.0:
        raise DomainError("scalar_h requires s > 0")
    if r.size == 0 or np.any(r <= 0.0):
        raise DomainError("scalar_h requires all r_i > 0")
    n = r.size
    return float((n + 4.0) * s - np.sum(np.sqrt(s * s + 16.0 * r)))


def _scalar_h_prime(s: float, r: np.ndarray) -> float:
    n = r.size
    return float(n + 4.0 - np.sum(s / np.sqrt(s * s + 16.0 * r)))


def solve_scalar_root(r: np.ndarray) -> float:
    """Unique positive root of scalar_h for eigenvalues r > 0.

    Bracketing bisection followed by a Newton polish; h is increasing with
    h'(s) > 4, so the root is simple and the iteration cannot escape the
    bracket by much.
    """
    r = np.asarray(r, dtype=float).ravel()
    if r.size == 0 or np.any(r <= 0.0):
        raise DomainError("solve_scalar_root requires all r_i > 0")
    hi = float(np.sum(np.sqrt(r)))
    # sqrt(s^2 + a^2) <= s + a gives h(sum sqrt(r_j)) >= 0 analytically;
    # keep the doubling loop as a guard against rounding.
    while scalar_h(hi, r) < 0.0:
        hi *= 2.0
    lo = np.finfo(float).tiny
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if scalar_h(mid, r) < 0.0:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    for _ in range(50):
        fs = scalar_h(s, r)
        if abs(fs) <= _ROOT_RTOL * (1.0 + s):
            break
        step = fs / _scalar_h_prime(s, r)
        s_new = s - step
        if not (lo * 0.5 <= s_new <= hi * 2.0) or s_new <= 0.0:
            s_new = 0.5 * (lo + hi)
        s = s_new
    return float(s)


def solve_riccati_like(Q: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Solve P R P + 1/2 Tr(RP) P = Q for symmetric P > 0.

    Args:
        Q, R: symmetric positive definite matrices of equal size.  Q with
            smallest eigenvalue below 1e-12 times its largest is rejected
            as numerically singular.

    Returns:
        Symmetric positive definite P with relative residual <= 1e-10.
    """
    Q = spd_check(np.atleast_2d(np.asarray(Q, float)), "Q")
    R = spd_check(np.atleast_2d(np.asarray(R, float)), "R")
    if Q.shape != R.shape:
        raise NotPositiveDefinite("Q and R must have equal shapes")
    Qh = psd_sqrt(Q)
    Rt = symmetrize(Qh @ R @ Qh)
    r, U = np.linalg.eigh(Rt)
    if r[0] <= 0.0:
        raise NotPositiveDefinite("Q^{1/2} R Q^{1/2} is not positive definite")
    s = solve_scalar_root(r)
    # p_i = -s/(4 r_i) + sqrt(s^2/(16 r_i^2) + 1/r_i), rationalized to avoid
    # cancellation for small r_i
    p = 4.0 / (s + np.sqrt(s * s + 16.0 * r))
    P = symmetrize(Qh @ (U * p) @ U.T @ Qh)
    res = np.linalg.norm(P @ R @ P + 0.5 * np.trace(R @ P) * P - Q, "fro")
    if res > _RESIDUAL_RTOL * np.linalg.norm(Q, "fro"):
        raise ArithmeticError(f"matrix-equation residual {res:.3e} exceeds tolerance")
    return P


def value_function_integrator(x: np.ndarray, P: np.ndarray, rho: float) -> float:
    """Continuation value V(x) = -1/4 max(2 sqrt(rho) - x'Px, 0)^2.

    Accepts a single point of shape (n,) or a batch of shape (..., n).
    """
    if rho < 0.0:
        raise DomainError("rho must be >= 0")
    x = np.asarray(x, dtype=float)
    g = 2.0 * np.sqrt(rho) - np.einsum("...i,ij,...j->...", x, P, x)
    out = -0.25 * np.square(np.maximum(g, 0.0))
    return float(out) if out.ndim == 0 else out


def value_gradient_integrator(x: np.ndarray, P: np.ndarray, rho: float) -> np.ndarray:
    """Analytic gradient of the closed-form V; zero outside the ellipsoid."""
    x = np.asarray(x, dtype=float)
    g = 2.0 * np.sqrt(rho) - float(x @ P @ x)
    if g <= 0.0:
        return np.zeros_like(x)
    return g * (P @ x)


def value_hessian_integrator(x: np.ndarray, P: np.ndarray, rho: float) -> np.ndarray:
    """Analytic Hessian of V on the interior branch; zero outside.

    V is C^1 but not C^2 across the ellipsoid; the interior branch is used
    when x'Px < 2 sqrt(rho) strictly.
    """
    x = np.asarray(x, dtype=float)
    g = 2.0 * np.sqrt(rho) - float(x @ P @ x)
    if g <= 0.0:
        return np.zeros_like(P)
    Px = P @ x
    return -2.0 * np.outer(Px, Px) + g * P


def ellipsoid_trigger(x: np.ndarray, bound: EllipsoidBound) -> bool:
    """Transmit as soon as x'Px >= 2 sqrt(rho); the boundary fires."""
    x = np.asarray(x, dtype=float)
    return bool(x @ bound.P @ x >= bound.threshold)


def integrator_costs(P: np.ndarray, R: np.ndarray, rho: float):
    """Optimal (J, J_H, f) for the driftless problem at price rho.

    J = sqrt(rho) Tr(RP) is the total rate including the sampling price,
    J_H = J/2 the state-cost rate, and f = J_H / rho the sampling frequency.
    rho = 0 means free sampling: J = J_H = 0 with infinite frequency.
    """
    if rho < 0.0:
        raise DomainError("rho must be >= 0")
    trRP = float(np.trace(np.asarray(R, float) @ np.asarray(P, float)))
    J = np.sqrt(rho) * trRP
    J_H = 0.5 * J
    f = np.inf if rho == 0.0 else J_H / rho
    return float(J), float(J_H), float(f)


@dataclass(frozen=True)
class SlopePair:
    """Small-rho cost slopes: J_H ~ J_e * f^{-1} (event) vs J_p * h (periodic)."""

    J_e: float
    J_p: float
    J_ratio: float


def slopes_and_ratio(Q: np.ndarray, R: np.ndarray) -> SlopePair:
    """Event-triggered and periodic cost slopes for A = 0, and their ratio.

    J_e = Tr(RP)^2 / 4, J_p = Tr(RQ)/2, J_ratio = J_p / J_e.  The ratio
    lies in [1 + 2/n, 3) for n >= 2 and equals 3 for n = 1.
    """
    P = solve_riccati_like(Q, R)
    s = float(np.trace(np.asarray(R, float) @ P))
    J_e = 0.25 * s * s
    J_p = 0.5 * float(np.trace(np.asarray(R, float) @ np.asarray(Q, float)))
    return SlopePair(J_e=J_e, J_p=J_p, J_ratio=J_p / J_e)
