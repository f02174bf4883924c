"""Continuous-time LQG synthesis and the reduction to a reset system.

The plant is the standard generalized form

    dx = A x dt + B_w dw + B_u u dt
    z  = C_z x + D_zu u
    y  = C_y x + D_yw (dw/dt)

with unit-intensity white noise w.  design_lqg solves the two algebraic
Riccati equations, returns the optimal gains together with the minimal
quadratic performance gamma0, and build_reset_system packages the matrices
(A, Q, R) of the estimation-error subsystem whose state jumps to zero at
every transmission instant.  The expected stationary cost of any sampling
scheme decomposes as gamma0 plus the running cost of that reset system.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla

from .errors import (
    DimensionError,
    InvalidPlant,
    NoStabilizingSolution,
    NotHurwitz,
)
from .linalg import hurwitz_margin, symmetrize

# Relative residual accepted for a converged Riccati/Lyapunov solution.
_RICCATI_RTOL = 1e-10
# Margin used when classifying eigenvalues as "on the imaginary axis".
_AXIS_RTOL = 1e-9
# Rank decisions in the Hautus tests use this multiple of machine epsilon.
_RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class PlantModel:
    """Generalized plant data.  All fields are 2-D float arrays.

    Shapes: A (n,n), B_w (n,m_w), B_u (n,m_u), C_z (p_z,n), D_zu (p_z,m_u),
    C_y (p_y,n), D_yw (p_y,m_w).  Construction only checks shape
    consistency; the synthesis assumptions are checked by validate_plant.
    """

    A: np.ndarray
    B_w: np.ndarray
    B_u: np.ndarray
    C_z: np.ndarray
    D_zu: np.ndarray
    C_y: np.ndarray
    D_yw: np.ndarray

    def __post_init__(self):
        for name in ("A", "B_w", "B_u", "C_z", "D_zu", "C_y", "D_yw"):
            arr = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
            object.__setattr__(self, name, arr)
        n, n2 = self.A.shape
        if n != n2:
            raise DimensionError(f"A must be square, got {self.A.shape}")
        if self.B_w.shape[0] != n or self.B_u.shape[0] != n:
            raise DimensionError("B_w and B_u must have n rows")
        if self.C_z.shape[1] != n or self.C_y.shape[1] != n:
            raise DimensionError("C_z and C_y must have n columns")
        if self.D_zu.shape != (self.C_z.shape[0], self.B_u.shape[1]):
            raise DimensionError("D_zu must be (p_z, m_u)")
        if self.D_yw.shape != (self.C_y.shape[0], self.B_w.shape[1]):
            raise DimensionError("D_yw must be (p_y, m_w)")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m_w(self) -> int:
        return self.B_w.shape[1]

    @property
    def m_u(self) -> int:
        return self.B_u.shape[1]

    @property
    def p_z(self) -> int:
        return self.C_z.shape[0]

    @property
    def p_y(self) -> int:
        return self.C_y.shape[0]


@dataclass(frozen=True, eq=False)
class LqgDesign:
    """Stabilizing Riccati solutions, optimal gains, and minimal cost."""

    X: np.ndarray
    Y: np.ndarray
    F: np.ndarray
    L: np.ndarray
    gamma0: float


@dataclass(frozen=True, eq=False)
class ResetSystem:
    """Linear diffusion dx = A x dt + R^{1/2} dw with running cost x^T Q x.

    The state is reset to zero at sampling instants.  Q and R are symmetric
    PSD; they are symmetrized on construction.
    """

    A: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        for name in ("A", "Q", "R"):
            arr = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
            object.__setattr__(self, name, arr)
        n = self.A.shape[0]
        if self.A.shape != (n, n) or self.Q.shape != (n, n) or self.R.shape != (n, n):
            raise DimensionError("A, Q, R must all be square of the same size")
        scale = 1.0 + np.linalg.norm(self.Q, "fro") + np.linalg.norm(self.R, "fro")
        if (
            np.linalg.norm(self.Q - self.Q.T, "fro") > 1e-12 * scale
            or np.linalg.norm(self.R - self.R.T, "fro") > 1e-12 * scale
        ):
            raise ValueError("Q and R must be symmetric")
        object.__setattr__(self, "Q", symmetrize(self.Q))
        object.__setattr__(self, "R", symmetrize(self.R))

    @property
    def n(self) -> int:
        return self.A.shape[0]


def _uncontrollable_modes(A: np.ndarray, B: np.ndarray) -> list[complex]:
    """Eigenvalues of A with Re >= 0 at which [A - lam I, B] drops rank."""
    n = A.shape[0]
    scale = np.linalg.norm(A, "fro") + np.linalg.norm(B, "fro") + 1.0
    bad = []
    for lam in np.linalg.eigvals(A):
        if lam.real < -_AXIS_RTOL * scale:
            continue
        M = np.hstack([A - lam * np.eye(n), B.astype(complex)])
        sv = np.linalg.svd(M, compute_uv=False)
        if sv[-1] <= _RANK_RTOL * max(sv[0], 1.0):
            bad.append(lam)
    return bad


def validate_plant(plant: PlantModel) -> list[str]:
    """Check the standing synthesis assumptions.

    Returns a list of human-readable violation tags; empty means valid.
    Checked: D_zu'D_zu and D_yw D_yw' invertibility, stabilizability of
    (A, B_u), detectability of (C_y, A).  Shape consistency is already
    enforced by the PlantModel constructor.
    """
    v = []
    E = plant.D_zu.T @ plant.D_zu
    N = plant.D_yw @ plant.D_yw.T
    for M, tag in ((E, "D_zu'D_zu singular"), (N, "D_yw D_yw' singular")):
        sv = np.linalg.svd(M, compute_uv=False)
        if sv.size == 0 or sv[-1] <= _RANK_RTOL * max(sv[0], 1.0):
            v.append(tag)
    if _uncontrollable_modes(plant.A, plant.B_u):
        v.append("(A, B_u) not stabilizable")
    if _uncontrollable_modes(plant.A.T, plant.C_y.T):
        v.append("(C_y, A) not detectable")
    return v


def solve_care(A: np.ndarray, S: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Stabilizing solution of A'X + XA - XSX + Q = 0.

    Uses the ordered real Schur form of the 2n x 2n Hamiltonian matrix
    [[A, -S], [-Q, -A']]: the stable invariant subspace [U1; U2] gives
    X = U2 U1^{-1}.  A Newton (Lyapunov) refinement step is applied when the
    residual exceeds the target.

    Raises:
        NoStabilizingSolution: Hamiltonian eigenvalues on the imaginary
            axis, singular subspace extraction, or non-Hurwitz A - SX.
    """
    A = np.atleast_2d(np.asarray(A, float))
    S = symmetrize(np.atleast_2d(np.asarray(S, float)))
    Q = symmetrize(np.atleast_2d(np.asarray(Q, float)))
    n = A.shape[0]
    if A.shape != (n, n) or S.shape != (n, n) or Q.shape != (n, n):
        raise DimensionError("solve_care requires square matrices of equal size")

    H = np.block([[A, -S], [-Q, -A.T]])
    eigs = np.linalg.eigvals(H)
    scale = 1.0 + np.max(np.abs(eigs))
    if np.min(np.abs(eigs.real)) <= _AXIS_RTOL * scale:
        raise NoStabilizingSolution("Hamiltonian has eigenvalues on the imaginary axis")

    T, Z, sdim = sla.schur(H, output="real", sort="lhp")
    if sdim != n:
        raise NoStabilizingSolution(
            f"stable invariant subspace has dimension {sdim}, expected {n}"
        )
    U1 = Z[:n, :n]
    U2 = Z[n:, :n]
    try:
        X = sla.solve(U1.T, U2.T).T
    except sla.LinAlgError as exc:
        raise NoStabilizingSolution("invariant subspace extraction is singular") from exc
    X = symmetrize(X)

    def residual(Xk):
        return A.T @ Xk + Xk @ A - Xk @ S @ Xk + Q

    tol = _RICCATI_RTOL * (1.0 + np.linalg.norm(X, "fro") ** 2)
    for _ in range(5):
        Rk = residual(X)
        if np.linalg.norm(Rk, "fro") <= tol:
            break
        Ac = A - S @ X
        try:
            delta = sla.solve_continuous_lyapunov(Ac.T, -Rk)
        except sla.LinAlgError:
            break
        X = symmetrize(X + delta)
        tol = _RICCATI_RTOL * (1.0 + np.linalg.norm(X, "fro") ** 2)

    if np.linalg.norm(residual(X), "fro") > tol:
        raise NoStabilizingSolution("Riccati residual did not converge")
    if hurwitz_margin(A - S @ X) >= 0.0:
        raise NoStabilizingSolution("closed loop A - SX is not Hurwitz")
    return X


def control_riccati_residual(plant: PlantModel, X: np.ndarray) -> float:
    """Frobenius residual of the control Riccati equation, cross terms included."""
    E = plant.D_zu.T @ plant.D_zu
    G = X @ plant.B_u + plant.C_z.T @ plant.D_zu
    res = (
        plant.A.T @ X
        + X @ plant.A
        + plant.C_z.T @ plant.C_z
        - G @ np.linalg.solve(E, G.T)
    )
    return float(np.linalg.norm(res, "fro"))


def filter_riccati_residual(plant: PlantModel, Y: np.ndarray) -> float:
    """Frobenius residual of the filter Riccati equation, cross terms included."""
    N = plant.D_yw @ plant.D_yw.T
    G = Y @ plant.C_y.T + plant.B_w @ plant.D_yw.T
    res = (
        plant.A @ Y
        + Y @ plant.A.T
        + plant.B_w @ plant.B_w.T
        - G @ np.linalg.solve(N, G.T)
    )
    return float(np.linalg.norm(res, "fro"))


def design_lqg(plant: PlantModel) -> LqgDesign:
    """Solve both Riccati equations and assemble gains and minimal cost.

    Cross terms D_zu'C_z and B_w D_yw' are removed by completing the square
    before calling the generic CARE solver.

    Returns:
        LqgDesign with stabilizing X, Y, state-feedback gain F, filter gain
        L, and gamma0 = Tr(B_w'X B_w) + Tr(C_z Y C_z') + Tr(XAY + YA'X).

    Raises:
        InvalidPlant: validate_plant reports violations.
        NoStabilizingSolution: either Riccati equation fails.
    """
    violations = validate_plant(plant)
    if violations:
        raise InvalidPlant(violations)
    A = plant.A

    E = plant.D_zu.T @ plant.D_zu
    Einv_DzuT_Cz = np.linalg.solve(E, plant.D_zu.T @ plant.C_z)
    Ac = A - plant.B_u @ Einv_DzuT_Cz
    Sc = plant.B_u @ np.linalg.solve(E, plant.B_u.T)
    Qc = symmetrize(plant.C_z.T @ plant.C_z - (plant.D_zu @ Einv_DzuT_Cz).T @ plant.C_z)
    X = solve_care(Ac, Sc, Qc)
    F = -np.linalg.solve(E, plant.B_u.T @ X + plant.D_zu.T @ plant.C_z)

    N = plant.D_yw @ plant.D_yw.T
    Ninv_Cy = np.linalg.solve(N, plant.C_y)
    Af = A - plant.B_w @ plant.D_yw.T @ Ninv_Cy
    Sf = plant.C_y.T @ Ninv_Cy
    Qf = symmetrize(
        plant.B_w @ plant.B_w.T
        - (plant.B_w @ plant.D_yw.T) @ np.linalg.solve(N, plant.D_yw @ plant.B_w.T)
    )
    Y = solve_care(Af.T, Sf, Qf)
    L = -(Y @ plant.C_y.T + plant.B_w @ plant.D_yw.T) @ np.linalg.inv(N)

    for M, which in ((A + plant.B_u @ F, "A + B_u F"), (A + L @ plant.C_y, "A + L C_y")):
        if hurwitz_margin(M) >= 0.0:
            raise NoStabilizingSolution(f"{which} is not Hurwitz")

    gamma0 = float(
        np.trace(plant.B_w.T @ X @ plant.B_w)
        + np.trace(plant.C_z @ Y @ plant.C_z.T)
        + np.trace(X @ A @ Y + Y @ A.T @ X)
    )
    return LqgDesign(X=X, Y=Y, F=F, L=L, gamma0=gamma0)


def build_reset_system(plant: PlantModel, design: LqgDesign) -> ResetSystem:
    """Reset system carried by the estimation error between transmissions.

    Drift is the open-loop A; the running-cost weight is Q = F'(D_zu'D_zu)F
    and the diffusion intensity is R = L(D_yw D_yw')L'.
    """
    E = plant.D_zu.T @ plant.D_zu
    N = plant.D_yw @ plant.D_yw.T
    Q = symmetrize(design.F.T @ E @ design.F)
    R = symmetrize(design.L @ N @ design.L.T)
    return ResetSystem(A=plant.A.copy(), Q=Q, R=R)


def h2_cost_lyapunov(sys: ResetSystem) -> float:
    """Stationary cost Tr(Q Sigma) with A Sigma + Sigma A' + R = 0.

    Independent oracle for never-sampled (Hurwitz) systems.

    Raises:
        NotHurwitz: A has an eigenvalue with Re >= 0.
        NoStabilizingSolution: Lyapunov residual fails the tolerance.
    """
    if hurwitz_margin(sys.A) >= 0.0:
        raise NotHurwitz("stationary cost requires Hurwitz A")
    Sigma = sla.solve_continuous_lyapunov(sys.A, -sys.R)
    Sigma = symmetrize(Sigma)
    res = np.linalg.norm(sys.A @ Sigma + Sigma @ sys.A.T + sys.R, "fro")
    scale = 1.0 + np.linalg.norm(sys.R, "fro") + np.linalg.norm(
        sys.A, "fro"
    ) * np.linalg.norm(Sigma, "fro")
    if res > _RICCATI_RTOL * scale:
        raise NoStabilizingSolution("Lyapunov residual did not converge")
    return float(np.trace(sys.Q @ Sigma))
