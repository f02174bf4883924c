import numpy as np
import pytest

from etlqg import PlantModel, ResetSystem


def rot(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def random_spd(rng: np.random.Generator, n: int, cond_max: float = 1e4) -> np.ndarray:
    """Random SPD matrix with condition number at most cond_max."""
    G = rng.standard_normal((n, n))
    U, _ = np.linalg.qr(G)
    lo = 1.0 / np.sqrt(cond_max)
    hi = np.sqrt(cond_max)
    eigs = np.exp(rng.uniform(np.log(lo), np.log(hi), size=n))
    return U @ np.diag(eigs) @ U.T


def random_plant(rng: np.random.Generator, n: int, with_cross: bool = False) -> PlantModel:
    """Random output-feedback plant built so the standing assumptions hold.

    Padding makes D_zu'D_zu and D_yw D_yw' identity blocks; with_cross adds
    feedthrough couplings so D_zu'C_z and B_w D_yw' are nonzero.
    """
    m_u = int(rng.integers(1, n + 1))
    p_y = int(rng.integers(1, n + 1))
    A = rng.standard_normal((n, n))
    B_u = rng.standard_normal((n, m_u))
    C_y = rng.standard_normal((p_y, n))
    G = rng.standard_normal((n, n))
    H = rng.standard_normal((n, n))
    S = 0.3 * rng.standard_normal((p_y, n)) if with_cross else np.zeros((p_y, n))
    T = 0.3 * rng.standard_normal((n, m_u)) if with_cross else np.zeros((n, m_u))
    return PlantModel(
        A=A,
        B_w=np.hstack([G, np.zeros((n, p_y))]),
        B_u=B_u,
        C_z=np.vstack([H, np.zeros((m_u, n))]),
        D_zu=np.vstack([T, np.eye(m_u)]),
        C_y=C_y,
        D_yw=np.hstack([S, np.eye(p_y)]),
    )


def _padded_driftless_plant(Q: np.ndarray, R: np.ndarray) -> PlantModel:
    """Driftless plant whose LQG reduction has exactly this (Q, R) pair."""
    n = Q.shape[0]
    wq, Uq = np.linalg.eigh(Q)
    wr, Ur = np.linalg.eigh(R)
    Qh = Uq @ np.diag(np.sqrt(wq)) @ Uq.T
    Rh = Ur @ np.diag(np.sqrt(wr)) @ Ur.T
    return PlantModel(
        A=np.zeros((n, n)),
        B_w=np.hstack([Rh, np.zeros((n, n))]),
        B_u=np.eye(n),
        C_z=np.vstack([Qh, np.zeros((n, n))]),
        D_zu=np.vstack([np.zeros((n, n)), np.eye(n)]),
        C_y=np.eye(n),
        D_yw=np.hstack([np.zeros((n, n)), np.eye(n)]),
    )


# Planar double-mass benchmark: diagonal weights rotated by pi/4 and pi/8 so
# the reset system has non-commuting cost and noise matrices.
INTEGRATOR_Q = rot(np.pi / 4).T @ np.diag([1.0, 5.0]) @ rot(np.pi / 4)
INTEGRATOR_R = rot(np.pi / 8).T @ np.diag([1.0, 5.0]) @ rot(np.pi / 8)
INTEGRATOR_GAMMA0 = 22.912536060589296
INTEGRATOR_TR_RP = 4.239574485119786
INTEGRATOR_J_E = 4.493497953719675
INTEGRATOR_J_P = 11.82842712474619
INTEGRATOR_RATIO = 2.6323428310353916

UNSTABLE_A = np.array([[0.0, 5.0], [5.0, 0.0]])
UNSTABLE_B_W = np.array([[2.84, 0.0, 0.0, 0.0], [-2.77, 0.65, 0.0, 0.0]])
UNSTABLE_B_U = np.array([[9.0, 0.0], [8.95, 0.95]])
UNSTABLE_GAMMA0 = 25.425308033266926
UNSTABLE_JH_05 = 2.934427952879068


@pytest.fixture(scope="session")
def integrator_plant() -> PlantModel:
    Qd = np.diag([1.0, 5.0])
    Rd = np.diag([1.0, 5.0])
    N4, N8 = rot(np.pi / 4), rot(np.pi / 8)
    sqQ = np.sqrt(Qd)
    sqR = np.sqrt(Rd)
    return PlantModel(
        A=np.zeros((2, 2)),
        B_w=np.hstack([(sqR @ N8).T, np.zeros((2, 2))]),
        B_u=np.eye(2),
        C_z=np.vstack([sqQ @ N4, np.zeros((2, 2))]),
        D_zu=np.vstack([np.zeros((2, 2)), np.eye(2)]),
        C_y=np.eye(2),
        D_yw=np.hstack([np.zeros((2, 2)), np.eye(2)]),
    )


@pytest.fixture(scope="session")
def integrator_reset() -> ResetSystem:
    return ResetSystem(A=np.zeros((2, 2)), Q=INTEGRATOR_Q, R=INTEGRATOR_R)


@pytest.fixture(scope="session")
def unstable_plant() -> PlantModel:
    return PlantModel(
        A=UNSTABLE_A,
        B_w=UNSTABLE_B_W,
        B_u=UNSTABLE_B_U,
        C_z=UNSTABLE_B_W.T,
        D_zu=np.vstack([np.zeros((2, 2)), np.eye(2)]),
        C_y=UNSTABLE_B_U.T,
        D_yw=np.hstack([np.zeros((2, 2)), np.eye(2)]),
    )


@pytest.fixture(scope="session")
def scalar_plant() -> PlantModel:
    """1-state plant with unit maps and padded noise/feedthrough channels."""
    return _padded_driftless_plant(np.eye(1), np.eye(1))
