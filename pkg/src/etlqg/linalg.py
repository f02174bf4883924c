"""Small dense linear-algebra helpers used throughout the package."""

import numpy as np

from .errors import NotPositiveDefinite

# Relative margin for "eigenvalue strictly in the open left half plane".
_HURWITZ_RTOL = 1e-9


def symmetrize(M: np.ndarray) -> np.ndarray:
    """Return (M + M^T)/2."""
    return 0.5 * (M + M.T)


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float array, accepting scalars and nested lists."""
    out = np.atleast_2d(np.asarray(M, dtype=float))
    if out.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={out.ndim}")
    return out


def check_symmetric(M: np.ndarray, name: str, rtol: float = 1e-12) -> np.ndarray:
    """Require M symmetric up to rtol relative to its norm; return symmetrized copy."""
    scale = np.linalg.norm(M, "fro")
    if np.linalg.norm(M - M.T, "fro") > rtol * (1.0 + scale):
        raise ValueError(f"{name} is not symmetric")
    return symmetrize(M)


def psd_sqrt(M: np.ndarray, clip_rtol: float = 1e-10) -> np.ndarray:
    """Symmetric square root of a PSD matrix via eigendecomposition.

    Eigenvalues in [-clip_rtol*max_eig, 0) are treated as rounding noise and
    clipped to zero; anything more negative raises NotPositiveDefinite.
    """
    Ms = symmetrize(M)
    d, U = np.linalg.eigh(Ms)
    top = max(d[-1], 0.0)
    if d[0] < -clip_rtol * (1.0 + top):
        raise NotPositiveDefinite(f"matrix has eigenvalue {d[0]:.3e} < 0")
    d = np.clip(d, 0.0, None)
    return symmetrize(U @ np.diag(np.sqrt(d)) @ U.T)


def spd_check(M: np.ndarray, name: str, degenerate_rtol: float = 1e-12) -> np.ndarray:
    """Require M symmetric positive definite; reject near-singular matrices.

    Smallest eigenvalue below degenerate_rtol times the largest counts as
    singular for this package's purposes.
    """
    Ms = check_symmetric(M, name)
    d = np.linalg.eigvalsh(Ms)
    if d[-1] <= 0.0 or d[0] <= degenerate_rtol * d[-1]:
        raise NotPositiveDefinite(
            f"{name} is not positive definite (eigenvalues in [{d[0]:.3e}, {d[-1]:.3e}])"
        )
    return Ms


def hurwitz_margin(A: np.ndarray) -> float:
    """max Re(eig(A)) plus the relative tolerance slack; negative means Hurwitz."""
    eigs = np.linalg.eigvals(A)
    radius = np.max(np.abs(eigs)) if eigs.size else 0.0
    return float(np.max(eigs.real) + _HURWITZ_RTOL * (1.0 + radius))


def is_hurwitz(A: np.ndarray) -> bool:
    return hurwitz_margin(A) < 0.0
