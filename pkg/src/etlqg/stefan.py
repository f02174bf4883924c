"""Free-boundary PDE solver for the optimal trigger set of a 2-D reset system.

The stationary continuation value V <= 0 of the impulse-control problem
satisfies, inside the continuation region Omega = {V < 0},

    x'Qx - J + (Ax).grad V + 1/2 Tr(R hess V) = 0,

with V = 0 and grad V = 0 on the free boundary.  It is computed as the
stationary limit of the obstacle-constrained parabolic problem: implicit
Euler steps (I - dt L) V_{k+1} = V_k + dt (x'Qx - J) followed by the clamp
V := min(V, 0), starting from V = 0 on a uniform node-centered grid with
far-field Dirichlet zero.  The trigger price recovered from the solution is
rho_effective = -V(0).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu
from skimage import measure

from ._kernels import grid_fire
from .errors import (
    DimensionError,
    DomainError,
    EmptyOmega,
    NonFiniteValue,
    NotPositiveDefinite,
    NotStationary,
    OmegaTouchesBoundary,
)
from .integrator import solve_riccati_like
from .lqg import ResetSystem

# Nodes with V above -_MASK_DUST_RTOL * max|V| count as clamped; direct sparse
# solves leave O(1e-15) negative dust on far-field nodes that must not be
# mistaken for the continuation region.
_MASK_DUST_RTOL = 1e-9

_DEFAULT_N_CELLS = 256
_DEFAULT_MARGIN = 3.0
_DEFAULT_MAX_STEPS = 200_000
_DEFAULT_TOL_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Uniform node-centered grid on [-w1, w1] x [-w2, w2] plus run controls.

    n_cells counts cells per axis (nodes = n_cells + 1), must be even and
    >= 32 so the origin falls on a node and the stencil has room.
    """

    half_width: np.ndarray
    n_cells: np.ndarray
    dt: float
    stationarity_tol: float
    max_steps: int

    def __post_init__(self):
        w = np.asarray(self.half_width, dtype=float).ravel()
        m = np.asarray(self.n_cells, dtype=int).ravel()
        if w.shape != (2,) or m.shape != (2,):
            raise DimensionError("half_width and n_cells must each have 2 entries")
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise ValueError("half_width entries must be positive and finite")
        if np.any(m < 32) or np.any(m % 2 != 0):
            raise ValueError("n_cells entries must be even and >= 32")
        if not (self.dt > 0.0 and np.isfinite(self.dt)):
            raise ValueError("dt must be positive and finite")
        if not (self.stationarity_tol > 0.0 and np.isfinite(self.stationarity_tol)):
            raise ValueError("stationarity_tol must be positive and finite")
        if int(self.max_steps) < 1:
            raise ValueError("max_steps must be >= 1")
        object.__setattr__(self, "half_width", w)
        object.__setattr__(self, "n_cells", m)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "stationarity_tol", float(self.stationarity_tol))
        object.__setattr__(self, "max_steps", int(self.max_steps))

    @property
    def dx(self) -> np.ndarray:
        return 2.0 * self.half_width / self.n_cells

    @property
    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        w, m = self.half_width, self.n_cells
        return (
            np.linspace(-w[0], w[0], m[0] + 1),
            np.linspace(-w[1], w[1], m[1] + 1),
        )


def auto_grid_spec(
    sys: ResetSystem,
    J: float,
    n_cells: int = _DEFAULT_N_CELLS,
    margin: float = _DEFAULT_MARGIN,
    max_steps: int = _DEFAULT_MAX_STEPS,
) -> GridSpec:
    """Default grid for stefan_solve.

    The half widths are `margin` times the bounding box of the driftless
    closed-form trigger ellipsoid at the price rho matching J, which is a
    reasonable scale even when A is nonzero; strongly skewed drift may need
    a larger margin.  dt is the diffusion time scale (min dx)^2 / min-eig(R)
    and the stationarity tolerance is 1e-6 * J.
    """
    if not (J > 0.0 and np.isfinite(J)):
        raise DomainError("J must be positive and finite")
    r_eigs = np.linalg.eigvalsh(sys.R)
    if r_eigs[0] <= 0.0:
        raise NotPositiveDefinite("auto grid sizing requires positive definite R")
    try:
        P = solve_riccati_like(sys.Q, sys.R)
        s = float(np.trace(sys.R @ P))
        rho_guess = (J / s) ** 2
        radius = np.sqrt(2.0 * np.sqrt(rho_guess) * np.diag(np.linalg.inv(P)))
    except NotPositiveDefinite:
        # singular Q: fall back to the bounding box of {x'Qx = J}
        radius = np.sqrt(J * np.diag(np.linalg.pinv(sys.Q)))
        radius = np.where(np.isfinite(radius) & (radius > 0), radius, np.max(radius))
    w = margin * radius
    m = np.array([n_cells, n_cells], dtype=int)
    dx_min = float(np.min(2.0 * w / m))
    dt = dx_min * dx_min / float(r_eigs[0])
    return GridSpec(
        half_width=w,
        n_cells=m,
        dt=dt,
        stationarity_tol=_DEFAULT_TOL_RTOL * J,
        max_steps=max_steps,
    )


@dataclass(frozen=True, eq=False)
class ValueFunctionGrid:
    """Converged continuation value on the grid.

    V has shape (n1+1, n2+1), axis 0 along x1.  omega_mask marks nodes
    strictly inside the continuation region (dust-thresholded V < 0) and is
    False on and next to every grid edge for a valid solve.
    """

    spec: GridSpec
    V: np.ndarray
    J: float
    rho_effective: float
    omega_mask: np.ndarray = field(init=False)
    _mask_float: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        V = np.asarray(self.V, dtype=float)
        m = self.spec.n_cells
        if V.shape != (m[0] + 1, m[1] + 1):
            raise DimensionError("V shape does not match the grid spec")
        object.__setattr__(self, "V", V)
        cut = -_MASK_DUST_RTOL * max(float(-V.min()), 0.0)
        mask = V < cut if cut < 0.0 else np.zeros_like(V, dtype=bool)
        object.__setattr__(self, "omega_mask", mask)
        object.__setattr__(self, "_mask_float", mask.astype(float))

    def interp_value(self, x) -> float:
        """Bilinear interpolation of V; points outside the grid return 0."""
        x = np.asarray(x, dtype=float).ravel()
        w, d, m = self.spec.half_width, self.spec.dx, self.spec.n_cells
        u = (x[0] + w[0]) / d[0]
        v = (x[1] + w[1]) / d[1]
        if u < 0.0 or u > m[0] or v < 0.0 or v > m[1]:
            return 0.0
        iu = min(int(u), m[0] - 1)
        iv = min(int(v), m[1] - 1)
        fu, fv = u - iu, v - iv
        Vg = self.V
        return float(
            Vg[iu, iv] * (1 - fu) * (1 - fv)
            + Vg[iu + 1, iv] * fu * (1 - fv)
            + Vg[iu, iv + 1] * (1 - fu) * fv
            + Vg[iu + 1, iv + 1] * fu * fv
        )


@dataclass(frozen=True, eq=False)
class BoundaryPolyline:
    """Closed counterclockwise polyline, shape (m, 2) with last point = first."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
            raise DimensionError("polyline must be (m, 2) with m >= 4")
        object.__setattr__(self, "points", pts)

    @property
    def is_closed(self) -> bool:
        return bool(np.allclose(self.points[0], self.points[-1]))

    @property
    def area(self) -> float:
        """Enclosed (signed) area; positive for counterclockwise orientation."""
        p = self.points
        return 0.5 * float(np.sum(p[:-1, 0] * p[1:, 1] - p[1:, 0] * p[:-1, 1]))


def _require_2d(sys: ResetSystem):
    if sys.n != 2:
        raise DimensionError("the grid solver supports n = 2 only")


def _stencil_parts(sys: ResetSystem, spec: GridSpec):
    """COO triplets of the interior generator rows plus boundary indices.

    Convection (Ax).grad V uses central differences; diffusion uses the
    standard second differences with the four-corner stencil for the mixed
    derivative.  Rows for far-field nodes are left empty here.
    """
    m1, m2 = spec.n_cells
    x1, x2 = spec.axes
    d1, d2 = spec.dx
    A, R = sys.A, sys.R

    ii, jj = np.meshgrid(np.arange(1, m1), np.arange(1, m2), indexing="ij")
    ii = ii.ravel()
    jj = jj.ravel()
    xc1 = x1[ii]
    xc2 = x2[jj]
    v1 = A[0, 0] * xc1 + A[0, 1] * xc2
    v2 = A[1, 0] * xc1 + A[1, 1] * xc2

    def k(i, j):
        return i * (m2 + 1) + j

    rows, cols, vals = [], [], []

    def add(di, dj, coeff):
        rows.append(k(ii, jj))
        cols.append(k(ii + di, jj + dj))
        vals.append(np.broadcast_to(coeff, ii.shape).astype(float))

    c1 = v1 / (2.0 * d1)
    c2 = v2 / (2.0 * d2)
    dxx = 0.5 * R[0, 0] / d1**2
    dyy = 0.5 * R[1, 1] / d2**2
    dxy = R[0, 1] / (4.0 * d1 * d2)
    add(+1, 0, c1 + dxx)
    add(-1, 0, -c1 + dxx)
    add(0, +1, c2 + dyy)
    add(0, -1, -c2 + dyy)
    add(0, 0, np.full(ii.shape, -2.0 * (dxx + dyy)))
    if dxy != 0.0:
        add(+1, +1, np.full(ii.shape, dxy))
        add(-1, -1, np.full(ii.shape, dxy))
        add(+1, -1, np.full(ii.shape, -dxy))
        add(-1, +1, np.full(ii.shape, -dxy))

    boundary = np.zeros((m1 + 1, m2 + 1), dtype=bool)
    boundary[0, :] = boundary[-1, :] = True
    boundary[:, 0] = boundary[:, -1] = True
    return (
        np.concatenate(rows),
        np.concatenate(cols),
        np.concatenate(vals),
        np.flatnonzero(boundary.ravel()),
    )


def assemble_operator(sys: ResetSystem, spec: GridSpec) -> sp.csr_matrix:
    """Sparse discretization of L[V] = (Ax).grad V + 1/2 Tr(R hess V).

    Interior rows hold the 9-point stencil; far-field rows are identity so
    that the Dirichlet condition V = 0 is represented explicitly.
    """
    _require_2d(sys)
    rows, cols, vals, bidx = _stencil_parts(sys, spec)
    N = int(np.prod(spec.n_cells + 1))
    rows = np.concatenate([rows, bidx])
    cols = np.concatenate([cols, bidx])
    vals = np.concatenate([vals, np.ones(bidx.size)])
    return sp.coo_matrix((vals, (rows, cols)), shape=(N, N)).tocsr()


def stefan_solve(sys: ResetSystem, J: float, spec: GridSpec | None = None) -> ValueFunctionGrid:
    """Run the clamped implicit iteration to stationarity.

    Args:
        sys: reset system with n = 2.
        J: stationary cost rate defining the free-boundary problem; must be
            positive.
        spec: grid and run controls; defaults to auto_grid_spec(sys, J).

    Returns:
        ValueFunctionGrid with the converged V, its continuation mask, and
        rho_effective = -V(origin).

    Raises:
        NotStationary: max_steps exhausted before the update rate dropped
            below stationarity_tol.
        OmegaTouchesBoundary: the continuation region reached the nodes
            adjacent to a grid edge; enlarge half_width.
        NonFiniteValue: the iteration produced NaN or infinity.
    """
    _require_2d(sys)
    if not (J > 0.0 and np.isfinite(J)):
        raise DomainError("J must be positive and finite")
    if spec is None:
        spec = auto_grid_spec(sys, J)

    m1, m2 = spec.n_cells
    x1, x2 = spec.axes
    rows, cols, vals, bidx = _stencil_parts(sys, spec)
    N = (m1 + 1) * (m2 + 1)
    L_int = sp.coo_matrix((vals, (rows, cols)), shape=(N, N)).tocsr()
    # boundary rows of L_int are zero, so M keeps exact identity rows there
    M = (sp.eye(N, format="csr") - spec.dt * L_int).tocsc()
    lu = splu(M)

    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    Q = sys.Q
    g = (Q[0, 0] * X1**2 + 2.0 * Q[0, 1] * X1 * X2 + Q[1, 1] * X2**2 - J).ravel()

    ring = np.zeros((m1 + 1, m2 + 1), dtype=bool)
    ring[1, :] = ring[-2, :] = True
    ring[:, 1] = ring[:, -2] = True
    ridx = np.flatnonzero(ring.ravel())

    V = np.zeros(N)
    dt = spec.dt
    converged = False
    for _ in range(spec.max_steps):
        rhs = V + dt * g
        rhs[bidx] = 0.0
        W = lu.solve(rhs)
        np.minimum(W, 0.0, out=W)
        delta = float(np.max(np.abs(W - V))) / dt
        if not np.isfinite(delta):
            raise NonFiniteValue("PDE iteration produced non-finite values")
        V = W
        vmin = float(V.min())
        if vmin < 0.0 and np.min(V[ridx]) < _MASK_DUST_RTOL * vmin:
            raise OmegaTouchesBoundary(
                "continuation region reached the grid edge; increase half_width"
            )
        if delta < spec.stationarity_tol:
            converged = True
            break
    if not converged:
        raise NotStationary(
            f"update rate {delta:.3e} still above tolerance "
            f"{spec.stationarity_tol:.3e} after {spec.max_steps} steps"
        )

    V2 = V.reshape(m1 + 1, m2 + 1)
    rho_effective = float(-V2[m1 // 2, m2 // 2])
    return ValueFunctionGrid(spec=spec, V=V2, J=float(J), rho_effective=rho_effective)


def _ring_touches(mask: np.ndarray) -> bool:
    return bool(
        mask[:2, :].any() or mask[-2:, :].any() or mask[:, :2].any() or mask[:, -2:].any()
    )


def extract_boundary(grid: ValueFunctionGrid) -> BoundaryPolyline:
    """Marching-squares boundary of the continuation mask, closed and CCW.

    The polyline is the 0.5-level contour of the node indicator, i.e. it
    passes midway between the last node inside Omega and the first node
    outside, consistent with grid_trigger's interpolation rule.

    Raises:
        EmptyOmega: no nodes are strictly inside the region.
        OmegaTouchesBoundary: the mask reaches the grid edge.
    """
    mask = grid.omega_mask
    if not mask.any():
        raise EmptyOmega("continuation region contains no grid nodes")
    if _ring_touches(mask):
        raise OmegaTouchesBoundary("mask touches the grid edge; solution invalid")

    contours = measure.find_contours(grid._mask_float, 0.5)
    closed = [c for c in contours if np.allclose(c[0], c[-1])]
    if not closed:
        raise EmptyOmega("no closed contour found at the mask boundary")

    def index_area(c):
        return abs(np.sum(c[:-1, 0] * c[1:, 1] - c[1:, 0] * c[:-1, 1]))

    c = max(closed, key=index_area)
    w, d = grid.spec.half_width, grid.spec.dx
    pts = np.stack([-w[0] + c[:, 0] * d[0], -w[1] + c[:, 1] * d[1]], axis=1)
    area2 = np.sum(pts[:-1, 0] * pts[1:, 1] - pts[1:, 0] * pts[:-1, 1])
    if area2 < 0.0:
        pts = pts[::-1].copy()
    return BoundaryPolyline(points=pts)


def grid_trigger(x, grid: ValueFunctionGrid) -> bool:
    """Transmit iff x lies on or outside the stored continuation region.

    Uses bilinear interpolation of the node indicator with threshold 1/2, so
    points on the extracted polyline fire; points outside the grid fire.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.shape != (2,):
        raise DimensionError("grid_trigger expects a 2-vector")
    w, d = grid.spec.half_width, grid.spec.dx
    return bool(
        grid_fire(grid._mask_float, w[0], w[1], d[0], d[1], float(x[0]), float(x[1]))
    )
