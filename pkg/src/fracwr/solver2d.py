"""Two-strip decomposition of a rectangle and the 2D NNWR iteration.

Strips are split along x. Each strip is discretized with half control
volumes at its x-ends (as in 1D) and a plain second difference in y. The
interface exchanges whole line waveforms of shape ``(M+1, ny+1)``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal, solve_banded

from .dnwr import IterationHistory, interface_error
from .nnwr import _map
from .solver1d import Dirichlet, IncompatibleMeshError, InvalidGridError, Neumann, cells_for
from .timegrid import CaputoWeights, TimeMesh, caputo_weights


def _zero(*args):
    return np.zeros(np.broadcast(*args).shape)


@dataclass(frozen=True)
class Problem2D:
    nu: float
    L: float
    y_range: tuple
    kappa: float = 1.0
    forcing: Callable = None
    g: Callable = None
    u0: Callable = None
    v0: Callable = None
    T: float = 1.0

    def __post_init__(self):
        if not 0 < self.nu < 1:
            raise ValueError("nu must lie in (0, 1)")
        if not self.L > 0 or not self.y_range[1] > self.y_range[0]:
            raise ValueError("empty rectangle")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        for name in ("forcing", "g"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, _zero)
        if self.u0 is None:
            object.__setattr__(self, "u0", _zero)
        if self.v0 is None:
            object.__setattr__(self, "v0", _zero)

    @property
    def alpha(self) -> float:
        return 2 * self.nu


@dataclass(frozen=True)
class Strip:
    x_left: float
    x_right: float
    nx: int
    ny: int
    y_range: tuple
    kappa: float
    left: Dirichlet | Neumann
    right: Dirichlet | Neumann

    def __post_init__(self):
        if self.nx < 4 or self.ny < 2:
            raise InvalidGridError("strip grid too small")

    @property
    def x(self):
        return np.linspace(self.x_left, self.x_right, self.nx + 1)

    @property
    def y(self):
        return np.linspace(*self.y_range, self.ny + 1)


@dataclass(frozen=True)
class StripSolution:
    x: np.ndarray
    y: np.ndarray
    field: np.ndarray  # (M+1, nx+1, ny+1)
    flux_left: np.ndarray  # (M+1, ny+1)
    flux_right: np.ndarray

    @property
    def trace_left(self):
        return self.field[:, 0, :]

    @property
    def trace_right(self):
        return self.field[:, -1, :]


def _line(values, mesh, ny, what):
    values = np.asarray(values, dtype=float)
    if values.shape != (mesh.M + 1, ny + 1):
        raise IncompatibleMeshError(f"{what} has shape {values.shape}, expected {(mesh.M + 1, ny + 1)}")
    return values


def _march2d(x, y, kappa, left, right, F, u0, v0, G, weights: CaputoWeights):
    """Implicit stepping; ``G`` holds Dirichlet data on the whole grid boundary per step."""
    mesh = weights.mesh
    M = mesh.M
    nx, ny = len(x) - 1, len(y) - 1
    hx, hy = x[1] - x[0], y[1] - y[0]
    V = np.full(nx + 1, hx)
    V[0] = V[-1] = 0.5 * hx
    th = weights.theta
    W = weights.table
    left_dir = isinstance(left, Dirichlet)
    right_dir = isinstance(right, Dirichlet)
    lvals = _line(left.values if left_dir else left.flux, mesh, ny, "left data")
    rvals = _line(right.values if right_dir else right.flux, mesh, ny, "right data")

    cx = kappa / hx
    kx = sp.diags([np.full(nx, cx), -np.r_[cx, np.full(nx - 1, 2 * cx), cx], np.full(nx, cx)], [-1, 0, 1])
    ky = sp.diags([np.ones(ny), -2 * np.ones(ny + 1), np.ones(ny)], [-1, 0, 1], format="lil")
    ky[0, :] = 0
    ky[ny, :] = 0
    ky = (kappa / hy**2) * ky.tocsr()
    K = (sp.kron(kx, sp.identity(ny + 1)) + sp.kron(sp.diags(V), ky)).tocsr()
    mass = np.repeat(V, ny + 1)

    fixed = np.zeros((nx + 1, ny + 1), dtype=bool)
    fixed[:, 0] = fixed[:, -1] = True
    if left_dir:
        fixed[0] = True
    if right_dir:
        fixed[-1] = True
    fixed = fixed.ravel()

    # Free unknowns sit on interior y-lines, where the y-operator is the same
    # Dirichlet second difference on every x-line: diagonalize it once, then each
    # step is a tridiagonal solve in x per mode (stacked into one banded system).
    free_x = np.ones(nx + 1, dtype=bool)
    free_x[0], free_x[-1] = not left_dir, not right_dir
    lam, S = eigh_tridiagonal(np.full(ny - 1, -2.0), np.ones(ny - 2))
    lam *= kappa / hy**2
    kxd = kx.toarray()[np.ix_(free_x, free_x)]
    Vf = V[free_x]
    nf = len(Vf)
    upper = np.tile(np.r_[0.0, np.diag(kxd, 1)], ny - 1)
    lower = np.tile(np.r_[np.diag(kxd, -1), 0.0], ny - 1)
    base = np.diag(kxd)
    block = np.arange(ny - 1).repeat(nf)

    def operator(wnn):
        ab = np.empty((3, nf * (ny - 1)))
        ab[0] = -th * upper
        ab[1] = np.tile(wnn * Vf - th * base, ny - 1) - th * np.tile(Vf, ny - 1) * lam[block]
        ab[2] = -th * lower
        return ab, sp.diags(mass * wnn) - th * K

    def solve(op, rhs, gn):
        ab, A = op
        u = np.where(fixed, gn.ravel(), 0.0)
        r = (rhs - A @ u).reshape(nx + 1, ny + 1)[free_x, 1:-1]
        modal = solve_banded((1, 1), ab, (r @ S).T.ravel())
        grid = u.reshape(nx + 1, ny + 1)
        grid[np.ix_(free_x, np.arange(1, ny))] = modal.reshape(ny - 1, nf).T @ S.T
        return u

    n_dof = (nx + 1) * (ny + 1)
    U = np.empty((M + 1, n_dof))
    U[0] = u0.ravel()
    Feval = F.reshape(M + 1, -1).copy()
    Feval[1:] = th * Feval[1:] + (1 - th) * Feval[:-1]
    vel = np.zeros(n_dof) if v0 is None else v0.ravel()
    flux_l = np.zeros((M + 1, ny + 1))
    flux_r = np.zeros((M + 1, ny + 1))
    flux_l[0, 1:-1] = kappa * (-3 * u0[0, 1:-1] + 4 * u0[1, 1:-1] - u0[2, 1:-1]) / (2 * hx)
    flux_r[0, 1:-1] = kappa * (3 * u0[-1, 1:-1] - 4 * u0[-2, 1:-1] + u0[-3, 1:-1]) / (2 * hx)
    Kprev = K @ U[0]
    lu, lu_w = None, None
    for n in range(1, M + 1):
        wnn = W[n, n]
        if lu is None or wnn != lu_w:
            lu, lu_w = operator(wnn), wnn
        hist = W[n, :n] @ U[:n] + weights.velocity[n] * vel
        rhs = (mass * (Feval[n] - hist) + (1 - th) * Kprev).reshape(nx + 1, ny + 1)
        if not left_dir:
            rhs[0] -= lvals[n]
        if not right_dir:
            rhs[-1] += rvals[n]
        gn = G[n].copy()
        if left_dir:
            gn[0] = lvals[n]
        if right_dir:
            gn[-1] = rvals[n]
        un = solve(lu, rhs.ravel(), gn)
        U[n] = un
        Kn = K @ un
        Keval = (th * Kn + (1 - th) * Kprev).reshape(nx + 1, ny + 1)
        D = (wnn * un + hist - Feval[n]).reshape(nx + 1, ny + 1)
        if left_dir:
            flux_l[n, 1:-1] = (Keval[0] - V[0] * D[0])[1:-1]
        else:
            flux_l[n] = lvals[n]
        if right_dir:
            flux_r[n, 1:-1] = (V[-1] * D[-1] - Keval[-1])[1:-1]
        else:
            flux_r[n] = rvals[n]
        Kprev = Kn
    return U.reshape(M + 1, nx + 1, ny + 1), flux_l, flux_r


def solve_strip_2d(
    strip: Strip,
    problem: Problem2D,
    mesh: TimeMesh,
    weights: CaputoWeights | None = None,
    *,
    homogeneous: bool = False,
) -> StripSolution:
    if weights is None:
        weights = caputo_weights(mesh, problem.alpha)
    if weights.mesh != mesh:
        raise IncompatibleMeshError("weights were built on a different mesh")
    x, y = strip.x, strip.y
    t = mesh.nodes
    X, Y = np.meshgrid(x, y, indexing="ij")
    shape = (mesh.M + 1, len(x), len(y))
    if homogeneous:
        F = np.zeros(shape)
        G = np.zeros(shape)
        u0 = np.zeros(X.shape)
        v0 = None
    else:
        tt = t[:, None, None]
        F = np.asarray(problem.forcing(X[None], Y[None], tt), dtype=float) * np.ones(shape)
        G = np.asarray(problem.g(X[None], Y[None], tt), dtype=float) * np.ones(shape)
        u0 = np.asarray(problem.u0(X, Y), dtype=float) * np.ones(X.shape)
        v0 = np.asarray(problem.v0(X, Y), dtype=float) * np.ones(X.shape) if problem.alpha > 1 else None
    U, fl, fr = _march2d(x, y, problem.kappa, strip.left, strip.right, F, u0, v0, G, weights)
    return StripSolution(x, y, U, fl, fr)


@dataclass(frozen=True)
class Split2D:
    x1: float
    dx: float
    dy: float

    def grids(self, problem: Problem2D):
        if not 0 < self.x1 < problem.L:
            raise ValueError("split must lie strictly inside (0, L)")
        nx1 = cells_for(self.x1, self.dx)
        nx2 = cells_for(problem.L - self.x1, self.dx)
        ny = cells_for(problem.y_range[1] - problem.y_range[0], self.dy)
        return nx1, nx2, ny


def monodomain_2d(problem: Problem2D, split: Split2D, mesh: TimeMesh, weights=None):
    """Single-rectangle reference; returns ``(x, y, field, interface trace)``."""
    nx1, nx2, ny = split.grids(problem)
    t = mesh.nodes
    y = np.linspace(*problem.y_range, ny + 1)
    gl = np.asarray(problem.g(0.0, y[None, :], t[:, None]), dtype=float) * np.ones((len(t), ny + 1))
    gr = np.asarray(problem.g(problem.L, y[None, :], t[:, None]), dtype=float) * np.ones((len(t), ny + 1))
    strip = Strip(0.0, problem.L, nx1 + nx2, ny, problem.y_range, problem.kappa, Dirichlet(gl), Dirichlet(gr))
    sol = solve_strip_2d(strip, problem, mesh, weights)
    return sol.x, sol.y, sol.field, sol.field[:, nx1, :].copy()


def default_guess_2d(problem: Problem2D, split: Split2D, mesh: TimeMesh, value: float = 1.0) -> np.ndarray:
    """Constant ``value`` on (0, T] at interior y-nodes, initial and boundary data elsewhere."""
    _, _, ny = split.grids(problem)
    y = np.linspace(*problem.y_range, ny + 1)
    t = mesh.nodes
    w = np.full((mesh.M + 1, ny + 1), float(value))
    w[0] = problem.u0(split.x1, y)
    g = np.asarray(problem.g(split.x1, y[None, :], t[:, None]), dtype=float) * np.ones_like(w)
    w[:, 0], w[:, -1] = g[:, 0], g[:, -1]
    return w


def nnwr2d_sweep(problem, split, mesh, weights, w, theta, workers=None):
    nx1, nx2, ny = split.grids(problem)
    t = mesh.nodes
    y = np.linspace(*problem.y_range, ny + 1)
    gl = np.asarray(problem.g(0.0, y[None, :], t[:, None]), dtype=float) * np.ones_like(w)
    gr = np.asarray(problem.g(problem.L, y[None, :], t[:, None]), dtype=float) * np.ones_like(w)
    zero = np.zeros_like(w)
    yr, kap = problem.y_range, problem.kappa

    def dirichlet(i):
        if i == 0:
            s = Strip(0.0, split.x1, nx1, ny, yr, kap, Dirichlet(gl), Dirichlet(w))
        else:
            s = Strip(split.x1, problem.L, nx2, ny, yr, kap, Dirichlet(w), Dirichlet(gr))
        return solve_strip_2d(s, problem, mesh, weights)

    u1, u2 = _map(dirichlet, (0, 1), workers)
    jump = u1.flux_right - u2.flux_left

    def neumann(i):
        if i == 0:
            s = Strip(0.0, split.x1, nx1, ny, yr, kap, Dirichlet(zero), Neumann(jump))
        else:
            s = Strip(split.x1, problem.L, nx2, ny, yr, kap, Neumann(-jump), Dirichlet(zero))
        return solve_strip_2d(s, problem, mesh, weights, homogeneous=True)

    p1, p2 = _map(neumann, (0, 1), workers)
    new = w - theta * (p1.trace_right + p2.trace_left)
    return new, (u1, u2)


def nnwr2d_iterate(
    problem: Problem2D,
    split: Split2D,
    mesh: TimeMesh,
    theta: float = 0.25,
    guess: np.ndarray | None = None,
    k_max: int = 20,
    tol: float = 1e-10,
    reference: np.ndarray | None = None,
    weights: CaputoWeights | None = None,
    workers: int | None = None,
    dy_right: float | None = None,
    keep_solutions: bool = False,
) -> IterationHistory:
    """Two-strip NNWR; traces are ``(M+1, ny+1)`` line waveforms."""
    if dy_right is not None and not np.isclose(dy_right, split.dy):
        raise IncompatibleMeshError("both strips must share the y grid")
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    if weights is None:
        weights = caputo_weights(mesh, problem.alpha)
    w = default_guess_2d(problem, split, mesh) if guess is None else np.array(guess, dtype=float)
    _, _, ny = split.grids(problem)
    if w.shape != (mesh.M + 1, ny + 1):
        raise IncompatibleMeshError(f"guess must have shape {(mesh.M + 1, ny + 1)}")
    hist = IterationHistory(traces=[w.copy()], wall_times=[0.0])
    start = time.perf_counter()
    sols = None
    for _ in range(k_max):
        new, sols = nnwr2d_sweep(problem, split, mesh, weights, w, theta, workers)
        upd = float(np.max(np.abs(new - w)))
        w = new
        hist.traces.append(w.copy())
        hist.update_norms.append(upd)
        hist.wall_times.append(time.perf_counter() - start)
        if not np.isfinite(upd):
            hist.stop_reason = "diverged"
            break
        if upd < tol:
            hist.stop_reason = "tolerance"
            break
    else:
        hist.stop_reason = "k_max"
    if reference is not None:
        hist.errors = interface_error(hist.traces, reference)
    if keep_solutions:
        hist.solutions = list(sols) if sols else None
    return hist
