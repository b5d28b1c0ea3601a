"""One-dimensional finite-volume solver for the time-fractional equation.

Every node carries a control volume (half cells at the ends) so that a
Neumann end is the ghost-point elimination of the central stencil. Fluxes
handed to neighbours are the discrete residual fluxes of the boundary half
cell, which makes the decomposed fixed point coincide with the single-domain
discretization.

Flux waveforms are step-evaluated: entry ``n`` is the flux used by the
equation of step ``n`` (the theta-average between ``t_{n-1}`` and ``t_n``).
Entry 0 holds the one-sided stencil value of the initial field.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .timegrid import CaputoWeights, TimeMesh, caputo_weights


class IncompatibleMeshError(ValueError):
    pass


class InvalidGridError(ValueError):
    pass


def _zero_x(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _zero_xt(x, t):
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape)


def _zero_t(t):
    return np.zeros_like(np.asarray(t, dtype=float))


def piecewise_kappa(breaks: Sequence[float], values: Sequence[float]) -> Callable:
    """Piecewise-constant coefficient; ``breaks`` are the interior breakpoints."""
    breaks = np.asarray(breaks, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(values) != len(breaks) + 1:
        raise ValueError("need one value per piece")
    if np.any(values <= 0):
        raise ValueError("diffusion coefficients must be positive")

    def kappa(x):
        return values[np.searchsorted(breaks, np.asarray(x, dtype=float), side="right")]

    return kappa


@dataclass(frozen=True)
class ProblemSpec:
    nu: float
    domain: tuple[float, float]
    kappa: Callable = None
    forcing: Callable = None
    g_left: Callable = None
    g_right: Callable = None
    u0: Callable = None
    v0: Callable = None
    T: float = 1.0

    def __post_init__(self):
        if not 0 < self.nu < 1:
            raise ValueError(f"nu must lie in (0, 1), got {self.nu}")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if not self.domain[1] > self.domain[0]:
            raise ValueError("empty domain")
        defaults = {
            "kappa": lambda x: np.ones_like(np.asarray(x, dtype=float)),
            "forcing": _zero_xt,
            "g_left": _zero_t,
            "g_right": _zero_t,
            "u0": _zero_x,
        }
        for name, fn in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, fn)
        if self.alpha > 1 and self.v0 is None:
            object.__setattr__(self, "v0", _zero_x)

    @property
    def alpha(self) -> float:
        return 2 * self.nu

    def initial_velocity(self, x):
        if self.alpha <= 1:
            return None
        return np.asarray(self.v0(x), dtype=float)


@dataclass(frozen=True)
class Dirichlet:
    values: np.ndarray


@dataclass(frozen=True)
class Neumann:
    """Prescribed ``kappa * du/dx`` (x-direction), step-evaluated."""

    flux: np.ndarray


@dataclass(frozen=True)
class SubdomainGrid:
    x_left: float
    x_right: float
    n_cells: int
    kappa: float
    left: Dirichlet | Neumann
    right: Dirichlet | Neumann

    def __post_init__(self):
        if self.n_cells < 4:
            raise InvalidGridError("a subdomain needs at least 3 interior nodes")
        if not self.x_right > self.x_left:
            raise InvalidGridError("empty subdomain")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.n_cells

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.x_left, self.x_right, self.n_cells + 1)


@dataclass(frozen=True)
class SubdomainSolution:
    x: np.ndarray
    field: np.ndarray
    flux_left: np.ndarray
    flux_right: np.ndarray

    @property
    def trace_left(self) -> np.ndarray:
        return self.field[:, 0]

    @property
    def trace_right(self) -> np.ndarray:
        return self.field[:, -1]


def cells_for(length: float, dx: float) -> int:
    n = int(round(length / dx))
    if n < 1 or abs(n * dx - length) > 1e-9 * max(1.0, length):
        raise InvalidGridError(f"dx={dx} does not divide length {length}")
    return n


def extract_flux(field: np.ndarray, side: str, kappa: float, dx: float) -> np.ndarray:
    """Second-order one-sided ``kappa * du/dx`` at one end, per time step."""
    field = np.atleast_2d(field)
    if field.shape[1] < 3:
        raise InvalidGridError("flux stencil needs at least 3 nodes")
    if side == "left":
        return kappa * (-3 * field[:, 0] + 4 * field[:, 1] - field[:, 2]) / (2 * dx)
    if side == "right":
        return kappa * (3 * field[:, -1] - 4 * field[:, -2] + field[:, -3]) / (2 * dx)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def _check_waveform(values, mesh: TimeMesh, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != (mesh.M + 1,):
        raise IncompatibleMeshError(f"{what} has {values.shape} samples, mesh has {mesh.M + 1} nodes")
    return values


def _march(x, cell_kappa, left, right, F, u0, v0, weights: CaputoWeights):
    """Implicit marching on nodes ``x``; returns field and residual end fluxes."""
    mesh = weights.mesh
    M = mesh.M
    N = len(x)
    h = np.diff(x)
    c = cell_kappa / h
    V = np.empty(N)
    V[1:-1] = 0.5 * (h[:-1] + h[1:])
    V[0], V[-1] = 0.5 * h[0], 0.5 * h[-1]
    th = weights.theta
    W = weights.table

    left_dir = isinstance(left, Dirichlet)
    right_dir = isinstance(right, Dirichlet)
    lvals = _check_waveform(left.values if left_dir else left.flux, mesh, "left data")
    rvals = _check_waveform(right.values if right_dir else right.flux, mesh, "right data")

    def stiff(u):
        out = np.zeros_like(u)
        d = c * np.diff(u)
        out[:-1] += d
        out[1:] -= d
        return out

    # Fixed tridiagonal stencil of -theta*K (banded storage rows: upper, diag, lower)
    upper = np.zeros(N)
    lower = np.zeros(N)
    kdiag = np.zeros(N)
    upper[1:] = -th * c
    lower[:-1] = -th * c
    kdiag[:-1] += th * c
    kdiag[1:] += th * c
    if left_dir:
        upper[1] = 0.0
        kdiag[0] = 0.0
    if right_dir:
        lower[-2] = 0.0
        kdiag[-1] = 0.0
    mass = V.copy()
    if left_dir:
        mass[0] = 0.0
    if right_dir:
        mass[-1] = 0.0

    U = np.empty((M + 1, N))
    U[0] = u0
    Feval = F.copy()
    Feval[1:] = th * F[1:] + (1 - th) * F[:-1]
    vel_term = np.zeros(N) if v0 is None else v0
    flux_l = np.empty(M + 1)
    flux_r = np.empty(M + 1)
    flux_l[0] = extract_flux(U[:1], "left", cell_kappa[0], h[0])[0]
    flux_r[0] = extract_flux(U[:1], "right", cell_kappa[-1], h[-1])[0]
    Kprev = stiff(U[0])
    ab = np.zeros((3, N))
    ab[0] = upper
    ab[2] = lower
    for n in range(1, M + 1):
        wnn = W[n, n]
        assert wnn > 0, "implicit system lost diagonal dominance"
        hist = W[n, :n] @ U[:n] + weights.velocity[n] * vel_term
        rhs = V * (Feval[n] - hist) + (1 - th) * Kprev
        ab[1] = mass * wnn + kdiag
        if left_dir:
            ab[1, 0] = 1.0
            rhs[0] = lvals[n]
        else:
            rhs[0] -= lvals[n]
        if right_dir:
            ab[1, -1] = 1.0
            rhs[-1] = rvals[n]
        else:
            rhs[-1] += rvals[n]
        un = solve_banded((1, 1), ab, rhs, check_finite=False)
        U[n] = un
        Kn = stiff(un)
        Keval = th * Kn + (1 - th) * Kprev
        if left_dir:
            dterm = wnn * un[0] + hist[0] - Feval[n, 0]
            flux_l[n] = Keval[0] - V[0] * dterm
        else:
            flux_l[n] = lvals[n]
        if right_dir:
            dterm = wnn * un[-1] + hist[-1] - Feval[n, -1]
            flux_r[n] = V[-1] * dterm - Keval[-1]
        else:
            flux_r[n] = rvals[n]
        Kprev = Kn
    return U, flux_l, flux_r


def solve_subdomain(
    grid: SubdomainGrid,
    spec: ProblemSpec,
    mesh: TimeMesh,
    weights: CaputoWeights | None = None,
    *,
    homogeneous: bool = False,
) -> SubdomainSolution:
    """Solve on one subdomain with the given end conditions.

    ``homogeneous=True`` drops forcing and initial data (correction solves).
    """
    if weights is None:
        weights = caputo_weights(mesh, spec.alpha)
    if weights.mesh != mesh:
        raise IncompatibleMeshError("weights were built on a different mesh")
    x = grid.nodes
    t = mesh.nodes
    if homogeneous:
        F = np.zeros((mesh.M + 1, len(x)))
        u0 = np.zeros(len(x))
        v0 = None
    else:
        F = np.asarray(spec.forcing(x[None, :], t[:, None]), dtype=float) * np.ones((len(t), len(x)))
        u0 = np.asarray(spec.u0(x), dtype=float) * np.ones(len(x))
        v0 = spec.initial_velocity(x)
    kap = np.full(grid.n_cells, float(grid.kappa))
    U, fl, fr = _march(x, kap, grid.left, grid.right, F, u0, v0, weights)
    return SubdomainSolution(x, U, fl, fr)


def composite_nodes(breakpoints: Sequence[float], dx: Sequence[float] | float) -> np.ndarray:
    """Concatenated uniform grids, one per piece, sharing breakpoint nodes."""
    breakpoints = list(breakpoints)
    if np.isscalar(dx):
        dx = [dx] * (len(breakpoints) - 1)
    parts = []
    for a, b, d in zip(breakpoints[:-1], breakpoints[1:], dx):
        n = cells_for(b - a, d)
        seg = np.linspace(a, b, n + 1)
        parts.append(seg if not parts else seg[1:])
    return np.concatenate(parts)


def solve_monodomain(
    spec: ProblemSpec,
    breakpoints: Sequence[float],
    dx: Sequence[float] | float,
    mesh: TimeMesh,
    weights: CaputoWeights | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Single-domain reference solve; returns ``(x, field)``.

    Each cell lies inside one piece, so its face coefficient is that piece's
    kappa (the harmonic mean of identical values).
    """
    if weights is None:
        weights = caputo_weights(mesh, spec.alpha)
    if not np.isclose(breakpoints[0], spec.domain[0]) or not np.isclose(breakpoints[-1], spec.domain[1]):
        raise ValueError("breakpoints must span the domain")
    x = composite_nodes(breakpoints, dx)
    t = mesh.nodes
    mid = 0.5 * (x[1:] + x[:-1])
    kap = np.asarray(spec.kappa(mid), dtype=float) * np.ones(len(mid))
    F = np.asarray(spec.forcing(x[None, :], t[:, None]), dtype=float) * np.ones((len(t), len(x)))
    u0 = np.asarray(spec.u0(x), dtype=float) * np.ones(len(x))
    left = Dirichlet(np.asarray(spec.g_left(t), dtype=float) * np.ones(len(t)))
    right = Dirichlet(np.asarray(spec.g_right(t), dtype=float) * np.ones(len(t)))
    U, _, _ = _march(x, kap, left, right, F, u0, spec.initial_velocity(x), weights)
    return x, U


def sample_at(x: np.ndarray, field: np.ndarray, points: Sequence[float]) -> np.ndarray:
    """Columns of ``field`` at grid nodes nearest to ``points``; shape (M+1, len(points))."""
    idx = [int(np.argmin(np.abs(x - p))) for p in points]
    for i, p in zip(idx, points):
        if abs(x[i] - p) > 1e-9:
            raise InvalidGridError(f"{p} is not a grid node")
    return field[:, idx]
