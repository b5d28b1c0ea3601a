"""Dirichlet-Neumann waveform relaxation on a 1D multi-subdomain split.

The pivot subdomain ``p = ceil(N/2)`` takes Dirichlet traces on both sides.
Subdomains left of it take Dirichlet data on the left and the flux of their
right neighbour on the right, swept outward; the right half mirrors this.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .solver1d import (
    Dirichlet,
    Neumann,
    ProblemSpec,
    SubdomainGrid,
    SubdomainSolution,
    cells_for,
    piecewise_kappa,
    sample_at,
    solve_monodomain,
    solve_subdomain,
)
from .timegrid import CaputoWeights, TimeMesh, caputo_weights


@dataclass(frozen=True)
class DecompositionSpec:
    breakpoints: tuple
    kappa: tuple
    dx: tuple
    theta: tuple | None = None

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        object.__setattr__(self, "breakpoints", bp)
        N = len(bp) - 1
        if N < 2:
            raise ValueError("need at least two subdomains")
        if any(b <= a for a, b in zip(bp[:-1], bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        kappa = tuple(float(k) for k in self.kappa)
        if len(kappa) != N or min(kappa) <= 0:
            raise ValueError("need one positive kappa per subdomain")
        object.__setattr__(self, "kappa", kappa)
        dx = self.dx
        if np.isscalar(dx):
            dx = (float(dx),) * N
        dx = tuple(float(d) for d in dx)
        if len(dx) != N:
            raise ValueError("need one dx per subdomain")
        object.__setattr__(self, "dx", dx)
        for a, d in zip(self.lengths, dx):
            cells_for(a, d)
        if self.theta is not None:
            th = tuple(float(t) for t in self.theta)
            if len(th) != N - 1:
                raise ValueError("need one theta per interface")
            if any(not 0 < t <= 1 for t in th):
                raise ValueError("theta must lie in (0, 1]")
            object.__setattr__(self, "theta", th)

    @property
    def N(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def scaled_lengths(self) -> np.ndarray:
        return self.lengths / np.sqrt(self.kappa)

    @property
    def interfaces(self) -> tuple:
        return self.breakpoints[1:-1]

    def kappa_function(self):
        return piecewise_kappa(self.interfaces, self.kappa)

    def with_theta(self, theta) -> "DecompositionSpec":
        if np.isscalar(theta):
            theta = (float(theta),) * (self.N - 1)
        return DecompositionSpec(self.breakpoints, self.kappa, self.dx, tuple(theta))


@dataclass
class IterationHistory:
    traces: list = field(default_factory=list)
    update_norms: list = field(default_factory=list)
    errors: list | None = None
    wall_times: list = field(default_factory=list)
    stop_reason: str = ""
    solutions: list | None = None

    @property
    def iterations(self) -> int:
        return len(self.traces) - 1

    def iterations_to(self, tol: float) -> int | None:
        """First k with e_k < tol, or None."""
        if self.errors is None:
            raise ValueError("history carries no reference errors")
        for k, e in enumerate(self.errors):
            if e < tol:
                return k
        return None


def optimal_theta_dnwr(kappa_dirichlet_side: float, kappa_neumann_side: float) -> float:
    """Optimal relaxation ``1/(1 + sqrt(kD/kN))`` for one interface."""
    if kappa_dirichlet_side <= 0 or kappa_neumann_side <= 0:
        raise ValueError("kappa must be positive")
    return 1.0 / (1.0 + math.sqrt(kappa_dirichlet_side / kappa_neumann_side))


def pivot_index(N: int) -> int:
    """1-based pivot subdomain."""
    return math.ceil(N / 2)


def dnwr_thetas(decomp: DecompositionSpec) -> tuple:
    if decomp.theta is not None:
        return decomp.theta
    p = pivot_index(decomp.N)
    k = decomp.kappa
    out = []
    for j in range(1, decomp.N):
        if j < p:
            out.append(optimal_theta_dnwr(k[j], k[j - 1]))
        else:
            out.append(optimal_theta_dnwr(k[j - 1], k[j]))
    return tuple(out)


def default_guess(spec: ProblemSpec, decomp: DecompositionSpec, mesh: TimeMesh, value: float = 1.0) -> np.ndarray:
    """Constant guess on (0, T], initial data at t = 0."""
    g = np.full((decomp.N - 1, mesh.M + 1), float(value))
    g[:, 0] = spec.u0(np.asarray(decomp.interfaces))
    return g


def monodomain_reference(spec: ProblemSpec, decomp: DecompositionSpec, mesh: TimeMesh, weights=None):
    """Single-domain field and its interface traces, shape (N-1, M+1)."""
    x, U = solve_monodomain(spec, decomp.breakpoints, decomp.dx, mesh, weights)
    return x, U, sample_at(x, U, decomp.interfaces).T.copy()


def interface_error(traces: Sequence[np.ndarray], reference: np.ndarray) -> list:
    """``e_k`` = max over interfaces and time nodes of |trace - reference|."""
    reference = np.asarray(reference)
    out = []
    for tr in traces:
        tr = np.asarray(tr)
        if tr.shape != reference.shape:
            raise ValueError("trace and reference sampled on different meshes")
        out.append(float(np.max(np.abs(tr - reference))) if tr.size else 0.0)
    return out


def _grid(decomp, i, left, right):
    a, b = decomp.breakpoints[i], decomp.breakpoints[i + 1]
    return SubdomainGrid(a, b, cells_for(b - a, decomp.dx[i]), decomp.kappa[i], left, right)


def dnwr_sweep(spec, decomp, mesh, weights, psi, thetas) -> tuple[np.ndarray, list]:
    """One DNWR iteration; returns updated traces and the subdomain solutions."""
    N = decomp.N
    p = pivot_index(N)
    t = mesh.nodes
    gl = np.asarray(spec.g_left(t), dtype=float) * np.ones(len(t))
    gr = np.asarray(spec.g_right(t), dtype=float) * np.ones(len(t))

    def dleft(i):  # Dirichlet data at the left end of subdomain i (0-based)
        return Dirichlet(gl if i == 0 else psi[i - 1])

    def dright(i):
        return Dirichlet(gr if i == N - 1 else psi[i])

    sols: list[SubdomainSolution | None] = [None] * N
    piv = p - 1
    sols[piv] = solve_subdomain(_grid(decomp, piv, dleft(piv), dright(piv)), spec, mesh, weights)
    for i in range(piv - 1, -1, -1):
        sols[i] = solve_subdomain(_grid(decomp, i, dleft(i), Neumann(sols[i + 1].flux_left)), spec, mesh, weights)
    for i in range(piv + 1, N):
        sols[i] = solve_subdomain(_grid(decomp, i, Neumann(sols[i - 1].flux_right), dright(i)), spec, mesh, weights)

    new = np.empty_like(psi)
    for j in range(1, N):
        th = thetas[j - 1]
        if j < p:
            fresh = sols[j - 1].trace_right
        else:
            fresh = sols[j].trace_left
        if th == 1.0:
            new[j - 1] = fresh
        else:
            new[j - 1] = th * fresh + (1 - th) * psi[j - 1]
    return new, sols


def dnwr_iterate(
    spec: ProblemSpec,
    decomp: DecompositionSpec,
    mesh: TimeMesh,
    guesses: np.ndarray | None = None,
    k_max: int = 30,
    tol: float = 1e-10,
    reference: np.ndarray | None = None,
    weights: CaputoWeights | None = None,
    keep_solutions: bool = False,
) -> IterationHistory:
    if weights is None:
        weights = caputo_weights(mesh, spec.alpha)
    if guesses is None:
        guesses = default_guess(spec, decomp, mesh)
    psi = np.array(guesses, dtype=float)
    if psi.shape != (decomp.N - 1, mesh.M + 1):
        raise ValueError(f"guesses must have shape {(decomp.N - 1, mesh.M + 1)}, got {psi.shape}")
    thetas = dnwr_thetas(decomp)
    if any(not 0 < th <= 1 for th in thetas):
        raise ValueError("theta must lie in (0, 1]")
    hist = IterationHistory(traces=[psi.copy()])
    start = time.perf_counter()
    hist.wall_times.append(0.0)
    sols = None
    for _ in range(k_max):
        new, sols = dnwr_sweep(spec, decomp, mesh, weights, psi, thetas)
        upd = float(np.max(np.abs(new - psi)))
        psi = new
        hist.traces.append(psi.copy())
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
        hist.solutions = sols
    return hist


def assemble_field(solutions: Sequence[SubdomainSolution]) -> tuple[np.ndarray, np.ndarray]:
    """Glue subdomain fields on the composite grid (shared nodes from the left piece)."""
    xs = [solutions[0].x] + [s.x[1:] for s in solutions[1:]]
    fs = [solutions[0].field] + [s.field[:, 1:] for s in solutions[1:]]
    return np.concatenate(xs), np.concatenate(fs, axis=1)
