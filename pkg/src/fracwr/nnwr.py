"""Neumann-Neumann waveform relaxation in 1D.

Each iteration runs a Dirichlet sweep with the current traces, a Neumann
correction sweep driven by the interface flux jumps (zero forcing and
initial data, homogeneous Dirichlet at the two outer ends) and a relaxed
update ``w_i <- w_i - theta_i (psi_i(x_i) + psi_{i+1}(x_i))``.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .dnwr import DecompositionSpec, IterationHistory, default_guess, interface_error
from .solver1d import Dirichlet, Neumann, ProblemSpec, SubdomainGrid, cells_for, solve_subdomain
from .timegrid import CaputoWeights, TimeMesh, caputo_weights


def optimal_theta_nnwr(kappa_i: float, kappa_ip1: float) -> float:
    if kappa_i <= 0 or kappa_ip1 <= 0:
        raise ValueError("kappa must be positive")
    r = math.sqrt(kappa_i / kappa_ip1)
    return 1.0 / (2.0 + r + 1.0 / r)


def nnwr_thetas(decomp: DecompositionSpec) -> tuple:
    if decomp.theta is not None:
        return decomp.theta
    k = decomp.kappa
    return tuple(optimal_theta_nnwr(k[j], k[j + 1]) for j in range(decomp.N - 1))


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def nnwr_sweep(spec, decomp, mesh, weights, w, thetas, workers=None):
    """One NNWR iteration; returns new traces, Dirichlet solutions and corrections."""
    N = decomp.N
    t = mesh.nodes
    gl = np.asarray(spec.g_left(t), dtype=float) * np.ones(len(t))
    gr = np.asarray(spec.g_right(t), dtype=float) * np.ones(len(t))
    zero = np.zeros(len(t))

    def grid(i, left, right):
        a, b = decomp.breakpoints[i], decomp.breakpoints[i + 1]
        return SubdomainGrid(a, b, cells_for(b - a, decomp.dx[i]), decomp.kappa[i], left, right)

    def dirichlet_step(i):
        left = Dirichlet(gl if i == 0 else w[i - 1])
        right = Dirichlet(gr if i == N - 1 else w[i])
        return solve_subdomain(grid(i, left, right), spec, mesh, weights)

    usol = _map(dirichlet_step, range(N), workers)
    # jump[j] = kappa_j u_j' - kappa_{j+1} u_{j+1}' at interface j (0-based)
    jumps = [usol[j].flux_right - usol[j + 1].flux_left for j in range(N - 1)]

    def neumann_step(i):
        left = Dirichlet(zero) if i == 0 else Neumann(-jumps[i - 1])
        right = Dirichlet(zero) if i == N - 1 else Neumann(jumps[i])
        return solve_subdomain(grid(i, left, right), spec, mesh, weights, homogeneous=True)

    psol = _map(neumann_step, range(N), workers)
    new = np.empty_like(w)
    for j in range(N - 1):
        corr = psol[j].trace_right + psol[j + 1].trace_left
        new[j] = w[j] - thetas[j] * corr
    return new, usol, psol


def nnwr_iterate(
    spec: ProblemSpec,
    decomp: DecompositionSpec,
    mesh: TimeMesh,
    guesses: np.ndarray | None = None,
    k_max: int = 30,
    tol: float = 1e-10,
    reference: np.ndarray | None = None,
    weights: CaputoWeights | None = None,
    keep_solutions: bool = False,
    workers: int | None = None,
) -> IterationHistory:
    if weights is None:
        weights = caputo_weights(mesh, spec.alpha)
    if guesses is None:
        guesses = default_guess(spec, decomp, mesh)
    w = np.array(guesses, dtype=float)
    if w.shape != (decomp.N - 1, mesh.M + 1):
        raise ValueError(f"guesses must have shape {(decomp.N - 1, mesh.M + 1)}, got {w.shape}")
    thetas = nnwr_thetas(decomp)
    if any(not 0 < th <= 1 for th in thetas):
        raise ValueError("theta must lie in (0, 1]")
    hist = IterationHistory(traces=[w.copy()])
    hist.wall_times.append(0.0)
    start = time.perf_counter()
    usol = None
    for _ in range(k_max):
        new, usol, _ = nnwr_sweep(spec, decomp, mesh, weights, w, thetas, workers)
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
        hist.solutions = usol
    return hist
