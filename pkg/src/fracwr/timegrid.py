"""Time meshes and discrete Caputo derivatives.

Two discretizations are provided:

* ``l1_weights``: the L1 scheme on an arbitrary (typically graded) mesh for
  orders ``0 < alpha <= 1``; ``alpha == 1`` is backward Euler.
* ``sunwu_weights``: the Sun-Wu scheme on a uniform mesh for ``1 < alpha < 2``.
  It approximates the derivative at the half step ``t_{n-1/2}`` and uses the
  initial velocity.

Both are stored as a dense lower-triangular table so that the discrete
derivative at step ``n`` is ``table[n] @ u + velocity[n] * v0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gamma


class InvalidParameterError(ValueError):
    pass


class UnsupportedMeshError(ValueError):
    pass


@dataclass(frozen=True)
class TimeMesh:
    T: float
    nodes: np.ndarray
    r: float
    kind: str

    @property
    def M(self) -> int:
        return len(self.nodes) - 1

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.nodes)

    def __eq__(self, other):
        if not isinstance(other, TimeMesh):
            return NotImplemented
        return self.T == other.T and self.r == other.r and np.array_equal(self.nodes, other.nodes)

    def __hash__(self):
        return hash((self.T, self.M, self.r))


def build_graded_mesh(T: float, M: int, r: float = 1.0) -> TimeMesh:
    """Mesh ``t_j = T (j/M)^r``; ``r = 1`` gives a uniform mesh."""
    if not T > 0:
        raise InvalidParameterError(f"T must be positive, got {T}")
    if int(M) != M or M < 1:
        raise InvalidParameterError(f"M must be a positive integer, got {M}")
    if not r >= 1:
        raise InvalidParameterError(f"grading exponent must be >= 1, got {r}")
    M = int(M)
    j = np.arange(M + 1)
    if r == 1:
        nodes = T * j / M
    else:
        nodes = T * (j / M) ** r
    nodes[0], nodes[-1] = 0.0, T
    return TimeMesh(float(T), nodes, float(r), "graded" if r > 1 else "uniform")


def default_grading(alpha: float) -> float:
    """Grading ``(2 - alpha)/alpha`` for sub-diffusion, uniform otherwise."""
    if alpha >= 1:
        return 1.0
    return (2.0 - alpha) / alpha


@dataclass(frozen=True)
class CaputoWeights:
    alpha: float
    scheme: str
    mesh: TimeMesh
    table: np.ndarray
    velocity: np.ndarray = field(repr=False)
    theta: float = 1.0

    def diag(self, n: int) -> float:
        return self.table[n, n]

    def apply(self, history: np.ndarray, v0=None) -> np.ndarray:
        """Discrete derivative at every step for a history of shape (M+1, ...)."""
        history = np.asarray(history, dtype=float)
        out = np.tensordot(self.table, history, axes=(1, 0))
        if v0 is not None:
            out = out + np.multiply.outer(self.velocity, np.asarray(v0, dtype=float))
        return out

    def eval_times(self) -> np.ndarray:
        """Times at which each step's equation is enforced (index 0 unused)."""
        t = self.mesh.nodes
        out = t.copy()
        out[1:] = self.theta * t[1:] + (1 - self.theta) * t[:-1]
        return out


def l1_weights(mesh: TimeMesh, alpha: float) -> CaputoWeights:
    if not 0 < alpha <= 1:
        raise InvalidParameterError(f"L1 scheme needs alpha in (0, 1], got {alpha}")
    table = _l1_table(mesh.nodes.tobytes(), float(alpha))
    return CaputoWeights(float(alpha), "L1", mesh, table, np.zeros(mesh.M + 1), 1.0)


@lru_cache(maxsize=32)
def _l1_table(node_bytes: bytes, alpha: float) -> np.ndarray:
    t = np.frombuffer(node_bytes, dtype=float)
    M = len(t) - 1
    tau = np.diff(t)
    table = np.zeros((M + 1, M + 1))
    if alpha == 1:
        for n in range(1, M + 1):
            table[n, n] = 1 / tau[n - 1]
            table[n, n - 1] = -1 / tau[n - 1]
        table.setflags(write=False)
        return table
    g = gamma(2 - alpha)
    p = 1 - alpha
    for n in range(1, M + 1):
        # a[k-1] multiplies (u_k - u_{k-1}), k = 1..n
        left = t[n] - t[:n]
        right = t[n] - t[1 : n + 1]
        a = (left**p - right**p) / (g * tau[:n])
        table[n, 1 : n + 1] += a
        table[n, :n] -= a
    table.setflags(write=False)
    return table


def sunwu_weights(mesh: TimeMesh, alpha: float) -> CaputoWeights:
    if not 1 < alpha < 2:
        raise InvalidParameterError(f"Sun-Wu scheme needs alpha in (1, 2), got {alpha}")
    if mesh.kind != "uniform":
        raise UnsupportedMeshError("Sun-Wu weights require a uniform mesh")
    table, vel = _sunwu_table(mesh.M, mesh.T, float(alpha))
    return CaputoWeights(float(alpha), "SunWu", mesh, table, vel, 0.5)


@lru_cache(maxsize=32)
def _sunwu_table(M: int, T: float, alpha: float):
    dt = T / M
    k = np.arange(M + 1, dtype=float)
    b = (k + 1) ** (2 - alpha) - k ** (2 - alpha)
    b[0] = 1.0
    scale = dt ** (-alpha) / gamma(3 - alpha)
    table = np.zeros((M + 1, M + 1))
    vel = np.zeros(M + 1)
    for n in range(1, M + 1):
        # coefficient c[k-1] on (u_k - u_{k-1}) for k = 1..n
        c = np.empty(n)
        c[n - 1] = b[0]
        if n > 1:
            kk = np.arange(1, n)
            c[: n - 1] = -(b[n - kk - 1] - b[n - kk])
        c *= scale
        table[n, 1 : n + 1] += c
        table[n, :n] -= c
        vel[n] = -scale * dt * b[n - 1]
    table.setflags(write=False)
    vel.setflags(write=False)
    return table, vel


def caputo_weights(mesh: TimeMesh, alpha: float) -> CaputoWeights:
    """Pick the scheme matching the order."""
    if alpha <= 1:
        return l1_weights(mesh, alpha)
    return sunwu_weights(mesh, alpha)


def mesh_for_order(T: float, M: int, alpha: float, r: float | None = None) -> TimeMesh:
    """Graded mesh for sub-diffusion, uniform for diffusion-wave."""
    if alpha > 1:
        return build_graded_mesh(T, M, 1.0)
    return build_graded_mesh(T, M, default_grading(alpha) if r is None else r)
