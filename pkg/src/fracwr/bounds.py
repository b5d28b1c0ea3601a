"""Superlinear convergence bounds for DNWR and NNWR.

Every curve is assembled in log space, ``log B_k = k log(prefactor) - A k^beta``,
so neither the geometric growth nor the superlinear decay overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gamma


class WrongRegimeError(ValueError):
    pass


@dataclass(frozen=True)
class BoundParams:
    """Physical subdomain lengths ``a`` with coefficients ``kappa`` on ``(0, T)``."""

    nu: float
    T: float
    a: tuple
    kappa: tuple
    theta: tuple | None = None
    K: int = 20

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        k = tuple(float(v) for v in self.kappa)
        if len(a) != len(k):
            raise ValueError("one kappa per subdomain")
        if min(a) <= 0 or min(k) <= 0:
            raise ValueError("lengths and kappa must be positive")
        if not 0 < self.nu < 1:
            raise ValueError("nu must lie in (0, 1)")
        if not self.T > 0:
            raise ValueError("T must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "kappa", k)

    @property
    def h(self) -> np.ndarray:
        return np.array(self.a) / np.sqrt(self.kappa)

    @classmethod
    def from_decomposition(cls, decomp, nu: float, T: float, K: int = 20) -> "BoundParams":
        return cls(nu, T, tuple(decomp.lengths), decomp.kappa, decomp.theta, K)


@dataclass
class BoundCurve:
    k: np.ndarray
    log_values: np.ndarray
    constants: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    valid_from: int = 0

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_values)

    def at(self, k: int) -> float:
        return float(np.exp(self.log_values[k]))


def _lam(nu: float) -> float:
    return (1 - nu) * nu ** (nu / (1 - nu))


def _curve(log_pref, A, beta, K, constants, notes=(), valid_from=0):
    k = np.arange(K + 1)
    logs = k * log_pref - A * k.astype(float) ** beta
    return BoundCurve(k, logs, dict(constants), list(notes), valid_from)


def _dnwr_thetas(kappa):
    n = len(kappa)
    m = (n - 1) // 2
    return [
        1 / (1 + math.sqrt(kappa[i] / kappa[i - 1])) if i <= m else 1 / (1 + math.sqrt(kappa[i - 1] / kappa[i]))
        for i in range(1, n)
    ]


def _check_odd(params):
    n = len(params.a)
    if n % 2 == 0 or n < 3:
        raise ValueError("DNWR bounds are stated for 2m+1 subdomains")
    return (n - 1) // 2


def _c_upper(h, kappa, theta, hmin):
    """Row constants for the left half, 1-based lists padded at index 0."""
    m = (len(h) - 2) // 2
    out = []
    for i in range(1, m + 1):
        tail = math.sqrt(kappa[m + 1] / kappa[i]) * 2 * hmin / h[m + 1]
        mid = 2 * sum(math.sqrt(kappa[j + 1] / kappa[i]) for j in range(i + 1, m))
        lead = 0.0 if i == 1 else 1.0
        out.append(theta[i] * (lead + math.sqrt(kappa[i + 1] / kappa[i]) + mid + tail))
    return out


def dnwr_bound_subdiffusion(params: BoundParams, h_mode: str = "proof") -> BoundCurve:
    """``(2c)^k exp(-A k^{1/(1-nu)})`` for DNWR with ``0 < nu <= 1/2``.

    ``h_mode="proof"`` takes ``h = min a_j/sqrt(kappa_j)``; ``"statement"`` takes
    ``h = min a_j``. The other variant is reported in the constants.
    """
    nu, T = params.nu, params.T
    if nu > 0.5:
        raise WrongRegimeError("sub-diffusion bound needs nu <= 1/2")
    m = _check_odd(params)
    hs = params.h
    theta = list(params.theta) if params.theta is not None else _dnwr_thetas(params.kappa)
    variants = {"proof": float(hs.min()), "statement": float(min(params.a))}
    if h_mode not in variants:
        raise ValueError("h_mode is 'proof' or 'statement'")
    beta = 1 / (1 - nu)
    consts = {}
    for mode, hmin in variants.items():
        pad_h = [np.nan, *hs]
        pad_k = [np.nan, *params.kappa]
        pad_t = [np.nan, *theta]
        left = _c_upper(pad_h, pad_k, pad_t, hmin)
        right = _c_upper([np.nan, *hs[::-1]], [np.nan, *params.kappa[::-1]], [np.nan, *theta[::-1]], hmin)
        c = max(left + right)
        A = _lam(nu) * (hmin / T**nu) ** beta
        consts[mode] = {"h": hmin, "c": c, "A": A, "c_i": left + right[::-1]}
    chosen = consts[h_mode]
    constants = {"nu": nu, "T": T, "m": m, "beta": beta, "h": chosen["h"], "c": chosen["c"], "A": chosen["A"],
                 "c_i": chosen["c_i"], "variants": consts}
    notes = ["h = min a_j/sqrt(kappa_j) by default; h = min a_j reported as the alternative"]
    if chosen["A"] < 1e-12:
        notes.append("A is negligible: the curve degenerates to (2c)^k")
    return _curve(math.log(2 * chosen["c"]), chosen["A"], beta, params.K, constants, notes)


def _d_upper(hs, kappa, theta, h, nu, T):
    """Entry bounds for rows 1..m; returns an (m, 2m) array."""
    n = len(hs)
    m = (n - 1) // 2
    B = _lam(nu)
    nu1 = 1 / (1 - nu)
    LT = T**nu * gamma(2 - nu) / B ** (1 - nu)
    g = 1 + LT / (4 * h)
    e2 = math.exp(-2 * B * (h / T**nu) ** nu1)
    K = [np.nan, *kappa]
    th = [np.nan, *theta]
    D = np.zeros((m, 2 * m))
    for i in range(1, m + 1):
        D[i - 1, i - 1] = 4 * th[i] * math.sqrt(K[i + 1] / K[i]) * g**2 * e2
        if i > 1:
            D[i - 1, i - 2] = 2 * th[i] * g
        for j in range(i + 1, m + 1):
            q = j - i
            D[i - 1, j - 1] = (
                2**q * th[i] * math.sqrt(K[j + 1] / K[i]) * g**q
                * math.exp(-q * B * (2 * (q - 1) * h / (q * T**nu)) ** nu1)
                * (1 + 4 * g**2 * e2)
            )
        q = m - i + 2
        D[i - 1, m] = (
            2**q * th[i] * math.sqrt(K[m + 1] / K[i]) * g**q
            * math.exp(-q * B * (2 * (m - i + 1) * h / (q * T**nu)) ** nu1)
        )
    return D, {"B": B, "L_T": LT, "nu1": nu1}


def estimate_matrix(params: BoundParams) -> tuple[np.ndarray, dict]:
    """The 2m x 2m entry-bound matrix and its constants (``h = min h_j / 2``)."""
    m = _check_odd(params)
    hs = params.h
    h = float(hs.min()) / 2
    theta = list(params.theta) if params.theta is not None else _dnwr_thetas(params.kappa)
    up, consts = _d_upper(hs, params.kappa, theta, h, params.nu, params.T)
    lo, _ = _d_upper(hs[::-1], params.kappa[::-1], theta[::-1], h, params.nu, params.T)
    D = np.zeros((2 * m, 2 * m))
    D[:m] = up
    D[m:] = lo[::-1, ::-1]
    consts = dict(consts, h=h)
    return D, consts


def _dnwr_d_curve(params, A_base, notes):
    D, consts = estimate_matrix(params)
    d = float(np.max(np.abs(D).sum(axis=1)))
    beta = 1 / (1 - params.nu)
    A = _lam(params.nu) * (2 * consts["h"] / A_base) ** beta
    constants = dict(consts, nu=params.nu, T=params.T, d=d, A=A, beta=beta, D=D.tolist())
    return _curve(math.log(d), A, beta, params.K, constants, notes)


def dnwr_bound_wave(params: BoundParams) -> BoundCurve:
    """``d^k exp(-A k^{1/(1-nu)})`` with ``d`` the max row sum, for ``1/2 < nu < 1``."""
    if not 0.5 < params.nu < 1:
        raise WrongRegimeError("diffusion-wave bound needs 1/2 < nu < 1")
    notes = ["gated on 1/2 < nu < 1 (the hypothesis line repeats the sub-diffusion range)"]
    return _dnwr_d_curve(params, params.T**params.nu, notes)


def dnwr_bound_2d(params: BoundParams) -> BoundCurve:
    """Two-dimensional DNWR bound: same estimate matrix, ``A`` built from ``2h/T``."""
    if not 0 < params.nu <= 0.5:
        raise WrongRegimeError("2D DNWR bound needs nu <= 1/2")
    return _dnwr_d_curve(params, params.T, [])


def nnwr_constants(params: BoundParams) -> dict:
    nu, T = params.nu, params.T
    a = [np.nan, *params.a]
    K = [np.nan, *params.kappa]
    N = len(params.a)
    if N < 2:
        raise ValueError("need at least two subdomains")
    beta = 1 / (1 - nu)
    hmin = min(a[i] / 2 / math.sqrt(K[i]) for i in range(1, N + 1))
    if hmin <= 0:
        raise ValueError("degenerate h_min")
    mu = _lam(nu) * (hmin / T**nu) ** beta
    Dc = T**nu * gamma(2 - nu) / (2 * mu ** (1 - nu))
    clamped = []

    def Qraw(x, tag):
        if x < 0:
            clamped.append(tag)
            x = 0.0
        return mu * (x / T**nu) ** beta

    def Q(j):
        return Qraw(a[j] - hmin, f"Q_{j}")

    def Qh(j):
        return Qraw(a[j] / 2 - hmin, f"Q_{j}/2")

    def Qhk(j, k):
        return Qraw(a[j] / 2 + a[k] - hmin, f"Q_{j}/2,{k}")

    def f(i):
        return 1 + Dc / a[i]

    def sk(p, q):
        return math.sqrt(K[p] / K[q])

    e = math.exp
    theta = list(params.theta) if params.theta is not None else [
        1 / (2 + sk(i, i + 1) + sk(i + 1, i)) for i in range(1, N)
    ]
    c_rows = []
    for i in range(1, N):
        W = 2 * (sk(i, i + 1) + sk(i + 1, i)) * f(i) * f(i + 1) * (e(-2 * Q(i)) + e(-2 * Q(i + 1)))
        if i <= N - 2:
            j = i + 1
            W += 2 * f(j) * (
                sk(i + 2, j) * f(i + 2) * (e(-2 * Qh(j)) + e(-2 * Qhk(j, i + 2)))
                + sk(j, i) * f(i) * (e(-2 * Qh(j)) + e(-2 * Qhk(j, i)))
            )
        if i + 2 <= N - 1:
            W += 4 * sk(i + 2, i + 1) * f(i + 1) * f(i + 2) * e(-(Q(i + 1) + Q(i + 2)))
        if i >= 2:
            W += 2 * f(i) * (
                sk(i - 1, i) * f(i - 1) * (e(-2 * Qh(i)) + e(-2 * Qhk(i, i - 1)))
                + sk(i, i + 1) * f(i + 1) * (e(-2 * Qh(i)) + e(-2 * Qhk(i, i + 1)))
            )
        if i >= 3:
            W += 4 * sk(i - 1, i) * f(i - 1) * f(i) * e(-(Q(i - 1) + Q(i)))
        c_rows.append(W)
    c = max(t * ci for t, ci in zip(theta, c_rows))
    return {"nu": nu, "T": T, "beta": beta, "h_min": hmin, "mu": mu, "D": Dc, "c_i": c_rows,
            "theta": theta, "c": c, "clamped": sorted(set(clamped))}


def nnwr_bound_1d(params: BoundParams) -> BoundCurve:
    """``c^k exp(-mu (2k)^{1/(1-nu)})`` for NNWR on N subdomains."""
    cst = nnwr_constants(params)
    notes = []
    if cst["clamped"]:
        notes.append("negative Q bases clamped to 0: " + ", ".join(cst["clamped"]))
    beta = cst["beta"]
    A = cst["mu"] * 2**beta
    return _curve(math.log(cst["c"]), A, beta, params.K, cst, notes)


def nnwr2d_threshold(nu: float, B: float, t: float) -> float:
    """Smallest admissible ``k`` satisfies ``k B`` above the returned value divided by B."""
    return nu ** (1 - nu) * t**nu / ((1 - nu) ** (1 - nu) * nu**nu) / B


def nnwr_bound_2d(nu: float, a: float, b: float, t: float, kappa: float = 1.0, K: int = 20) -> BoundCurve:
    """Two-strip NNWR bound with ``theta = 1/4`` on ``(-a, b)`` (shifted)."""
    if not 0 < nu < 1:
        raise ValueError("nu must lie in (0, 1)")
    if a <= 0 or b <= 0:
        raise ValueError("strip widths must be positive")
    A, B = a / math.sqrt(kappa), b / math.sqrt(kappa)
    beta = 1 / (1 - nu)
    P = (1 - nu) * (nu / t) ** (nu / (1 - nu))
    E = (2 * min(A, B)) ** beta
    c = math.floor(beta)
    ratio = 2 * max(A, B) / min(A, B)
    ks = np.arange(K + 1)
    logs = np.zeros(K + 1)
    Fs, Hs = [], []
    head = 2 * math.log1p(math.exp(-P * (2 * abs(B - A)) ** beta))
    for k in ks[1:]:
        F = ((ratio + k) ** c - k**c) ** (1 / (c * (1 - nu)))
        H = ((2 + k) ** c - k**c) ** (1 / (c * (1 - nu)))
        Fs.append(F)
        Hs.append(H)
        pref = head - math.log1p(-math.exp(-P * E * F)) - math.log1p(-math.exp(-P * E * H))
        logs[k] = k * pref - 2 * P * E * k**beta
    notes = ["F and H depend on k; the prefactor is evaluated per iteration"]
    valid_from = 0
    thr = None
    if nu > 0.5:
        thr = nnwr2d_threshold(nu, B, t)
        valid_from = int(math.floor(thr)) + 1
        notes.append(f"diffusion-wave regime: valid for k > {thr:.4g}")
    constants = {"nu": nu, "t": t, "A": A, "B": B, "P": P, "E": E, "c": c, "beta": beta,
                 "F": Fs, "H": Hs, "threshold": thr}
    return BoundCurve(ks, logs, constants, notes, valid_from)
