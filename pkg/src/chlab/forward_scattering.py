"""Jost solutions of the x-part of the Lax pair and the scattering data.

The x-equation is written for the normalized Jost matrix

    Phi_x = -i k p_x [sigma3, Phi] + U Phi,   p_x = sqrt(m+1),
    U = m_x/(4(m+1)) sigma1 - m/(8 i k sqrt(m+1)) [[-1,-1],[1,1]],

and integrated with classic RK4 on a refinement of the profile grid.
Coefficients at sub-nodes come from trigonometric interpolation, so the only
discretization error is the time-stepping one.

Norming constants are stored as the real number c_hat with c_n = i c_hat
(for poles on the imaginary axis b_n is real and a'(k_n) is imaginary).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from . import spectral
from .errors import DegenerateColumn, IntegratorDiverged, InvariantViolation, NearZeroK
from .potential_model import PotentialProfile, conserved_shift, y_of_x

K_MIN = 1e-3
DIVERGE = 1e12
STEP_SAFETY = 0.25


@dataclass(frozen=True)
class JostField:
    """Jost matrix sampled at the profile grid nodes.

    For `columns="analytic"` only the column that is analytic in the upper
    half-plane is integrated (column 1 for side="left", column 2 for
    side="right"); the other column is NaN.
    """

    k: complex
    side: str
    x: np.ndarray
    phi: np.ndarray  # (n, 2, 2)


@dataclass(frozen=True)
class JostPair:
    k: complex
    phi_minus: np.ndarray  # 2x2 at x* = 0
    phi_plus: np.ndarray
    p_values: np.ndarray  # y(x) on the grid


@dataclass
class ScatteringData:
    K_max: float
    k_grid: np.ndarray
    r_values: np.ndarray
    poles: List[float] = field(default_factory=list)
    norming: List[float] = field(default_factory=list)
    a_half_i: float = 1.0
    a_values: Optional[np.ndarray] = None
    b_values: Optional[np.ndarray] = None

    @property
    def is_reflectionless(self) -> bool:
        return self.r_values.size == 0 or float(np.max(np.abs(self.r_values))) == 0.0


class _Coefficients:
    """Lax-matrix coefficients on a grid refined by `factor`."""

    def __init__(self, profile: PotentialProfile, factor: int):
        h = profile.grid.h
        m = spectral.refine(profile.m, factor)
        mx = spectral.refine(profile.m_x, factor)
        w = np.maximum(m + 1.0, 1e-300)
        self.factor = factor
        self.h_fine = h / factor
        self.px = np.sqrt(w)
        self.alpha = mx / (4.0 * w)  # sigma1 coefficient
        self.g = m / self.px  # multiplies 1/(8ik)


def _substeps(profile: PotentialProfile, kmax_abs: float, kmin_abs: float) -> int:
    h = profile.grid.h
    px = float(np.max(profile.sqrt_weight))
    g = float(np.max(np.abs(profile.m / profile.sqrt_weight)))
    al = float(np.max(np.abs(profile.m_x / (4 * (profile.m + 1.0)))))
    rate = max(2 * kmax_abs * px, g / (8 * kmin_abs), al, 1e-12)
    return max(1, int(np.ceil(h * rate / STEP_SAFETY)))


def _rhs(k, c: _Coefficients, j, Y, cols):
    """Right side at fine node j for state Y[..., 2(rows), ncol]."""
    px, al, g = c.px[j], c.alpha[j], c.g[j]
    q = g / (8j * k)  # shape (nk,)
    u11, u12, u21, u22 = q, al + q, al - q, -q
    y1, y2 = Y[:, 0, :], Y[:, 1, :]
    d1 = u11[:, None] * y1 + u12[:, None] * y2
    d2 = u21[:, None] * y1 + u22[:, None] * y2
    # commutator term: row 1 of column 2 gets -2ik p_x, row 2 of column 1 gets +2ik p_x
    kp = (2j * k * px)[:, None]
    for ci, col in enumerate(cols):
        if col == 0:
            d2[:, ci] = d2[:, ci] + kp[:, 0] * y2[:, ci]
        else:
            d1[:, ci] = d1[:, ci] - kp[:, 0] * y1[:, ci]
    return np.stack([d1, d2], axis=1)


def _integrate(profile, ks, side, cols, store=False, substeps=None):
    """RK4 over the grid. Returns state at x* (and optionally all nodes)."""
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    n = profile.grid.n
    R = substeps or _substeps(profile, float(np.max(np.abs(ks))), float(np.min(np.abs(ks))))
    c = _Coefficients(profile, 2 * R)
    hs = profile.grid.h / R
    nf = n * 2 * R
    Y = np.zeros((ks.size, 2, len(cols)), dtype=complex)
    for ci, col in enumerate(cols):
        Y[:, col, ci] = 1.0
    jc = profile.grid.center_index
    out = np.full((n, ks.size, 2, len(cols)), np.nan + 0j) if store else None
    if side == "left":
        if store:
            out[0] = Y
        fine = 0
        target = jc if not store else n
        for node in range(1, target + 1):
            for _ in range(R):
                j0, jm, j1 = fine, fine + 1, fine + 2
                k1 = _rhs(ks, c, j0 % nf, Y, cols)
                k2 = _rhs(ks, c, jm % nf, Y + 0.5 * hs * k1, cols)
                k3 = _rhs(ks, c, jm % nf, Y + 0.5 * hs * k2, cols)
                k4 = _rhs(ks, c, j1 % nf, Y + hs * k3, cols)
                Y = Y + hs / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
                fine += 2
            if np.max(np.abs(Y)) > DIVERGE:
                raise IntegratorDiverged(f"left Jost solution exceeded {DIVERGE:g} at x={profile.grid.nodes[node % n]:.3f}")
            if store and node < n:
                out[node] = Y
            if node == jc:
                at_center = Y.copy()
    elif side == "right":
        fine = nf  # periodic image of node 0 at x = +L
        target = jc if not store else 0
        at_center = None
        for node in range(n - 1, target - 1, -1):
            for _ in range(R):
                j0, jm, j1 = fine, fine - 1, fine - 2
                k1 = _rhs(ks, c, j0 % nf, Y, cols)
                k2 = _rhs(ks, c, jm % nf, Y - 0.5 * hs * k1, cols)
                k3 = _rhs(ks, c, jm % nf, Y - 0.5 * hs * k2, cols)
                k4 = _rhs(ks, c, j1 % nf, Y - hs * k3, cols)
                Y = Y - hs / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
                fine -= 2
            if np.max(np.abs(Y)) > DIVERGE:
                raise IntegratorDiverged(f"right Jost solution exceeded {DIVERGE:g} at x={profile.grid.nodes[node]:.3f}")
            if store:
                out[node] = Y
            if node == jc:
                at_center = Y.copy()
    else:
        raise ValueError("side must be 'left' or 'right'")
    return at_center, out


def _check_k(k):
    if abs(k) < K_MIN:
        raise NearZeroK(f"|k| = {abs(k):.2e} below k_min = {K_MIN:g}")


def jost_solve(profile: PotentialProfile, k: complex, side: str, columns: Optional[str] = None, substeps=None) -> JostField:
    """Jost matrix over the whole grid, normalized to I at the starting boundary."""
    k = complex(k)
    _check_k(k)
    if columns is None:
        columns = "all" if k.imag == 0 else "analytic"
    if columns == "all":
        cols = (0, 1)
    elif columns == "analytic":
        cols = (0,) if side == "left" else (1,)
    else:
        raise ValueError("columns must be 'all' or 'analytic'")
    _, out = _integrate(profile, [k], side, cols, store=True, substeps=substeps)
    phi = np.full((profile.grid.n, 2, 2), np.nan + 0j)
    for ci, col in enumerate(cols):
        phi[:, :, col] = out[:, 0, :, ci]
    return JostField(k=k, side=side, x=profile.grid.nodes, phi=phi)


def jost_pair(profile: PotentialProfile, k: complex) -> JostPair:
    k = complex(k)
    _check_k(k)
    cols = (0, 1) if k.imag == 0 else None
    mats = []
    for side in ("left", "right"):
        c = cols or ((0,) if side == "left" else (1,))
        Y, _ = _integrate(profile, [k], side, c)
        M = np.full((2, 2), np.nan + 0j)
        for ci, col in enumerate(c):
            M[:, col] = Y[0, :, ci]
        mats.append(M)
    return JostPair(k=k, phi_minus=mats[0], phi_plus=mats[1], p_values=y_of_x(profile).y)


def _p_star(profile) -> float:
    smap = y_of_x(profile)
    return float(smap.y[profile.grid.center_index] - profile.grid.nodes[profile.grid.center_index])


def scattering_batch(profile: PotentialProfile, ks, substeps=None) -> Tuple[np.ndarray, np.ndarray]:
    """a(k), b(k) for a batch of real k (vectorized over k)."""
    ks = np.asarray(ks, dtype=float)
    if np.any(np.abs(ks) < K_MIN):
        raise NearZeroK(f"grid contains |k| < {K_MIN:g}")
    A = np.empty(ks.size, complex)
    B = np.empty(ks.size, complex)
    xs = profile.grid.nodes[profile.grid.center_index]
    pstar = _p_star(profile) + xs
    # group by substep count so small |k| do not pay for the largest one
    R_all = np.array([_substeps(profile, abs(k), abs(k)) for k in ks]) if substeps is None else np.full(ks.size, substeps)
    for R in np.unique(R_all):
        sel = np.nonzero(R_all == R)[0]
        Ym, _ = _integrate(profile, ks[sel], "left", (0, 1), substeps=int(R))
        Yp, _ = _integrate(profile, ks[sel], "right", (0, 1), substeps=int(R))
        m11, m12, m21, m22 = Ym[:, 0, 0], Ym[:, 0, 1], Ym[:, 1, 0], Ym[:, 1, 1]
        p11, p12, p21, p22 = Yp[:, 0, 0], Yp[:, 0, 1], Yp[:, 1, 0], Yp[:, 1, 1]
        A[sel] = m11 * p22 - p12 * m21
        B[sel] = np.exp(2j * ks[sel] * pstar) * (p12 * m22 - m12 * p22)
    return A, B


def a_imag_axis(profile: PotentialProfile, kappas, substeps=None) -> np.ndarray:
    """a(i kappa) for a batch of kappa > 0 (real up to rounding)."""
    kappas = np.atleast_1d(np.asarray(kappas, dtype=float))
    ks = 1j * kappas
    if np.any(np.abs(ks) < K_MIN):
        raise NearZeroK(f"kappa below {K_MIN:g}")
    Ym, _ = _integrate(profile, ks, "left", (0,), substeps=substeps)
    Yp, _ = _integrate(profile, ks, "right", (1,), substeps=substeps)
    return Ym[:, 0, 0] * Yp[:, 1, 0] - Yp[:, 0, 0] * Ym[:, 1, 0]


def a_upper(profile: PotentialProfile, ks, substeps=None) -> np.ndarray:
    """a(k) for k in the closed upper half-plane, from the analytic columns."""
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    if np.any(ks.imag < 0):
        raise ValueError("a(k) is analytic in the upper half-plane only")
    if np.any(np.abs(ks) < K_MIN):
        raise NearZeroK(f"|k| below {K_MIN:g}")
    Ym, _ = _integrate(profile, ks, "left", (0,), substeps=substeps)
    Yp, _ = _integrate(profile, ks, "right", (1,), substeps=substeps)
    return Ym[:, 0, 0] * Yp[:, 1, 0] - Yp[:, 0, 0] * Ym[:, 1, 0]


def scattering_coefficients(profile: PotentialProfile, k: complex, richardson: bool = False):
    """(a, b) at one k. On the open upper half-plane only a is defined; b is NaN.

    With `richardson=True` a third value is returned: the change in a when the
    RK4 step is halved.
    """
    k = complex(k)
    _check_k(k)
    if k.imag == 0:
        R = _substeps(profile, abs(k), abs(k))
        a, b = scattering_batch(profile, [k.real], substeps=R)
        a, b = complex(a[0]), complex(b[0])
        if richardson:
            a2, _ = scattering_batch(profile, [k.real], substeps=2 * R)
            return a, b, abs(complex(a2[0]) - a)
        return a, b
    R = _substeps(profile, abs(k), abs(k))
    a = complex(a_upper(profile, [k], substeps=R)[0])
    if richardson:
        a2 = complex(a_upper(profile, [k], substeps=2 * R)[0])
        return a, complex(np.nan), abs(a2 - a)
    return a, complex(np.nan)


def symmetric_k_grid(K_max: float, nk: int) -> np.ndarray:
    """Midpoint grid on [-K, K]; symmetric and free of k = 0."""
    if nk % 2:
        raise ValueError("nk must be even")
    hk = 2.0 * K_max / nk
    return -K_max + (np.arange(nk) + 0.5) * hk


def reflection(profile: PotentialProfile, k_grid, tol: float = 1e-6) -> ScatteringData:
    k_grid = np.asarray(k_grid, dtype=float)
    if np.any(np.abs(k_grid) < K_MIN):
        raise NearZeroK(f"k-grid contains |k| < {K_MIN:g}")
    a, b = scattering_batch(profile, k_grid)
    r = b / a
    unimod = np.max(np.abs(np.abs(a) ** 2 - np.abs(b) ** 2 - 1.0))
    if unimod > tol:
        raise InvariantViolation(f"|a|^2-|b|^2-1 reaches {unimod:.2e}")
    order = np.argsort(k_grid)
    ks = k_grid[order]
    if np.allclose(ks, -ks[::-1], atol=1e-12):
        rs = r[order]
        sym = np.max(np.abs(rs - np.conj(rs[::-1])))
        if sym > tol:
            raise InvariantViolation(f"r(-k) = conj r(k) violated by {sym:.2e}")
    return ScatteringData(
        K_max=float(np.max(np.abs(k_grid))),
        k_grid=k_grid,
        r_values=r,
        a_values=a,
        b_values=b,
    )


def find_eigenvalues(profile: PotentialProfile, n_scan: int = 160, kappa_min: float = K_MIN) -> List[float]:
    """Zeros of kappa -> a(i kappa) on (kappa_min, 1/2 - kappa_min)."""
    if np.max(np.abs(profile.m)) == 0.0:
        return []
    grid = np.linspace(kappa_min, 0.5 - kappa_min, n_scan)
    R_all = np.array([_substeps(profile, 0.5, q) for q in grid])
    vals = np.empty(n_scan)
    for R in np.unique(R_all):
        sel = R_all == R
        vals[sel] = np.real(a_imag_axis(profile, grid[sel], substeps=int(R)))

    def f(q):
        R = _substeps(profile, 0.5, q)
        return float(np.real(a_imag_axis(profile, [q], substeps=R)[0]))

    roots = []
    for i in range(n_scan - 1):
        if vals[i] == 0.0:
            roots.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
    return sorted(roots)


def norming_constants(profile: PotentialProfile, poles: Sequence[float], dk: float = 1e-5, tol: float = 1e-4,
                      return_b: bool = False):
    """c_hat_n with c_n = b_n / a'(k_n) = i c_hat_n."""
    smap = y_of_x(profile)
    p = smap.y
    n = profile.grid.n
    interior = slice(n // 4, 3 * n // 4)
    out, bs = [], []
    for kap in poles:
        R = _substeps(profile, 0.5, kap)
        left = jost_solve(profile, 1j * kap, "left", columns="analytic", substeps=R).phi[:, :, 0]
        right = jost_solve(profile, 1j * kap, "right", columns="analytic", substeps=R).phi[:, :, 1]
        z = np.exp(2 * kap * p)[:, None] * left
        zi, wi = z[interior], right[interior]
        # components sitting at the integration floor carry no information
        keep = (np.abs(zi) > 1e-6 * np.abs(zi).max()) & (np.abs(wi) > 1e-6 * np.abs(wi).max())
        zi, wi = zi[keep], wi[keep]
        b = np.real(np.vdot(zi, wi) / np.vdot(zi, zi))
        resid = np.linalg.norm(wi - b * zi) / np.linalg.norm(wi)
        if resid > tol:
            raise DegenerateColumn(f"columns at kappa={kap:.6f} not proportional (residual {resid:.2e})")
        ap, am = np.real(a_imag_axis(profile, [kap + dk, kap - dk], substeps=R))
        dadk = (ap - am) / (2 * dk)
        out.append(float(b / dadk))
        bs.append(float(b))
    return (out, bs) if return_b else out


def a_at_half_i(profile: PotentialProfile) -> float:
    return float(np.real(a_imag_axis(profile, [0.5])[0]))


def scatter(profile: PotentialProfile, K_max: float = 8.0, nk: int = 1024) -> ScatteringData:
    """Full forward transform: r on a symmetric grid, poles, norming constants, a(i/2)."""
    data = reflection(profile, symmetric_k_grid(K_max, nk))
    data.K_max = float(K_max)
    data.poles = find_eigenvalues(profile)
    data.norming = norming_constants(profile, data.poles) if data.poles else []
    data.a_half_i = a_at_half_i(profile)
    return data


def trace_formula_check(data: ScatteringData, profile: Optional[PotentialProfile] = None,
                        kmin: float = 0.1, kmax: float = 6.0) -> dict:
    """Residuals of the trace formula on the real grid and of a(i/2) vs the shift.

    Compares the ODE values of a(k) with
    prod (k - i kappa_n)/(k + i kappa_n) * exp(i PV int v/(s-k) ds) / sqrt(1-|r|^2),
    v = log(1-|r|^2)/(2 pi), which is the boundary value of the trace formula.
    """
    from .cauchy import LogCauchy

    report = {"max_rel_residual": 0.0, "a_half_residual": 0.0, "n_points": 0}
    ks = np.asarray(data.k_grid, float)
    sel = (np.abs(ks) >= kmin) & (np.abs(ks) <= kmax)
    if data.a_values is None:
        if profile is None:
            raise ValueError("need a(k) samples or a profile")
        a_ode, _ = scattering_batch(profile, ks[sel])
    else:
        a_ode = np.asarray(data.a_values)[sel]
    kq = ks[sel]
    cz = LogCauchy(ks, data.r_values)
    pv = cz.integral(kq.astype(complex))
    w = cz.w_at(kq)
    rhs = np.exp(1j * pv / (2 * np.pi)) * np.exp(-0.5 * w)
    for kap in data.poles:
        rhs = rhs * (kq - 1j * kap) / (kq + 1j * kap)
    rel = np.abs(rhs - a_ode) / np.abs(a_ode)
    report["max_rel_residual"] = float(rel.max()) if rel.size else 0.0
    report["n_points"] = int(rel.size)
    report["k"] = kq
    report["rel"] = rel
    if profile is not None:
        S = conserved_shift(profile)
        report["a_half_residual"] = float(abs(data.a_half_i * np.exp(S / 2) - 1.0))
    return report
