"""Reflectionless Riemann-Hilbert solutions and the parametric reconstruction.

The model problem is posed for the row vector mu = (mu1, mu2), the sum of the
rows of the matrix RH solution. The matrix solution itself has a simple pole at
k = 0 whose residue is annihilated by (1, 1), so the row vector is the object
that is rational with poles only at +-k_n. With k_n = i kappa_n,

    mu1(k) = 1 - sum_n B_n/(k + k_n),   mu2(k) = 1 + sum_n B_n/(k - k_n),
    B_n = C_n mu1(k_n),   C_n = c_n exp(-2 i t theta(k_n)),   c_n = i c_hat_n,

and the residue of mu1 at -k_n is -C_n mu2(-k_n) = -B_n (sigma1 symmetry).
The reconstruction at k = i/2 is

    u = (mu1'/mu1 + mu2'/mu2) / (2i),
    x = y + ln(mu1/mu2) - 2 ln(a(i/2) T(i/2)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import expit

from .cauchy import LogCauchy
from .errors import (ContourCollision, NonMonotoneX, PoleQuery, SingularSystem, SymmetryViolation,
                     ZeroDenominator)
from .forward_scattering import ScatteringData
from .phase_geometry import (DEFAULT_DELTA, PolePartition, Region, classify_region, contour_intervals,
                             pole_partition, soliton_velocity)
from .errors import BoundaryRay

HALF_I = 0.5j
COND_MAX = 1e12
SYM_TOL = 1e-8


@dataclass(frozen=True)
class DiscreteSpectrum:
    """Poles kappa_n in (0, 1/2) and real constants c_hat_n (c_n = i c_hat_n).

    `a_half_i` overrides the Blaschke value of a(i/2) (general data, or the
    product a(i/2) T(i/2) for a modified problem).
    """

    poles: Tuple[float, ...] = ()
    constants: Tuple[float, ...] = ()
    a_half_i: Optional[float] = None

    def __post_init__(self):
        kap = np.asarray(self.poles, dtype=float)
        c = np.asarray(self.constants, dtype=float)
        if kap.shape != c.shape:
            raise ValueError("poles and constants differ in length")
        if np.any((kap <= 0) | (kap >= 0.5)):
            raise ValueError("poles must lie in (0, 1/2)")
        if np.any(c == 0):
            raise ValueError("norming constants must be nonzero")
        if np.unique(kap).size != kap.size:
            raise ValueError("poles must be distinct")
        order = np.argsort(kap)
        object.__setattr__(self, "poles", tuple(float(v) for v in kap[order]))
        object.__setattr__(self, "constants", tuple(float(v) for v in c[order]))

    @property
    def kappa(self) -> np.ndarray:
        return np.asarray(self.poles, dtype=float)

    @property
    def c_hat(self) -> np.ndarray:
        return np.asarray(self.constants, dtype=float)

    @property
    def N(self) -> int:
        return len(self.poles)

    def a_half(self) -> float:
        if self.a_half_i is not None:
            return float(self.a_half_i)
        kap = self.kappa
        return float(np.prod((0.5 - kap) / (0.5 + kap)))

    @classmethod
    def from_scattering(cls, data: ScatteringData) -> "DiscreteSpectrum":
        return cls(poles=tuple(data.poles), constants=tuple(data.norming), a_half_i=data.a_half_i)


@dataclass(frozen=True)
class TFactor:
    value: complex
    value_at_half_i: float
    J0: complex
    J1: complex


@dataclass(frozen=True)
class ModifiedSpectrum:
    base: DiscreteSpectrum
    xi: float
    partition: PolePartition
    delta_values: Tuple[complex, ...]
    blaschke_extras: Tuple[float, ...]
    c_tilde: Tuple[float, ...]
    T_half: float
    delta_power: int
    include_blaschke: bool

    def model(self) -> DiscreteSpectrum:
        """Data of the model problem: poles in Lambda with modified constants."""
        lam = list(self.partition.lambda_set)
        return DiscreteSpectrum(
            poles=tuple(self.base.poles[i] for i in lam),
            constants=tuple(self.c_tilde[i] for i in lam),
            a_half_i=self.base.a_half() * self.T_half,
        )


@dataclass(frozen=True)
class ResidueCoefficients:
    """Residues z_n(y) of the (possibly flipped) problem; rows follow the y samples.

    signs = +1: nu2 has residue z_n at k_n and nu1 residue -z_n at -k_n.
    signs = -1: nu1 has residue z_n at k_n and nu2 residue -z_n at -k_n.
    log_b_half = ln b(i/2) for the flipped set.
    """

    z: np.ndarray  # (ny, N) complex
    dz_dy: np.ndarray
    signs: np.ndarray
    log_b_half: np.ndarray


@dataclass(frozen=True)
class ParametricSolution:
    t: float
    y_grid: np.ndarray
    x_of_y: np.ndarray
    u_of_y: np.ndarray
    x_grid: Optional[np.ndarray] = None
    u_on_x: Optional[np.ndarray] = None
    x_ray: float = float("nan")


# --- conjugation factors --------------------------------------------------


def _cauchy(r_source) -> Optional[LogCauchy]:
    if r_source is None:
        return None
    if isinstance(r_source, LogCauchy):
        return r_source
    if isinstance(r_source, ScatteringData):
        return LogCauchy(r_source.k_grid, r_source.r_values)
    k, r = r_source
    return LogCauchy(k, r)


def _log_delta(k, xi, cz: Optional[LogCauchy], derivative=False):
    """-(i/2pi) int_L(xi) w(s)/(s-k) ds (or its k-derivative)."""
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    if cz is None or cz.zero:
        return np.zeros(k.shape, complex)
    intervals = contour_intervals(xi)
    if not intervals:
        return np.zeros(k.shape, complex)
    # contour collision: k within two grid steps of L(xi)
    for kk in k:
        for a, b in intervals:
            lo, hi = max(a, -cz.K), min(b, cz.K)
            dx = 0.0 if lo <= kk.real <= hi else min(abs(kk.real - lo), abs(kk.real - hi))
            if np.hypot(dx, kk.imag) < 2 * cz.hs:
                raise ContourCollision(f"k = {kk} is within two grid steps of L(xi)")
    full = len(intervals) == 1 and np.isinf(intervals[0][0]) and np.isinf(intervals[0][1])
    if full:
        I = cz.integral_derivative(k) if derivative else cz.integral(k)
    elif derivative:
        I = cz.interval_integral_derivative(k, intervals)
    else:
        I = cz.interval_integral(k, intervals)
    return -1j * I / (2 * np.pi)


def delta_factor(k, xi: float, r_samples=None):
    """delta(k, xi) = exp(-i int_L(xi) v(s)/(s-k) ds), v = log(1-|r|^2)/(2 pi)."""
    out = np.exp(_log_delta(k, xi, _cauchy(r_samples)))
    return out if np.ndim(k) else complex(out[0])


def _blaschke(k, kappas):
    k = np.asarray(k, dtype=complex)
    out = np.ones(k.shape, complex)
    for kap in kappas:
        out = out * (k + 1j * kap) / (k - 1j * kap)
    return out


def t_factor(k, xi: float, spectrum: DiscreteSpectrum, partition: PolePartition, r_samples=None) -> TFactor:
    cz = _cauchy(r_samples)
    plus = [spectrum.poles[i] for i in partition.delta_plus]
    k = complex(k)
    for kap in plus:
        if abs(k - 1j * kap) < 1e-14:
            raise PoleQuery(f"T has a pole at k = i*{kap}")
    val = complex(_blaschke(k, plus) * np.exp(_log_delta(k, xi, cz))[0])
    ld = complex(_log_delta(HALF_I, xi, cz)[0])
    J0 = complex(np.exp(ld))
    J1 = complex(_log_delta(HALF_I, xi, cz, derivative=True)[0])
    T_half = float(np.real(_blaschke(HALF_I, plus) * J0))
    return TFactor(value=val, value_at_half_i=T_half, J0=J0, J1=J1)


def modified_data(spectrum: DiscreteSpectrum, xi: float, r_samples=None, partition: Optional[PolePartition] = None,
                  delta: float = DEFAULT_DELTA, delta_power: int = -2, include_blaschke: bool = True) -> ModifiedSpectrum:
    """c_tilde_n = c_n * B_n^p * delta(k_n)^q.

    The default (p = q = -2, i.e. c_n T(k_n)^-2) makes the model problem agree
    with the exact multi-soliton on the ray; `delta_power=1,
    include_blaschke=False` gives c_n delta(k_n).
    """
    cz = _cauchy(r_samples)
    part = partition or pole_partition(spectrum.poles, xi, delta)
    plus = [spectrum.poles[i] for i in part.delta_plus]
    kn = 1j * spectrum.kappa
    dvals = np.exp(_log_delta(kn, xi, cz)) if spectrum.N else np.zeros(0, complex)
    extras = []
    ct = []
    for n, kap in enumerate(spectrum.poles):
        others = [q for q in plus if q != kap]
        bl = float(np.real(_blaschke(1j * kap, others))) if others else 1.0
        extras.append(bl)
        fac = dvals[n] ** delta_power
        if include_blaschke:
            fac = fac * bl ** (-2)
        ct.append(float(spectrum.constants[n] * np.real(fac)))
    T_half = float(np.real(_blaschke(HALF_I, plus) * np.exp(_log_delta(HALF_I, xi, cz))[0]))
    return ModifiedSpectrum(base=spectrum, xi=xi, partition=part, delta_values=tuple(complex(d) for d in dvals),
                            blaschke_extras=tuple(extras), c_tilde=tuple(ct), T_half=T_half,
                            delta_power=delta_power, include_blaschke=include_blaschke)


# --- residue system ----------------------------------------------------------


def _log_abs_C(data: DiscreteSpectrum, y, t):
    """ln|C_n| at each y; -2 i t theta(i kappa) = 2 kappa (y - v t) is real."""
    kap = data.kappa
    v = soliton_velocity(kap)
    return np.log(np.abs(data.c_hat))[None, :] + 2 * kap[None, :] * (np.asarray(y)[:, None] - v[None, :] * t)


def _flip_products(kap: np.ndarray, flip: np.ndarray) -> np.ndarray:
    """P_n = prod over flipped m != n of (kappa_n - kappa_m)/(kappa_n + kappa_m), per row."""
    ratio = (kap[:, None] - kap[None, :]) / (kap[:, None] + kap[None, :])
    np.fill_diagonal(ratio, 1.0)
    fac = np.where(flip[:, None, :], ratio[None], 1.0)
    return np.prod(fac, axis=2)


def solve_residue_system(data: DiscreteSpectrum, y, t: float, check: bool = True) -> ResidueCoefficients:
    """Residues of the model problem at each y.

    Poles with |C_n| > 1 are flipped by the Blaschke factor b(k) = prod (k - k_n)/(k + k_n):
    nu = (mu1/b, mu2 b) has, at a flipped k_n, a pole in nu1 with constant
    D_n = 1/(C_n b'(k_n)^2) instead of a pole in nu2; kept poles get
    D_n = C_n b(k_n)^2. Every
    |D_n| stays moderate, so u keeps full relative precision far from the
    solitons. With signs s_n = +1 (kept) / -1 (flipped),

        nu1(k) = 1 - sum s_j z_j/(k + s_j k_j),  nu2(k) = nu1(-k),
        z_i + D_i sum_j s_j z_j/(s_i k_i + s_j k_j) = D_i,

    solved row-scaled by 1/(1 + |D_i|). dz/dy = G^{-1}(2 kappa s z) follows
    from dD_i/dy = 2 kappa_i s_i D_i.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    N = data.N
    if N == 0:
        z = np.zeros((y.size, 0), complex)
        return ResidueCoefficients(z=z, dz_dy=z, signs=np.ones((y.size, 0)), log_b_half=np.zeros(y.size))
    kap = data.kappa
    kn = 1j * kap
    lc = _log_abs_C(data, y, t)
    flip = lc > 0.0
    s = np.where(flip, -1.0, 1.0)
    P = _flip_products(kap, flip)
    # C = i c_hat e^{l}. Kept: D = C b(k_n)^2 = C P^2. Flipped: D = 1/(C b'(k_n)^2)
    # = i 4 kappa^2 e^{-l} / (c_hat P^2). Both keep the sign of c_hat.
    lp = 2 * np.log(np.abs(P))
    ld = np.where(flip, np.log(4 * kap**2)[None, :] - lp - lc, lc + lp)
    phase = 1j * np.sign(data.c_hat)[None, :] * np.ones_like(ld)
    wD = phase * expit(ld)
    w = expit(-ld)
    sk = s * kn[None, :]
    G = w[:, :, None] * np.eye(N)[None] + wD[:, :, None] * s[:, None, :] / (sk[:, :, None] + sk[:, None, :])
    if check:
        cond = np.linalg.cond(G)
        if np.any(~np.isfinite(cond)) or np.max(cond) > COND_MAX:
            raise SingularSystem(f"residue system condition number {np.max(cond):.3e}")
    z = np.linalg.solve(G, wD[..., None])[..., 0]
    dz = np.linalg.solve(G, (w * 2 * kap[None, :] * s * z)[..., None])[..., 0]
    if check:
        bad = np.max(np.abs(z.real) / (1.0 + np.abs(z)))
        if bad > SYM_TOL:
            raise SymmetryViolation(f"residues not purely imaginary (|Re z| = {bad:.2e})")
    log_b = np.sum(np.where(flip, np.log((0.5 - kap) / (0.5 + kap))[None, :], 0.0), axis=1)
    return ResidueCoefficients(z=z, dz_dy=dz, signs=s, log_b_half=log_b)


def _nu(coeffs: ResidueCoefficients, data: DiscreteSpectrum, k: complex, dz=None):
    """nu(k) and its k-derivative (or its y-derivative when dz is given)."""
    z = coeffs.z if dz is None else dz
    s = coeffs.signs
    skn = s * (1j * data.kappa)[None, :]
    a = s * z / (k + skn)
    c = s * z / (k - skn)
    if dz is not None:
        return -np.sum(a, axis=1), np.sum(c, axis=1)
    nu = np.stack([1 - np.sum(a, axis=1), 1 + np.sum(c, axis=1)], axis=1)
    dnu = np.stack([np.sum(a / (k + skn), axis=1), -np.sum(c / (k - skn), axis=1)], axis=1)
    return nu, dnu


def evaluate_M_Lambda(coeffs: ResidueCoefficients, data: DiscreteSpectrum, k):
    """Row vector mu(k) and d mu/dk, shapes (ny, 2)."""
    k = complex(k)
    kn = 1j * data.kappa
    ny = coeffs.z.shape[0]
    if data.N == 0:
        return np.ones((ny, 2), complex), np.zeros((ny, 2), complex)
    if np.min(np.minimum(np.abs(k - kn), np.abs(k + kn))) < 1e-14:
        raise PoleQuery(f"k = {k} is a pole of the model solution")
    nu, dnu = _nu(coeffs, data, k)
    flip = coeffs.signs < 0
    fac = np.where(flip, ((k - kn) / (k + kn))[None, :], 1.0)
    dlog = np.where(flip, (1.0 / (k - kn) - 1.0 / (k + kn))[None, :], 0.0)
    b = np.prod(fac, axis=1)
    db = b * np.sum(dlog, axis=1)
    mu = np.stack([nu[:, 0] * b, nu[:, 1] / b], axis=1)
    dmu = np.stack([dnu[:, 0] * b + nu[:, 0] * db, dnu[:, 1] / b - nu[:, 1] * db / b**2], axis=1)
    return mu, dmu


def symmetry_defect(coeffs: ResidueCoefficients, data: DiscreteSpectrum, k) -> float:
    """max |mu(k) - conj(mu(-conj k))| and |mu(-k) - mu(k) sigma1|."""
    mu, _ = evaluate_M_Lambda(coeffs, data, k)
    mu_r, _ = evaluate_M_Lambda(coeffs, data, -np.conj(k))
    mu_m, _ = evaluate_M_Lambda(coeffs, data, -k)
    d1 = np.max(np.abs(mu - np.conj(mu_r)))
    d2 = np.max(np.abs(mu_m - mu[:, ::-1]))
    return float(max(d1, d2))


def _reconstruct_from(coeffs, data, y):
    shift = -2.0 * np.log(data.a_half())
    if data.N == 0:
        return np.zeros(y.shape, complex), y + shift + 0j, np.ones(y.shape, complex)
    nu, dnu = _nu(coeffs, data, HALF_I)
    den = np.abs(nu[:, 0] * nu[:, 1])
    if np.any(den < 1e-14):
        raise ZeroDenominator("mu1(i/2) mu2(i/2) vanishes")
    # b'/b cancels between the two logarithmic derivatives
    u = (dnu[:, 0] / nu[:, 0] + dnu[:, 1] / nu[:, 1]) / 2j
    x = y + np.log(nu[:, 0] / nu[:, 1]) + 2 * coeffs.log_b_half + shift
    dn1, dn2 = _nu(coeffs, data, HALF_I, dz=coeffs.dz_dy)
    dxdy = 1.0 + dn1 / nu[:, 0] - dn2 / nu[:, 1]
    return u, x, dxdy


def reconstruct(data: DiscreteSpectrum, y, t: float, return_dxdy: bool = False, check: bool = True):
    """u(y, t) and x(y, t); real arrays (imaginary parts are rounding only)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    coeffs = solve_residue_system(data, y, t, check=check)
    u, x, dxdy = _reconstruct_from(coeffs, data, y)
    if check:
        scale = 1.0 + np.abs(u) + np.abs(x)
        if np.max(np.abs(u.imag) / scale) > 1e-10 or np.max(np.abs(x.imag) / scale) > 1e-10:
            raise SymmetryViolation("reconstruction is not real")
    if return_dxdy:
        return u.real, x.real, dxdy.real
    return u.real, x.real


def invert_x(data: DiscreteSpectrum, x_targets, t: float, y_table=None, x_table=None, iters: int = 30):
    """y with x(y, t) = x_targets, by Newton with the exact dx/dy."""
    xt = np.asarray(x_targets, dtype=float)
    if y_table is None:
        y = xt + 2.0 * np.log(data.a_half())
    else:
        y = PchipInterpolator(x_table, y_table, extrapolate=True)(xt)
    for _ in range(iters):
        _, x, dxdy = reconstruct(data, y, t, return_dxdy=True, check=False)
        step = (x - xt) / dxdy
        y = y - step
        if np.max(np.abs(step)) < 1e-13 * (1 + np.max(np.abs(y))):
            break
    return y


def sample_solution(data: DiscreteSpectrum, t: float, y_window: Optional[Tuple[float, float]] = None,
                    n_samples: int = 2001, x_grid=None, resample: str = "newton", center: float = 0.0,
                    ray_y: Optional[float] = None) -> ParametricSolution:
    """Tabulate (y, x, u) and resample u on a uniform x-grid.

    `resample="newton"` evaluates u exactly at y(x_grid); "pchip" interpolates
    the table (cheaper, shape-preserving).
    """
    if y_window is None:
        y_window = (center - 40.0, center + 40.0)
    y = np.linspace(y_window[0], y_window[1], n_samples)
    u, x = reconstruct(data, y, t)
    if np.any(np.diff(x) <= 0):
        raise NonMonotoneX("x(y) is not strictly increasing on the window")
    if x_grid is None:
        x_grid = np.linspace(x[0], x[-1], n_samples)
    x_grid = np.asarray(x_grid, dtype=float)
    if resample == "newton":
        yq = invert_x(data, x_grid, t, y_table=y, x_table=x)
        uq, _ = reconstruct(data, yq, t)
    elif resample == "pchip":
        uq = PchipInterpolator(x, u, extrapolate=False)(x_grid)
        uq = np.nan_to_num(uq)
    else:
        raise ValueError(f"unknown resample mode {resample!r}")
    x_ray = float("nan")
    if ray_y is not None:
        _, xr = reconstruct(data, [ray_y], t)
        x_ray = float(xr[0])
    return ParametricSolution(t=t, y_grid=y, x_of_y=x, u_of_y=u, x_grid=x_grid, u_on_x=uq, x_ray=x_ray)


def asymptotic_approximant(full_data, xi: float, t: float, window: float = 40.0, n_samples: int = 2001,
                           x_grid=None, delta: float = DEFAULT_DELTA, delta_power: int = -2,
                           include_blaschke: bool = True) -> ParametricSolution:
    """u^r along the ray y = xi t built from the poles in Lambda(xi).

    `full_data` is a ScatteringData (reflection used through delta) or a
    DiscreteSpectrum (reflectionless).
    """
    region = classify_region(xi)
    if region.value.startswith("Boundary"):
        raise BoundaryRay(f"xi = {xi} is a region boundary")
    if isinstance(full_data, ScatteringData):
        spec = DiscreteSpectrum.from_scattering(full_data)
        r_src = None if full_data.is_reflectionless else full_data
    else:
        spec, r_src = full_data, None
    mod = modified_data(spec, xi, r_src, delta=delta, delta_power=delta_power, include_blaschke=include_blaschke)
    model = mod.model()
    yc = xi * t
    return sample_solution(model, t, (yc - window, yc + window), n_samples=n_samples, x_grid=x_grid, ray_y=yc)
