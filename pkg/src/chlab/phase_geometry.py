"""Phase function theta(k; xi) = k xi - k/(2k^2 + 1/2) and the geometry it induces."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import NoAdmissibleAngle, PoleOfPhase, PreconditionError, SignViolation

BOUNDARY_TOL = 1e-12
DEFAULT_DELTA = 0.05


class Region(str, enum.Enum):
    LeftNoPoints = "LeftNoPoints"
    FourPoints = "FourPoints"
    TwoPoints = "TwoPoints"
    RightNoPoints = "RightNoPoints"
    BoundaryMinusQuarter = "BoundaryMinusQuarter"
    BoundaryZero = "BoundaryZero"
    BoundaryTwo = "BoundaryTwo"


OPEN_COUNTS = {Region.LeftNoPoints: 0, Region.FourPoints: 4, Region.TwoPoints: 2, Region.RightNoPoints: 0}


@dataclass(frozen=True)
class PolePartition:
    delta_plus: Tuple[int, ...]
    delta_minus: Tuple[int, ...]
    lambda_set: Tuple[int, ...]
    im_theta: Tuple[float, ...]
    rho0: float  # inf when delta_plus and delta_minus are both empty


@dataclass(frozen=True)
class PhaseGeometry:
    xi: float
    region: Region
    stationary_points: Tuple[float, ...]
    phi: float  # nan where no sector angle applies
    delta0: float
    rho0: float
    partition: PolePartition = None


def _check_pole(k):
    d = 2 * np.asarray(k, dtype=complex) ** 2 + 0.5
    if np.any(np.abs(d) < 1e-14):
        raise PoleOfPhase("theta has poles at k = +-i/2")
    return d


def theta(k, xi: float):
    k = np.asarray(k, dtype=complex)
    d = _check_pole(k)
    out = k * xi - k / d
    return out if out.ndim else complex(out)


def theta_prime(k, xi: float):
    k = np.asarray(k, dtype=complex)
    d = _check_pole(k)
    out = xi - (0.5 - 2 * k * k) / d**2
    return out if out.ndim else complex(out)


def theta_prime_real(k, xi: float):
    k = np.asarray(k, dtype=float)
    s = 2 * k * k
    return xi - (0.5 - s) / (s + 0.5) ** 2


def im_theta(k, xi: float):
    """Im theta from the closed form Im k * (xi - (1/2 - 2|k|^2)/|2k^2 + 1/2|^2)."""
    k = np.asarray(k, dtype=complex)
    d = _check_pole(k)
    out = k.imag * (xi - (0.5 - 2 * np.abs(k) ** 2) / np.abs(d) ** 2)
    return out if out.ndim else float(out)


def soliton_velocity(kappa):
    kappa = np.asarray(kappa, dtype=float)
    return 2.0 / (1.0 - 4.0 * kappa**2)


def classify_region(xi: float) -> Region:
    if abs(xi + 0.25) <= BOUNDARY_TOL:
        return Region.BoundaryMinusQuarter
    if abs(xi) <= BOUNDARY_TOL:
        return Region.BoundaryZero
    if abs(xi - 2.0) <= BOUNDARY_TOL:
        return Region.BoundaryTwo
    if xi < -0.25:
        return Region.LeftNoPoints
    if xi < 0:
        return Region.FourPoints
    if xi < 2:
        return Region.TwoPoints
    return Region.RightNoPoints


def _polish(k, xi):
    # Newton on theta'(k) in the real variable
    for _ in range(3):
        s = 2 * k * k
        f = xi - (0.5 - s) / (s + 0.5) ** 2
        # d/dk of -(1/2 - s)/(s+1/2)^2 with ds/dk = 4k
        df = 4 * k * ((s + 0.5) + 2 * (0.5 - s)) / (s + 0.5) ** 3
        if df == 0:
            break
        k = k - f / df
    return k


def stationary_points_scan(xi: float, R: float = 10.0, samples: int = 10**6) -> List[float]:
    """Brute-force oracle: sign changes of theta' on [-R, R] refined by bisection."""
    ks = np.linspace(-R, R, samples)
    f = theta_prime_real(ks, xi)
    roots = []
    for i in np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]:
        roots.append(brentq(theta_prime_real, ks[i], ks[i + 1], args=(xi,), xtol=1e-14))
    for i in np.nonzero(f == 0)[0]:
        roots.append(float(ks[i]))
    return sorted(roots, reverse=True)


def stationary_points(xi: float) -> List[float]:
    """Real zeros of theta'(k; xi), sorted descending.

    theta' = 0 reduces to xi s^2 + (xi + 1) s + (xi/4 - 1/2) = 0 with s = 2k^2.
    A double root (xi = -1/4) is reported once per sign.
    """
    if abs(xi) < 1e-12:
        if xi == 0.0:
            s_roots = [0.5]
        else:
            return stationary_points_scan(xi)
    else:
        a, b, c = xi, xi + 1.0, xi / 4.0 - 0.5
        disc = b * b - 4 * a * c  # = 4 xi + 1
        if disc < -1e-15:
            return []
        disc = max(disc, 0.0)
        sq = np.sqrt(disc)
        # stable quadratic formula
        q = -0.5 * (b + np.copysign(sq, b))
        cand = [q / a]
        if q != 0:
            cand.append(c / q)
        s_roots = sorted(set(float(s) for s in cand))
    pts = []
    for s in s_roots:
        if s < -1e-15:
            continue
        s = max(s, 0.0)
        k = np.sqrt(s / 2)
        if k == 0.0:
            pts.append(0.0)
            continue
        k = _polish(k, xi) if disc_ok(xi) else k
        pts.extend([k, -k])
    return sorted(set(pts), reverse=True)


def disc_ok(xi):
    # Newton is ill-posed at the tangency
    return abs(4 * xi + 1) > 1e-8


def admissible_angle(xi: float) -> float:
    """Sector half-angle for the no-phase-point regions.

    For xi < -1/4 the sector condition is 2cos(phi) > -1 + sqrt(1 - 2/xi); for
    xi > 2 the condition that keeps the sign of Im theta is
    2cos(phi) > 1 - sqrt(1 - 2/xi). The result is min(pi/8, phi_max/2).
    """
    region = classify_region(xi)
    if region == Region.LeftNoPoints:
        thr = -1.0 + np.sqrt(1.0 - 2.0 / xi)
    elif region == Region.RightNoPoints:
        thr = 1.0 - np.sqrt(1.0 - 2.0 / xi)
    else:
        raise PreconditionError(f"xi = {xi} is not in a no-phase-point region")
    if thr / 2 >= 1.0:
        raise NoAdmissibleAngle(f"no sector angle at xi = {xi}")
    phi_max = float(np.arccos(max(thr / 2, -1.0)))
    if phi_max < 1e-9:
        raise NoAdmissibleAngle(f"sector angle collapses at xi = {xi}")
    return min(np.pi / 8, 0.5 * phi_max)


@dataclass(frozen=True)
class SectorReport:
    xi: float
    phi: float
    constant: float  # sup (xi<-1/4) or inf (xi>2) of Im theta / Im k
    worst_k: complex
    n_samples: int


def sector_sign_check(xi: float, phi: float, samples: int = 10**5, R: float = 50.0, seed: int = 0) -> SectorReport:
    """Sample the four sectors |arg(+-k)| < phi and check the sign of Im theta.

    The sector sizes are quasi-uniform in log-radius on [1e-3, R].
    """
    region = classify_region(xi)
    if region not in (Region.LeftNoPoints, Region.RightNoPoints):
        raise PreconditionError(f"xi = {xi} is not in a no-phase-point region")
    rng = np.random.default_rng(seed)
    rad = np.exp(rng.uniform(np.log(1e-3), np.log(R), samples))
    ang = rng.uniform(0, phi, samples)
    quad = rng.integers(0, 4, samples)
    base = rad * np.exp(1j * ang)
    k = np.where(quad == 0, base, np.where(quad == 1, -np.conj(base), np.where(quad == 2, np.conj(base), -base)))
    ratio = im_theta(k, xi) / k.imag
    if region == Region.LeftNoPoints:
        j = int(np.argmax(ratio))
        const = float(ratio[j])
        if const >= 0:
            raise SignViolation(f"Im theta / Im k = {const:.3e} >= 0 at k = {k[j]}", k=k[j])
    else:
        j = int(np.argmin(ratio))
        const = float(ratio[j])
        if const <= 0:
            raise SignViolation(f"Im theta / Im k = {const:.3e} <= 0 at k = {k[j]}", k=k[j])
    return SectorReport(xi=xi, phi=phi, constant=const, worst_k=complex(k[j]), n_samples=samples)


def pole_partition(poles: Sequence[float], xi: float, delta: float = DEFAULT_DELTA) -> PolePartition:
    if delta <= 0:
        raise ValueError("delta must be positive")
    kap = np.asarray(poles, dtype=float)
    imt = kap * (xi - soliton_velocity(kap)) if kap.size else np.zeros(0)
    plus = tuple(int(i) for i in np.nonzero(imt > delta)[0])
    minus = tuple(int(i) for i in np.nonzero(imt < -delta)[0])
    lam = tuple(int(i) for i in np.nonzero(np.abs(imt) <= delta)[0])
    off = np.abs(imt[list(plus + minus)]) if (plus or minus) else np.zeros(0)
    rho0 = float(off.min()) if off.size else float("inf")
    return PolePartition(delta_plus=plus, delta_minus=minus, lambda_set=lam,
                         im_theta=tuple(float(v) for v in imt), rho0=rho0)


def contour_intervals(xi: float) -> List[Tuple[float, float]]:
    """L(xi) = {k real : theta'(k; xi) > 0} as a list of intervals.

    Empty for xi < -1/4, the whole line for xi > 2; in between it is cut by
    the stationary points. Infinite ends are reported as +-inf.
    """
    pts = sorted(stationary_points(xi)) if classify_region(xi) not in (Region.LeftNoPoints,) else []
    edges = [-np.inf] + pts + [np.inf]
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        if a == b:
            continue
        if np.isinf(a) and np.isinf(b):
            mid = 0.0
        elif np.isinf(a):
            mid = b - 1.0
        elif np.isinf(b):
            mid = a + 1.0
        else:
            mid = 0.5 * (a + b)
        if theta_prime_real(mid, xi) > 0:
            out.append((a, b))
    # merge touching intervals (double roots)
    merged = []
    for a, b in out:
        if merged and merged[-1][1] == a:
            merged[-1] = (merged[-1][0], b)
        else:
            merged.append((a, b))
    return merged


def phase_geometry(xi: float, poles: Sequence[float] = (), delta: float = DEFAULT_DELTA) -> PhaseGeometry:
    region = classify_region(xi)
    pts = tuple(stationary_points(xi))
    try:
        phi = admissible_angle(xi)
    except (PreconditionError, NoAdmissibleAngle):
        phi = float("nan")
    part = pole_partition(poles, xi, delta)
    return PhaseGeometry(xi=xi, region=region, stationary_points=pts, phi=phi, delta0=delta,
                         rho0=part.rho0, partition=part)
