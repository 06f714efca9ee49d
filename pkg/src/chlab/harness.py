"""Experiment orchestration: ray benchmarks, roundtrips, soliton resolution and region atlases."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.optimize import minimize_scalar

from . import forward_scattering as fs
from . import io
from .errors import BoundaryRay, MissingData, PreconditionError
from .forward_scattering import ScatteringData
from .pde_reference import FieldState, PeriodicGrid, evolve
from .phase_geometry import Region, classify_region, pole_partition, stationary_points
from .potential_model import SpatialGrid, build_profile
from .soliton_rh import (DiscreteSpectrum, asymptotic_approximant, invert_x, modified_data, reconstruct,
                         sample_solution)

DEFAULT_LADDER = (10.0, 14.0, 20.0, 28.0, 40.0, 57.0, 80.0)
BOUNDARIES = (-0.25, 0.0, 2.0)


@dataclass
class ExperimentConfig:
    profile: dict = field(default_factory=lambda: {"family": "sech2", "A": 0.1, "w": 4.0})
    K_max: float = 8.0
    nk: int = 1024
    rays: Tuple[float, ...] = (3.0,)
    times: Tuple[float, ...] = DEFAULT_LADDER
    norms: Tuple[str, ...] = ("sup", "L2")
    out_dir: str = "out"
    truth: str = "pde"  # "pde" or "exact" (reflectionless data only)
    window: float = 40.0
    delta: float = 0.05
    drop_first: bool = False
    pde_domain: Tuple[float, float] = (-200.0, 600.0)
    pde_modes: int = 4096
    dt: float = 2e-3
    delta_power: int = -2
    include_blaschke: bool = True

    def __post_init__(self):
        self.rays = tuple(float(r) for r in self.rays)
        self.times = tuple(float(t) for t in self.times)
        self.pde_domain = tuple(float(v) for v in self.pde_domain)
        for xi in self.rays:
            if min(abs(xi - b) for b in BOUNDARIES) < 1e-3:
                raise BoundaryRay(f"ray xi = {xi} is within 1e-3 of a region boundary")
        if any(b <= a for a, b in zip(self.times[:-1], self.times[1:])):
            raise PreconditionError("time ladder must be strictly increasing")
        if self.truth not in ("pde", "exact"):
            raise ValueError(f"unknown truth {self.truth!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)

    def digest(self) -> str:
        return io.config_hash(self.to_dict())


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    slope_lo: float
    slope_hi: float
    residual: float  # rms of the fit residual
    n_points: int


@dataclass
class DecayReport:
    xi: float
    region: str
    truth: str
    t: np.ndarray
    error_sup: np.ndarray
    error_L2: np.ndarray
    loglog: LineFit
    semilog: LineFit
    claimed_exponent: float  # power-law bound -1 + 2 rho with rho < 1/4
    rho0: float
    claimed_rate: float  # -2 rho0 when suppressed poles exist
    n_lambda: int

    def rows(self):
        return [(float(t), float(s), float(l)) for t, s, l in zip(self.t, self.error_sup, self.error_L2)]


def fit_line(x, y, min_points: int = 5) -> LineFit:
    """Least squares y = a x + b with a 95% band on the slope."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    nan = float("nan")
    if x.size < min_points:
        return LineFit(nan, nan, nan, nan, nan, int(x.size))
    res = stats.linregress(x, y)
    q = stats.t.ppf(0.975, x.size - 2)
    resid = y - (res.slope * x + res.intercept)
    return LineFit(float(res.slope), float(res.intercept), float(res.slope - q * res.stderr),
                   float(res.slope + q * res.stderr), float(np.sqrt(np.mean(resid**2))), int(x.size))


def _log_or_nan(v):
    v = np.asarray(v, float)
    with np.errstate(divide="ignore"):
        return np.where(v > 0, np.log(np.where(v > 0, v, 1.0)), np.nan)


def scattering_for(config: ExperimentConfig) -> Tuple[ScatteringData, DiscreteSpectrum]:
    spec = io.spectrum_from_config(config.profile)
    if spec is not None:
        return io.spectrum_to_scattering(spec, config.K_max, config.nk), spec
    profile = io.load_profile(config.profile)
    data = fs.scatter(profile, K_max=config.K_max, nk=config.nk)
    return data, DiscreteSpectrum.from_scattering(data)


def pde_trajectory(config: ExperimentConfig) -> Dict[float, FieldState]:
    grid = PeriodicGrid(config.pde_domain[0], config.pde_domain[1], config.pde_modes)
    u0 = io.field_on(config.profile, grid.nodes)
    states = evolve(u0, max(config.times), dt=config.dt, grid=grid, snap_times=config.times)
    return {s.t: s for s in states}


def _norms(diff: np.ndarray, dx: float) -> Tuple[float, float]:
    if diff.size == 0:
        return float("nan"), float("nan")
    return float(np.max(np.abs(diff))), float(np.sqrt(np.sum(diff**2) * dx))


def ray_errors(config: ExperimentConfig, xi: float, data: ScatteringData, spec: DiscreteSpectrum,
               trajectory: Optional[Dict[float, FieldState]] = None) -> DecayReport:
    region = classify_region(xi)
    if region.value.startswith("Boundary"):
        raise BoundaryRay(f"xi = {xi} is a region boundary")
    part = pole_partition(spec.poles, xi, config.delta)
    sup, l2 = [], []
    for t in config.times:
        approx = asymptotic_approximant(data, xi, t, window=config.window, delta=config.delta,
                                        delta_power=config.delta_power, include_blaschke=config.include_blaschke)
        xr = approx.x_ray
        mod = modified_data(spec, xi, None if data.is_reflectionless else data, part,
                            delta_power=config.delta_power, include_blaschke=config.include_blaschke).model()
        if config.truth == "pde":
            if trajectory is None or t not in trajectory:
                raise MissingData(f"no PDE snapshot at t = {t}")
            st = trajectory[t]
            sel = np.abs(st.x - xr) <= config.window
            xs, truth = st.x[sel], st.u[sel]
            dx = float(st.x[1] - st.x[0])
        else:
            if not data.is_reflectionless:
                raise PreconditionError("exact truth needs reflectionless data")
            xs = np.linspace(xr - config.window, xr + config.window, 2001)
            dx = float(xs[1] - xs[0])
            yc = xi * t
            truth = _field_at(spec, t, xs, (yc - config.window - 40.0, yc + config.window + 40.0))
        if mod.N:
            yc = xi * t
            ur = _field_at(mod, t, xs, (yc - config.window - 40.0, yc + config.window + 40.0))
        else:
            ur = np.zeros_like(xs)
        s, l = _norms(truth - ur, dx)
        sup.append(s)
        l2.append(l)
    sup = np.asarray(sup)
    l2 = np.asarray(l2)
    t = np.asarray(config.times)
    sl = slice(1, None) if config.drop_first else slice(None)
    loglog = fit_line(np.log(t[sl]), _log_or_nan(sup[sl]))
    semilog = fit_line(t[sl], _log_or_nan(sup[sl]))
    rho0 = part.rho0
    return DecayReport(xi=xi, region=region.value, truth=config.truth, t=t, error_sup=sup, error_L2=l2,
                       loglog=loglog, semilog=semilog, claimed_exponent=-0.5, rho0=rho0,
                       claimed_rate=-2.0 * rho0 if np.isfinite(rho0) else float("nan"),
                       n_lambda=len(part.lambda_set))


def _field_at(spec: DiscreteSpectrum, t: float, xs: np.ndarray, y_window) -> np.ndarray:
    if spec.N == 0:
        return np.zeros_like(xs)
    sol = sample_solution(spec, t, y_window, n_samples=2001, x_grid=xs)
    return sol.u_on_x


def run_ray_benchmark(config: ExperimentConfig, scattering: Optional[Tuple[ScatteringData, DiscreteSpectrum]] = None,
                      trajectory: Optional[Dict[float, FieldState]] = None, threads: int = 1) -> List[DecayReport]:
    data, spec = scattering or scattering_for(config)
    if config.truth == "pde" and trajectory is None:
        trajectory = pde_trajectory(config)

    def one(xi):
        return ray_errors(config, xi, data, spec, trajectory)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(one, config.rays))
    return [one(xi) for xi in config.rays]


def write_decay_reports(reports: Sequence[DecayReport], out_dir, config: Optional[ExperimentConfig] = None) -> Path:
    out = Path(out_dir)
    cfg = config.to_dict() if config else {}
    summary = []
    for i, r in enumerate(reports):
        io.write_csv(out / f"ray_{i:02d}.csv", ["t", "error_sup", "error_L2"], r.rows(), cfg)
        summary.append((r.xi, r.region, r.truth, r.n_lambda, r.rho0, r.claimed_rate, r.claimed_exponent,
                        r.loglog.slope, r.loglog.slope_lo, r.loglog.slope_hi, r.loglog.residual,
                        r.semilog.slope, r.semilog.slope_lo, r.semilog.slope_hi, r.semilog.residual))
    header = ["xi", "region", "truth", "n_lambda", "rho0", "claimed_rate", "claimed_exponent",
              "loglog_slope", "loglog_lo", "loglog_hi", "loglog_resid",
              "semilog_slope", "semilog_lo", "semilog_hi", "semilog_resid"]
    return io.write_csv(out / "bench_summary.csv", header, summary, cfg)


# --- roundtrip -----------------------------------------------------------------


@dataclass
class RoundtripReport:
    poles_in: Tuple[float, ...]
    constants_in: Tuple[float, ...]
    poles_out: Tuple[float, ...]
    constants_out: Tuple[float, ...]
    kappa_error: float
    c_rel_error: float
    ordered: bool


def run_roundtrip(spec: DiscreteSpectrum, L: float = 60.0, n: int = 2048) -> RoundtripReport:
    """u(., 0) from the RH problem, then poles and constants by forward scattering."""
    grid = SpatialGrid.uniform(L, n)
    u0 = _field_at(spec, 0.0, grid.nodes, (-L - 20.0, L + 20.0))
    profile = build_profile(u0, grid)
    poles = fs.find_eigenvalues(profile)
    consts = fs.norming_constants(profile, poles) if poles else []
    if len(poles) != spec.N:
        return RoundtripReport(spec.poles, spec.constants, tuple(poles), tuple(consts), float("inf"),
                               float("inf"), False)
    kerr = float(np.max(np.abs(np.asarray(poles) - spec.kappa))) if spec.N else 0.0
    cerr = float(np.max(np.abs(np.asarray(consts) / spec.c_hat - 1.0))) if spec.N else 0.0
    ordered = bool(np.all(np.diff(poles) > 0)) if spec.N > 1 else True
    return RoundtripReport(spec.poles, spec.constants, tuple(poles), tuple(consts), kerr, cerr, ordered)


# --- soliton resolution ------------------------------------------------------------


def _u_at(spec: DiscreteSpectrum, t: float, x: float, y_guess: float) -> float:
    y = invert_x(spec, np.array([x]), t, y_table=np.array([y_guess - 50, y_guess + 50]),
                 x_table=np.array([y_guess - 50, y_guess + 50]))
    u, _ = reconstruct(spec, y, t)
    return float(u[0])


def peak_positions(spec: DiscreteSpectrum, t: float, n_samples: int = 8001) -> List[Tuple[float, float]]:
    """(x, u) of the local maxima of u(., t), refined to ~1e-9 in x."""
    v = 2.0 / (1.0 - 4.0 * spec.kappa**2)
    y = np.linspace(v.min() * t - 60.0, v.max() * t + 60.0, n_samples)
    u, x = reconstruct(spec, y, t)
    idx = [j for j in range(1, len(u) - 1) if u[j] >= u[j - 1] and u[j] > u[j + 1] and u[j] > 1e-6]
    out = []
    for j in idx:
        res = minimize_scalar(lambda xx: -_u_at(spec, t, xx, y[j]), bounds=(x[j - 1], x[j + 1]), method="bounded",
                              options={"xatol": 1e-10})
        out.append((float(res.x), float(-res.fun)))
    return out


@dataclass
class ResolutionReport:
    t: float
    peaks: List[Tuple[float, float]]
    sup_errors: List[float]
    half_width: float


def soliton_resolution(spec: DiscreteSpectrum, t: float, half_width: float = 25.0, n_samples: int = 2001) -> ResolutionReport:
    """Compare each peak of the N-soliton with the one-soliton of the same kappa after aligning maxima."""
    peaks = peak_positions(spec, t)
    if len(peaks) != spec.N:
        raise PreconditionError(f"found {len(peaks)} peaks for {spec.N} solitons at t = {t}")
    s = np.linspace(-half_width, half_width, n_samples)
    errs = []
    for n, (xp, _) in enumerate(peaks):
        one = DiscreteSpectrum((spec.poles[n],), (spec.constants[n],))
        (x1, _), = peak_positions(one, t)
        y0 = 2.0 / (1.0 - 4.0 * spec.poles[n] ** 2) * t
        uN = _field_at(spec, t, xp + s, (y0 - half_width - 60.0, y0 + half_width + 60.0))
        u1 = _field_at(one, t, x1 + s, (y0 - half_width - 60.0, y0 + half_width + 60.0))
        errs.append(float(np.max(np.abs(uN - u1))))
    return ResolutionReport(t=t, peaks=peaks, sup_errors=errs, half_width=half_width)


# --- region atlas -----------------------------------------------------------------

ATLAS_HEADER = ["xi", "region", "n_points", "p1", "p2", "p3", "p4", "n_delta_plus", "n_delta_minus", "n_lambda", "rho0"]


def emit_region_atlas(xi_min: float, xi_max: float, n: int, poles: Sequence[float] = (), delta: float = 0.05,
                      path=None, config: Optional[dict] = None) -> List[tuple]:
    rows = []
    for xi in np.linspace(xi_min, xi_max, n):
        xi = float(xi)
        region = classify_region(xi)
        pts = stationary_points(xi) if region != Region.LeftNoPoints else []
        part = pole_partition(poles, xi, delta)
        padded = list(pts) + [""] * (4 - len(pts))
        rows.append((xi, region.value, len(pts), *padded[:4], len(part.delta_plus), len(part.delta_minus),
                     len(part.lambda_set), part.rho0))
    if path is not None:
        io.write_csv(path, ATLAS_HEADER, rows, config)
    return rows
