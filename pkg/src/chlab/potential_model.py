"""Initial data, momentum m = u - u_xx and the x <-> y change of scale."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import spectral
from .errors import GridError, InsufficientDecay, MomentumNotPositive

EPS_POS = 1e-6
DELTA_DECAY = 1e-8


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid on [-L, L) treated as one period of a periodic extension."""

    nodes: np.ndarray
    h: float

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        if x.ndim != 1 or x.size < 16 or x.size % 2:
            raise GridError(f"need an even node count >= 16, got {x.size}")
        dx = np.diff(x)
        if self.h <= 0 or np.any(np.abs(dx - self.h) > 1e-12 * self.h * max(1.0, np.abs(x).max())):
            raise GridError("grid is not uniform with spacing h")
        object.__setattr__(self, "nodes", _frozen(x))

    @classmethod
    def uniform(cls, L: float, n: int) -> "SpatialGrid":
        h = 2.0 * L / n
        return cls(nodes=-L + h * np.arange(n), h=h)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def L(self) -> float:
        return -float(self.nodes[0])

    @property
    def center_index(self) -> int:
        """Index of the node closest to x = 0 (exactly 0 for symmetric grids)."""
        return int(np.argmin(np.abs(self.nodes)))


@dataclass(frozen=True)
class PotentialProfile:
    grid: SpatialGrid
    u0: np.ndarray
    u0_x: np.ndarray
    u0_xx: np.ndarray
    m: np.ndarray
    sqrt_weight: np.ndarray

    @property
    def m_x(self) -> np.ndarray:
        return spectral.derivative(self.m, self.grid.h)


@dataclass(frozen=True)
class ScaleMap:
    """Tabulated y(x) = x - int_x^inf (sqrt(m+1) - 1), right-normalized."""

    x: np.ndarray
    y: np.ndarray
    total_shift: float

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(self.x))
        object.__setattr__(self, "y", _frozen(self.y))

    def y_of_x(self, xq) -> np.ndarray:
        xq = np.asarray(xq, dtype=float)
        # outside the table the map is a pure translation
        out = PchipInterpolator(self.x, self.y, extrapolate=True)(xq)
        out = np.where(xq > self.x[-1], xq, out)
        return np.where(xq < self.x[0], xq - self.total_shift, out)

    def x_of_y(self, yq) -> np.ndarray:
        yq = np.asarray(yq, dtype=float)
        out = PchipInterpolator(self.y, self.x, extrapolate=True)(yq)
        out = np.where(yq > self.y[-1], yq, out)
        return np.where(yq < self.y[0], yq + self.total_shift, out)


def build_profile(
    u0_samples: Sequence[float],
    grid: SpatialGrid,
    eps_pos: float = EPS_POS,
    delta_decay: float = DELTA_DECAY,
    method: str = "spectral",
) -> PotentialProfile:
    u0 = np.asarray(u0_samples, dtype=float)
    if u0.shape != grid.nodes.shape:
        raise GridError(f"u0 has shape {u0.shape}, grid has {grid.nodes.shape}")
    if method == "spectral":
        ux = spectral.derivative(u0, grid.h, 1)
        uxx = spectral.derivative(u0, grid.h, 2)
    elif method == "fd4":
        ux = spectral.fd4_derivative(u0, grid.h, 1)
        uxx = spectral.fd4_derivative(u0, grid.h, 2)
    else:
        raise ValueError(f"unknown differentiation method {method!r}")

    edge = max(1, int(np.ceil(0.01 * grid.n)))
    tail = np.abs(u0) + np.abs(ux)
    worst = max(tail[:edge].max(), tail[-edge:].max())
    if worst > delta_decay:
        raise InsufficientDecay(f"|u0|+|u0_x| = {worst:.3e} at the boundary (limit {delta_decay:.1e})")

    m = u0 - uxx
    if np.min(m + 1.0) < eps_pos:
        j = int(np.argmin(m))
        raise MomentumNotPositive(f"m+1 = {m[j] + 1.0:.6g} at x = {grid.nodes[j]:.4g}")
    return PotentialProfile(
        grid=grid,
        u0=_frozen(u0),
        u0_x=_frozen(ux),
        u0_xx=_frozen(uxx),
        m=_frozen(m),
        sqrt_weight=_frozen(np.sqrt(m + 1.0)),
    )


def zero_profile(L: float = 60.0, n: int = 2048) -> PotentialProfile:
    grid = SpatialGrid.uniform(L, n)
    return build_profile(np.zeros(n), grid)


def sech2_profile(A: float, w: float, L: float = 60.0, n: int = 2048, x0: float = 0.0, **kw) -> PotentialProfile:
    grid = SpatialGrid.uniform(L, n)
    u0 = A / np.cosh((grid.nodes - x0) / w) ** 2
    return build_profile(u0, grid, **kw)


def _primitive(g: np.ndarray, h: float, quadrature: str) -> np.ndarray:
    if quadrature == "spectral":
        return spectral.cumulative_integral(g, h)
    if quadrature == "trapezoid":
        return np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * h)])
    raise ValueError(f"unknown quadrature {quadrature!r}")


def conserved_shift(profile: PotentialProfile) -> float:
    g = profile.sqrt_weight - 1.0
    # periodic trapezoid on decayed data
    return float(np.sum(g) * profile.grid.h)


def y_of_x(profile: PotentialProfile, quadrature: str = "spectral") -> ScaleMap:
    """Right-normalized scale map; the tail beyond the grid is taken as zero.

    `quadrature="spectral"` integrates the trigonometric interpolant (needed
    when y feeds phases like exp(2ik y) with k up to ~10); "trapezoid" is the
    plain cumulative rule.
    """
    x = profile.grid.nodes
    h = profile.grid.h
    g = profile.sqrt_weight - 1.0
    G = _primitive(g, h, quadrature)
    if quadrature == "spectral":
        total = conserved_shift(profile)
    else:
        total = float(G[-1] + 0.5 * (g[-1] + g[0]) * h)
    y = x - (total - G)
    return ScaleMap(x=x, y=y, total_shift=total)
