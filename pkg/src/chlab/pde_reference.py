"""Pseudo-spectral reference solver for u_t + u u_x + d_x (1 - d_x^2)^{-1}(u^2 + u_x^2/2 + 2u) = 0."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import BlowUp, GridError, PreconditionError

DEFAULT_DOMAIN = (-200.0, 600.0)
DEFAULT_MODES = 4096
DEFAULT_DT = 2e-3
BLOWUP_AMPLITUDE = 1e3
CHECK_EVERY = 50


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid on [a, b) with n nodes, one period of the line surrogate."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if self.n < 16 or self.n % 2 or self.b <= self.a:
            raise GridError(f"bad periodic grid [{self.a}, {self.b}) with n = {self.n}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.n)

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * np.fft.rfftfreq(self.n, d=self.h)

    @classmethod
    def default(cls) -> "PeriodicGrid":
        return cls(DEFAULT_DOMAIN[0], DEFAULT_DOMAIN[1], DEFAULT_MODES)


@dataclass(frozen=True)
class FieldState:
    t: float
    x: np.ndarray
    u: np.ndarray
    ledger: Tuple[float, float, float]


class _Operator:
    def __init__(self, grid: PeriodicGrid, dealias: bool = True):
        kf = grid.wavenumbers
        self.ik = 1j * kf
        self.ik[-1] = 0.0  # odd derivative drops the Nyquist mode
        self.k2 = kf**2
        self.helm = self.ik / (1.0 + self.k2)
        self.mask = np.ones_like(kf)
        if dealias:
            self.mask[np.abs(kf) > (2.0 / 3.0) * kf.max()] = 0.0
        self.n = grid.n

    def rhs(self, uh: np.ndarray) -> np.ndarray:
        n = self.n
        u = np.fft.irfft(uh, n)
        ux = np.fft.irfft(self.ik * uh, n)
        adv = np.fft.rfft(u * ux)
        src = np.fft.rfft(u * u + 0.5 * ux * ux)
        return -self.mask * (adv + self.helm * src) - 2.0 * self.helm * uh


def _derivatives(u: np.ndarray, grid: PeriodicGrid):
    uh = np.fft.rfft(u)
    kf = grid.wavenumbers
    ik = 1j * kf
    ik[-1] = 0.0
    ux = np.fft.irfft(ik * uh, grid.n)
    uxx = np.fft.irfft(-(kf**2) * uh, grid.n)
    return ux, uxx


def ledger_values(u: np.ndarray, grid: PeriodicGrid) -> Tuple[float, float, float]:
    """(int u, int u^2 + u_x^2, int sqrt(m+1) - 1) by the periodic rectangle rule."""
    ux, uxx = _derivatives(u, grid)
    m = u - uxx
    if np.min(m + 1.0) <= 0:
        raise BlowUp("m + 1 <= 0")
    h = grid.h
    return (float(np.sum(u) * h), float(np.sum(u * u + ux * ux) * h), float(np.sum(np.sqrt(m + 1.0) - 1.0) * h))


def ledger(state: FieldState) -> Tuple[float, float, float]:
    return state.ledger


def cfl_limit(u: np.ndarray, h: float) -> float:
    return 0.5 * h / max(1.0, float(np.max(np.abs(u))) + 2.0)


def evolve(u0: Sequence[float], T_final: float, dt: float = DEFAULT_DT, grid: Optional[PeriodicGrid] = None,
           snap_times: Optional[Sequence[float]] = None, dealias: bool = True, seam_tol: float = 1e-8) -> List[FieldState]:
    """RK4 in time; snapshots at `snap_times` (0 and T_final always included).

    The step is shortened so that every snapshot time is hit exactly.
    """
    grid = grid or PeriodicGrid.default()
    u = np.asarray(u0, dtype=float).copy()
    if u.shape != (grid.n,):
        raise GridError(f"u0 has shape {u.shape}, grid has {grid.n} nodes")
    if T_final < 0 or dt <= 0:
        raise PreconditionError("need T_final >= 0 and dt > 0")
    if dt > cfl_limit(u, grid.h):
        raise PreconditionError(f"dt = {dt} exceeds the CFL limit {cfl_limit(u, grid.h):.3e}")
    seam = max(abs(u[0]), abs(u[-1]))
    if seam > seam_tol:
        raise PreconditionError(f"u0 = {seam:.2e} at the periodic seam")
    times = sorted({0.0, float(T_final)} | {float(s) for s in (snap_times or []) if 0 <= s <= T_final})
    op = _Operator(grid, dealias)
    x = grid.nodes
    uh = np.fft.rfft(u)
    states = [FieldState(0.0, x, u.copy(), ledger_values(u, grid))]
    t = 0.0
    step_count = 0
    for target in times[1:]:
        span = target - t
        nsteps = max(1, int(np.ceil(span / dt - 1e-9)))
        h = span / nsteps
        for _ in range(nsteps):
            k1 = op.rhs(uh)
            k2 = op.rhs(uh + 0.5 * h * k1)
            k3 = op.rhs(uh + 0.5 * h * k2)
            k4 = op.rhs(uh + h * k3)
            uh = uh + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            step_count += 1
            if step_count % CHECK_EVERY == 0:
                amp = float(np.max(np.abs(np.fft.irfft(uh, grid.n))))
                if not np.isfinite(amp) or amp > BLOWUP_AMPLITUDE:
                    raise BlowUp(f"sup|u| = {amp:.3e} at t = {t:.4g}")
        t = target
        u = np.fft.irfft(uh, grid.n)
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > BLOWUP_AMPLITUDE:
            raise BlowUp(f"sup|u| exceeds {BLOWUP_AMPLITUDE} at t = {t:.4g}")
        states.append(FieldState(t, x, u.copy(), ledger_values(u, grid)))
    return states


def ledger_drift(states: Sequence[FieldState]) -> np.ndarray:
    """Max relative drift per unit time of each ledger entry.

    Entries that vanish initially are measured against 1.
    """
    q0 = np.asarray(states[0].ledger)
    scale = np.where(np.abs(q0) > 1e-12, np.abs(q0), 1.0)
    worst = np.zeros(3)
    for s in states[1:]:
        if s.t > 0:
            worst = np.maximum(worst, np.abs(np.asarray(s.ledger) - q0) / scale / s.t)
    return worst


def peak_position(x: np.ndarray, u: np.ndarray) -> float:
    """Location of max u refined by a parabola through the three top samples."""
    j = int(np.argmax(u))
    if j == 0 or j == len(u) - 1:
        return float(x[j])
    y0, y1, y2 = u[j - 1], u[j], u[j + 1]
    den = y0 - 2 * y1 + y2
    off = 0.5 * (y0 - y2) / den if den != 0 else 0.0
    return float(x[j] + off * (x[1] - x[0]))
