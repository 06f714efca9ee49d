"""Cauchy integrals of w(s) = log(1 - |r(s)|^2) sampled on a symmetric k-grid.

Generic data has |r(0)| = 1, so w has a logarithmic singularity at s = 0.
It is split as w = mu*h_beta + l with h_beta(s) = log(s^2/(s^2+beta^2)),
whose Cauchy transform is known in closed form, and a smooth remainder l
handled by the midpoint rule with singularity subtraction. Beyond the grid
w is taken as zero, so the remainder there is -mu*h_beta, integrated after
the map s = K/tau.
"""

from __future__ import annotations

from typing import Iterable, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

_GL_X, _GL_W = np.polynomial.legendre.leggauss(48)
_TAU = 0.5 * (_GL_X + 1.0)
_TAU_W = 0.5 * _GL_W


def _h_beta(s, beta):
    return np.log(s * s / (s * s + beta * beta))


class LogCauchy:
    def __init__(self, k_grid, r_values, floor: float = 1e-300):
        k = np.asarray(k_grid, dtype=float)
        order = np.argsort(k)
        self.s = k[order]
        r = np.asarray(r_values, dtype=complex)[order] if np.size(r_values) else np.zeros_like(self.s, complex)
        self.w = np.log(np.maximum(1.0 - np.abs(r) ** 2, floor))
        self.hs = float(self.s[1] - self.s[0]) if self.s.size > 1 else 1.0
        self.K = float(self.s[-1] + 0.5 * self.hs) if self.s.size else 0.0
        self.zero = bool(np.all(self.w == 0.0))
        j0 = int(np.argmin(np.abs(self.s)))
        one_minus = float(np.exp(self.w[j0]))
        # |a(k1)| > 2 marks the generic log singularity at k = 0
        if one_minus < 0.25:
            self.mu = 1.0
            self.beta = abs(self.s[j0]) / np.sqrt(one_minus)
        else:
            self.mu = 0.0
            self.beta = 1.0
        self.l = self.w - self.mu * _h_beta(self.s, self.beta)
        self._lspl = CubicSpline(self.s, self.l)
        self._wspl = CubicSpline(self.s, self.w)

    def w_at(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return self.mu * _h_beta(s, self.beta) + self._lspl(s)

    # closed-form part
    def _H(self, k):
        k = np.asarray(k, dtype=complex) + 0j
        b = self.beta
        # upper half-plane formula; the lower one follows from conjugation
        val = np.where(k.imag >= 0, 2j * np.pi * np.log(k / (k + 1j * b)), -2j * np.pi * np.log(k / (k - 1j * b)))
        real = k.imag == 0
        if np.any(real):
            kr = k.real[real]
            val[real] = val[real] - 1j * np.pi * _h_beta(kr, b)
        return val

    def _dH(self, k):
        k = np.asarray(k, dtype=complex)
        b = self.beta
        return np.where(k.imag >= 0, 2j * np.pi * (1.0 / k - 1.0 / (k + 1j * b)), -2j * np.pi * (1.0 / k - 1.0 / (k - 1j * b)))

    def _tail(self, k, power=1):
        """int over |s| > K of mu*log(1+beta^2/s^2)/(s-k)^power."""
        if self.mu == 0.0:
            return np.zeros(np.shape(k), complex)
        k = np.asarray(k, dtype=complex)[..., None]
        K, b = self.K, self.beta
        s = K / _TAU
        f = np.log1p((b / s) ** 2) * (K / _TAU**2)
        right = np.sum(_TAU_W * f / (s - k) ** power, axis=-1)
        left = np.sum(_TAU_W * f / (-s - k) ** power, axis=-1)
        return self.mu * (right + left)

    def integral(self, k) -> np.ndarray:
        """int_R w(s)/(s-k) ds; principal value for real k in (-K, K)."""
        k = np.atleast_1d(np.asarray(k, dtype=complex))
        if self.zero:
            return np.zeros(k.shape, complex)
        out = np.empty(k.shape, complex)
        s, l, hs, K = self.s, self.l, self.hs, self.K
        for i, kk in enumerate(k):
            kr = kk.real
            lk = float(self._lspl(kr)) if abs(kr) <= K else 0.0
            num = l - lk
            den = s - kk
            with np.errstate(divide="ignore", invalid="ignore"):
                f = num / den
            hit = np.abs(den) < 1e-14
            if np.any(hit):
                f[hit] = self._lspl(s[hit], 1)
            base = np.sum(f) * hs
            if kk.imag == 0 and abs(kr) < K:
                base += lk * np.log((K - kr) / (K + kr))
            else:
                base += lk * (np.log(K - kk + 0j) - np.log(-K - kk + 0j))
            out[i] = base
        out += self.mu * self._H(k) + self._tail(k)
        return out

    def integral_derivative(self, k) -> np.ndarray:
        """d/dk of `integral` for k off the real axis."""
        k = np.atleast_1d(np.asarray(k, dtype=complex))
        if self.zero:
            return np.zeros(k.shape, complex)
        grid = np.sum(self.l[None, :] / (self.s[None, :] - k[:, None]) ** 2, axis=1) * self.hs
        return grid + self.mu * self._dH(k) + self._tail(k, power=2)

    def interval_integral(self, k, intervals: Iterable[Tuple[float, float]], panel: float = 0.25) -> np.ndarray:
        """int over a union of real intervals (clipped to [-K, K]) of w(s)/(s-k).

        The intervals must stay away from s = 0; used for k off the real axis.
        """
        k = np.atleast_1d(np.asarray(k, dtype=complex))
        total = np.zeros(k.shape, complex)
        if self.zero:
            return total
        gx, gw = np.polynomial.legendre.leggauss(16)
        for a, b in intervals:
            a, b = max(a, -self.K), min(b, self.K)
            if b <= a:
                continue
            npan = max(1, int(np.ceil((b - a) / panel)))
            edges = np.linspace(a, b, npan + 1)
            mid = 0.5 * (edges[1:] + edges[:-1])
            half = 0.5 * (edges[1:] - edges[:-1])
            nodes = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
            weights = (half[:, None] * gw[None, :]).ravel()
            wv = self.w_at(nodes)
            total += np.sum(weights * wv / (nodes[None, :] - k[:, None]), axis=1)
        return total

    def interval_integral_derivative(self, k, intervals, panel: float = 0.25) -> np.ndarray:
        k = np.atleast_1d(np.asarray(k, dtype=complex))
        total = np.zeros(k.shape, complex)
        if self.zero:
            return total
        gx, gw = np.polynomial.legendre.leggauss(16)
        for a, b in intervals:
            a, b = max(a, -self.K), min(b, self.K)
            if b <= a:
                continue
            npan = max(1, int(np.ceil((b - a) / panel)))
            edges = np.linspace(a, b, npan + 1)
            mid = 0.5 * (edges[1:] + edges[:-1])
            half = 0.5 * (edges[1:] - edges[:-1])
            nodes = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
            weights = (half[:, None] * gw[None, :]).ravel()
            total += np.sum(weights * self.w_at(nodes) / (nodes[None, :] - k[:, None]) ** 2, axis=1)
        return total
