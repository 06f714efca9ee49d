"""Small Fourier helpers on uniform periodic grids."""

from __future__ import annotations

import numpy as np


def wavenumbers(n: int, h: float) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(n, d=h)


def derivative(f: np.ndarray, h: float, order: int = 1) -> np.ndarray:
    """Spectral derivative of a real periodic sample vector.

    The Nyquist mode is dropped for odd orders so the result stays real.
    """
    n = f.size
    k = wavenumbers(n, h)
    fh = np.fft.fft(f)
    if order % 2 == 1 and n % 2 == 0:
        fh[n // 2] = 0.0
    return np.real(np.fft.ifft(fh * (1j * k) ** order))


def fd4_derivative(f: np.ndarray, h: float, order: int = 1) -> np.ndarray:
    """Fourth-order central differences with periodic wrap."""
    fp1, fm1 = np.roll(f, -1), np.roll(f, 1)
    fp2, fm2 = np.roll(f, -2), np.roll(f, 2)
    if order == 1:
        return (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * h)
    if order == 2:
        return (-fp2 + 16 * fp1 - 30 * f + 16 * fm1 - fm2) / (12 * h * h)
    raise ValueError("fd4_derivative supports order 1 or 2")


def cumulative_integral(f: np.ndarray, h: float) -> np.ndarray:
    """G_j = integral of the trigonometric interpolant of f from x_0 to x_j."""
    n = f.size
    c = np.fft.fft(f) / n
    k = wavenumbers(n, h)
    q = np.zeros_like(c)
    nz = k != 0
    if n % 2 == 0:
        nz[n // 2] = False
    q[nz] = c[nz] / (1j * k[nz])
    periodic = np.real(np.fft.ifft(q * n))
    x = h * np.arange(n)
    return np.real(c[0]) * x + periodic - periodic[0]


def refine(f: np.ndarray, factor: int) -> np.ndarray:
    """Trigonometric interpolation of f onto a grid `factor` times finer.

    Node j*factor of the output coincides with node j of the input.
    """
    if factor == 1:
        return f.copy()
    n = f.size
    fh = np.fft.rfft(f)
    if n % 2 == 0:
        fh[-1] *= 0.5  # split the Nyquist mode symmetrically
    out = np.fft.irfft(fh, n * factor) * factor
    return out
