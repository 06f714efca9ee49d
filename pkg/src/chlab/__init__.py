"""Inverse scattering, Riemann-Hilbert reconstruction and long-time asymptotics for the Camassa-Holm equation."""

__version__ = "0.1.0"
