"""Ideal-sheaf squares, Gaussian maps and extensions of canonical curves, computed over F_p."""

__version__ = "0.1.0"
