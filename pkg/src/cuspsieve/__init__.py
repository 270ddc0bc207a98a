"""Exact Fourier coefficients of the level-one cusp forms Delta_k and the
congruence sieve bounding the first index n with a_n(Delta_k) = 0."""

from cuspsieve.qseries import FORM_WEIGHTS, PowerSeries, delta_k, eisenstein, theta_qf

__all__ = ["FORM_WEIGHTS", "PowerSeries", "delta_k", "eisenstein", "theta_qf"]
__version__ = "0.1.0"
