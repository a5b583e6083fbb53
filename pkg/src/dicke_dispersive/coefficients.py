"""Fourier coefficients of the rotating displacement operator.

Expanding ``exp(beta (a e^{-iwt} - a^dag e^{iwt}))`` in harmonics of the
mode frequency gives number-operator-valued weights

    Omega_n^m(beta) = beta^m exp(-beta^2/2) L_n^m(beta^2) n!/(n+m)!

multiplying ``a^m e^{-imwt}`` and, with sign ``(-1)^m``,
``e^{imwt} a^dag^m``.  The factorial ratio is carried in log space so
nothing overflows for photon numbers in the thousands.
"""
from __future__ import annotations

import math

import numpy as np


def laguerre_table(n_top: int, m: int, x: float) -> np.ndarray:
    """``[L_0^m(x), ..., L_{n_top}^m(x)]`` by the upward three-term recurrence."""
    if n_top < 0 or m < 0:
        raise ValueError("n and m must be non-negative")
    out = np.empty(n_top + 1)
    out[0] = 1.0
    if n_top >= 1:
        out[1] = 1.0 + m - x
    for n in range(1, n_top):
        out[n + 1] = ((2 * n + 1 + m - x) * out[n] - (n + m) * out[n - 1]) / (n + 1)
    return out


def laguerre_assoc(n: int, m: int, x: float) -> float:
    return float(laguerre_table(n, m, x)[n])


def _log_prefactor(n: np.ndarray, m: int, beta: float) -> np.ndarray:
    # log(|beta|^m e^{-beta^2/2} n!/(n+m)!), vectorised over n
    lg = np.vectorize(math.lgamma, otypes=[float])
    return m * math.log(abs(beta)) - 0.5 * beta * beta + lg(n + 1.0) - lg(n + m + 1.0)


def omega_table(n_top: int, m: int, beta: float) -> np.ndarray:
    """``Omega_n^m(beta)`` for ``n = 0..n_top``."""
    n = np.arange(n_top + 1)
    if beta == 0.0:
        return np.ones(n_top + 1) if m == 0 else np.zeros(n_top + 1)
    sign = -1.0 if (beta < 0 and m % 2) else 1.0
    lag = laguerre_table(n_top, m, beta * beta)
    return sign * np.exp(_log_prefactor(n, m, beta)) * lag


def omega_coeff(n: int, m: int, beta: float) -> float:
    if n < 0 or m < 0:
        raise ValueError("n and m must be non-negative")
    return float(omega_table(n, m, beta)[n])


def displacement_elements(n_top: int, m: int, beta: float) -> np.ndarray:
    """``<n| exp(beta (a - a^dag)) |n+m>`` for ``n = 0..n_top``.

    Equal to ``Omega_n^m sqrt((n+m)!/n!)``; the matching lower-triangle
    element ``<n+m| ... |n>`` carries an extra ``(-1)^m``.
    """
    n = np.arange(n_top + 1)
    if beta == 0.0:
        return np.ones(n_top + 1) if m == 0 else np.zeros(n_top + 1)
    lg = np.vectorize(math.lgamma, otypes=[float])
    sign = -1.0 if (beta < 0 and m % 2) else 1.0
    log_mag = m * math.log(abs(beta)) - 0.5 * beta * beta + 0.5 * (lg(n + 1.0) - lg(n + m + 1.0))
    return sign * np.exp(log_mag) * laguerre_table(n_top, m, beta * beta)


def omega_diag_operator(basis, m: int, beta: float) -> np.ndarray:
    """``Omega_{n_hat}^m(beta)`` as a diagonal matrix on the Fock factor of ``basis``."""
    return np.diag(omega_table(basis.n_max, m, beta)).astype(complex)


def coefficient_rows(n_values, m_values, beta_values):
    """Yield ``(n, m, beta, value)`` for every combination, for table dumps."""
    for beta in beta_values:
        for m in m_values:
            n_top = max(n_values)
            table = omega_table(n_top, m, beta)
            for n in n_values:
                yield n, m, beta, float(table[n])
