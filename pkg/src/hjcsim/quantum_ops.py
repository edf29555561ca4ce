"""Harmonic-oscillator kernels: ladder operators, displacement matrix elements,
Franck-Condon factors and thermal weights.

The displacement operator is ``D(lam) = exp[lam * (b^dagger - b)]`` with real
``lam``; a shifted oscillator eigenstate is ``|m~> = D(lam)^dagger |m>``.
"""

from __future__ import annotations

import math

import numpy as np

from .exceptions import ParameterError


def lowering(n_levels: int) -> np.ndarray:
    """Matrix of ``b`` on the lowest ``n_levels`` Fock states."""
    return np.diag(np.sqrt(np.arange(1, n_levels, dtype=float)), 1)


def raising(n_levels: int) -> np.ndarray:
    return lowering(n_levels).T.copy()


def _laguerre(n: int, alpha: int, x: float) -> float:
    # three-term recurrence in the degree
    if n == 0:
        return 1.0
    prev, cur = 1.0, 1.0 + alpha - x
    for j in range(1, n):
        prev, cur = cur, ((2 * j + 1 + alpha - x) * cur - (j + alpha) * prev) / (j + 1)
    return cur


def displacement_element(m: int, n: int, lam: float) -> float:
    """Return ``<m| exp[lam (b^dagger - b)] |n>`` for real ``lam``.

    Uses ``exp(-lam**2/2) * sqrt(n!/m!) * lam**(m-n) * L_n^(m-n)(lam**2)``
    for ``m >= n`` and the reflection ``<m|D|n> = (-1)**(m-n) <n|D|m>``
    otherwise.  Factorial ratios are taken through ``lgamma`` so that
    quantum numbers in the hundreds do not overflow.
    """
    if m < 0 or n < 0:
        raise ParameterError("quantum numbers must be non-negative")
    if m < n:
        sign = -1.0 if (n - m) % 2 else 1.0
        return sign * displacement_element(n, m, lam)
    if lam == 0.0:
        return 1.0 if m == n else 0.0
    x = lam * lam
    d = m - n
    log_pref = -0.5 * x + 0.5 * (math.lgamma(n + 1) - math.lgamma(m + 1)) + d * math.log(abs(lam))
    sign = -1.0 if (lam < 0 and d % 2) else 1.0
    return sign * math.exp(log_pref) * _laguerre(n, d, x)


def displacement_matrix(n_levels: int, lam: float) -> np.ndarray:
    """``<m|D(lam)|n>`` for ``m, n < n_levels`` from the closed form (not truncated expm)."""
    out = np.empty((n_levels, n_levels))
    for m in range(n_levels):
        for n in range(n_levels):
            out[m, n] = displacement_element(m, n, lam)
    return out


def fc_factor(m: int, n: int, lambda_rel: float) -> float:
    """Franck-Condon factor ``|<m|D(lambda_rel)|n>|**2`` between two shifted oscillators."""
    return displacement_element(m, n, lambda_rel) ** 2


def boltzmann_weights(kbt: float, omega_v: float, m_max: int) -> np.ndarray:
    """Normalized thermal populations of levels ``0..m_max``; ``kbt == 0`` is the ground state."""
    if not omega_v > 0:
        raise ParameterError(f"omega_v must be positive, got {omega_v}")
    if kbt < 0 or m_max < 0:
        raise ParameterError("kbt and m_max must be non-negative")
    m = np.arange(m_max + 1, dtype=float)
    if kbt == 0:
        w = np.zeros(m_max + 1)
        w[0] = 1.0
        return w
    w = np.exp(-m * omega_v / kbt)
    return w / w.sum()
