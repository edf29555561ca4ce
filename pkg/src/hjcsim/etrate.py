"""Non-adiabatic electron-transfer rates in free space and inside the cavity.

Rates are golden-rule sums over donor/acceptor vibronic channels,

    k = 2 pi V^2 sum_{mD, mA} eta_mD(T) FC(mD, mA) L(dE + (mD - mA) omega_v),

with a normalized Lorentzian lineshape ``L`` of half-width ``gamma_v``.

Cavity model
------------
The donor is the upper dressed state ``|+; m~>``.  Each of the N molecules
carries electronic amplitude ``1/sqrt(2N)`` on its donor level, so summing
the N localized acceptor channels leaves an overall polariton weight 1/2.
The collective displacement ``lambda_D / (2 sqrt(N))`` of the symmetric mode
is shared by N sites, i.e. ``lambda_D / (2N)`` per molecule, so the
Franck-Condon factors use ``lambda_D / (2N) - lambda_A``.  The residual
collective Stokes shift ``omega_v lambda_D**2 / (4N)`` detunes every channel
when ``include_stokes_shift`` is set.  For ``N -> inf`` and cold vibrations
the ratio to the free-space rate tends to ``exp(lambda_D**2 - 2 lambda_D
lambda_A) / 2``.  This finite-N donor description is a model; it is
labelled as such in all outputs.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .exceptions import ParameterError
from .quantum_ops import boltzmann_weights, displacement_element

log = logging.getLogger(__name__)

CAVITY_MODEL = "dressed-donor/N-site-shared-displacement"


def lorentzian(delta, gamma):
    """Normalized Lorentzian ``gamma / (pi (delta**2 + gamma**2))``."""
    if not gamma > 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    delta = np.asarray(delta, dtype=float)
    out = gamma / (math.pi * (delta * delta + gamma * gamma))
    return float(out) if out.ndim == 0 else out


def gaussian(delta, gamma):
    """Normalized Gaussian with standard deviation ``gamma``."""
    if not gamma > 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    delta = np.asarray(delta, dtype=float)
    out = np.exp(-0.5 * (delta / gamma) ** 2) / (gamma * math.sqrt(2 * math.pi))
    return float(out) if out.ndim == 0 else out


LINESHAPES = {"lorentzian": lorentzian, "gaussian": gaussian}


def lineshape(delta, gamma, kind: str = "lorentzian"):
    """Evaluate a registered lineshape (default: Lorentzian of half-width ``gamma``)."""
    try:
        fn = LINESHAPES[kind]
    except KeyError:
        raise ParameterError(f"unknown lineshape {kind!r}; known: {sorted(LINESHAPES)}") from None
    return fn(delta, gamma)


@dataclass(frozen=True)
class ETParams:
    """Donor/acceptor inputs in units of ``omega_v``.

    ``delta_e_drive`` is the 0-0 driving force, taken identical in the cavity
    and in free space.  Rates are reported in units of ``omega_v`` with the
    ``2 pi V**2`` prefactor included.
    """

    lambda_d: float = math.sqrt(2)
    lambda_a: float = -math.sqrt(2)
    omega_v: float = 1.0
    gamma_v: float = 0.01
    kbt: float = 0.1
    v_coh: float = 1e-3
    delta_e_drive: float = 0.0
    n_molecules: int = 10_000
    m_max: int = 8
    include_stokes_shift: bool = True
    lineshape: str = "lorentzian"

    def __post_init__(self):
        if not self.gamma_v > 0:
            raise ParameterError("gamma_v must be positive")
        if not self.omega_v > 0:
            raise ParameterError("omega_v must be positive")
        if self.kbt < 0 or self.m_max < 0:
            raise ParameterError("kbt and m_max must be non-negative")
        if int(self.n_molecules) != self.n_molecules or self.n_molecules < 1:
            raise ParameterError("n_molecules must be a positive integer")
        if self.lineshape not in LINESHAPES:
            raise ParameterError(f"unknown lineshape {self.lineshape!r}")
        if abs(self.v_coh) >= 0.1 * self.omega_v:
            warnings.warn("v_coh is not small compared to omega_v; the non-adiabatic rate "
                          "expression is outside its validity regime", RuntimeWarning, stacklevel=3)

    @property
    def lambda_da(self) -> float:
        return self.lambda_d - self.lambda_a

    def replace(self, **changes) -> "ETParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class Channel:
    m_d: int
    m_a: int
    fc: float
    weight: float
    lineshape: float
    contribution: float


@dataclass
class RateResult:
    rate: float
    channels: list = field(repr=False)
    environment: str = "free"
    model: str = ""

    def dominant(self, n: int = 3) -> list:
        return sorted(self.channels, key=lambda c: -c.contribution)[:n]


def _fc_table(m_max: int, lam: float) -> np.ndarray:
    return np.array([[displacement_element(a, b, lam) ** 2 for b in range(m_max + 1)]
                     for a in range(m_max + 1)])


def _golden_rule(p: ETParams, lam_rel: float, prefactor: float, offset: float, environment: str,
                 shape: Optional[Callable] = None, model: str = "") -> RateResult:
    shape = shape or LINESHAPES[p.lineshape]
    eta = boltzmann_weights(p.kbt, p.omega_v, p.m_max)
    fc = _fc_table(p.m_max, lam_rel)
    m = np.arange(p.m_max + 1)
    detune = p.delta_e_drive + (m[:, None] - m[None, :]) * p.omega_v + offset
    ls = shape(detune, p.gamma_v)
    contrib = 2 * math.pi * p.v_coh ** 2 * prefactor * eta[:, None] * fc * ls
    channels = [Channel(int(a), int(b), float(fc[a, b]), float(eta[a]), float(ls[a, b]), float(contrib[a, b]))
                for a in m for b in m]
    return RateResult(float(contrib.sum()), channels, environment, model)


def et_rate_free(p: ETParams, shape: Optional[Callable] = None) -> RateResult:
    """Free-space rate ``k0``; depends on the displacements only through ``lambda_D - lambda_A``."""
    return _golden_rule(p, p.lambda_da, 1.0, 0.0, "free", shape, "free-space golden rule")


def stokes_shift(p: ETParams) -> float:
    return p.omega_v * p.lambda_d ** 2 / (4 * p.n_molecules)


def et_rate_cavity(p: ETParams, shape: Optional[Callable] = None) -> RateResult:
    """In-cavity rate from the upper dressed donor state (see module docstring)."""
    lam_rel = p.lambda_d / (2 * p.n_molecules) - p.lambda_a
    offset = stokes_shift(p) if p.include_stokes_shift else 0.0
    return _golden_rule(p, lam_rel, 0.5, offset, "cavity", shape, CAVITY_MODEL)


def asymptotic_ratio(lambda_d: float, lambda_a: float) -> float:
    """Large-N, cold-vibration resonant ratio ``exp(lambda_D**2 - 2 lambda_D lambda_A) / 2``."""
    return 0.5 * math.exp(lambda_d ** 2 - 2 * lambda_d * lambda_a)


def sweep_ratio(template: ETParams, axis: str, values: Iterable, delta_e_values: Sequence[float] = (0.0,),
                shape: Optional[Callable] = None) -> list:
    """Rate table over ``axis`` (``"N"`` or ``"lambda_ratio"``) and driving forces.

    For ``lambda_ratio`` the donor displacement is ``value * lambda_a``.
    Each row reports ``k_et``, ``k0``, their ratio and the asymptotic ratio,
    plus the cavity rate recomputed with the Stokes-shift flag flipped.
    """
    if axis not in ("N", "lambda_ratio"):
        raise ParameterError(f"unknown axis {axis!r}")
    rows = []
    for value in values:
        for de in delta_e_values:
            if axis == "N":
                p = template.replace(n_molecules=int(value), delta_e_drive=float(de))
            else:
                p = template.replace(lambda_d=float(value) * template.lambda_a, delta_e_drive=float(de))
            k_et = et_rate_cavity(p, shape).rate
            k0 = et_rate_free(p, shape).rate
            alt = et_rate_cavity(p.replace(include_stokes_shift=not p.include_stokes_shift), shape).rate
            on, off = (k_et, alt) if p.include_stokes_shift else (alt, k_et)
            rows.append({
                "axis": axis, "axis_value": value, "N": p.n_molecules,
                "lambda_d": p.lambda_d, "lambda_a": p.lambda_a, "delta_e": p.delta_e_drive,
                "k_et": k_et, "k0": k0, "ratio": k_et / k0,
                "asymptotic_ratio": asymptotic_ratio(p.lambda_d, p.lambda_a),
                "ratio_stokes_on": on / k0, "ratio_stokes_off": off / k0,
                "include_stokes_shift": p.include_stokes_shift, "lineshape": p.lineshape,
            })
    return rows
