"""Polaron decoupling: dressed states, their analytic energies and the P0 overlap."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .exceptions import HJCError, ParameterError
from .hamiltonian import build_hjc, electronic_block
from .model import Basis, ModelParams
from .quantum_ops import displacement_element
from .solver import DENSE_THRESHOLD, lowest_eigenpairs

log = logging.getLogger(__name__)

BRANCHES = ("-", "+")


def p0_bound(params: ModelParams) -> float:
    """Upper bound ``exp(-lambda_e**2 / 4N)`` on P0."""
    return math.exp(-params.lambda_e ** 2 / (4 * params.n_molecules))


def _branch_index(branch) -> int:
    if branch in ("-", -1, "minus", "lower"):
        return 0
    if branch in ("+", 1, "plus", "upper"):
        return 1
    raise ParameterError(f"branch must be '+' or '-', got {branch!r}")


def bare_polaritons(params: ModelParams, gauge: str = "complex"):
    """Eigenpairs of the vibration-free ``{|G,1>, |k=0>}`` block, ordered (-, +).

    Each vector is phased so that its ``|k=0>`` component is real and
    non-negative; with the complex-gauge ``-i`` coupling the lower polariton
    at resonance is ``(-i|G,1> + |k=0>)/sqrt(2)``.
    """
    block = electronic_block(params, gauge=gauge)[:2, :2]
    vals, vecs = np.linalg.eigh(block)
    for j in range(2):
        c = vecs[1, j]
        if abs(c) > 1e-15:
            vecs[:, j] *= abs(c) / c
        else:
            vecs[:, j] *= abs(vecs[0, j]) / vecs[0, j]
    return vals, vecs


def dressed_state_vector(params: ModelParams, branch="-", m_sym: int = 0, *,
                         basis: Optional[Basis] = None, gauge: str = "complex") -> np.ndarray:
    """The dressed state ``|psi_pm> (x) D^dagger(lambda_e / 2 sqrt(N)) |m_sym> (x) |0...0>``.

    The symmetric-mode displacement is expanded over the truncated levels
    ``0..m_sym_max`` and is therefore normalized only up to the truncation loss.
    """
    basis = basis if basis is not None else Basis(params)
    if not 0 <= m_sym <= params.trunc.m_sym_max:
        raise ParameterError(f"m_sym={m_sym} outside 0..{params.trunc.m_sym_max}")
    _, pol = bare_polaritons(params, gauge)
    electronic = pol[:, _branch_index(branch)]
    shift = params.lambda_e / (2 * math.sqrt(params.n_molecules))
    n = params.n_molecules
    levels = np.arange(params.trunc.m_sym_max + 1)
    if params.trunc.m_total_max is not None:
        levels = levels[levels <= params.trunc.m_total_max]
    vib = np.array([displacement_element(j, m_sym, -shift) for j in levels])
    phonons = np.zeros((len(levels), n), dtype=np.int64)
    phonons[:, 0] = levels
    ranks = basis.phonon_rank(phonons)
    out = np.zeros(basis.dim, dtype=complex)
    for sector in (0, 1):
        out[sector * basis.n_phonon_configs + ranks] = electronic[sector] * vib
    return out


def dressed_energy(params: ModelParams, branch="-", m_sym: int = 0,
                   nonsym_occupations: Sequence[int] = ()) -> float:
    """Analytic dressed level ``pm sqrt(N) Omega/2 + omega_v (m_sym + sum m_nonsym)``.

    Uses ``kappa(m) = m``; order-1/N Stokes shifts are not included.
    """
    if m_sym < 0 or any(m < 0 for m in nonsym_occupations):
        raise ParameterError("occupations must be non-negative")
    if len(nonsym_occupations) > params.n_molecules - 1:
        raise ParameterError("too many non-symmetric occupations")
    sign = -1.0 if _branch_index(branch) == 0 else 1.0
    return sign * params.collective_rabi / 2 + params.omega_v * (m_sym + sum(nonsym_occupations))


@dataclass
class P0Result:
    p0: float
    bound: float
    params: ModelParams
    ground_energy: float
    residual: float = 0.0
    dim: int = 0
    degeneracy: int = 1
    seed: int = 0
    method: str = ""
    detunings: Optional[np.ndarray] = field(default=None, repr=False)

    def row(self) -> dict:
        return {
            "N": self.params.n_molecules,
            "omega_rabi": self.params.omega_rabi,
            "p0": self.p0,
            "bound": self.bound,
            "ground_energy": self.ground_energy,
            "residual": self.residual,
            "dim": self.dim,
        }


def compute_p0(params: ModelParams, detunings: Optional[Sequence[float]] = None, *,
               tol: float = 1e-9, seed: int = 0, dense_threshold: int = DENSE_THRESHOLD,
               n_pairs: int = 2, degeneracy_tol: float = 1e-7, max_iter: int = 500,
               threads: int = 1, gauge: str = "complex") -> P0Result:
    """Squared overlap of the lowest eigenstate with the undisplaced lower polariton.

    The target is ``|psi_-> (x) |0>`` built at ``lambda_e = 0`` (and the
    uniform ``delta_e`` of ``params``).  If the lowest returned eigenvalues
    are degenerate within ``degeneracy_tol``, P0 is the squared norm of the
    target's projection onto that degenerate subspace, i.e. the largest
    squared overlap attainable by any ground state.
    """
    basis = Basis(params)
    h = build_hjc(params, detunings, gauge=gauge, basis=basis)
    n_pairs = min(n_pairs, basis.dim)
    res = lowest_eigenpairs(h, n_pairs=n_pairs, tol=tol, seed=seed, dense_threshold=dense_threshold,
                            max_iter=max_iter, threads=threads)
    target = dressed_state_vector(params.replace(lambda_e=0.0), "-", 0, basis=basis, gauge=gauge)
    e0 = res.eigenvalues[0]
    ground = np.abs(res.eigenvalues - e0) <= degeneracy_tol
    overlaps = np.abs(res.eigenvectors[:, ground].conj().T @ target) ** 2
    return P0Result(
        p0=float(min(overlaps.sum(), 1.0)),
        bound=p0_bound(params),
        params=params,
        ground_energy=float(e0),
        residual=float(res.residuals[ground].max()),
        dim=basis.dim,
        degeneracy=int(ground.sum()),
        seed=seed,
        method=res.method,
        detunings=None if detunings is None else np.asarray(detunings, dtype=float),
    )


@dataclass
class SweepPoint:
    value: float
    result: Optional[P0Result]
    error: Optional[str] = None


def sweep_p0(template: ModelParams, axis: str, values: Iterable, *, threads: int = 1,
             **solver_kw) -> list:
    """Run :func:`compute_p0` once per value of ``axis`` (``"N"`` or ``"omega_rabi"``).

    Failures are recorded in the returned :class:`SweepPoint` and the sweep continues.
    """
    if axis not in ("N", "n_molecules", "omega_rabi"):
        raise ParameterError(f"unknown sweep axis {axis!r}")
    field_name = "omega_rabi" if axis == "omega_rabi" else "n_molecules"
    values = list(values)

    def one(value):
        try:
            p = template.replace(**{field_name: int(value) if field_name == "n_molecules" else float(value)})
            return SweepPoint(value, compute_p0(p, **solver_kw))
        except HJCError as exc:
            log.warning("sweep point %s=%s failed: %s", axis, value, exc)
            return SweepPoint(value, None, str(exc))

    if threads > 1 and len(values) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, values))
    return [one(v) for v in values]


def spectrum_table(params: ModelParams, n_levels: int = 12, *, tol: float = 1e-9, seed: int = 0,
                   dense_threshold: int = DENSE_THRESHOLD, max_iter: int = 500, threads: int = 1,
                   m_sym_levels: int = 3) -> list:
    """Low-lying numerical eigenvalues next to the nearest analytic dressed level.

    Each row carries the eigenvalue, its residual, the weight of the
    eigenvector inside the symmetric manifold P, and the closest analytic
    level ``(branch, m_sym, total non-symmetric quanta)``.
    """
    basis = Basis(params)
    h = build_hjc(params, basis=basis)
    res = lowest_eigenpairs(h, n_pairs=min(n_levels, basis.dim), tol=tol, seed=seed,
                            dense_threshold=dense_threshold, max_iter=max_iter, threads=threads)
    p_weight = (np.abs(res.eigenvectors[: 2 * basis.n_phonon_configs]) ** 2).sum(axis=0)
    levels = []
    max_nonsym = params.trunc.m_nonsym_max * (params.n_molecules - 1)
    for branch in BRANCHES:
        for m in range(min(m_sym_levels, params.trunc.m_sym_max) + 1):
            for extra in range(min(max_nonsym, m_sym_levels) + 1):
                if extra and params.n_molecules == 1:
                    continue
                levels.append((branch, m, extra, dressed_energy(params, branch, m, [extra] if extra else [])))
    rows = []
    for i, (e, r) in enumerate(zip(res.eigenvalues, res.residuals)):
        branch, m, extra, ea = min(levels, key=lambda lv: abs(lv[3] - e))
        rows.append({
            "index": i, "energy": float(e), "residual": float(r), "p_weight": float(p_weight[i]),
            "branch": branch, "m_sym": m, "nonsym_quanta": extra,
            "analytic_energy": ea, "deviation": float(e - ea),
            # measured from the bare doublet centre detuning/2
            "centered_deviation": float(e - ea - params.detuning / 2),
        })
    return rows
