"""Model parameters and the truncated one-excitation basis.

All energies are expressed in units of the vibrational frequency ``omega_v``.
Electronic momenta ``k`` and phonon momenta ``q`` are integers ``0..N-1``
standing for ``2*pi*j/N`` on a ring of unit lattice spacing (periodic
boundary conditions).

Basis ordering
--------------
States are ordered lexicographically by ``(electronic sector, phonon vector)``:

* electronic sector 0 is the ground state with one cavity photon ``|G, 1>``;
  sector ``1 + k`` is the collective excitation ``|k, 0>`` with no photon;
* within a sector, phonon occupation vectors ``(n_0, n_1, ..., n_{N-1})`` are
  ordered lexicographically with ``n_0`` (the symmetric mode) most significant.

The dense index of a state is ``sector * n_phonon_configs + phonon_rank``.
This ordering is frozen so that stored eigenvectors stay portable.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np

from .exceptions import BasisSizeError, DomainError, ParameterError

_MAX_INDEX = np.iinfo(np.int64).max


def huang_rhys_from_shift(omega_v: float, q0: float) -> float:
    """Huang-Rhys factor ``lambda**2 = (omega_v / 2) * q0**2`` of a displaced potential.

    ``q0`` is the mass-weighted equilibrium shift of the excited-state
    potential along the reaction coordinate (with hbar = 1).
    """
    if not omega_v > 0:
        raise ParameterError(f"omega_v must be positive, got {omega_v}")
    return 0.5 * omega_v * q0 * q0


@dataclass(frozen=True)
class Truncation:
    """Per-mode caps on phonon occupations.

    Parameters
    ----------
    m_sym_max : int
        Maximum quanta in the symmetric mode ``q = 0``.
    m_nonsym_max : int
        Maximum quanta in each non-symmetric mode ``q != 0``.
    m_total_max : int or None
        Optional cap on the total number of phonons. ``None`` disables it.
    """

    m_sym_max: int = 6
    m_nonsym_max: int = 2
    m_total_max: Optional[int] = None

    def __post_init__(self):
        for name in ("m_sym_max", "m_nonsym_max"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ParameterError(f"{name} must be a non-negative integer, got {value}")
        if self.m_nonsym_max > self.m_sym_max:
            raise ParameterError("m_nonsym_max may not exceed m_sym_max")
        if self.m_total_max is not None and (int(self.m_total_max) != self.m_total_max or self.m_total_max < 0):
            raise ParameterError(f"m_total_max must be a non-negative integer or None, got {self.m_total_max}")

    def caps(self, n_sites: int) -> tuple:
        return (self.m_sym_max,) + (self.m_nonsym_max,) * (n_sites - 1)


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the Holstein-Jaynes-Cummings model.

    ``omega_rabi`` is the single-molecule Rabi frequency, so the collective
    splitting of the bare polaritons is ``sqrt(N) * omega_rabi``. ``delta_e``
    is the cavity detuning from the 0-0 line of a molecule.
    """

    n_molecules: int = 1
    omega_v: float = 1.0
    lambda_e: float = 0.0
    omega_rabi: float = 0.0
    delta_e: float = 0.0
    n_cav_max: int = 1
    trunc: Truncation = field(default_factory=Truncation)

    def __post_init__(self):
        if int(self.n_molecules) != self.n_molecules or self.n_molecules < 1:
            raise ParameterError(f"n_molecules must be a positive integer, got {self.n_molecules}")
        if not self.omega_v > 0:
            raise ParameterError(f"omega_v must be positive, got {self.omega_v}")
        if self.n_cav_max != 1:
            raise ParameterError("only the single-photon sector is supported (n_cav_max == 1)")
        if not isinstance(self.trunc, Truncation):
            raise ParameterError("trunc must be a Truncation")
        for name in ("lambda_e", "omega_rabi", "delta_e"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")

    @property
    def detuning(self) -> float:
        """Vertical detuning ``delta_e + omega_v * lambda_e**2`` of the excited state."""
        return self.delta_e + self.omega_v * self.lambda_e ** 2

    @property
    def huang_rhys(self) -> float:
        return self.lambda_e ** 2

    @property
    def collective_rabi(self) -> float:
        return math.sqrt(self.n_molecules) * self.omega_rabi

    def replace(self, **changes) -> "ModelParams":
        """Return a copy with fields replaced; truncation fields may be given by name."""
        trunc_changes = {k: changes.pop(k) for k in list(changes) if k in _TRUNC_FIELDS}
        if trunc_changes:
            changes["trunc"] = dataclasses.replace(changes.get("trunc", self.trunc), **trunc_changes)
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        """Flat key/value view, the ``[model]`` section of a config file."""
        return {
            "n_molecules": self.n_molecules,
            "omega_v": self.omega_v,
            "lambda_e": self.lambda_e,
            "omega_rabi": self.omega_rabi,
            "delta_e": self.delta_e,
            "m_sym_max": self.trunc.m_sym_max,
            "m_nonsym_max": self.trunc.m_nonsym_max,
            "m_total_max": self.trunc.m_total_max,
        }

    @classmethod
    def from_mapping(cls, values: Mapping) -> "ModelParams":
        """Build from a ``[model]`` section; unknown keys raise ``ParameterError``.

        Values may be strings as read from a config file. ``huang_rhys`` may be
        given instead of ``lambda_e`` (the positive root is used), or ``q0``
        (mass-weighted shift) to go through :func:`huang_rhys_from_shift`.
        """
        unknown = set(values) - set(MODEL_KEYS)
        if unknown:
            raise ParameterError(f"unknown [model] keys: {sorted(unknown)}")
        v = dict(values)
        omega_v = _as_float(v.get("omega_v", 1.0))
        given = [k for k in ("lambda_e", "huang_rhys", "q0") if v.get(k) not in (None, "")]
        if len(given) > 1:
            raise ParameterError(f"give only one of lambda_e, huang_rhys, q0 (got {given})")
        lam = 0.0
        if "lambda_e" in given:
            lam = _as_float(v["lambda_e"])
        elif "huang_rhys" in given:
            s = _as_float(v["huang_rhys"])
            if s < 0:
                raise ParameterError("huang_rhys must be non-negative")
            lam = math.sqrt(s)
        elif "q0" in given:
            lam = math.sqrt(huang_rhys_from_shift(omega_v, _as_float(v["q0"])))
        total = v.get("m_total_max")
        trunc = Truncation(
            m_sym_max=_as_int(v.get("m_sym_max", 6)),
            m_nonsym_max=_as_int(v.get("m_nonsym_max", 2)),
            m_total_max=None if total in (None, "", "none", "None") else _as_int(total),
        )
        return cls(
            n_molecules=_as_int(v.get("n_molecules", 1)),
            omega_v=omega_v,
            lambda_e=lam,
            omega_rabi=_as_float(v.get("omega_rabi", 0.0)),
            delta_e=_as_float(v.get("delta_e", 0.0)),
            trunc=trunc,
        )


_TRUNC_FIELDS = ("m_sym_max", "m_nonsym_max", "m_total_max")
MODEL_KEYS = (
    "n_molecules", "omega_v", "lambda_e", "huang_rhys", "q0",
    "omega_rabi", "delta_e", "m_sym_max", "m_nonsym_max", "m_total_max",
)


def _as_float(x) -> float:
    try:
        return float(x)
    except (TypeError, ValueError):
        raise ParameterError(f"expected a number, got {x!r}") from None


def _as_int(x) -> int:
    try:
        f = float(x)
    except (TypeError, ValueError):
        raise ParameterError(f"expected an integer, got {x!r}") from None
    if f != int(f):
        raise ParameterError(f"expected an integer, got {x!r}")
    return int(f)


GROUND = None


@dataclass(frozen=True)
class BasisState:
    """One element of the truncated one-excitation basis.

    ``excitation`` is ``None`` for the electronic ground state (photon present)
    or the collective momentum ``k`` of the electronic excitation.
    """

    cavity_occ: int
    excitation: Optional[int]
    phonons: tuple

    def __post_init__(self):
        object.__setattr__(self, "phonons", tuple(int(n) for n in self.phonons))
        if self.cavity_occ + (0 if self.excitation is None else 1) != 1:
            raise DomainError("state is outside the one-excitation sector")

    @classmethod
    def ground(cls, phonons: Sequence[int]) -> "BasisState":
        return cls(1, None, tuple(phonons))

    @classmethod
    def excited(cls, k: int, phonons: Sequence[int]) -> "BasisState":
        return cls(0, int(k), tuple(phonons))

    @property
    def sector(self) -> int:
        return 0 if self.excitation is None else 1 + self.excitation


class Basis:
    """Truncated many-body basis with mixed-radix ranking of phonon vectors.

    The phonon vectors admissible under the truncation are ranked with a
    counting table: ``_cum[pos, rem, x]`` is the number of admissible vectors
    that agree with a given prefix up to ``pos``, carry a value ``< x`` at
    ``pos``, and fit into the remaining total budget ``rem``.  Without a
    total cap this reduces to plain mixed-radix arithmetic.
    """

    def __init__(self, params: ModelParams):
        self.params = params
        self.n_sites = n = params.n_molecules
        self.caps = np.array(params.trunc.caps(n), dtype=np.int64)
        cap_sum = int(self.caps.sum())
        total = params.trunc.m_total_max
        self.budget = cap_sum if total is None else min(int(total), cap_sum)

        width = int(self.caps.max()) + 2
        count = [[0] * (self.budget + 1) for _ in range(n + 1)]
        count[n] = [1] * (self.budget + 1)
        for pos in range(n - 1, -1, -1):
            for s in range(self.budget + 1):
                count[pos][s] = sum(count[pos + 1][s - v] for v in range(min(int(self.caps[pos]), s) + 1))
        self.n_phonon_configs = count[0][self.budget]
        self.dim = (n + 1) * self.n_phonon_configs
        if self.dim > _MAX_INDEX:
            raise BasisSizeError(self.dim)

        cum = np.zeros((n, self.budget + 1, width), dtype=np.int64)
        for pos in range(n):
            for rem in range(self.budget + 1):
                acc = 0
                for x in range(width):
                    cum[pos, rem, x] = acc
                    if x <= self.caps[pos] and x <= rem:
                        acc += count[pos + 1][rem - x]
        self._cum = cum
        self._phonons = None

    def __len__(self):
        return self.dim

    def __repr__(self):
        return f"Basis(N={self.n_sites}, phonon_configs={self.n_phonon_configs}, dim={self.dim})"

    @property
    def phonon_table(self) -> np.ndarray:
        """All admissible phonon vectors in rank order, shape ``(n_phonon_configs, N)``."""
        if self._phonons is None:
            self._phonons = self._enumerate_phonons()
        return self._phonons

    def _enumerate_phonons(self) -> np.ndarray:
        rows = np.zeros((1, 0), dtype=np.int16)
        sums = np.zeros(1, dtype=np.int64)
        for pos in range(self.n_sites):
            values = np.arange(self.caps[pos] + 1, dtype=np.int16)
            new_sums = (sums[:, None] + values[None, :]).ravel()
            keep = new_sums <= self.budget
            rows = np.concatenate(
                [np.repeat(rows, len(values), axis=0), np.tile(values, len(sums))[:, None]], axis=1
            )[keep]
            sums = new_sums[keep]
        return rows

    def phonon_rank(self, phonons) -> np.ndarray:
        """Rank of one vector or of each row of a 2-D array of phonon vectors."""
        ph = np.asarray(phonons, dtype=np.int64)
        single = ph.ndim == 1
        ph = np.atleast_2d(ph)
        if ph.shape[1] != self.n_sites:
            raise DomainError(f"phonon vector length {ph.shape[1]} != N = {self.n_sites}")
        if np.any(ph < 0) or np.any(ph > self.caps) or np.any(ph.sum(axis=1) > self.budget):
            raise DomainError("phonon vector outside the truncation")
        rem = self.budget - np.concatenate(
            [np.zeros((ph.shape[0], 1), dtype=np.int64), np.cumsum(ph, axis=1)[:, :-1]], axis=1
        )
        rank = self._cum[np.arange(self.n_sites)[None, :], rem, ph].sum(axis=1)
        return rank[0] if single else rank

    def phonon_unrank(self, rank: int) -> tuple:
        rank = int(rank)
        if not 0 <= rank < self.n_phonon_configs:
            raise DomainError(f"phonon rank {rank} out of range")
        out = []
        rem = self.budget
        for pos in range(self.n_sites):
            row = self._cum[pos, rem]
            x = int(np.searchsorted(row[: min(int(self.caps[pos]), rem) + 1], rank, side="right")) - 1
            rank -= int(row[x])
            rem -= x
            out.append(x)
        return tuple(out)

    def index_of(self, state: BasisState) -> int:
        if state.excitation is not None and not 0 <= state.excitation < self.n_sites:
            raise DomainError(f"momentum {state.excitation} out of range for N={self.n_sites}")
        return state.sector * self.n_phonon_configs + int(self.phonon_rank(state.phonons))

    def state_of(self, index: int) -> BasisState:
        index = int(index)
        if not 0 <= index < self.dim:
            raise DomainError(f"index {index} out of range [0, {self.dim})")
        sector, rank = divmod(index, self.n_phonon_configs)
        phonons = self.phonon_unrank(rank)
        if sector == 0:
            return BasisState.ground(phonons)
        return BasisState.excited(sector - 1, phonons)

    def __iter__(self) -> Iterator[BasisState]:
        table = self.phonon_table
        for sector in range(self.n_sites + 1):
            for row in table:
                if sector == 0:
                    yield BasisState.ground(row)
                else:
                    yield BasisState.excited(sector - 1, row)

    def sector_slice(self, sector: int) -> slice:
        return slice(sector * self.n_phonon_configs, (sector + 1) * self.n_phonon_configs)


def enumerate_basis(params: ModelParams) -> list:
    """Ordered list of all basis states (see the module docstring for the order)."""
    return list(Basis(params))
