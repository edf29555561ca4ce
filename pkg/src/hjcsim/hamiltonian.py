"""Sparse Holstein-Jaynes-Cummings Hamiltonian in the momentum basis.

In the plane-wave basis ``|k> = N^{-1/2} sum_i exp(i k r_i) |e_i>`` and
``b_q^dagger = N^{-1/2} sum_i exp(i q r_i) b_i^dagger`` the local vibronic
coupling ``lambda_e omega_v sum_i |e_i><e_i| (b_i + b_i^dagger)`` becomes

    (lambda_e omega_v / sqrt(N)) sum_{k,q} |k+q><k| (b_q + b_{-q}^dagger),

which conserves total momentum.  The cavity only couples ``|G, 1>`` to the
symmetric excitation ``k = 0``.  Matrix elements that leave the truncated
basis are dropped.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import ParameterError
from .model import Basis, ModelParams

_DUMP_HEADER = np.dtype([("dim", "<u8"), ("nnz", "<u8")])
_DUMP_RECORD = np.dtype([("row", "<u8"), ("col", "<u8"), ("re", "<f8"), ("im", "<f8")])


class SparseHermitian:
    """Hermitian operator stored as its upper triangle (diagonal included).

    The full operator is ``U + triu(U, 1)^dagger``.  The strictly-lower
    part is materialized lazily for matrix-vector products.
    """

    def __init__(self, upper, basis: Optional[Basis] = None):
        upper = sp.csr_matrix(upper, dtype=complex)
        if upper.shape[0] != upper.shape[1]:
            raise ValueError("matrix must be square")
        upper = sp.triu(upper, format="csr")
        upper.sum_duplicates()
        upper.sort_indices()
        diag = upper.diagonal()
        if np.any(diag.imag != 0):
            upper = upper - sp.diags(1j * diag.imag, format="csr")
            upper.eliminate_zeros()
        self.upper = upper
        self.basis = basis
        self._lower = None
        self._chunks = {}

    @classmethod
    def from_matrix(cls, matrix, basis: Optional[Basis] = None) -> "SparseHermitian":
        """Wrap a full Hermitian dense or sparse matrix (only its upper triangle is read)."""
        return cls(sp.csr_matrix(matrix), basis)

    @property
    def dim(self) -> int:
        return self.upper.shape[0]

    @property
    def shape(self):
        return self.upper.shape

    @property
    def nnz(self) -> int:
        return self.upper.nnz

    @property
    def row_extents(self) -> np.ndarray:
        return np.diff(self.upper.indptr)

    @property
    def lower(self):
        if self._lower is None:
            strict = sp.triu(self.upper, k=1, format="csr")
            self._lower = strict.conj().T.tocsr()
            self._lower.sort_indices()
        return self._lower

    def tocsr(self):
        """Full operator as a CSR matrix."""
        return (self.upper + self.lower).tocsr()

    def toarray(self) -> np.ndarray:
        return self.tocsr().toarray()

    def _row_chunks(self, threads):
        if threads not in self._chunks:
            bounds = np.linspace(0, self.dim, threads + 1).astype(int)
            self._chunks[threads] = [
                (lo, hi, self.upper[lo:hi], self.lower[lo:hi]) for lo, hi in zip(bounds[:-1], bounds[1:])
            ]
        return self._chunks[threads]

    def apply(self, v, threads: int = 1) -> np.ndarray:
        """Return ``H @ v``.

        Rows are partitioned across ``threads`` workers; every row is summed
        in the same order regardless of the partition, so the result is
        bit-identical for any thread count.
        """
        v = np.asarray(v)
        if v.shape[0] != self.dim:
            raise ValueError(f"vector length {v.shape[0]} != dim {self.dim}")
        if threads <= 1 or self.dim < 4 * threads:
            return self.upper @ v + self.lower @ v
        out = np.empty(v.shape, dtype=np.result_type(v.dtype, complex))

        def work(chunk):
            lo, hi, up, low = chunk
            out[lo:hi] = up @ v + low @ v

        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(work, self._row_chunks(threads)))
        return out

    __matmul__ = apply

    def expectation(self, v) -> complex:
        return np.vdot(v, self.apply(v))

    def dump(self, path) -> None:
        """Write the stored upper triangle as little-endian ``{dim, nnz}`` plus
        ``(row, col, re, im)`` coordinate records."""
        coo = self.upper.tocoo()
        header = np.array([(self.dim, coo.nnz)], dtype=_DUMP_HEADER)
        rec = np.empty(coo.nnz, dtype=_DUMP_RECORD)
        rec["row"], rec["col"] = coo.row, coo.col
        rec["re"], rec["im"] = coo.data.real, coo.data.imag
        with open(path, "wb") as fh:
            fh.write(header.tobytes())
            fh.write(rec.tobytes())

    @classmethod
    def load(cls, path) -> "SparseHermitian":
        raw = open(path, "rb").read()
        header = np.frombuffer(raw[: _DUMP_HEADER.itemsize], dtype=_DUMP_HEADER)[0]
        dim, nnz = int(header["dim"]), int(header["nnz"])
        rec = np.frombuffer(raw[_DUMP_HEADER.itemsize:], dtype=_DUMP_RECORD, count=nnz)
        m = sp.coo_matrix(
            (rec["re"] + 1j * rec["im"], (rec["row"].astype(np.int64), rec["col"].astype(np.int64))),
            shape=(dim, dim),
        )
        return cls(m)


def _ladder_matrices(basis: Basis):
    """Lowering matrices ``b_q`` on the phonon space, one per momentum ``q``."""
    table = basis.phonon_table.astype(np.int64)
    n_ph = len(table)
    out = []
    for q in range(basis.n_sites):
        src = np.nonzero(table[:, q] > 0)[0]
        lowered = table[src].copy()
        lowered[:, q] -= 1
        dst = basis.phonon_rank(lowered) if len(src) else np.zeros(0, dtype=np.int64)
        amp = np.sqrt(table[src, q].astype(float))
        out.append(sp.csr_matrix((amp, (dst, src)), shape=(n_ph, n_ph)))
    return out


def electronic_block(params: ModelParams, detunings: Optional[Sequence[float]] = None,
                     gauge: str = "complex") -> np.ndarray:
    """Phonon-free electronic+photon matrix on ``(|G,1>, |k=0>, ..., |k=N-1>)``.

    Without ``detunings`` every excitation sits at ``delta_e + omega_v lambda_e**2``.
    Per-site detunings replace ``delta_e`` and enter as their discrete
    Fourier transform ``(1/N) sum_i D_i exp(-i (k - k') r_i)``.
    """
    n = params.n_molecules
    e = np.zeros((n + 1, n + 1), dtype=complex)
    shift = params.omega_v * params.lambda_e ** 2
    if detunings is None:
        e[1:, 1:] = np.eye(n) * (params.delta_e + shift)
    else:
        d = np.asarray(detunings, dtype=float)
        if d.shape != (n,):
            raise ParameterError(f"expected {n} detunings, got shape {d.shape}")
        r = np.arange(n)
        k = 2 * math.pi * np.arange(n) / n
        phase = np.exp(-1j * np.outer(k, r))  # phase[k, i] = exp(-i k r_i)
        e[1:, 1:] = (phase * d) @ phase.conj().T / n + np.eye(n) * shift
    c = 0.5 * math.sqrt(n) * params.omega_rabi
    if gauge == "complex":
        # -i sqrt(N) (Omega/2) (|k=0><G| a - |G><k=0| a^dagger)
        e[1, 0] = -1j * c
        e[0, 1] = 1j * c
    elif gauge == "real":
        e[1, 0] = e[0, 1] = c
    else:
        raise ParameterError(f"unknown gauge {gauge!r}")
    return e


def build_hjc(params: ModelParams, detunings: Optional[Sequence[float]] = None,
              gauge: str = "complex", basis: Optional[Basis] = None) -> SparseHermitian:
    """Assemble the HJC Hamiltonian on the truncated one-excitation basis.

    Parameters
    ----------
    params : ModelParams
    detunings : sequence of float, optional
        Per-site ``Delta_e(r_i)``; replaces the uniform ``params.delta_e``.
    gauge : {"complex", "real"}
        ``"real"`` applies ``a -> i a`` so that the cavity coupling is real.
        Spectra and squared overlaps are unchanged.
    """
    basis = basis if basis is not None else Basis(params)
    n = params.n_molecules
    n_ph = basis.n_phonon_configs
    table = basis.phonon_table

    el = sp.csr_matrix(electronic_block(params, detunings, gauge))
    eye_ph = sp.identity(n_ph, format="csr")
    h = sp.kron(el, eye_ph, format="csr")
    phonon_energy = params.omega_v * table.sum(axis=1).astype(float)
    h = h + sp.kron(sp.identity(n + 1), sp.diags(phonon_energy), format="csr")

    g = params.lambda_e * params.omega_v / math.sqrt(n)
    if g != 0.0:
        lows = _ladder_matrices(basis)
        k = np.arange(n)
        for q in range(n):
            # |k+q><k| on the excited sectors, zero on |G>
            shift = sp.csr_matrix((np.ones(n), (1 + (k + q) % n, 1 + k)), shape=(n + 1, n + 1))
            ph = lows[q] + lows[(-q) % n].T
            h = h + g * sp.kron(shift, ph, format="csr")
    return SparseHermitian(h, basis)


@dataclass(frozen=True)
class Projector:
    """Diagonal projector onto a set of electronic sectors (any phonon/photon content)."""

    sectors: tuple
    n_sectors: int
    n_phonon_configs: int

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.n_sectors, dtype=bool)
        m[list(self.sectors)] = True
        return np.repeat(m, self.n_phonon_configs)

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v)
        return np.where(self.mask.reshape((-1,) + (1,) * (v.ndim - 1)), v, 0)

    def matrix(self):
        return sp.diags(self.mask.astype(float), format="csr")

    @property
    def trace(self) -> int:
        return len(self.sectors) * self.n_phonon_configs


def _basis_counts(params: ModelParams):
    basis = Basis(params)
    return params.n_molecules + 1, basis.n_phonon_configs


def projector_P(params: ModelParams) -> Projector:
    """Projector on the permutation-symmetric manifold ``{|G>, |k=0>}``."""
    n_sec, n_ph = _basis_counts(params)
    return Projector((0, 1), n_sec, n_ph)


def projector_Q(params: ModelParams) -> Projector:
    """Complement ``1 - P``: excitations with ``k != 0``."""
    n_sec, n_ph = _basis_counts(params)
    return Projector(tuple(range(2, n_sec)), n_sec, n_ph)


def block_norm_ratio(h: SparseHermitian, p: Projector, q: Projector) -> float:
    """Frobenius-norm ratio ``||Q H P|| / ||H||``."""
    full = h.tocsr()
    qhp = q.matrix() @ full @ p.matrix()
    return float(spla.norm(qhp) / spla.norm(full))

