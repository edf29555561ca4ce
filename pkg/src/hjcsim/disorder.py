"""Gaussian site-energy disorder and P0 ensemble statistics.

Seeding rule: realization ``i`` of a spec with seed ``s`` draws its detunings
from ``numpy.random.default_rng(SeedSequence(s, spawn_key=(i,)))`` and seeds
its eigensolver from ``SeedSequence(s, spawn_key=(i, 1))``.  Every
realization is therefore reproducible on its own, in any order and on any
number of workers.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import HJCError, ParameterError
from .model import ModelParams
from .polaron import compute_p0

log = logging.getLogger(__name__)

PERCENTILES = (5, 25, 50, 75, 95)
MAX_FAILURE_FRACTION = 0.01


class EnsembleError(HJCError):
    """Too many disorder realizations failed to produce a P0 value."""


@dataclass(frozen=True)
class DisorderSpec:
    sigma: float
    n_realizations: int = 200
    seed: int = 0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ParameterError(f"sigma must be non-negative, got {self.sigma}")
        if int(self.n_realizations) != self.n_realizations or self.n_realizations < 1:
            raise ParameterError("n_realizations must be a positive integer")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ParameterError("seed must fit in an unsigned 64-bit integer")


@dataclass
class EnsembleStats:
    min: float
    max: float
    mean: float
    std: float
    percentiles: dict
    n_ok: int
    n_failed: int
    bound: float
    values: Optional[np.ndarray] = field(default=None, repr=False)
    residuals: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def spread(self) -> float:
        """Width between the 5th and 95th percentiles."""
        return self.percentiles[95] - self.percentiles[5]

    @property
    def stderr(self) -> float:
        return self.std / np.sqrt(max(self.n_ok, 1))

    def row(self) -> dict:
        out = {"n_ok": self.n_ok, "n_failed": self.n_failed, "min": self.min, "max": self.max,
               "mean": self.mean, "std": self.std}
        out.update({f"p{q}": self.percentiles[q] for q in PERCENTILES})
        out["bound"] = self.bound
        return out


def _seed_sequence(spec: DisorderSpec, index: int, *extra) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(spec.seed), spawn_key=(int(index),) + extra)


def solver_seed(spec: DisorderSpec, index: int) -> int:
    return int(_seed_sequence(spec, index, 1).generate_state(1, np.uint64)[0])


def sample_detunings(spec: DisorderSpec, realization_index: int, n_sites: int) -> np.ndarray:
    """Independent ``Normal(0, sigma**2)`` detunings for one realization."""
    if not 0 <= realization_index < spec.n_realizations:
        raise ParameterError(f"realization index {realization_index} outside [0, {spec.n_realizations})")
    rng = np.random.default_rng(_seed_sequence(spec, realization_index))
    return rng.normal(0.0, 1.0, n_sites) * spec.sigma


def summarize(values, bound: float, n_failed: int = 0, residuals=None) -> EnsembleStats:
    values = np.asarray(values, dtype=float)
    pct = np.percentile(values, PERCENTILES)
    return EnsembleStats(
        min=float(values.min()), max=float(values.max()), mean=float(values.mean()),
        std=float(values.std(ddof=1)) if len(values) > 1 else 0.0,
        percentiles={q: float(v) for q, v in zip(PERCENTILES, pct)},
        n_ok=len(values), n_failed=n_failed, bound=bound, values=values,
        residuals=None if residuals is None else np.asarray(residuals, dtype=float),
    )


def ensemble_p0(params: ModelParams, spec: DisorderSpec, *, threads: int = 1, **solver_kw) -> EnsembleStats:
    """P0 over all disorder realizations of ``spec``.

    Realizations run on ``threads`` workers; results are gathered in index
    order, so the statistics do not depend on scheduling.  Failed
    realizations are tolerated up to 1 % of the ensemble.
    """
    solver_kw.setdefault("n_pairs", 1)

    def one(i):
        d = sample_detunings(spec, i, params.n_molecules)
        try:
            return compute_p0(params, d, seed=solver_seed(spec, i), **solver_kw)
        except HJCError as exc:
            log.warning("realization %d failed: %s", i, exc)
            return None

    idx = range(spec.n_realizations)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(one, idx))
    else:
        results = [one(i) for i in idx]
    ok = [r for r in results if r is not None]
    n_failed = len(results) - len(ok)
    if not ok or n_failed > MAX_FAILURE_FRACTION * len(results):
        raise EnsembleError(f"{n_failed} of {len(results)} realizations failed")
    return summarize([r.p0 for r in ok], ok[0].bound, n_failed, [r.residual for r in ok])
