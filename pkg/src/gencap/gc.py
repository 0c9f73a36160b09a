"""Information content, generalization capacity and Gibbs diagnostics.

Randomness is organized so that results do not depend on how repetitions are
spread over workers: noise draw ``j`` comes from the substream
``SeedSequence(seed, spawn_key=(0, j))`` and the hypothesis sample of
repetition ``i`` from ``spawn_key=(1, i)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from gencap.costs import ModelParams, batch_costs, draw_noise
from gencap.errors import DomainError
from gencap.hypothesis import SparseSpace, _check_enumerable, rank_sparse
from gencap.partition import (
    ABSOLUTE,
    MEAN,
    LogPartitionTriple,
    exhaustive_log_partitions,
    importance_sample_log_partitions,
    log_sum_exp,
    uniform_sample_log_partitions,
)

METHODS = ("exhaustive", "uniform", "importance")
CRN_SCHEMES = ("CRN1", "CRN2", "CRN3")

# slack on the exhaustive bound I_beta <= log|C|, relative to log|C|
_BOUND_RTOL = 1e-9


@dataclass(frozen=True)
class BetaGrid:
    betas: tuple

    def __post_init__(self):
        b = np.asarray(self.betas, dtype=np.float64)
        if b.ndim != 1 or b.size == 0:
            raise DomainError("beta grid must be a non-empty 1-D sequence")
        if np.any(b <= 0) or not np.all(np.isfinite(b)):
            raise DomainError("beta grid values must be finite and positive")
        if np.any(np.diff(b) <= 0):
            raise DomainError("beta grid must be strictly increasing")
        object.__setattr__(self, "betas", tuple(float(x) for x in b))

    @classmethod
    def logspace(cls, lo: float, hi: float, count: int) -> "BetaGrid":
        return cls(tuple(np.geomspace(lo, hi, count)))

    @classmethod
    def linspace(cls, lo: float, hi: float, count: int) -> "BetaGrid":
        return cls(tuple(np.linspace(lo, hi, count)))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.betas)

    def __len__(self):
        return len(self.betas)


@dataclass(frozen=True)
class EstimatorSpec:
    method: str = "exhaustive"
    r: int = 100
    m: int = 100
    crn: str = "CRN3"
    master_seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.crn not in CRN_SCHEMES:
            raise DomainError(f"unknown CRN scheme {self.crn!r}; expected one of {CRN_SCHEMES}")
        if self.m < 2:
            raise DomainError("need m >= 2 repetitions for a variance estimate")
        if self.method != "exhaustive" and self.r < 1:
            raise DomainError("sampling methods need r >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise DomainError("master_seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class GcResult:
    betas: np.ndarray
    per_beta_mean: np.ndarray
    per_beta_variance: np.ndarray
    beta_star: float
    gc_estimate: float
    std_at_beta_star: float
    per_repetition: np.ndarray

    @property
    def n_repetitions(self) -> int:
        return self.per_repetition.shape[0]

    @property
    def stderr(self) -> float:
        """Standard error of the mean information content at beta*."""
        return self.std_at_beta_star / math.sqrt(self.n_repetitions)


class PlanEntry(NamedTuple):
    """Noise-draw indices feeding one repetition.

    ``dz`` is a pair of indices when the joint sum uses two data sets and a
    single index when it uses the single-draw joint risk.
    """

    z1: int
    z2: int
    dz: tuple


def information_content(triple: LogPartitionTriple, log_cardinality: float | None = None):
    """``log |C| + log dZ - log Z1 - log Z2``.

    Absolute triples need ``log_cardinality``; mean-normalized triples
    already carry it implicitly and accept only ``None`` or 0.
    """
    if triple.normalization == ABSOLUTE:
        if log_cardinality is None:
            raise DomainError("absolute normalization needs log_cardinality")
        base = log_cardinality
    elif triple.normalization == MEAN:
        if log_cardinality not in (None, 0, 0.0):
            raise DomainError("mean normalization cancels log|C|; pass None or 0")
        base = 0.0
    else:
        raise DomainError(f"unknown normalization {triple.normalization!r}")
    return base + np.asarray(triple.log_dz) - np.asarray(triple.log_z1) - np.asarray(triple.log_z2)


def crn_noise_plan(scheme: str, m: int) -> list[PlanEntry]:
    """Which of the 2m standardized noise draws feed which term.

    CRN1: draws 0..m-1 feed both single-set sums, draws m..2m-1 the joint sum
    through the single-draw joint risk.  CRN2: each of the 2m draws feeds
    all three sums (one repetition per draw).  CRN3: repetition i uses the
    pair (i, m+i) for Z(xi1), Z(xi2) and the two-set joint sum.
    """
    if scheme == "CRN1":
        return [PlanEntry(i, i, (m + i,)) for i in range(m)]
    if scheme == "CRN2":
        return [PlanEntry(j, j, (j,)) for j in range(2 * m)]
    if scheme == "CRN3":
        return [PlanEntry(i, m + i, (i, m + i)) for i in range(m)]
    raise DomainError(f"unknown CRN scheme {scheme!r}")


def noise_rng(seed: int, j: int):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0, j)))


def sample_rng(seed: int, i: int):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, i)))


def noise_draw(params: ModelParams, seed: int, j: int) -> np.ndarray:
    return draw_noise(params, noise_rng(seed, j))


def noise_bank(params: ModelParams, seed: int, count: int) -> np.ndarray:
    return np.stack([noise_draw(params, seed, j) for j in range(count)])


def _repetition(i, entry, params, betas, spec, cost):
    xi1 = noise_draw(params, spec.master_seed, entry.z1)
    xi2 = xi1 if entry.z2 == entry.z1 else noise_draw(params, spec.master_seed, entry.z2)
    if len(entry.dz) == 1:
        dz_joint = noise_draw(params, spec.master_seed, entry.dz[0])
        if cost in ("sq", "linear", "hits"):
            cost = "linear"
        else:
            raise DomainError(f"{spec.crn} needs an affine risk, not {cost!r}")
    else:
        dz_joint = None
    if spec.method == "exhaustive":
        triple = exhaustive_log_partitions(betas, xi1, xi2, params, cost, dz_joint=dz_joint)
        ic = information_content(triple, params.space.log_cardinality)
        if dz_joint is None:
            bound = params.space.log_cardinality * (1 + _BOUND_RTOL) + _BOUND_RTOL
            if np.any(ic > bound):
                raise ArithmeticError(
                    f"information content {ic.max()} exceeds log|C| = {params.space.log_cardinality}"
                )
        return ic
    rng = sample_rng(spec.master_seed, i)
    if spec.method == "uniform":
        triple = uniform_sample_log_partitions(betas, xi1, xi2, params, spec.r, rng, cost,
                                               dz_joint=dz_joint)
    else:
        triple = importance_sample_log_partitions(betas, xi1, xi2, params, spec.r, rng, cost,
                                                  dz_joint=dz_joint)
    return information_content(triple)


def _run_chunk(args):
    indices, entries, params, betas, spec, cost = args
    return np.stack([_repetition(i, e, params, betas, spec, cost) for i, e in zip(indices, entries)])


def _chunks(n, parts):
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def information_content_repetitions(params: ModelParams, grid: BetaGrid, spec: EstimatorSpec,
                                    cost: str = "sq", workers: int = 1) -> np.ndarray:
    """Per-repetition information content, shape ``(repetitions, len(grid))``."""
    if spec.method == "exhaustive":
        _check_enumerable(params.space)
    if spec.method == "importance" and not isinstance(params.space, SparseSpace):
        raise DomainError("importance sampling needs a sparse hypothesis class")
    plan = crn_noise_plan(spec.crn, spec.m)
    betas = grid.array
    if workers <= 1:
        return _run_chunk((range(len(plan)), plan, params, betas, spec, cost))
    tasks = [(rng_, [plan[i] for i in rng_], params, betas, spec, cost)
             for rng_ in _chunks(len(plan), workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, tasks))
    return np.concatenate(parts, axis=0)


def summarize(betas, reps: np.ndarray) -> GcResult:
    """Mean over repetitions, grid maximization (smallest maximizing beta)."""
    mean = reps.mean(axis=0)
    var = reps.var(axis=0, ddof=1)
    star = int(np.argmax(mean))
    return GcResult(
        betas=np.asarray(betas),
        per_beta_mean=mean,
        per_beta_variance=var,
        beta_star=float(betas[star]),
        gc_estimate=float(mean[star]),
        std_at_beta_star=float(math.sqrt(var[star])),
        per_repetition=reps,
    )


def estimate_gc(params: ModelParams, grid: BetaGrid, spec: EstimatorSpec,
                cost: str = "sq", workers: int = 1) -> GcResult:
    """Monte Carlo estimate of the generalization capacity over a beta grid."""
    reps = information_content_repetitions(params, grid, spec, cost, workers)
    return summarize(grid.array, reps)


def _log_gibbs(beta, xi, params, cost):
    if beta < 0:
        raise DomainError("beta must be non-negative")
    space = params.space
    batch = space.enumerate()
    logw = -beta * batch_costs(cost, batch, xi, params, space)
    return batch, logw - log_sum_exp(logw)


def gibbs_distribution(beta: float, xi, params: ModelParams, cost: str = "sq") -> np.ndarray:
    """Gibbs probabilities of every hypothesis, in enumeration (rank) order."""
    _, logp = _log_gibbs(beta, xi, params, cost)
    return np.exp(logp)


def componentwise_gibbs(beta: float, xi, params: ModelParams, cost: str = "sq") -> np.ndarray:
    """Gibbs probability that each component of the mean equals one."""
    batch, logp = _log_gibbs(beta, xi, params, cost)
    p = np.exp(logp)
    space = params.space
    if isinstance(space, SparseSpace):
        if space.k == 0:
            return np.zeros(space.d)
        return np.bincount(batch.ravel(), weights=np.repeat(p, space.k), minlength=space.d)
    return p @ batch.astype(np.float64)


def truth_gibbs_probability(beta: float, xi, params: ModelParams, cost: str = "sq") -> float:
    """Gibbs probability of the true mean itself."""
    batch, logp = _log_gibbs(beta, xi, params, cost)
    space = params.space
    if isinstance(space, SparseSpace):
        idx = rank_sparse(params.mu0, space) - 1
    else:
        idx = int("".join(map(str, params.mu0.tolist())), 2)
    return float(np.exp(logp[idx]))
