"""Log partition functions: exhaustive sums and sampling estimators.

Every routine returns the three quantities needed for the information
content of a pair of data sets: ``log Z(xi1)``, ``log Z(xi2)`` and the log
of the joint sum ``sum_mu w(mu, xi1) w(mu, xi2)``.  ``beta`` may be a scalar
or a 1-D grid; with a grid each field is an array over the grid.

Exhaustive sums are absolute.  Sampling estimators return logs of weighted
sample means ("mean" normalization), which differ from the absolute sums by
``log |C|``; that offset cancels in the information content.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gencap import kernels
from gencap.costs import ModelParams, batch_costs
from gencap.errors import DomainError
from gencap.hypothesis import (
    SparseSpace,
    _check_enumerable,
    _full_block,
    _sparse_supports,
    importance_log_weight,
    sample_stratified,
)

ABSOLUTE = "absolute"
MEAN = "mean"

# hypotheses scored per block in exhaustive sums
_BLOCK = 1 << 18


@dataclass(frozen=True)
class LogPartitionTriple:
    log_z1: np.ndarray | float
    log_z2: np.ndarray | float
    log_dz: np.ndarray | float
    normalization: str = ABSOLUTE


def log_sum_exp(values) -> float:
    """``log(sum(exp(values)))`` without overflow or underflow."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise DomainError("log_sum_exp of an empty sequence")
    return float(kernels.logsumexp_grid(np.ascontiguousarray(-v), np.ones(1))[0])


def _betas(beta):
    b = np.atleast_1d(np.asarray(beta, dtype=np.float64))
    if b.ndim != 1 or np.any(b < 0) or not np.all(np.isfinite(b)):
        raise DomainError("beta must be a finite non-negative scalar or 1-D grid")
    return np.ascontiguousarray(b)


def _pack(beta, z1, z2, dz, normalization):
    if np.ndim(beta) == 0:
        return LogPartitionTriple(float(z1[0]), float(z2[0]), float(dz[0]), normalization)
    return LogPartitionTriple(z1, z2, dz, normalization)


def _term_costs(batch, xi1, xi2, params, space, cost, dz_joint):
    c1 = batch_costs(cost, batch, xi1, params, space)
    c2 = c1 if xi2 is xi1 else batch_costs(cost, batch, xi2, params, space)
    if dz_joint is None:
        cdz = c1 + c2
    else:
        if cost != "linear":
            raise DomainError("the single-draw joint risk pairs only with cost='linear'")
        cdz = batch_costs("joint", batch, dz_joint, params, space)
    return c1, c2, cdz


def _grid_sums(betas, costs, offsets):
    return tuple(
        kernels.logsumexp_grid(np.ascontiguousarray(c), betas, offsets) for c in costs
    )


def _iter_blocks(space):
    n = space.cardinality
    if isinstance(space, SparseSpace):
        supports = _sparse_supports(space.d, space.k)
        for start in range(0, n, _BLOCK):
            yield supports[start:start + _BLOCK]
    else:
        for start in range(0, n, _BLOCK):
            yield _full_block(start, min(n, start + _BLOCK), space.d)


def exhaustive_log_partitions(beta, xi1, xi2, params: ModelParams, cost: str = "sq",
                              *, dz_joint=None, space=None) -> LogPartitionTriple:
    """Exact log partition sums over the whole hypothesis class.

    ``dz_joint``, if given, replaces the two-data-set joint sum by the
    single-draw joint risk evaluated at ``dz_joint`` (needs ``cost="linear"``).
    """
    space = params.space if space is None else space
    _check_enumerable(space)
    betas = _betas(beta)
    acc = None
    for batch in _iter_blocks(space):
        part = _grid_sums(betas, _term_costs(batch, xi1, xi2, params, space, cost, dz_joint), None)
        acc = part if acc is None else tuple(np.logaddexp(a, b) for a, b in zip(acc, part))
    return _pack(beta, *acc, ABSOLUTE)


def weighted_log_partitions(beta, xi1, xi2, params: ModelParams, batch, log_mass,
                            cost: str = "sq", *, dz_joint=None, space=None) -> LogPartitionTriple:
    """``log sum_j exp(log_mass[j] - beta * cost_j)`` for each of the three sums.

    With ``log_mass = -log r`` over r draws this is the log of a sample mean;
    with exact proposal masses over the whole support it is the exact
    expectation the sampling estimators target.
    """
    space = params.space if space is None else space
    betas = _betas(beta)
    log_mass = np.ascontiguousarray(np.broadcast_to(np.asarray(log_mass, np.float64),
                                                    (len(batch),)))
    costs = _term_costs(batch, xi1, xi2, params, space, cost, dz_joint)
    return _pack(beta, *_grid_sums(betas, costs, log_mass), MEAN)


def uniform_sample_log_partitions(beta, xi1, xi2, params: ModelParams, r: int, rng,
                                  cost: str = "sq", *, dz_joint=None) -> LogPartitionTriple:
    """Logs of sample-mean Boltzmann weights over r uniform draws shared by all three sums."""
    if r < 1:
        raise DomainError("sample size r must be at least 1")
    space = params.space
    batch = space.sample_uniform(rng, r)
    return weighted_log_partitions(beta, xi1, xi2, params, batch, -math.log(r), cost,
                                   dz_joint=dz_joint, space=space)


def importance_sample_log_partitions(beta, xi1, xi2, params: ModelParams, r: int, rng,
                                     cost: str = "sq", *, dz_joint=None) -> LogPartitionTriple:
    """Hit-stratified importance sampling of the mean Boltzmann weight.

    Each of the r shared draws carries its weight p/q inside every sum, so
    the linear-domain estimate is unbiased for the uniform mean.
    """
    if r < 1:
        raise DomainError("sample size r must be at least 1")
    space = params.space
    if not isinstance(space, SparseSpace):
        raise DomainError("importance sampling needs a sparse hypothesis class")
    support, h = sample_stratified(space, params.mu0, rng, r)
    log_mass = importance_log_weight(h, space) - math.log(r)
    return weighted_log_partitions(beta, xi1, xi2, params, support, log_mass, cost,
                                   dz_joint=dz_joint, space=space)
