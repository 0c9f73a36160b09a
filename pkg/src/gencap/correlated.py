"""Stratified estimation of E[log Z] for correlated features.

Grouping the sparse class by hit count h and factoring out the truth's own
weight gives, for every noise draw xi,

    log Z(xi) = -beta k + log C(d, k) + log E_H[ exp(2 beta H) Y_H(xi) / |C_H| ]

where H is hypergeometric (population d, k successes, k draws), ``|C_H|``
the stratum size and ``Y_h(xi) = sum over the stratum of exp(beta eta(mu))``
with ``eta(mu) = 2 (sigma/sqrt n) mu . xi``.  The risk is the linear form,
so the left side is the exhaustive sum with ``cost="linear"``.  The
estimator averages over m noise draws and replaces the inner expectation by
p hypergeometric draws.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from gencap.costs import ModelParams
from gencap.errors import CapacityError, DomainError
from gencap.gc import noise_draw, sample_rng
from gencap.hypothesis import ENUMERATION_LIMIT, log_comb, log_stratum_size, stratum_size
from gencap.partition import log_sum_exp


@dataclass(frozen=True)
class HypergeometricLaw:
    """Hits of a uniform k-subset of d items against a fixed k-subset."""

    d: int
    k: int

    def __post_init__(self):
        if not 0 <= self.k <= self.d:
            raise DomainError(f"need 0 <= k <= d, got d={self.d}, k={self.k}")

    @property
    def support(self) -> range:
        return range(max(0, 2 * self.k - self.d), self.k + 1)

    def pmf_exact(self, h: int) -> Fraction:
        return Fraction(stratum_size(self.d, self.k, h), math.comb(self.d, self.k))

    def log_pmf(self, h) -> np.ndarray | float:
        return log_stratum_size(self.d, self.k, h) - log_comb(self.d, self.k)

    @property
    def mean(self) -> float:
        return self.k * self.k / self.d


def hypergeometric_sample(law: HypergeometricLaw, rng, size: int | None = None):
    return rng.hypergeometric(law.k, law.d - law.k, law.k, size=size)


def _stratum_supports(params: ModelParams, h: int) -> np.ndarray:
    d, k = params.d, params.k
    size = stratum_size(d, k, h)
    if size > ENUMERATION_LIMIT:
        raise CapacityError(
            f"stratum h={h} of (d={d}, k={k}) has {size} members, above {ENUMERATION_LIMIT}"
        )
    ones = np.flatnonzero(params.mu0)
    zeros = np.flatnonzero(params.mu0 == 0)
    rows = [a + b for a in itertools.combinations(ones.tolist(), h)
            for b in itertools.combinations(zeros.tolist(), k - h)]
    return np.array(rows, dtype=np.int64).reshape(size, k)


def eta(support, xi, params: ModelParams) -> np.ndarray:
    """``2 (sigma/sqrt n) mu . xi`` for support rows (or a single support)."""
    support = np.asarray(support, dtype=np.int64)
    return 2.0 * params.scale * np.asarray(xi)[support].sum(axis=-1)


def y_h_exact(beta: float, h: int, xi, params: ModelParams) -> float:
    """log Y_h by enumerating the stratum."""
    support = _stratum_supports(params, h)
    if support.shape[0] == 0:
        return -math.inf
    return log_sum_exp(beta * eta(support, xi, params))


def y_h_eta_approx(beta: float, h: int, eta_h: float, d: int, k: int) -> float:
    """log Y_h if every stratum member had ``eta = eta_h``."""
    return math.log(stratum_size(d, k, h)) + beta * eta_h


def _random_member_eta(h, xi, params, rng):
    ones = np.flatnonzero(params.mu0)
    zeros = np.flatnonzero(params.mu0 == 0)
    support = np.concatenate([rng.choice(ones, h, replace=False),
                              rng.choice(zeros, params.k - h, replace=False)])
    return float(eta(support, xi, params))


@dataclass(frozen=True)
class YhApproximator:
    """How log Y_h is obtained.

    ``"exact"`` enumerates the stratum.  ``"eta_h"`` collapses eta over the
    stratum to one value; ``eta_fn(h, xi, params, rng)`` supplies it, by
    default eta of one uniformly drawn stratum member.  ``"custom"`` calls
    ``log_y_fn(beta, h, xi, params, rng)`` directly.
    """

    strategy: str = "exact"
    eta_fn: Callable | None = None
    log_y_fn: Callable | None = None

    def __post_init__(self):
        if self.strategy not in ("exact", "eta_h", "custom"):
            raise DomainError(f"unknown Y_h strategy {self.strategy!r}")
        if self.strategy == "custom" and self.log_y_fn is None:
            raise DomainError("custom strategy needs log_y_fn")

    def log_y(self, beta, h, xi, params, rng) -> float:
        if self.strategy == "exact":
            return y_h_exact(beta, h, xi, params)
        if self.strategy == "eta_h":
            fn = self.eta_fn or _random_member_eta
            return y_h_eta_approx(beta, h, fn(h, xi, params, rng), params.d, params.k)
        return float(self.log_y_fn(beta, h, xi, params, rng))


def _log_a(beta, h, log_y, params):
    return 2.0 * beta * h - log_stratum_size(params.d, params.k, h) + log_y


def log_abar(beta: float, xi, params: ModelParams, p: int, approx: YhApproximator, rng,
             enumerate_h: bool = False) -> float:
    """log of the inner average over hit counts for one noise draw.

    With ``enumerate_h`` the average is the exact expectation over the
    hypergeometric law instead of a p-draw sample mean.
    """
    law = HypergeometricLaw(params.d, params.k)
    cache = {}

    def log_y(h):
        if h not in cache:
            cache[h] = approx.log_y(beta, h, xi, params, rng)
        return cache[h]

    if enumerate_h:
        terms = [law.log_pmf(h) + _log_a(beta, h, log_y(h), params) for h in law.support]
        return log_sum_exp(terms)
    hs = hypergeometric_sample(law, rng, size=p)
    terms = [_log_a(beta, int(h), log_y(int(h)), params) for h in hs]
    return log_sum_exp(terms) - math.log(p)


@dataclass(frozen=True)
class ElogzEstimate:
    value: float
    stderr: float
    log_abar: np.ndarray

    def __float__(self):
        return self.value


def estimate_elogz_correlated(params: ModelParams, beta: float, m: int, p: int,
                              approx: YhApproximator | None = None, seed: int = 0,
                              enumerate_h: bool = False) -> ElogzEstimate:
    """Estimate E_xi[log Z_beta(xi)] under (possibly correlated) Gaussian noise.

    Noise draw i is ``gc.noise_draw(params, seed, i)``, so exhaustive oracles
    can be evaluated on the very same draws.
    """
    if not params.sparse:
        raise DomainError("the stratified estimator needs a sparse hypothesis class")
    if m < 1 or p < 1:
        raise DomainError("need m >= 1 and p >= 1")
    if beta < 0:
        raise DomainError("beta must be non-negative")
    approx = approx or YhApproximator()
    k, d = params.k, params.d
    logs = np.array([
        log_abar(beta, noise_draw(params, seed, i), params, p, approx, sample_rng(seed, i),
                 enumerate_h)
        for i in range(m)
    ])
    offset = -beta * k + log_comb(d, k)
    stderr = float(logs.std(ddof=1) / math.sqrt(m)) if m > 1 else math.nan
    return ElogzEstimate(offset + float(logs.mean()), stderr, logs)
