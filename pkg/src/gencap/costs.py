"""Data-generating model, noise reparameterization and empirical risks.

A data set of size n drawn from ``X_i = mu0 + eps_i`` enters every risk only
through its mean, written ``xbar = mu0 + (sigma / sqrt(n)) * xi`` with
``xi ~ N(0, Sigma)``.  All risks used here are affine in a 0/1 hypothesis
after expanding the norm, optionally followed by a square (the L1 risk), so
a batch of hypotheses is scored by one dot product against a coefficient
vector; see :func:`cost_coefficients`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from gencap.errors import DomainError
from gencap.hypothesis import FullSpace, SparseSpace

COSTS = ("sq", "linear", "hits", "l1", "l1_unsquared")


@dataclass(frozen=True, eq=False)
class ModelParams:
    """One instance of the sparse mean-localization model.

    Parameters
    ----------
    mu0 : array_like of 0/1
        True mean.
    sigma : float
        Per-coordinate noise standard deviation.
    n : int
        Data set size.
    sparse : bool
        If true the hypothesis class is the k-sparse slice with
        ``k = mu0.sum()``; otherwise the full cube.
    covariance : array_like, optional
        Noise correlation matrix (unit diagonal).  ``None`` means identity.
    """

    mu0: np.ndarray
    sigma: float
    n: int = 100
    sparse: bool = True
    covariance: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        mu0 = np.asarray(self.mu0)
        if mu0.ndim != 1 or mu0.size == 0 or not np.all((mu0 == 0) | (mu0 == 1)):
            raise DomainError("mu0 must be a non-empty 0/1 vector")
        object.__setattr__(self, "mu0", mu0.astype(np.int8))
        self.mu0.setflags(write=False)
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        if self.covariance is not None:
            cov = np.array(self.covariance, dtype=np.float64)
            d = self.d
            if cov.shape != (d, d):
                raise DomainError(f"covariance must be {d}x{d}")
            if not np.allclose(cov, cov.T, atol=1e-12):
                raise DomainError("covariance must be symmetric")
            if not np.allclose(np.diag(cov), 1.0, atol=1e-12):
                raise DomainError("covariance must have unit diagonal")
            cov.setflags(write=False)
            object.__setattr__(self, "covariance", cov)

    @classmethod
    def standard(cls, d: int, k: int | None, sigma: float, n: int = 100, covariance=None):
        """Truth with ones in the first k components (first ceil(d/2) if k is None)."""
        if k is not None and not 0 <= k <= d:
            raise DomainError(f"need 0 <= k <= d, got d={d}, k={k}")
        ones = (d + 1) // 2 if k is None else k
        mu0 = np.zeros(d, dtype=np.int8)
        mu0[:ones] = 1
        return cls(mu0=mu0, sigma=sigma, n=n, sparse=k is not None, covariance=covariance)

    @property
    def d(self) -> int:
        return int(self.mu0.shape[0])

    @property
    def k(self) -> int | None:
        return int(self.mu0.sum()) if self.sparse else None

    @property
    def scale(self) -> float:
        """Standard deviation of each coordinate of the data mean."""
        return self.sigma / math.sqrt(self.n)

    @cached_property
    def space(self):
        return SparseSpace(self.d, self.k) if self.sparse else FullSpace(self.d)

    @cached_property
    def noise_factor(self) -> np.ndarray | None:
        """Lower Cholesky factor of the noise correlation, or None for identity."""
        if self.covariance is None:
            return None
        try:
            return np.linalg.cholesky(self.covariance)
        except np.linalg.LinAlgError as exc:
            raise DomainError("covariance is not positive definite") from exc

    def with_sigma(self, sigma: float) -> "ModelParams":
        return ModelParams(self.mu0, sigma, self.n, self.sparse, self.covariance)


def draw_noise(params: ModelParams, rng) -> np.ndarray:
    """One standardized noise vector ``xi ~ N(0, Sigma)``."""
    z = rng.standard_normal(params.d)
    factor = params.noise_factor
    return z if factor is None else factor @ z


def data_mean(xi, params: ModelParams) -> np.ndarray:
    return params.mu0 + params.scale * np.asarray(xi, dtype=np.float64)


def _check(mu, xi, params):
    mu = np.asarray(mu, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    if mu.shape != (params.d,) or xi.shape != (params.d,):
        raise DomainError("hypothesis, noise and mu0 must share one dimension")
    return mu, xi


def risk_sq(mu, xi, params: ModelParams) -> float:
    """Squared-loss risk ``||mu - xbar||_2^2``."""
    mu, xi = _check(mu, xi, params)
    r = mu - data_mean(xi, params)
    return float(r @ r)


def risk_linear(mu, xi, params: ModelParams) -> float:
    """``mu . (1 - 2 xbar)``; equals :func:`risk_sq` minus ``||xbar||^2``."""
    mu, xi = _check(mu, xi, params)
    return float(mu @ (1.0 - 2.0 * data_mean(xi, params)))


def risk_hits(h: int, dot: float, params: ModelParams) -> float:
    """Linear risk on the sparse class written through the hit count.

    ``h`` is the overlap with the truth and ``dot`` is ``mu . xi``.  Equals
    ``risk_linear - k``.
    """
    return -2.0 * (h + params.scale * dot)


def joint_risk_crn(mu, xi, params: ModelParams) -> float:
    """Sum of the linear risks on two data sets driven by one standard draw.

    With ``xi = (xi1 + xi2) / sqrt(2)`` this equals
    ``risk_linear(mu, xi1) + risk_linear(mu, xi2)`` exactly.
    """
    mu, xi = _check(mu, xi, params)
    return float(2.0 * mu @ (1.0 - math.sqrt(2.0) * params.scale * xi - 2.0 * params.mu0))


def risk_l1(mu, xi, params: ModelParams, squared: bool = True) -> float:
    """Absolute-loss risk ``||mu - xbar||_1``, squared by default."""
    mu, xi = _check(mu, xi, params)
    s = float(np.abs(mu - data_mean(xi, params)).sum())
    return s * s if squared else s


def boltzmann_logweight(beta, cost):
    """Log Boltzmann weight ``-beta * cost``."""
    if np.any(np.asarray(beta) < 0):
        raise DomainError("beta must be non-negative")
    return -np.multiply(beta, cost)


def cost_coefficients(cost: str, xi, params: ModelParams):
    """Reduce a risk to ``g(mu . coef + const)``.

    Returns ``(coef, const, squared)`` where ``g`` squares its argument when
    ``squared`` is true and is the identity otherwise.  ``cost="joint"``
    gives the coefficients of :func:`joint_risk_crn`.
    """
    xi = np.asarray(xi, dtype=np.float64)
    if cost == "joint":
        coef = 2.0 * (1.0 - math.sqrt(2.0) * params.scale * xi - 2.0 * params.mu0)
        return coef, 0.0, False
    xbar = data_mean(xi, params)
    if cost == "sq":
        return 1.0 - 2.0 * xbar, float(xbar @ xbar), False
    if cost == "linear":
        return 1.0 - 2.0 * xbar, 0.0, False
    if cost == "hits":
        return -2.0 * xbar, 0.0, False
    if cost in ("l1", "l1_unsquared"):
        # |mu_j - x_j| = mu_j |1 - x_j| + (1 - mu_j) |x_j| for mu_j in {0, 1}
        ax = np.abs(xbar)
        return np.abs(1.0 - xbar) - ax, float(ax.sum()), cost == "l1"
    raise DomainError(f"unknown cost {cost!r}; expected one of {COSTS + ('joint',)}")


def batch_costs(cost: str, batch, xi, params: ModelParams, space=None) -> np.ndarray:
    """Risk of every hypothesis in a batch (support rows or bit rows)."""
    space = params.space if space is None else space
    coef, const, squared = cost_coefficients(cost, xi, params)
    out = space.dot(batch, coef) + const
    return out * out if squared else out
