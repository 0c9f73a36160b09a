"""Binary hypothesis classes: the full cube {0,1}^d and the k-sparse slice.

Hypotheses are numpy ``int8`` vectors of 0/1.  Internally, batches of
k-sparse hypotheses are carried as ``(N, k)`` int64 arrays of support
indices (sorted ascending per row) so that cost evaluation is O(k); batches
from the full cube are ``(N, d)`` 0/1 matrices.

The canonical order on the sparse class is ascending lexicographic order of
the bit string read from component 1 to d, with 1-based ranks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from gencap.errors import CapacityError, DomainError

# largest class the exhaustive routines will enumerate
ENUMERATION_LIMIT = 1 << 24
# enumerations at or below this size are cached between calls
_CACHE_LIMIT = 1 << 20


def log_comb(n: int, k: int) -> float:
    """Natural log of C(n, k), exact up to the final rounding."""
    if k < 0 or k > n:
        return -math.inf
    return math.log(math.comb(n, k))


def to_bits(support, d: int) -> np.ndarray:
    """Expand support indices (1-D or a batch) to 0/1 ``int8`` vectors."""
    support = np.asarray(support, dtype=np.int64)
    if support.ndim == 1:
        bits = np.zeros(d, dtype=np.int8)
        bits[support] = 1
        return bits
    bits = np.zeros((support.shape[0], d), dtype=np.int8)
    np.put_along_axis(bits, support, 1, axis=1)
    return bits


def to_support(bits) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.ndim == 1:
        return np.flatnonzero(bits).astype(np.int64)
    k = int(bits[0].sum()) if bits.shape[0] else 0
    rows, cols = np.nonzero(bits)
    return cols.astype(np.int64).reshape(bits.shape[0], k)


def _as_bits(mu, d: int | None = None) -> np.ndarray:
    mu = np.asarray(mu)
    if mu.ndim != 1:
        raise DomainError("a hypothesis is a 1-D 0/1 vector")
    if d is not None and mu.shape[0] != d:
        raise DomainError(f"hypothesis has length {mu.shape[0]}, expected {d}")
    if not np.all((mu == 0) | (mu == 1)):
        raise DomainError("hypothesis entries must be 0 or 1")
    return mu.astype(np.int8)


@dataclass(frozen=True)
class FullSpace:
    """The unconstrained class {0,1}^d."""

    d: int

    def __post_init__(self):
        if self.d < 1:
            raise DomainError("d must be positive")

    k = None
    sparse = False

    @property
    def cardinality(self) -> int:
        return 1 << self.d

    @property
    def log_cardinality(self) -> float:
        return self.d * math.log(2.0)

    def enumerate(self) -> np.ndarray:
        """All 2^d hypotheses as an ``(2^d, d)`` matrix, row i = unrank_full(i)."""
        _check_enumerable(self)
        return _full_matrix(self.d)

    def sample_uniform(self, rng, size: int) -> np.ndarray:
        return rng.integers(0, 2, size=(size, self.d), dtype=np.int8)

    def dot(self, batch, coef) -> np.ndarray:
        return np.asarray(batch, dtype=np.float64) @ np.asarray(coef, dtype=np.float64)

    def bits(self, batch) -> np.ndarray:
        return np.asarray(batch, dtype=np.int8)


@dataclass(frozen=True)
class SparseSpace:
    """The class of d-bit vectors with exactly k ones."""

    d: int
    k: int

    sparse = True

    def __post_init__(self):
        if self.d < 1:
            raise DomainError("d must be positive")
        if not 0 <= self.k <= self.d:
            raise DomainError(f"need 0 <= k <= d, got d={self.d}, k={self.k}")

    @cached_property
    def cardinality(self) -> int:
        return math.comb(self.d, self.k)

    @cached_property
    def log_cardinality(self) -> float:
        return log_comb(self.d, self.k)

    @property
    def min_hits(self) -> int:
        return max(0, 2 * self.k - self.d)

    @property
    def hit_range(self) -> range:
        return range(self.min_hits, self.k + 1)

    @property
    def n_strata(self) -> int:
        return self.k - self.min_hits + 1

    def enumerate(self) -> np.ndarray:
        """Support indices of every hypothesis, in canonical rank order."""
        _check_enumerable(self)
        return _sparse_supports(self.d, self.k)

    def sample_uniform(self, rng, size: int) -> np.ndarray:
        return sample_uniform(self, rng, size)

    def dot(self, batch, coef) -> np.ndarray:
        from gencap.kernels import support_sums

        batch = np.ascontiguousarray(batch, dtype=np.int64)
        if batch.shape[1] == 0:
            return np.zeros(batch.shape[0])
        return support_sums(np.ascontiguousarray(coef, dtype=np.float64), batch)

    def bits(self, batch) -> np.ndarray:
        return to_bits(batch, self.d)


def _check_enumerable(space) -> None:
    if space.cardinality > ENUMERATION_LIMIT:
        k = "" if space.k is None else f", k={space.k}"
        raise CapacityError(
            f"hypothesis class for (d={space.d}{k}) has {space.cardinality} members, "
            f"above the enumeration limit {ENUMERATION_LIMIT}; use a sampling estimator"
        )


def _full_matrix(d: int) -> np.ndarray:
    if (1 << d) <= _CACHE_LIMIT:
        return _full_matrix_cached(d)
    return _full_block(0, 1 << d, d)


@lru_cache(maxsize=8)
def _full_matrix_cached(d: int) -> np.ndarray:
    out = _full_block(0, 1 << d, d)
    out.setflags(write=False)
    return out


def _full_block(start: int, stop: int, d: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(d - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.int8)


def _sparse_supports(d: int, k: int) -> np.ndarray:
    if math.comb(d, k) <= _CACHE_LIMIT:
        return _sparse_supports_cached(d, k)
    return _sparse_supports_raw(d, k)


@lru_cache(maxsize=16)
def _sparse_supports_cached(d: int, k: int) -> np.ndarray:
    out = _sparse_supports_raw(d, k)
    out.setflags(write=False)
    return out


def _sparse_supports_raw(d: int, k: int) -> np.ndarray:
    n = math.comb(d, k)
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(d), k)),
        dtype=np.int64,
        count=n * k,
    )
    # itertools emits descending bit-string order; reverse to canonical
    return np.ascontiguousarray(flat.reshape(n, k)[::-1])


def unrank_full(i: int, d: int) -> np.ndarray:
    """The d-bit binary representation of ``i``, most significant bit first."""
    if d < 1:
        raise DomainError("d must be positive")
    if not 0 <= i < (1 << d):
        raise DomainError(f"index {i} outside [0, 2^{d})")
    return np.array([(i >> (d - 1 - j)) & 1 for j in range(d)], dtype=np.int8)


def unrank_sparse(i: int, space: SparseSpace) -> np.ndarray:
    """The i-th (1-based) member of the sparse class in canonical order.

    Walks the positions left to right.  With ``t`` ones still to place in the
    ``rem`` remaining positions, exactly C(rem - 1, t) completions put a 0
    here, and those all sort before the ones that put a 1 here.
    """
    d, k = space.d, space.k
    if not 1 <= i <= space.cardinality:
        raise DomainError(f"rank {i} outside [1, C({d},{k})]")
    r = i - 1
    bits = np.zeros(d, dtype=np.int8)
    t = k
    for j in range(d):
        if t == 0:
            break
        zeros_first = math.comb(d - j - 1, t)
        if r >= zeros_first:
            r -= zeros_first
            bits[j] = 1
            t -= 1
    return bits


def rank_sparse(mu, space: SparseSpace) -> int:
    """Inverse of :func:`unrank_sparse`."""
    mu = _as_bits(mu, space.d)
    if int(mu.sum()) != space.k:
        raise DomainError(f"hypothesis has {int(mu.sum())} ones, expected {space.k}")
    d = space.d
    r = 0
    t = space.k
    for j in range(d):
        if mu[j]:
            r += math.comb(d - j - 1, t)
            t -= 1
    return r + 1


def stratum_size(d: int, k: int, h: int) -> int:
    """Number of k-sparse hypotheses sharing exactly h ones with a fixed k-sparse truth."""
    if not 0 <= k <= d:
        raise DomainError(f"need 0 <= k <= d, got d={d}, k={k}")
    if not max(0, 2 * k - d) <= h <= k:
        raise DomainError(f"hit count {h} outside [{max(0, 2 * k - d)}, {k}]")
    return math.comb(k, h) * math.comb(d - k, k - h)


def log_stratum_size(d: int, k: int, h) -> np.ndarray | float:
    """Vectorized log of :func:`stratum_size` (no range checks)."""
    if np.ndim(h) == 0:
        return log_comb(k, int(h)) + log_comb(d - k, k - int(h))
    table = np.array([log_comb(k, j) + log_comb(d - k, k - j) for j in range(k + 1)])
    return table[np.asarray(h, dtype=np.int64)]


def hit_count(mu, mu0) -> int:
    mu = np.asarray(mu)
    mu0 = np.asarray(mu0)
    if mu.shape != mu0.shape:
        raise DomainError(f"dimension mismatch: {mu.shape} vs {mu0.shape}")
    return int(np.count_nonzero((mu != 0) & (mu0 != 0)))


def _floyd(rng, n: int, counts: np.ndarray) -> np.ndarray:
    """Row-wise uniform subsets of ``range(n)`` by Floyd's algorithm.

    Row i receives ``counts[i]`` distinct indices; unused slots hold -1.
    Cost is O(rows * max(counts)^2), independent of n.
    """
    counts = np.asarray(counts, dtype=np.int64)
    rows = counts.shape[0]
    width = int(counts.max()) if rows else 0
    out = np.full((rows, width), -1, dtype=np.int64)
    # row i runs Floyd's loop for j = n - counts[i], ..., n - 1
    for step in range(width):
        active = step >= width - counts
        j = n - width + step
        t = rng.integers(0, j + 1, size=rows)
        dup = (out == t[:, None]).any(axis=1)
        pick = np.where(dup, j, t)
        out[active, step] = pick[active]
    return out


def sample_uniform(space: SparseSpace, rng, size: int | None = None) -> np.ndarray:
    """Uniform draws from the sparse class, as sorted support-index rows.

    With ``size=None`` returns a single 0/1 hypothesis vector instead.
    """
    n = 1 if size is None else size
    if space.k == 0:
        support = np.zeros((n, 0), dtype=np.int64)
    else:
        support = np.sort(_floyd(rng, space.d, np.full(n, space.k)), axis=1)
    if size is None:
        return to_bits(support[0], space.d)
    return support


def sample_stratified(space: SparseSpace, mu0, rng, size: int | None = None):
    """Draws from the hit-stratified proposal.

    The hit count is uniform over its admissible range; given the hit count,
    the hypothesis is uniform over its stratum (swap ``k - h`` ones of the
    truth for ``k - h`` zeros).  Returns ``(support, h)``; with ``size=None``
    a single ``(bits, h)`` pair.
    """
    mu0 = _as_bits(mu0, space.d)
    if int(mu0.sum()) != space.k:
        raise DomainError("truth must lie in the sparse class")
    n = 1 if size is None else size
    ones = np.flatnonzero(mu0)
    zeros = np.flatnonzero(mu0 == 0)
    k = space.k
    h = rng.integers(space.min_hits, k + 1, size=n)
    misses = k - h
    support = np.tile(ones, (n, 1))
    # swap `misses` ones of the truth for `misses` of its zeros, column by column
    drop = _floyd(rng, k, misses)
    add = _floyd(rng, zeros.shape[0], misses)
    for c in range(drop.shape[1]):
        rows = np.flatnonzero(drop[:, c] >= 0)
        support[rows, drop[rows, c]] = zeros[add[rows, c]]
    support.sort(axis=1)
    if size is None:
        return to_bits(support[0], space.d), int(h[0])
    return support, h


def proposal_log_prob(h, space: SparseSpace):
    """log q(mu) for a hypothesis with h hits under the stratified proposal."""
    return -math.log(space.n_strata) - log_stratum_size(space.d, space.k, h)


def importance_log_weight(h, space: SparseSpace):
    """log of p(mu)/q(mu), uniform target over stratified proposal."""
    return math.log(space.n_strata) + log_stratum_size(space.d, space.k, h) - space.log_cardinality


def importance_weight(mu, mu0, space: SparseSpace) -> float:
    """p(mu)/q(mu) for a single hypothesis."""
    mu = _as_bits(mu, space.d)
    mu0 = _as_bits(mu0, space.d)
    if int(mu.sum()) != space.k or int(mu0.sum()) != space.k:
        raise DomainError("both hypotheses must lie in the sparse class")
    h = hit_count(mu, mu0)
    return space.n_strata * stratum_size(space.d, space.k, h) / space.cardinality
