"""Pure-numpy fallbacks for the compiled kernels in ``_ckernels.pyx``."""

import numpy as np

# beta rows per block, chosen so a block holds at most ~4M doubles
_BLOCK_ELEMS = 1 << 22


def logsumexp_grid(costs, betas, offsets=None):
    costs = np.ascontiguousarray(costs, dtype=np.float64)
    betas = np.ascontiguousarray(betas, dtype=np.float64)
    if costs.shape[0] == 0:
        raise ValueError("empty input")
    if offsets is not None:
        offsets = np.ascontiguousarray(offsets, dtype=np.float64)
        if offsets.shape[0] != costs.shape[0]:
            raise ValueError("offsets length mismatch")
    out = np.empty(betas.shape[0])
    rows = max(1, _BLOCK_ELEMS // costs.shape[0])
    for start in range(0, betas.shape[0], rows):
        b = betas[start:start + rows]
        a = -b[:, None] * costs[None, :]
        if offsets is not None:
            a += offsets[None, :]
        amax = a.max(axis=1)
        finite = np.isfinite(amax)
        shift = np.where(finite, amax, 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.exp(a - shift[:, None]).sum(axis=1)
            out[start:start + rows] = np.where(finite, shift + np.log(s), amax)
    return out


def support_sums(coef, support):
    coef = np.asarray(coef, dtype=np.float64)
    support = np.asarray(support, dtype=np.int64)
    return coef[support].sum(axis=1)
