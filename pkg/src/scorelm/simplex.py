"""Probability-simplex numerics.

Normalization maps (softmax and alpha-entmax), Tsallis entropies, and
distribution smoothing.  All functions take and return 1-D float arrays;
probability vectors live on the m-simplex with m >= 2.
"""

import numpy as np

from .errors import InvalidInputError, ParameterDomainError

SUM_TOL = 1e-9
ENTMAX_BISECT_TOL = 1e-10


def check_prob_vector(p, tol: float = SUM_TOL) -> np.ndarray:
    """Validate p as a point on the simplex and return it as a float array."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size < 2:
        raise InvalidInputError(f"probability vector must be 1-D with m >= 2, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise InvalidInputError("probability vector contains non-finite entries")
    if np.any(p < 0):
        raise InvalidInputError(f"probability vector has negative entries: min={p.min()}")
    s = p.sum()
    if abs(s - 1.0) > tol:
        raise InvalidInputError(f"probability vector sums to {s!r}, outside tolerance {tol}")
    return p


def check_logits(z) -> np.ndarray:
    """Validate z as a finite 1-D logit vector."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.size < 1:
        raise InvalidInputError(f"logits must be a 1-D vector, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise InvalidInputError("logits contain non-finite entries")
    return z


def softmax(z) -> np.ndarray:
    """Exponential normalization with max subtraction for stability.

    Invariant under adding a constant to every logit.
    """
    z = check_logits(z)
    e = np.exp(z - z.max())
    return e / e.sum()


def softmax_rows(Z: np.ndarray) -> np.ndarray:
    """Row-wise softmax for a (B, m) logit matrix."""
    e = np.exp(Z - Z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def _sparsemax(z: np.ndarray) -> np.ndarray:
    # Exact sorting-threshold algorithm: Euclidean projection onto the simplex.
    srt = np.sort(z)[::-1]
    csum = np.cumsum(srt) - 1.0
    rho = np.arange(1, z.size + 1)
    support = rho * srt > csum
    k = int(support.sum())
    tau = csum[k - 1] / k
    return np.maximum(z - tau, 0.0)


def entmax(z, alpha: float) -> np.ndarray:
    """argmax over the simplex of p.z + H_alpha(p), the alpha-entmax map.

    alpha = 2 is solved exactly by the sparsemax sorting threshold; other
    alpha > 1 by bisection on the threshold tau in
    p_j = [(alpha-1) z_j - tau]_+^(1/(alpha-1)), over the bracket
    [min((alpha-1) z_j) - 1, max((alpha-1) z_j)].  Output entries may be
    exactly zero.
    """
    z = check_logits(z)
    if alpha <= 1:
        raise ParameterDomainError(f"entmax requires alpha > 1, got {alpha}")
    if alpha == 2:
        return _sparsemax(z)
    zs = (alpha - 1.0) * z
    lo, hi = zs.min() - 1.0, zs.max()
    power = 1.0 / (alpha - 1.0)
    p = None
    for _ in range(200):
        tau = 0.5 * (lo + hi)
        p = np.maximum(zs - tau, 0.0) ** power
        s = p.sum()
        if abs(s - 1.0) <= ENTMAX_BISECT_TOL:
            break
        if s > 1.0:
            lo = tau
        else:
            hi = tau
    return p / p.sum()


def tsallis_entropy(p, alpha: float) -> float:
    """Tsallis alpha-entropy: sum(p - p^alpha) / (alpha (alpha-1)) for
    alpha > 1, Shannon entropy at alpha = 1 (with 0 log 0 := 0)."""
    p = check_prob_vector(p)
    if alpha < 1:
        raise ParameterDomainError(f"tsallis_entropy requires alpha >= 1, got {alpha}")
    if alpha == 1:
        nz = p[p > 0]
        return float(-np.sum(nz * np.log(nz)))
    return float(np.sum(p - p**alpha) / (alpha * (alpha - 1.0)))


def smooth_distribution(q, eps: float) -> np.ndarray:
    """Blend q with the uniform distribution: (1 - eps) q + eps / m."""
    q = check_prob_vector(q)
    if not 0.0 <= eps <= 1.0:
        raise ParameterDomainError(f"smoothing factor must lie in [0, 1], got {eps}")
    return (1.0 - eps) * q + eps / q.size
