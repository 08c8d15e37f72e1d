"""Strictly proper scoring rules, their smoothed variants, and exact
logit-space gradients.

A rule assigns S(p, i), the utility of predicting distribution p when
outcome i is observed.  Implemented rules:

    logarithmic       log p_i
    brier             2 p_i - sum_j p_j^2
    spherical         p_i / ||p||_2
    alpha_power       alpha p_i^(alpha-1) - (alpha-1) sum_j p_j^alpha
    pseudo_spherical  p_i^(alpha-1) / (sum_j p_j^alpha)^((alpha-1)/alpha)
    linear            p_i   (improper; negative control for propriety scans)

Score evaluation keeps extended-real semantics: -inf is a first-class value
(logarithmic score of a zero-probability outcome), never an exception.  The
training path (token_loss / loss_gradient_logits) instead clamps log
arguments at P_MIN so losses and gradients stay finite.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidInputError, ParameterDomainError
from .simplex import check_logits, check_prob_vector, entmax, softmax_rows, tsallis_entropy

KINDS = ("logarithmic", "brier", "spherical", "alpha_power", "pseudo_spherical", "linear")
_PARAMETRIC = ("alpha_power", "pseudo_spherical")

P_MIN = 1e-12  # log clamp used only in the training path


@dataclass(frozen=True)
class ScoreRule:
    """Rule identity plus the alpha parameter of the two parametric families."""

    kind: str
    alpha: float = 2.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterDomainError(f"unknown scoring rule {self.kind!r}, expected one of {KINDS}")
        if self.kind in _PARAMETRIC and not self.alpha > 1:
            raise ParameterDomainError(f"{self.kind} requires alpha > 1, got {self.alpha}")


@dataclass(frozen=True)
class SmoothingConfig:
    """Smoothing factor eps plus the mask-enhancement flag."""

    eps: float = 0.0
    mask_enhanced: bool = False

    def __post_init__(self):
        if not 0.0 <= self.eps <= 1.0:
            raise ParameterDomainError(f"eps must lie in [0, 1], got {self.eps}")


NO_SMOOTHING = SmoothingConfig()


def _check_index(i: int, m: int) -> int:
    i = int(i)
    if not 0 <= i < m:
        raise InvalidInputError(f"observed index {i} out of range for m={m}")
    return i


def score_matrix(rule: ScoreRule, P: np.ndarray) -> np.ndarray:
    """S(p, j) for every row p of P and every outcome j; shape preserved.

    Rows are assumed to be valid probability vectors (may contain zeros).
    """
    if rule.kind == "logarithmic":
        with np.errstate(divide="ignore"):
            return np.log(P)
    if rule.kind == "brier":
        return 2.0 * P - np.sum(P * P, axis=-1, keepdims=True)
    if rule.kind == "spherical":
        return P / np.sqrt(np.sum(P * P, axis=-1, keepdims=True))
    if rule.kind == "alpha_power":
        a = rule.alpha
        return a * P ** (a - 1.0) - (a - 1.0) * np.sum(P**a, axis=-1, keepdims=True)
    if rule.kind == "pseudo_spherical":
        a = rule.alpha
        qa = np.sum(P**a, axis=-1, keepdims=True)
        return P ** (a - 1.0) / qa ** ((a - 1.0) / a)
    return P.copy()  # linear


def score_vector(rule: ScoreRule, p: np.ndarray) -> np.ndarray:
    """S(p, j) for all j, as a vector."""
    return score_matrix(rule, p[None, :])[0]


def score(rule: ScoreRule, p, i: int) -> float:
    """S(p, i); -inf for the logarithmic score of a zero-probability outcome."""
    p = check_prob_vector(p)
    i = _check_index(i, p.size)
    return float(score_vector(rule, p)[i])


def expected_score(rule: ScoreRule, p, q) -> float:
    """sum_i q_i S(p, i), with q_i * (-inf) read as -inf for q_i > 0 and
    as 0 for q_i = 0."""
    p = check_prob_vector(p)
    q = check_prob_vector(q)
    if p.size != q.size:
        raise InvalidInputError(f"dimension mismatch: p has {p.size} entries, q has {q.size}")
    s = score_vector(rule, p)
    with np.errstate(invalid="ignore"):
        terms = np.where(q > 0, q * s, 0.0)
    return float(terms.sum())


def smoothed_score(rule: ScoreRule, cfg: SmoothingConfig, p, i: int) -> float:
    """(1 - eps) S(p, i) + (eps / m) sum_j S(p, j)."""
    if cfg.mask_enhanced:
        raise ConfigurationError("smoothed_score expects mask_enhanced=False; use masked_log_smoothed_score")
    p = check_prob_vector(p)
    i = _check_index(i, p.size)
    return _smoothed_value(rule, cfg.eps, p, i)


def _smoothed_value(rule: ScoreRule, eps: float, p: np.ndarray, i: int) -> float:
    s = score_vector(rule, p)
    if eps == 0.0:
        return float(s[i])
    tail = (eps / p.size) * float(s.sum())
    if eps == 1.0:
        return tail
    return (1.0 - eps) * float(s[i]) + tail


def masked_log_smoothed_score(rule: ScoreRule, cfg: SmoothingConfig, p, i: int) -> float:
    """Smoothed score plus (eps / m) sum over under-smooth labels
    {j : p_j < eps / m} of log p_j; -inf if any masked entry is zero."""
    if not cfg.mask_enhanced:
        raise ConfigurationError("masked_log_smoothed_score expects mask_enhanced=True")
    if cfg.eps == 0.0:
        raise ConfigurationError("mask enhancement needs eps > 0 (threshold eps/m is degenerate at 0)")
    p = check_prob_vector(p)
    i = _check_index(i, p.size)
    base = _smoothed_value(rule, cfg.eps, p, i)
    masked = p[p < cfg.eps / p.size]
    if masked.size == 0:
        return base
    with np.errstate(divide="ignore"):
        return base + (cfg.eps / p.size) * float(np.sum(np.log(masked)))


# ---------------------------------------------------------------------------
# Training path: losses and exact gradients through softmax, vectorized over
# a batch of logit rows.  Log arguments are clamped at P_MIN; the clamp
# indicator and the under-smooth mask are constants of the forward pass, so
# the analytic gradient is the exact gradient of the implemented loss.
# ---------------------------------------------------------------------------


def _clamped_score_matrix(rule: ScoreRule, P: np.ndarray) -> np.ndarray:
    if rule.kind == "logarithmic":
        return np.log(np.maximum(P, P_MIN))
    return score_matrix(rule, P)


def _score_grad_parts(rule: ScoreRule, P: np.ndarray, idx: np.ndarray):
    """Gradients of the score with respect to p, vectorized over rows.

    Returns (g_obs, T): g_obs[b] = d S(p, idx[b]) / dp and
    T[b] = sum_j d S(p, j) / dp, both evaluated at p = P[b].
    """
    B, m = P.shape
    rows = np.arange(B)
    onehot = np.zeros_like(P)
    onehot[rows, idx] = 1.0
    p_obs = P[rows, idx][:, None]

    if rule.kind == "logarithmic":
        pt = np.maximum(P, P_MIN)
        act = (P >= P_MIN).astype(np.float64)  # clamp is flat below P_MIN
        inv = act / pt
        return onehot * inv, inv
    if rule.kind == "brier":
        return 2.0 * onehot - 2.0 * P, 2.0 - 2.0 * m * P
    if rule.kind == "spherical":
        n2 = np.sqrt(np.sum(P * P, axis=-1, keepdims=True))
        sigma = np.sum(P, axis=-1, keepdims=True)
        g_obs = onehot / n2 - p_obs * P / n2**3
        T = 1.0 / n2 - sigma * P / n2**3
        return g_obs, T
    if rule.kind == "alpha_power":
        a = rule.alpha
        pa1 = P ** (a - 1.0)
        c = a * (a - 1.0)
        g_obs = c * (p_obs ** (a - 2.0) * onehot - pa1)
        T = c * (P ** (a - 2.0) - m * pa1)
        return g_obs, T
    if rule.kind == "pseudo_spherical":
        a = rule.alpha
        pa1 = P ** (a - 1.0)
        qa = np.sum(P**a, axis=-1, keepdims=True)
        denom = qa ** ((a - 1.0) / a)
        g_obs = (a - 1.0) * (p_obs ** (a - 2.0) * onehot - p_obs ** (a - 1.0) * pa1 / qa) / denom
        T = (a - 1.0) * (P ** (a - 2.0) - np.sum(pa1, axis=-1, keepdims=True) * pa1 / qa) / denom
        return g_obs, T
    return onehot, np.ones_like(P)  # linear


def token_losses_and_grads(
    rule: ScoreRule,
    cfg: SmoothingConfig,
    Z: np.ndarray,
    idx: np.ndarray,
    mask_override: np.ndarray | None = None,
):
    """Per-row training losses -S_variant(softmax(z), idx) and their exact
    gradients with respect to the logits.

    Z is (B, m), idx is (B,).  Returns (losses (B,), dZ (B, m)).
    mask_override pins the under-smooth mask (used by finite-difference
    checks, where the mask must not move with the perturbed logits).
    """
    Z = np.asarray(Z, dtype=np.float64)
    idx = np.asarray(idx, dtype=np.int64)
    B, m = Z.shape
    rows = np.arange(B)
    P = softmax_rows(Z)
    eps = cfg.eps

    s = _clamped_score_matrix(rule, P)
    g_obs, T = _score_grad_parts(rule, P, idx)

    values = s[rows, idx]
    grads_p = g_obs
    if eps > 0.0:
        values = (1.0 - eps) * values + (eps / m) * s.sum(axis=1)
        grads_p = (1.0 - eps) * g_obs + (eps / m) * T
    if cfg.mask_enhanced:
        if eps == 0.0:
            raise ConfigurationError("mask enhancement needs eps > 0 (threshold eps/m is degenerate at 0)")
        mask = (P < eps / m) if mask_override is None else mask_override
        pt = np.maximum(P, P_MIN)
        values = values + (eps / m) * np.sum(np.where(mask, np.log(pt), 0.0), axis=1)
        grads_p = grads_p + (eps / m) * mask * (P >= P_MIN) / pt

    # chain through softmax: dL/dz_k = -p_k (v_k - sum_j p_j v_j)
    inner = np.sum(P * grads_p, axis=1, keepdims=True)
    dZ = -P * (grads_p - inner)
    return -values, dZ


def token_loss(rule: ScoreRule, cfg: SmoothingConfig, z, i: int) -> float:
    """Training loss -S_variant(softmax(z), i) with clamped logs."""
    z = check_logits(z)
    i = _check_index(i, z.size)
    losses, _ = token_losses_and_grads(rule, cfg, z[None, :], np.array([i]))
    return float(losses[0])


def loss_gradient_logits(rule: ScoreRule, cfg: SmoothingConfig, z, i: int) -> np.ndarray:
    """Exact gradient of token_loss with respect to the logits.

    For the logarithmic rule with eps = 0 this is softmax(z) - e_i.
    """
    z = check_logits(z)
    i = _check_index(i, z.size)
    _, dZ = token_losses_and_grads(rule, cfg, z[None, :], np.array([i]))
    return dZ[0]


def entmax_power_equivalence_gap(z, x: int, alpha: float):
    """Gap between the entmax loss (p - e_x).z + H_alpha(p) at p = entmax(z)
    and the affine transform (L_power + 1) / (alpha (alpha - 1)) of the
    alpha-power loss, plus whether the gold label kept positive probability.

    The two losses coincide only when p_x > 0; out-of-support gaps are
    returned for inspection but carry no equivalence claim.
    """
    z = check_logits(z)
    x = _check_index(x, z.size)
    if alpha <= 1:
        raise ParameterDomainError(f"alpha must exceed 1, got {alpha}")
    p = entmax(z, alpha)
    e_x = np.zeros_like(p)
    e_x[x] = 1.0
    loss_entmax = float((p - e_x) @ z) + tsallis_entropy(p, alpha)
    loss_power = (alpha - 1.0) * float(np.sum(p**alpha)) - alpha * float(p[x] ** (alpha - 1.0))
    gap = abs(loss_entmax - (loss_power + 1.0) / (alpha * (alpha - 1.0)))
    return gap, bool(p[x] > 0.0)
