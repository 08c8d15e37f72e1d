"""Compact fixed-context feedforward next-token model.

The architecture is deliberately small: embed the last K tokens, concatenate,
one tanh hidden layer, linear output, softmax.  The point of the package is
the loss function, not the architecture, so forward and backward are exact
hand-derived numpy with no framework dependency.

Reserved token ids: PAD = 0 (left padding of short histories) and EOS = 1
(sequence separator / end of generation).  Real symbols start at 2.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import InvalidInputError
from .scores import ScoreRule, SmoothingConfig, token_losses_and_grads
from .simplex import softmax_rows

PAD_ID = 0
EOS_ID = 1
N_RESERVED = 2


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    context: int
    embed_dim: int
    hidden_dim: int
    seed: int = 0

    def __post_init__(self):
        if self.vocab_size < 2:
            raise InvalidInputError(f"vocab_size must be >= 2, got {self.vocab_size}")
        for name in ("context", "embed_dim", "hidden_dim"):
            if getattr(self, name) < 1:
                raise InvalidInputError(f"{name} must be >= 1, got {getattr(self, name)}")


@dataclass
class Parameters:
    """Named weight tensors; shapes fixed by ModelConfig."""

    embed: np.ndarray     # (V, d)
    w_hidden: np.ndarray  # (K*d, h)
    b_hidden: np.ndarray  # (h,)
    w_out: np.ndarray     # (h, V)
    b_out: np.ndarray     # (V,)

    def named(self):
        return list(vars(self).items())

    def copy(self) -> "Parameters":
        return Parameters(**{k: v.copy() for k, v in self.named()})

    def check_finite(self):
        for name, t in self.named():
            if not np.all(np.isfinite(t)):
                raise InvalidInputError(f"parameter tensor {name} contains non-finite values")


@dataclass
class TokenSeq:
    """Token ids plus a per-position loss mask (False = prompt, no loss)."""

    tokens: np.ndarray
    loss_mask: np.ndarray = field(default=None)

    def __post_init__(self):
        self.tokens = np.asarray(self.tokens, dtype=np.int64)
        if self.loss_mask is None:
            self.loss_mask = np.ones(self.tokens.size, dtype=bool)
        else:
            self.loss_mask = np.asarray(self.loss_mask, dtype=bool)
        if self.loss_mask.size != self.tokens.size:
            raise InvalidInputError(
                f"loss_mask length {self.loss_mask.size} != tokens length {self.tokens.size}"
            )

    def __len__(self):
        return int(self.tokens.size)


def init_params(cfg: ModelConfig) -> Parameters:
    """Deterministic initialization from cfg.seed via splitmix64.

    Weights are uniform in [-s, s] with s = 1/sqrt(fan_in); the embedding
    table uses fan_in = embed_dim.  Biases start at zero.  Identical seeds
    give bitwise-identical tensors on any platform.
    """
    V, K, d, h = cfg.vocab_size, cfg.context, cfg.embed_dim, cfg.hidden_dim
    shapes = [("embed", (V, d), d), ("w_hidden", (K * d, h), K * d), ("w_out", (h, V), h)]
    tensors = {}
    offset = 0
    total = sum(int(np.prod(s)) for _, s, _ in shapes)
    flat = rng.uniform(cfg.seed, total, -1.0, 1.0)
    for name, shape, fan_in in shapes:
        n = int(np.prod(shape))
        scale = 1.0 / np.sqrt(fan_in)
        tensors[name] = (flat[offset : offset + n] * scale).reshape(shape)
        offset += n
    return Parameters(
        embed=tensors["embed"],
        w_hidden=tensors["w_hidden"],
        b_hidden=np.zeros(h),
        w_out=tensors["w_out"],
        b_out=np.zeros(V),
    )


def zero_grads(params: Parameters) -> Parameters:
    return Parameters(**{k: np.zeros_like(v) for k, v in params.named()})


def _check_ids(ids: np.ndarray, V: int):
    if ids.size and (ids.min() < 0 or ids.max() >= V):
        bad = ids[(ids < 0) | (ids >= V)][0]
        raise InvalidInputError(f"token id {bad} out of range for vocab size {V}")


def _forward_batch(params: Parameters, contexts: np.ndarray):
    """contexts (N, K) -> (X, H, Z): concatenated inputs, hidden, logits."""
    N, K = contexts.shape
    X = params.embed[contexts].reshape(N, K * params.embed.shape[1])
    H = np.tanh(X @ params.w_hidden + params.b_hidden)
    Z = H @ params.w_out + params.b_out
    return X, H, Z


def forward(params: Parameters, context) -> np.ndarray:
    """Next-token distribution p(. | context) for exactly K token ids."""
    context = np.asarray(context, dtype=np.int64)
    K = params.w_hidden.shape[0] // params.embed.shape[1]
    if context.ndim != 1 or context.size != K:
        raise InvalidInputError(f"context must have exactly {K} token ids, got shape {context.shape}")
    _check_ids(context, params.embed.shape[0])
    _, _, Z = _forward_batch(params, context[None, :])
    return softmax_rows(Z)[0]


def context_window(tokens: np.ndarray, t: int, K: int) -> np.ndarray:
    """The K tokens preceding position t, left-padded with PAD_ID."""
    lo = max(0, t - K)
    window = tokens[lo:t]
    if window.size < K:
        window = np.concatenate([np.full(K - window.size, PAD_ID, dtype=np.int64), window])
    return window


def _gather_positions(seqs, K: int):
    """Stack every unmasked position of every sequence into (contexts, targets)."""
    ctx_rows, targets = [], []
    for seq in seqs:
        for t in np.flatnonzero(seq.loss_mask):
            ctx_rows.append(context_window(seq.tokens, int(t), K))
            targets.append(seq.tokens[t])
    if not ctx_rows:
        return np.zeros((0, K), dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.stack(ctx_rows), np.asarray(targets, dtype=np.int64)


def sequence_loss(params: Parameters, seq: TokenSeq, rule: ScoreRule, cfg: SmoothingConfig) -> float:
    """Negative sum of per-position scores over unmasked positions."""
    if len(seq) == 0:
        raise InvalidInputError("sequence is empty")
    V = params.embed.shape[0]
    _check_ids(seq.tokens, V)
    if not seq.loss_mask.any():
        warnings.warn("sequence_loss over an all-masked sequence is 0", stacklevel=2)
        return 0.0
    K = params.w_hidden.shape[0] // params.embed.shape[1]
    contexts, targets = _gather_positions([seq], K)
    _, _, Z = _forward_batch(params, contexts)
    losses, _ = token_losses_and_grads(rule, cfg, Z, targets)
    return float(losses.sum())


def backward(params: Parameters, batch, rule: ScoreRule, cfg: SmoothingConfig):
    """Batch loss (per-token mean over all unmasked positions) and its exact
    analytic gradient.

    Positions are reduced in batch order, so results are bitwise reproducible.
    Returns (loss, grads) with grads shaped like params.
    """
    if not batch:
        raise InvalidInputError("batch is empty")
    V, d = params.embed.shape
    K = params.w_hidden.shape[0] // d
    for seq in batch:
        _check_ids(seq.tokens, V)
    contexts, targets = _gather_positions(batch, K)
    N = targets.size
    if N == 0:
        warnings.warn("backward over an all-masked batch is 0", stacklevel=2)
        return 0.0, zero_grads(params)

    X, H, Z = _forward_batch(params, contexts)
    losses, dZ = token_losses_and_grads(rule, cfg, Z, targets)
    loss = float(losses.sum()) / N
    dZ = dZ / N

    grads = zero_grads(params)
    grads.w_out[:] = H.T @ dZ
    grads.b_out[:] = dZ.sum(axis=0)
    dH = dZ @ params.w_out.T
    dA = dH * (1.0 - H * H)
    grads.w_hidden[:] = X.T @ dA
    grads.b_hidden[:] = dA.sum(axis=0)
    dX = (dA @ params.w_hidden.T).reshape(N, K, d)
    np.add.at(grads.embed, contexts, dX)
    return loss, grads
