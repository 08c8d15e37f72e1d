"""Greedy, beam, and exhaustive decoding under scoring-rule objectives.

Per-step objectives are sign-normalized to be non-positive (Brier and
spherical scores have 1 subtracted; the logarithmic score is already <= 0),
so the length penalty divides a negative cumulative score exactly as in
log-probability beam search.

Conventions shared by all three decoders: PAD is never generated; EOS may
not be the first generated token (minimum generation length 1); a hypothesis
finishes on EOS (which is kept in its tokens and counted by the length
penalty) or on reaching max_len.
"""

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidInputError, ParameterDomainError
from .model import EOS_ID, N_RESERVED, Parameters, context_window, forward
from .scores import ScoreRule

EXHAUSTIVE_LIMIT = 10**6

_OBJECTIVES = ("logarithmic", "brier", "spherical")


@dataclass(frozen=True)
class BeamConfig:
    beam_size: int = 5
    max_len: int = 32
    length_penalty: float = 0.0
    objective: ScoreRule = ScoreRule("logarithmic")

    def __post_init__(self):
        if self.beam_size < 1 or self.max_len < 1:
            raise ConfigurationError("beam_size and max_len must be >= 1")
        if self.length_penalty < 0:
            raise ConfigurationError(f"length_penalty must be >= 0, got {self.length_penalty}")
        if self.objective.kind not in _OBJECTIVES:
            raise ConfigurationError(
                f"decoding objective must be one of {_OBJECTIVES}, got {self.objective.kind!r}"
            )


@dataclass
class Hypothesis:
    tokens: tuple          # generated ids, EOS included when finished by EOS
    raw_score: float       # sum of per-step normalized objectives, <= 0
    finished: bool

    def normalized_score(self, length_penalty: float) -> float:
        return self.raw_score / len(self.tokens) ** length_penalty


def normalized_objective_vector(rule: ScoreRule, p: np.ndarray) -> np.ndarray:
    """Sign-normalized per-token objective for every candidate token."""
    if rule.kind == "logarithmic":
        with np.errstate(divide="ignore"):
            return np.log(p)
    if rule.kind == "brier":
        return 2.0 * p - np.sum(p * p) - 1.0
    if rule.kind == "spherical":
        return p / np.sqrt(np.sum(p * p)) - 1.0
    raise ConfigurationError(f"decoding objective must be one of {_OBJECTIVES}, got {rule.kind!r}")


def normalized_objective(rule: ScoreRule, p, i: int) -> float:
    p = np.asarray(p, dtype=np.float64)
    if not 0 <= int(i) < p.size:
        raise InvalidInputError(f"token index {i} out of range for m={p.size}")
    return float(normalized_objective_vector(rule, p)[int(i)])


def _candidate_ids(V: int) -> np.ndarray:
    ids = np.arange(N_RESERVED, V)
    if ids.size == 0:
        raise InvalidInputError("vocabulary has no generatable symbols beyond pad/EOS")
    return ids


def _next_distribution(params: Parameters, prompt, generated) -> np.ndarray:
    K = params.w_hidden.shape[0] // params.embed.shape[1]
    seq = np.concatenate([np.asarray(prompt, dtype=np.int64), np.asarray(generated, dtype=np.int64)])
    return forward(params, context_window(seq, seq.size, K))


def greedy(params: Parameters, prompt, max_len: int) -> Hypothesis:
    """Repeatedly append the most probable token until EOS or max_len.

    Ties break toward the lower token id.  The raw score accumulates the
    logarithmic objective of the chosen tokens.
    """
    real = _candidate_ids(params.embed.shape[0])
    tokens: list = []
    raw = 0.0
    for step in range(1, max_len + 1):
        p = _next_distribution(params, prompt, tokens)
        allowed = real if step == 1 else np.concatenate([[EOS_ID], real])
        tok = int(allowed[np.argmax(p[allowed])])
        with np.errstate(divide="ignore"):
            raw += float(np.log(p[tok]))
        tokens.append(tok)
        if tok == EOS_ID:
            break
    return Hypothesis(tuple(tokens), raw, True)


def beam_search(params: Parameters, prompt, cfg: BeamConfig):
    """Beam search maximizing the summed normalized objective.

    Each step expands every live hypothesis over all candidate tokens and
    keeps the top beam_size candidates by raw score (same-length comparison,
    so no normalization is needed); of those, EOS picks retire to the
    finished pool and free their slot for the next step.  Finished
    hypotheses are ranked by raw_score / |y|^length_penalty.
    """
    prompt = np.asarray(prompt, dtype=np.int64)
    V = params.embed.shape[0]
    if prompt.size and (prompt.min() < 0 or prompt.max() >= V):
        raise InvalidInputError("prompt token id out of vocabulary range")
    real = _candidate_ids(V)
    live = [Hypothesis((), 0.0, False)]
    finished = []
    for step in range(1, cfg.max_len + 1):
        candidates = []
        for parent_idx, hyp in enumerate(live):
            p = _next_distribution(params, prompt, hyp.tokens)
            obj = normalized_objective_vector(cfg.objective, p)
            allowed = real if step == 1 else np.concatenate([[EOS_ID], real])
            for tok in allowed:
                candidates.append((-(hyp.raw_score + obj[tok]), int(tok), parent_idx))
        selected = heapq.nsmallest(cfg.beam_size, candidates)
        live_next = []
        for neg, tok, parent_idx in selected:
            hyp = live[parent_idx]
            child = Hypothesis(hyp.tokens + (tok,), -neg, False)
            if tok == EOS_ID or step == cfg.max_len:
                finished.append(Hypothesis(child.tokens, child.raw_score, True))
            else:
                live_next.append(child)
        live = live_next
        if not live:
            break
    if not finished:
        raise RuntimeError("beam search ended with no finished hypotheses")  # unreachable by construction
    finished.sort(key=lambda h: (-h.normalized_score(cfg.length_penalty), len(h.tokens), h.tokens))
    return finished


def exhaustive_search(params: Parameters, prompt, max_len: int, cfg: BeamConfig) -> Hypothesis:
    """Enumerate every candidate generation up to max_len and return the best
    under the same normalized objective and length penalty as beam_search.

    Bodies run over the non-reserved symbols; bodies shorter than max_len are
    closed by EOS (whose objective is accrued), and max_len bodies finish
    open.  Refuses when V^max_len exceeds the enumeration bound.
    """
    V = params.embed.shape[0]
    if V**max_len > EXHAUSTIVE_LIMIT:
        raise ParameterDomainError(
            f"search space V^max_len = {V}^{max_len} exceeds the enumeration bound {EXHAUSTIVE_LIMIT}"
        )
    real = _candidate_ids(V)
    best = None

    def consider(hyp: Hypothesis):
        nonlocal best
        # ties break toward shorter, then first-seen (= lexicographic in DFS order)
        key = (hyp.normalized_score(cfg.length_penalty), -len(hyp.tokens))
        if best is None or key > (best.normalized_score(cfg.length_penalty), -len(best.tokens)):
            best = hyp

    def walk(body: tuple, raw: float):
        depth = len(body)
        p = _next_distribution(params, prompt, body)
        obj = normalized_objective_vector(cfg.objective, p)
        if depth >= 1:
            consider(Hypothesis(body + (EOS_ID,), raw + float(obj[EOS_ID]), True))
        for tok in real:
            child_raw = raw + float(obj[tok])
            if depth + 1 == max_len:
                consider(Hypothesis(body + (int(tok),), child_raw, True))
            else:
                walk(body + (int(tok),), child_raw)

    walk((), 0.0)
    return best
