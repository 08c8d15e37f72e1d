"""Corpus ingestion, character tokenization, batching, and synthetic
Markov corpora with known ground-truth conditionals."""

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .model import EOS_ID, N_RESERVED, PAD_ID, TokenSeq
from .simplex import check_prob_vector

PAD_SYMBOL = "<pad>"
EOS_SYMBOL = "<eos>"


@dataclass(frozen=True)
class Vocab:
    symbol_to_id: dict
    id_to_symbol: dict

    @property
    def size(self) -> int:
        return len(self.symbol_to_id)


def build_vocab(text: str) -> Vocab:
    """One id per distinct character, sorted by code point, after pad/EOS."""
    if not text:
        raise InvalidInputError("cannot build a vocabulary from empty text")
    symbols = [PAD_SYMBOL, EOS_SYMBOL] + sorted(set(text))
    s2i = {s: i for i, s in enumerate(symbols)}
    return Vocab(symbol_to_id=s2i, id_to_symbol={i: s for s, i in s2i.items()})


def encode(vocab: Vocab, text: str) -> TokenSeq:
    """Character ids for text; every position unmasked."""
    try:
        ids = [vocab.symbol_to_id[ch] for ch in text]
    except KeyError as exc:
        raise InvalidInputError(f"character {exc.args[0]!r} not in vocabulary") from None
    return TokenSeq(np.asarray(ids, dtype=np.int64))


def decode(vocab: Vocab, tokens) -> str:
    """Inverse of encode; reserved pad/EOS ids contribute nothing."""
    out = []
    for t in np.asarray(tokens, dtype=np.int64):
        t = int(t)
        if t in (PAD_ID, EOS_ID):
            continue
        if t not in vocab.id_to_symbol:
            raise InvalidInputError(f"token id {t} not in vocabulary")
        out.append(vocab.id_to_symbol[t])
    return "".join(out)


def encode_pair(vocab: Vocab, source: str, target: str) -> TokenSeq:
    """source + EOS + target + EOS, loss-masked over the source and its EOS."""
    src = encode(vocab, source).tokens
    tgt = encode(vocab, target).tokens
    tokens = np.concatenate([src, [EOS_ID], tgt, [EOS_ID]])
    mask = np.zeros(tokens.size, dtype=bool)
    mask[src.size + 1 :] = True
    return TokenSeq(tokens, mask)


def load_pairs(path):
    """Read JSON-lines records with "source" and "target" string fields."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InvalidInputError(f"line {lineno}: malformed JSON ({exc.msg})") from None
            for key in ("source", "target"):
                if key not in obj or not isinstance(obj[key], str):
                    raise InvalidInputError(f'line {lineno}: missing or non-string "{key}" field')
            records.append((obj["source"], obj["target"]))
    return records


def make_batches(tokens, context: int, batch_size: int, seed: int):
    """One epoch of sliding-window next-token examples, shuffled by seed.

    Yields lists of TokenSeq windows (context tokens masked, target unmasked);
    every target position K..L-1 appears exactly once.
    """
    tokens = np.asarray(tokens, dtype=np.int64)
    L = tokens.size
    if L <= context:
        raise InvalidInputError(f"corpus length {L} must exceed the context window {context}")
    positions = np.arange(context, L)
    order = np.random.default_rng(seed).permutation(positions)
    window_mask = np.zeros(context + 1, dtype=bool)
    window_mask[-1] = True
    for start in range(0, order.size, batch_size):
        chunk = order[start : start + batch_size]
        yield [TokenSeq(tokens[t - context : t + 1], window_mask.copy()) for t in chunk]


def make_seq_batches(seqs, batch_size: int, seed: int):
    """One epoch over whole sequences (paired data), shuffled by seed."""
    if not seqs:
        raise InvalidInputError("no sequences to batch")
    order = np.random.default_rng(seed).permutation(len(seqs))
    for start in range(0, order.size, batch_size):
        yield [seqs[i] for i in order[start : start + batch_size]]


@dataclass(frozen=True)
class MarkovSpec:
    """First-order chain over k states; the transition matrix doubles as the
    exact conditional table for calibration checks."""

    states: int
    transition: np.ndarray  # (k, k), row-stochastic
    initial: np.ndarray     # (k,)
    seed: int = 0

    def __post_init__(self):
        T = np.asarray(self.transition, dtype=np.float64)
        init = np.asarray(self.initial, dtype=np.float64)
        if T.shape != (self.states, self.states):
            raise InvalidInputError(f"transition matrix must be ({self.states}, {self.states}), got {T.shape}")
        for r, row in enumerate(T):
            try:
                check_prob_vector(row)
            except InvalidInputError as exc:
                raise InvalidInputError(f"transition row {r} is not a distribution: {exc}") from None
        check_prob_vector(init)
        object.__setattr__(self, "transition", T)
        object.__setattr__(self, "initial", init)

    def state_ids(self) -> np.ndarray:
        """Token ids of the states: reserved ids first, states from 2."""
        return np.arange(N_RESERVED, N_RESERVED + self.states)


def synth_markov(spec: MarkovSpec, length: int):
    """Seed-deterministic sample path plus the exact conditional table.

    States are mapped to token ids N_RESERVED..N_RESERVED+k-1, so the
    resulting TokenSeq trains a model with vocab_size k + 2.
    """
    if length < 1:
        raise InvalidInputError(f"length must be >= 1, got {length}")
    gen = np.random.default_rng(spec.seed)
    k = spec.states
    states = np.empty(length, dtype=np.int64)
    states[0] = gen.choice(k, p=spec.initial)
    for t in range(1, length):
        states[t] = gen.choice(k, p=spec.transition[states[t - 1]])
    return TokenSeq(states + N_RESERVED), spec.transition.copy()
