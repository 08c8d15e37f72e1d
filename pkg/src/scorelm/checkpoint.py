"""Checkpoint persistence: a single self-describing JSON document.

Parameter tensors are stored as nested decimal arrays; Python's repr-based
float serialization round-trips doubles exactly, which more than meets the
1e-15 relative-error budget.
"""

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import CheckpointFormatError, CheckpointShapeError, CheckpointVersionError
from .model import ModelConfig, Parameters
from .scores import ScoreRule, SmoothingConfig

FORMAT_VERSION = 1


def _expected_shapes(cfg: ModelConfig):
    V, K, d, h = cfg.vocab_size, cfg.context, cfg.embed_dim, cfg.hidden_dim
    return {
        "embed": (V, d),
        "w_hidden": (K * d, h),
        "b_hidden": (h,),
        "w_out": (h, V),
        "b_out": (V,),
    }


@dataclass
class Checkpoint:
    model: ModelConfig
    rule: ScoreRule
    smoothing: SmoothingConfig
    step: int
    params: Parameters

    def to_document(self) -> dict:
        return {
            "v": FORMAT_VERSION,
            "model": asdict(self.model),
            "rule": asdict(self.rule),
            "smoothing": asdict(self.smoothing),
            "step": self.step,
            "params": {name: t.tolist() for name, t in self.params.named()},
        }

    def save(self, path):
        save_checkpoint(path, self)


def save_checkpoint(path, ckpt: Checkpoint):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(ckpt.to_document(), fh)
        fh.write("\n")


def load_checkpoint(path) -> Checkpoint:
    """Parse and validate a checkpoint document.

    Raises CheckpointVersionError / CheckpointShapeError /
    CheckpointFormatError for the three failure classes.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CheckpointFormatError(f"malformed checkpoint document: {exc.msg}") from None

    if not isinstance(doc, dict) or "v" not in doc:
        raise CheckpointFormatError("checkpoint document lacks a version field")
    if doc["v"] != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"unsupported checkpoint version {doc['v']!r}; supported versions: {FORMAT_VERSION}"
        )
    try:
        model = ModelConfig(**doc["model"])
        rule = ScoreRule(**doc["rule"])
        smoothing = SmoothingConfig(**doc["smoothing"])
        step = int(doc["step"])
        raw = doc["params"]
        tensors = {name: np.asarray(raw[name], dtype=np.float64) for name in _expected_shapes(model)}
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointFormatError(f"incomplete or malformed checkpoint fields: {exc}") from None

    for name, shape in _expected_shapes(model).items():
        if tensors[name].shape != shape:
            raise CheckpointShapeError(
                f"tensor {name!r} has shape {tensors[name].shape}, config implies {shape}"
            )
        if not np.all(np.isfinite(tensors[name])):
            raise CheckpointFormatError(f"tensor {name!r} contains non-finite values")
    return Checkpoint(model=model, rule=rule, smoothing=smoothing, step=step, params=Parameters(**tensors))
