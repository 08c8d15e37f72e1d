"""Command-line surface: train / finetune / generate / eval / verify / synth.

A single JSON config document drives training; command-line flags override
config keys.  Exit codes: 0 success, 1 validation or runtime failure,
2 usage error, 3 verification FAIL.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import verify as verify_mod
from .checkpoint import load_checkpoint
from .data import MarkovSpec, Vocab, build_vocab, decode as decode_text, encode, encode_pair, load_pairs, synth_markov
from .decode import BeamConfig, beam_search, greedy
from .errors import ConfigurationError, InvalidInputError
from .model import ModelConfig, N_RESERVED
from .scores import ScoreRule, SmoothingConfig
from .train import TrainConfig, evaluate_scores, finetune, train
from .train import _heldout_positions, _split_data


def _jsonable(obj):
    """Make report structures strict-JSON safe (notably +-inf)."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None


def _rule_from(section: dict) -> ScoreRule:
    return ScoreRule(section.get("rule", "logarithmic"), float(section.get("alpha", 2.0)))


def _smoothing_from(section: dict) -> SmoothingConfig:
    return SmoothingConfig(float(section.get("eps", 0.0)), bool(section.get("mask_enhanced", False)))


def _train_config(section: dict) -> TrainConfig:
    return TrainConfig(
        rule=_rule_from(section),
        smoothing=_smoothing_from(section),
        steps=int(section.get("steps", 2000)),
        batch_size=int(section.get("batch_size", 64)),
        learning_rate=float(section.get("learning_rate", 1e-3)),
        warmup_steps=int(section.get("warmup_steps", 100)),
        eval_every=int(section.get("eval_every", 100)),
        seed=int(section.get("seed", 0)),
    )


def _load_data(path):
    """Text corpus or JSON-lines pairs -> (vocab, training data)."""
    if str(path).endswith(".jsonl"):
        pairs = load_pairs(path)
        if not pairs:
            raise InvalidInputError(f"no records in {path}")
        vocab = build_vocab("".join(s + t for s, t in pairs))
        return vocab, [encode_pair(vocab, s, t) for s, t in pairs]
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    vocab = build_vocab(text)
    return vocab, encode(vocab, text).tokens


def _model_config(section: dict, vocab: Vocab) -> ModelConfig:
    declared = section.get("vocab_size")
    if declared is not None and int(declared) != vocab.size:
        raise ConfigurationError(f"config vocab_size {declared} != vocabulary built from data ({vocab.size})")
    return ModelConfig(
        vocab_size=vocab.size,
        context=int(section.get("context", 4)),
        embed_dim=int(section.get("embed_dim", 16)),
        hidden_dim=int(section.get("hidden_dim", 32)),
        seed=int(section.get("seed", 0)),
    )


def _apply_overrides(config: dict, args) -> dict:
    train_sec = config.setdefault("train", {})
    for key in ("rule", "alpha", "eps", "steps", "batch_size", "learning_rate", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            train_sec[key] = val
    if getattr(args, "data", None) is not None:
        config["data"] = args.data
    return config


def _cmd_train(args) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    if "data" not in config:
        raise ConfigurationError("no data file: set the config 'data' key or pass --data")
    vocab, data = _load_data(config["data"])
    model_cfg = _model_config(config.get("model", {}), vocab)
    cfg = _train_config(config["train"])
    ckpt, records = train(cfg, model_cfg, data,
                          metrics_path=args.metrics, checkpoint_path=args.out)
    last = records[-1]
    print(f"trained {cfg.steps} steps with {cfg.rule.kind}: "
          f"loss={last.loss:.6f} ppl={last.ppl:.4f} -> {args.out}")
    return 0


def _cmd_finetune(args) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    base = load_checkpoint(args.base)
    if "data" not in config:
        raise ConfigurationError("no data file: set the config 'data' key or pass --data")
    vocab, data = _load_data(config["data"])
    if vocab.size != base.model.vocab_size:
        raise ConfigurationError(
            f"data vocabulary size {vocab.size} != checkpoint vocab_size {base.model.vocab_size}"
        )
    cfg = _train_config(config["train"])
    ckpt, records = finetune(base, cfg, data, metrics_path=args.metrics, checkpoint_path=args.out)
    tail = f"ppl={records[-1].ppl:.4f}" if records else "no steps"
    print(f"fine-tuned {cfg.steps} steps with {cfg.rule.kind}: {tail} -> {args.out}")
    return 0


def _cmd_generate(args) -> int:
    ckpt = load_checkpoint(args.ckpt)
    vocab, _ = _load_data(args.data)
    if vocab.size != ckpt.model.vocab_size:
        raise ConfigurationError(
            f"data vocabulary size {vocab.size} != checkpoint vocab_size {ckpt.model.vocab_size}"
        )
    prompt = encode(vocab, args.prompt).tokens if args.prompt else np.zeros(0, dtype=np.int64)
    if args.beam is None:
        hyp = greedy(ckpt.params, prompt, args.max_len)
    else:
        objective = args.objective or (ckpt.rule.kind if ckpt.rule.kind in ("logarithmic", "brier", "spherical")
                                       else "logarithmic")
        cfg = BeamConfig(beam_size=args.beam, max_len=args.max_len,
                         length_penalty=args.length_penalty, objective=ScoreRule(objective))
        hyp = beam_search(ckpt.params, prompt, cfg)[0]
    print(decode_text(vocab, hyp.tokens))
    return 0


def _cmd_eval(args) -> int:
    ckpt = load_checkpoint(args.ckpt)
    vocab, data = _load_data(args.data)
    if vocab.size != ckpt.model.vocab_size:
        raise ConfigurationError(
            f"data vocabulary size {vocab.size} != checkpoint vocab_size {ckpt.model.vocab_size}"
        )
    mode, _, held = _split_data(data)
    contexts, targets = _heldout_positions(mode, held, ckpt.model.context)
    scores = evaluate_scores(ckpt.params, contexts, targets)
    out = {
        "positions": int(targets.size),
        "score_log": scores["log"],
        "score_brier": scores["brier"],
        "score_spherical": scores["spherical"],
        "ppl": float(np.exp(-scores["log"])),
    }
    print(json.dumps(_jsonable(out)))
    return 0


_PROPRIETY_RULES = [
    ScoreRule("logarithmic"),
    ScoreRule("brier"),
    ScoreRule("spherical"),
    ScoreRule("alpha_power", 1.5),
    ScoreRule("alpha_power", 2.5),
    ScoreRule("pseudo_spherical", 1.5),
    ScoreRule("pseudo_spherical", 2.5),
]
_Q_SET_3 = [np.array([1.0, 0.0, 0.0]), np.full(3, 1.0 / 3.0), np.array([0.5, 0.3, 0.2])]


def _cmd_verify(args) -> int:
    check = args.check
    if check == "table1":
        report = verify_mod.table1_check()
    elif check == "propriety":
        reports = [verify_mod.propriety_scan(rule, 3, 0.02, _Q_SET_3) for rule in _PROPRIETY_RULES]
        control = verify_mod.propriety_scan(ScoreRule("linear"), 3, 0.02, [np.array([0.5, 0.3, 0.2])])
        report = {
            "proper_rules": reports,
            "linear_control": control,
            "pass": bool(all(r["pass"] for r in reports) and not control["pass"]),
        }
    elif check == "smoothing":
        reports = [
            verify_mod.smoothing_propriety_scan(ScoreRule(kind), 0.1, 3, 0.02, _Q_SET_3)
            for kind in ("brier", "spherical")
        ]
        report = {"rules": reports, "pass": bool(all(r["pass"] for r in reports))}
    elif check == "gradcheck":
        reports = []
        combos = [(rule, eps, m) for rule in _PROPRIETY_RULES + [ScoreRule("linear")]
                  for eps in (0.0, 0.1) for m in (2, 8, 32)]
        for idx, (rule, eps, m) in enumerate(combos):
            reports.append(verify_mod.grad_check(rule, SmoothingConfig(eps), m, 100, 1e-4, seed=1000 + idx))
        worst = max(r["max_rel_error"] for r in reports)
        report = {"checks": reports, "max_rel_error": worst, "pass": bool(worst < 1e-4)}
    else:  # entmax
        report = verify_mod.entmax_sweep([1.5, 2.0, 2.5], 200, m=16)
    print(json.dumps(_jsonable(report), indent=2))
    return 0 if report["pass"] else 3


def _cmd_synth(args) -> int:
    if args.spec is not None:
        with open(args.spec, encoding="utf-8") as fh:
            doc = json.load(fh)
        spec = MarkovSpec(
            states=int(doc["states"]),
            transition=np.asarray(doc["transition"], dtype=np.float64),
            initial=np.asarray(doc["initial"], dtype=np.float64),
            seed=int(doc.get("seed", args.seed)),
        )
    else:
        gen = np.random.default_rng(args.seed)
        T = gen.dirichlet(np.ones(args.states), size=args.states)
        spec = MarkovSpec(states=args.states, transition=T,
                          initial=np.full(args.states, 1.0 / args.states), seed=args.seed)
    seq, truth = synth_markov(spec, args.length)
    symbols = [chr(ord("a") + s) for s in range(spec.states)]
    text = "".join(symbols[t - N_RESERVED] for t in seq.tokens)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    if args.truth:
        with open(args.truth, "w", encoding="utf-8") as fh:
            json.dump({"states": spec.states, "symbols": symbols, "transition": truth.tolist(),
                       "initial": spec.initial.tolist()}, fh, indent=2)
            fh.write("\n")
    print(f"wrote {args.length} symbols over {spec.states} states to {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scorelm",
                                     description="language modeling with strictly proper scoring rules")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_train_flags(p):
        p.add_argument("--config", required=True)
        p.add_argument("--data", help="corpus .txt or paired .jsonl (overrides config)")
        p.add_argument("--out", default="checkpoint.json")
        p.add_argument("--metrics", default="metrics.jsonl")
        p.add_argument("--rule")
        p.add_argument("--alpha", type=float)
        p.add_argument("--eps", type=float)
        p.add_argument("--steps", type=int)
        p.add_argument("--batch-size", dest="batch_size", type=int)
        p.add_argument("--learning-rate", dest="learning_rate", type=float)
        p.add_argument("--seed", type=int)

    p = sub.add_parser("train", help="train from scratch")
    add_train_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("finetune", help="continue from a checkpoint")
    add_train_flags(p)
    p.add_argument("--base", required=True, help="base checkpoint path")
    p.set_defaults(func=_cmd_finetune)

    p = sub.add_parser("generate", aliases=["decode"], help="greedy or beam decoding")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True, help="corpus used to rebuild the vocabulary")
    p.add_argument("--prompt", default="")
    p.add_argument("--greedy", action="store_true")
    p.add_argument("--beam", type=int)
    p.add_argument("--max-len", dest="max_len", type=int, default=32)
    p.add_argument("--length-penalty", dest="length_penalty", type=float, default=0.0)
    p.add_argument("--objective", choices=["logarithmic", "brier", "spherical"])
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("eval", help="held-out expected scores and perplexity")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("verify", help="brute-force certificates")
    p.add_argument("check", choices=["table1", "propriety", "smoothing", "gradcheck", "entmax"])
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("synth", help="emit a synthetic Markov corpus")
    p.add_argument("--states", type=int, default=4)
    p.add_argument("--length", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spec", help="JSON file with states/transition/initial")
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="also write the exact conditional table here")
    p.set_defaults(func=_cmd_synth)
    return parser


def run_command(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (ValueError, OSError, ZeroDivisionError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
