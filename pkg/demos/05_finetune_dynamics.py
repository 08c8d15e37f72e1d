"""Score dynamics when fine-tuning a converged model with a different rule.

Pretrain with the logarithmic score, then continue training under each rule
while tracking held-out expected scores relative to the pretrained
checkpoint.  Fine-tuning with the same rule just fluctuates around zero;
switching rules can trade one score off against another even though all
strictly proper rules share the same global optimum.
"""

import numpy as np

from scorelm import MarkovSpec, ModelConfig, ScoreRule, TrainConfig, finetune, synth_markov, train

TRANSITION = np.array(
    [[0.70, 0.10, 0.10, 0.10],
     [0.10, 0.60, 0.15, 0.15],
     [0.20, 0.20, 0.50, 0.10],
     [0.25, 0.25, 0.25, 0.25]]
)
spec = MarkovSpec(states=4, transition=TRANSITION, initial=np.full(4, 0.25), seed=5)
seq, _ = synth_markov(spec, 60_000)
model_cfg = ModelConfig(vocab_size=6, context=1, embed_dim=8, hidden_dim=16, seed=1)


def cfg_for(kind, steps, seed=7):
    return TrainConfig(rule=ScoreRule(kind), steps=steps, batch_size=256,
                       learning_rate=1e-3, eval_every=100, seed=seed, lr_decay=True)


print("pretraining 1000 steps with the logarithmic score...")
base, recs = train(cfg_for("logarithmic", 1000), model_cfg, seq.tokens)
print(f"  pretrained held-out ppl {recs[-1].ppl:.3f}")

for kind in ("logarithmic", "brier", "spherical"):
    _, records = finetune(base, cfg_for(kind, 400, seed=11), seq.tokens)
    print(f"\nfine-tuning with {kind}: relative change of each held-out score vs the base")
    print(f"  {'step':>6s}  {'rel_log':>9s}  {'rel_brier':>9s}  {'rel_spherical':>13s}")
    for rec in records:
        print(f"  {rec.step:>6d}  {rec.rel_log:>+9.5f}  {rec.rel_brier:>+9.5f}  {rec.rel_spherical:>+13.5f}")

print(
    "\nAt this desk scale the pretrained model is already near the shared"
    "\noptimum, so every fine-tune fluctuates within a fraction of a percent —"
    "\nthe same-rule run is the control showing the noise floor."
)
