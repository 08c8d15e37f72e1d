"""Strict propriety, observed end to end: training recovers the truth.

A first-order Markov chain gives a corpus whose exact conditional
distributions are known.  Training the compact next-token model with any
strictly proper rule should drive the model's conditionals to the true
transition rows; the improper linear control should collapse to the mode.
"""

import numpy as np

from scorelm import MarkovSpec, ModelConfig, ScoreRule, TrainConfig, forward, synth_markov, train

TRANSITION = np.array(
    [[0.70, 0.10, 0.10, 0.10],
     [0.10, 0.60, 0.15, 0.15],
     [0.20, 0.20, 0.50, 0.10],
     [0.25, 0.25, 0.25, 0.25]]
)

spec = MarkovSpec(states=4, transition=TRANSITION, initial=np.full(4, 0.25), seed=5)
seq, truth = synth_markov(spec, 60_000)
print(f"sampled a {len(seq)}-token corpus from a 4-state chain (token ids 2..5)")

model_cfg = ModelConfig(vocab_size=6, context=1, embed_dim=8, hidden_dim=16, seed=1)
state_ids = spec.state_ids()

for kind in ("logarithmic", "brier", "spherical", "linear"):
    cfg = TrainConfig(rule=ScoreRule(kind), steps=1000, batch_size=256,
                      learning_rate=1e-3, eval_every=500, seed=7, lr_decay=True)
    ckpt, records = train(cfg, model_cfg, seq.tokens)
    rows = np.stack([forward(ckpt.params, [sid])[state_ids] for sid in state_ids])
    err = np.abs(rows - truth).max()
    print(f"\n{kind} (held-out ppl {records[-1].ppl:.3f}): max-norm calibration error {err:.4f}")
    for s in range(4):
        print(f"  state {s}: model {np.round(rows[s], 3)}  true {truth[s]}")

print(
    "\nEvery strictly proper rule lands near the true rows; the linear control"
    "\npushes all mass onto each row's argmax instead (error ~ 0.3-0.7): the"
    "\nmeasurable consequence of training with an improper score."
)
