"""Tour of the implemented scoring rules and what propriety means.

A scoring rule S(p, i) rewards predicting distribution p when outcome i is
observed.  A rule is strictly proper when the expected score under the data
distribution q is uniquely maximized by reporting p = q: honesty wins.
"""

import numpy as np

from scorelm import ScoreRule, expected_score, score

RULES = [
    ScoreRule("logarithmic"),
    ScoreRule("brier"),
    ScoreRule("spherical"),
    ScoreRule("alpha_power", 1.5),
    ScoreRule("pseudo_spherical", 2.5),
    ScoreRule("linear"),  # improper: included as a negative control
]

q = np.array([0.5, 0.3, 0.2])

print("Per-outcome scores for a forecast p = (0.5, 0.3, 0.2):")
for rule in RULES:
    vals = [f"{score(rule, q, i):+.4f}" for i in range(3)]
    print(f"  {rule.kind:17s}(alpha={rule.alpha}):  " + "  ".join(vals))

print("\nExpected score S(p, q) as the forecast p moves away from q:")
print("(strictly proper rules peak at p = q; the linear control does not)\n")
candidates = {
    "p = q            ": q,
    "mode-leaning     ": np.array([0.7, 0.2, 0.1]),
    "uniform          ": np.full(3, 1 / 3),
    "one-hot at mode  ": np.array([1.0, 0.0, 0.0]),
}
header = "  ".join(f"{r.kind[:12]:>12s}" for r in RULES)
print(f"  {'forecast':17s}  {header}")
for name, p in candidates.items():
    row = "  ".join(f"{expected_score(r, p, q):>12.4f}" for r in RULES)
    print(f"  {name}  {row}")

print(
    "\nNote the last column: the improper linear rule keeps increasing as the"
    "\nforecast sharpens toward the mode, so a model trained on it learns a"
    "\ndegenerate one-hot distribution instead of q.  The logarithmic column"
    "\nshows -inf at the one-hot forecast: zero probability on an outcome that"
    "\ncan occur is an infinite mistake."
)
