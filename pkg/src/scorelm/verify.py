"""Brute-force certificates for the propriety, smoothing, gradient, and
entmax-equivalence claims, at desk scale.

Scans enumerate a regular grid on the simplex and check that expected
scores are maximized in the grid cell(s) nearest the target distribution.
Ties matter: an off-grid target (e.g. the uniform distribution at step
0.02) has several equidistant nearest cells whose scores can tie exactly
by symmetry, so the certificate checks that the set of maximizers lies
inside the set of nearest cells and that everything outside loses by a
strictly positive margin.
"""

import numpy as np

from .errors import ParameterDomainError
from .scores import (
    ScoreRule,
    SmoothingConfig,
    entmax_power_equivalence_gap,
    expected_score,
    masked_log_smoothed_score,
    score_matrix,
    smoothed_score,
    token_losses_and_grads,
)
from .simplex import smooth_distribution, softmax

GRID_POINT_LIMIT = 10**6
_TIE_TOL = 1e-12


def simplex_grid(m: int, step: float) -> np.ndarray:
    """All points with coordinates i/n on the m-simplex, n = round(1/step)."""
    if m not in (2, 3):
        raise ParameterDomainError(f"grid scans support m in {{2, 3}}, got {m}")
    if step > 0.05:
        raise ParameterDomainError(f"grid step must be <= 0.05, got {step}")
    n = round(1.0 / step)
    count = n + 1 if m == 2 else (n + 1) * (n + 2) // 2
    if count > GRID_POINT_LIMIT:
        raise ParameterDomainError(f"grid would have {count} points, beyond the {GRID_POINT_LIMIT} bound")
    if m == 2:
        i = np.arange(n + 1)
        return np.stack([i, n - i], axis=1) / n
    pts = [(i, j, n - i - j) for i in range(n + 1) for j in range(n + 1 - i)]
    return np.asarray(pts, dtype=np.float64) / n


def _expected_over_grid(S: np.ndarray, q: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        return np.where(q > 0, S * q, 0.0).sum(axis=1)


def _cell_certificate(grid: np.ndarray, E: np.ndarray, target: np.ndarray) -> dict:
    """Is the expected score maximized exactly in the cell(s) nearest target?"""
    finite_max = E.max()
    arg_set = np.flatnonzero(E >= finite_max - _TIE_TOL)
    d2 = np.sum((grid - target) ** 2, axis=1)
    near_set = np.flatnonzero(d2 <= d2.min() + _TIE_TOL)
    outside = np.setdiff1d(np.arange(grid.shape[0]), near_set, assume_unique=False)
    margin = float(finite_max - E[outside].max()) if outside.size else float("inf")
    ok = bool(set(arg_set).issubset(set(near_set)) and margin > 0.0)
    return {
        "argmax_cell": grid[arg_set[0]].tolist(),
        "n_maximizers": int(arg_set.size),
        "nearest_cells": grid[near_set].tolist(),
        "max_value": float(finite_max),
        "margin": margin,
        "pass": ok,
    }


def propriety_scan(rule: ScoreRule, m: int, grid_step: float, q_set) -> dict:
    """Grid certificate that the expected score is maximized at (the cell
    containing) q, for each q in q_set.  An improper rule fails for some q."""
    grid = simplex_grid(m, grid_step)
    S = score_matrix(rule, grid)
    results = []
    for q in q_set:
        q = np.asarray(q, dtype=np.float64)
        E = _expected_over_grid(S, q)
        cert = _cell_certificate(grid, E, q)
        results.append({"q": q.tolist(), **cert})
    return {
        "rule": rule.kind,
        "alpha": rule.alpha,
        "m": m,
        "grid_step": grid_step,
        "grid_points": int(grid.shape[0]),
        "results": results,
        "pass": bool(all(r["pass"] for r in results)),
    }


def smoothing_propriety_scan(rule: ScoreRule, eps: float, m: int, grid_step: float, q_set) -> dict:
    """Grid certificate for score smoothing: the expected smoothed score is
    maximized at (the cell nearest) q^eps, the masked variant never exceeds
    the smoothed one, and the two coincide at q^eps itself."""
    if not 0.0 < eps < 1.0:
        raise ParameterDomainError(f"smoothing scan requires eps in (0, 1), got {eps}")
    grid = simplex_grid(m, grid_step)
    S = score_matrix(rule, grid)
    smoothed = (1.0 - eps) * S + (eps / m) * S.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_grid = np.log(grid)
        penalty = (eps / m) * np.where(grid < eps / m, log_grid, 0.0).sum(axis=1)

    smooth_cfg = SmoothingConfig(eps)
    masked_cfg = SmoothingConfig(eps, mask_enhanced=True)
    results = []
    for q in q_set:
        q = np.asarray(q, dtype=np.float64)
        q_eps = smooth_distribution(q, eps)
        E = _expected_over_grid(smoothed, q)
        cert = _cell_certificate(grid, E, q_eps)
        E_masked = E + penalty
        dominance = bool(np.all(E_masked <= E + _TIE_TOL))
        at_qeps_smoothed = sum(
            float(q[i]) * smoothed_score(rule, smooth_cfg, q_eps, i) for i in range(m) if q[i] > 0
        )
        at_qeps_masked = sum(
            float(q[i]) * masked_log_smoothed_score(rule, masked_cfg, q_eps, i) for i in range(m) if q[i] > 0
        )
        equality = bool(abs(at_qeps_masked - at_qeps_smoothed) <= _TIE_TOL)
        results.append(
            {
                "q": q.tolist(),
                "q_eps": q_eps.tolist(),
                **cert,
                "dominance": dominance,
                "equality_at_q_eps": equality,
                "pass": bool(cert["pass"] and dominance and equality),
            }
        )
    return {
        "rule": rule.kind,
        "alpha": rule.alpha,
        "eps": eps,
        "m": m,
        "grid_step": grid_step,
        "grid_points": int(grid.shape[0]),
        "results": results,
        "pass": bool(all(r["pass"] for r in results)),
    }


TABLE1_EXPECTED = {
    "logarithmic": (float("-inf"), -0.7778),
    "brier": (0.8020, 0.8119),
    "spherical": (0.9010, 0.9011),
}


def table1_check() -> dict:
    """Expected scores with and without smoothing at m = 100, one-hot q,
    eps = 0.1: the six reference values, matched to 4 decimal places."""
    m, eps = 100, 0.1
    q = np.zeros(m)
    q[0] = 1.0
    q_eps = smooth_distribution(q, eps)
    report = {"m": m, "eps": eps, "values": {}, "pass": True}
    for kind, (want_pq, want_pqe) in TABLE1_EXPECTED.items():
        rule = ScoreRule(kind)
        got_pq = expected_score(rule, q, q_eps)
        got_pqe = expected_score(rule, q_eps, q_eps)
        ok_pq = got_pq == float("-inf") if want_pq == float("-inf") else round(got_pq, 4) == want_pq
        ok_pqe = round(got_pqe, 4) == want_pqe
        report["values"][kind] = {
            "p=q": got_pq,
            "p=q_eps": got_pqe,
            "expected": [want_pq, want_pqe],
            "pass": bool(ok_pq and ok_pqe),
        }
        report["pass"] = bool(report["pass"] and ok_pq and ok_pqe)
    return report


def grad_check(rule: ScoreRule, cfg: SmoothingConfig, m: int, trials: int, h: float, seed: int = 0) -> dict:
    """Central finite differences vs the analytic logit gradient.

    Coordinates with |analytic| <= 1e-8 are skipped (their relative error is
    ill-defined); the report counts them.  For mask-enhanced configs the
    under-smooth mask is frozen at the unperturbed point, matching the
    stop-gradient treatment of the indicator.
    """
    if not 1e-7 <= h <= 1e-3:
        raise ParameterDomainError(f"finite-difference step must lie in [1e-7, 1e-3], got {h}")
    gen = np.random.default_rng(seed)
    max_rel = 0.0
    checked = skipped = 0
    for _ in range(trials):
        z = gen.normal(size=m)
        i = int(gen.integers(m))
        one = np.array([i])
        mask = None
        if cfg.mask_enhanced:
            mask = (softmax(z) < cfg.eps / m)[None, :]
        _, dZ = token_losses_and_grads(rule, cfg, z[None, :], one, mask_override=mask)
        analytic = dZ[0]
        for k in range(m):
            zp, zm = z.copy(), z.copy()
            zp[k] += h
            zm[k] -= h
            lp, _ = token_losses_and_grads(rule, cfg, zp[None, :], one, mask_override=mask)
            lm, _ = token_losses_and_grads(rule, cfg, zm[None, :], one, mask_override=mask)
            fd = (float(lp[0]) - float(lm[0])) / (2.0 * h)
            if abs(analytic[k]) <= 1e-8:
                skipped += 1
                continue
            checked += 1
            max_rel = max(max_rel, abs(fd - analytic[k]) / abs(analytic[k]))
    return {
        "rule": rule.kind,
        "alpha": rule.alpha,
        "eps": cfg.eps,
        "mask_enhanced": cfg.mask_enhanced,
        "m": m,
        "trials": trials,
        "h": h,
        "max_rel_error": float(max_rel),
        "checked": checked,
        "skipped": skipped,
    }


def entmax_sweep(alphas, trials: int, m: int = 16, seed: int = 0, scale: float = 2.0) -> dict:
    """Entmax-loss vs alpha-power-loss equivalence over random logits.

    Gaps are asserted (< 1e-8) only when the gold label keeps positive
    probability; out-of-support cases are counted and their gaps recorded
    without any claim."""
    gen = np.random.default_rng(seed)
    per_alpha = []
    for alpha in alphas:
        if alpha <= 1:
            raise ParameterDomainError(f"alphas must exceed 1, got {alpha}")
        in_gaps, out_gaps = [], []
        for _ in range(trials):
            z = scale * gen.normal(size=m)
            x = int(gen.integers(m))
            gap, in_support = entmax_power_equivalence_gap(z, x, alpha)
            (in_gaps if in_support else out_gaps).append(gap)
        per_alpha.append(
            {
                "alpha": alpha,
                "in_support": len(in_gaps),
                "out_of_support": len(out_gaps),
                "max_in_support_gap": float(max(in_gaps)) if in_gaps else 0.0,
                "max_out_of_support_gap": float(max(out_gaps)) if out_gaps else 0.0,
                "pass": bool(all(g < 1e-8 for g in in_gaps)),
            }
        )
    return {
        "m": m,
        "trials": trials,
        "alphas": list(alphas),
        "results": per_alpha,
        "pass": bool(all(r["pass"] for r in per_alpha)),
    }
