"""Replication harness for coverage and sharpness studies."""

from __future__ import annotations

import time

import numpy as np

from . import scores as _scores
from .core import build_constraint_one_early
from .engine import GroupPartition, run
from .errors import ValidationError
from .simgen import CorrelatedSpec, generate

SCORE_NAMES = ("oracle", "opt", "gaussian", "gaussian-profile", "kde", "logits", "constant")


def make_score(name: str, model=None, xi=None, K=None):
    """Build a score by CLI name. ``oracle``/``opt`` need the true model (and ``xi``)."""
    if name == "oracle":
        if model is None:
            raise ValidationError("the oracle score needs the true density model")
        return _scores.oracle_score(model)
    if name == "opt":
        if model is None or xi is None:
            raise ValidationError("the opt score needs the true model and changepoints")
        return _scores.oracle_opt_score(model, xi)
    if name == "gaussian":
        return _scores.gaussian_score()
    if name == "gaussian-profile":
        return _scores.gaussian_profile_score()
    if name == "kde":
        return _scores.kde_score()
    if name == "logits":
        if K is None:
            raise ValidationError("the logits score needs K")
        return _scores.logit_score(K)
    if name == "constant":
        return _scores.constant_score()
    raise ValidationError(f"unknown score {name!r}; choose from {SCORE_NAMES}")


def default_partition(spec) -> GroupPartition:
    """The spec's own grouping if it has one, else odd/even streams."""
    if isinstance(spec, CorrelatedSpec):
        return GroupPartition(spec.groups)
    return GroupPartition((tuple(range(0, spec.K, 2)), tuple(range(1, spec.K, 2))))


def derive_seed(seed: int, *path) -> int:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def replicate(spec, rep, score_name, algorithm, alpha, M, seed, partition=None):
    """One generated panel analysed end to end. Returns a small record."""
    data_seed = derive_seed(seed, 0, rep)
    X, xi, model, part = generate(spec.with_seed(data_seed))
    R = build_constraint_one_early(spec.n, spec.K, spec.early, spec.late)
    S = make_score(score_name, model, xi, spec.K)
    if algorithm == "croc-dep":
        part = partition or part or default_partition(spec)
    res = run(algorithm, X, R, S, alpha, M, derive_seed(seed, 1, rep), partition=part)
    return {
        "rep": rep,
        "members": res.members,
        "covered": spec.root in res.confidence_set,
        "root_pvalues": res.root.as_array().tolist(),
        "elapsed": res.elapsed,
    }


def run_coverage(spec, score_name="oracle", algorithm="croc", alpha=0.1, M=100, reps=300,
                 seed=0, partition=None, n_jobs=1, keep_records=False) -> dict:
    """Run ``reps`` replications and summarise coverage and set sizes.

    Replicate ``r`` draws its data from seed path ``(0, r)`` and its
    permutations from ``(1, r)``, so results do not depend on ``n_jobs``.
    """
    if reps < 1:
        raise ValidationError(f"reps must be >= 1, got {reps}")
    t0 = time.perf_counter()
    args = [(spec, r, score_name, algorithm, alpha, M, seed, partition) for r in range(reps)]
    if n_jobs == 1:
        records = [replicate(*a) for a in args]
    else:
        from joblib import Parallel, delayed

        records = Parallel(n_jobs=n_jobs)(delayed(replicate)(*a) for a in args)
    records.sort(key=lambda r: r["rep"])

    sizes = np.array([len(r["members"]) for r in records])
    inclusion = np.zeros(spec.K)
    for r in records:
        inclusion[r["members"]] += 1
    elapsed = np.array([r["elapsed"] for r in records])
    covered = np.array([r["covered"] for r in records])
    summary = {
        "algorithm": algorithm,
        "score": score_name,
        "alpha": alpha,
        "M": M,
        "reps": reps,
        "seed": seed,
        "k_star": spec.root + 1,
        "coverage": float(covered.mean()),
        "coverage_se": float(np.sqrt(covered.mean() * (1 - covered.mean()) / reps)),
        "mean_set_size": float(sizes.mean()),
        "singleton_freq": float(np.mean([r["members"] == [spec.root] for r in records])),
        "inclusion_freq": (inclusion / reps).tolist(),
        "analysis_seconds": {
            "mean": float(elapsed.mean()),
            "median": float(np.median(elapsed)),
            "max": float(elapsed.max()),
        },
        "wall_seconds": time.perf_counter() - t0,
    }
    if keep_records:
        summary["records"] = records
    return summary
