"""Root-cause confidence sets: CROC, CONCH-agg and CROC-dep.

All three engines reduce to *group p-values*: a conformal p-value computed on
the sub-panel of a set of streams ``G`` at the sub-configuration ``t[G]``.

* CROC uses the single group of all streams.
* CONCH-agg uses every stream on its own and combines with Bonferroni.
* CROC-dep uses a user-given partition and combines with Bonferroni.

The permutation draws for a group p-value come from the seed path
``(len(G), *G, *t[G])``. Identical groups therefore see identical draws in
every engine, which makes the degenerate cases (one group, singleton groups)
reproduce CROC and CONCH-agg bit for bit, and lets different scores share
draws when compared on the same seed.
"""

from __future__ import annotations

import time
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .conformal import RootPValues, aggregate_root, pvalue
from .core import ConfidenceSet, ConstraintSet, as_array, root_index_sets
from .errors import ValidationError
from .permute import DEFAULT_GROUP_CAP, as_seed
from .scores import CppScore, single_stream


@dataclass(frozen=True)
class GroupPartition:
    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(sorted(int(k) for k in g)) for g in self.groups)
        if any(len(g) == 0 for g in groups):
            raise ValidationError("partition contains an empty group")
        object.__setattr__(self, "groups", groups)

    def validate(self, K: int) -> "GroupPartition":
        flat = [k for g in self.groups for k in g]
        if len(flat) != len(set(flat)):
            raise ValidationError(f"partition groups overlap: {self.groups}")
        if sorted(flat) != list(range(K)):
            raise ValidationError(f"partition {self.groups} does not cover streams 0..{K - 1}")
        return self

    @classmethod
    def single(cls, K):
        return cls((tuple(range(K)),))

    @classmethod
    def singletons(cls, K):
        return cls(tuple((k,) for k in range(K)))

    def __len__(self):
        return len(self.groups)


@dataclass
class AnalysisResult:
    algorithm: str
    pvalues: dict
    root: RootPValues
    confidence_set: ConfidenceSet
    alpha: float
    M: int
    seed: int
    score: str
    elapsed: float
    group_pvalues: dict | None = None
    partition: GroupPartition | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def members(self):
        return sorted(self.confidence_set.members)

    def to_dict(self, one_based=True):
        """JSON-ready report. Streams are numbered from 1 when ``one_based``."""
        off = 1 if one_based else 0
        out = {
            "algorithm": self.algorithm,
            "alpha": self.alpha,
            "M": self.M,
            "mode": "exact" if self.M == 0 else "monte-carlo",
            "seed": self.seed,
            "score": self.score,
            "stream_indexing": "1-based" if one_based else "0-based",
            "configs": [
                {"t": list(cfg), "p_value": p} for cfg, p in self.pvalues.items()
            ],
            "streams": [
                {
                    "stream": k + off,
                    "p_value": self.root.pvalues[k],
                    "in_set": k in self.confidence_set,
                    "flag_excluded_by_R": bool(self.root.excluded.get(k, False)),
                }
                for k in sorted(self.root.pvalues)
            ],
            "confidence_set": [k + off for k in self.members],
        }
        if self.partition is not None:
            out["partition"] = [[k + off for k in g] for g in self.partition.groups]
        if self.group_pvalues is not None:
            for entry in out["configs"]:
                entry["group_p_values"] = list(self.group_pvalues[tuple(entry["t"])])
        out.update(self.metadata)
        return out


def group_pvalue(values, streams, t, score: CppScore, M, seed, cap=DEFAULT_GROUP_CAP) -> float:
    """Conformal p-value of ``t[streams]`` on the sub-panel ``values[:, streams]``."""
    streams = tuple(int(k) for k in streams)
    sub_t = tuple(int(t[k]) for k in streams)
    sub = values[:, list(streams)]
    path = as_seed(seed).child(len(streams), *streams, *sub_t)
    return pvalue(score, sub, sub_t, M, path, cap)


def _run_tasks(fn, tasks, n_jobs):
    if n_jobs == 1 or len(tasks) <= 1:
        return [fn(*task) for task in tasks]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=n_jobs)(delayed(fn)(*task) for task in tasks)


def _check_common(X, R: ConstraintSet, alpha, M):
    values = as_array(X)
    n, K = values.shape
    if not 0 < alpha < 1:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    if M < 0:
        raise ValidationError(f"M must be >= 0, got {M}")
    if len(R) == 0:
        raise ValidationError("constraint set is empty")
    if (R.n, R.K) != (n, K):
        raise ValidationError(f"constraint set is for (n, K)=({R.n}, {R.K}), panel is ({n}, {K})")
    return values, n, K


def _group_scores(scores, partition: GroupPartition, K):
    """Resolve the per-group score for every group of ``partition``."""
    out = {}
    for j, g in enumerate(partition.groups):
        if isinstance(scores, CppScore):
            out[g] = scores if len(g) == K else scores.restrict(g)
        elif isinstance(scores, Mapping):
            s = scores[g] if g in scores else scores[j]
            out[g] = s if isinstance(s, CppScore) else single_stream(s)
        else:
            s = scores[j]
            out[g] = s if isinstance(s, CppScore) else single_stream(s)
    return out


def _bonferroni_engine(algorithm, X, R, partition, scores, alpha, M, seed, cap, n_jobs):
    t0 = time.perf_counter()
    values, n, K = _check_common(X, R, alpha, M)
    partition = partition.validate(K)
    per_group = _group_scores(scores, partition, K)
    base = as_seed(seed)

    # one task per distinct (group, sub-config); shared across configs
    tasks = {}
    for cfg in R:
        for g in partition.groups:
            key = (g, tuple(cfg[k] for k in g))
            if key not in tasks:
                tasks[key] = (values, g, cfg, per_group[g], M, base, cap)
    keys = list(tasks)
    results = dict(zip(keys, _run_tasks(group_pvalue, [tasks[k] for k in keys], n_jobs)))

    n_groups = len(partition)
    pvalues, group_pvalues = {}, {}
    for cfg in R:
        gp = [results[(g, tuple(cfg[k] for k in g))] for g in partition.groups]
        group_pvalues[cfg] = tuple(gp)
        pvalues[cfg] = min(1.0, n_groups * min(gp))

    root = aggregate_root(pvalues, root_index_sets(R, K))
    members = [k for k in range(K) if root.pvalues[k] > alpha]
    score_desc = next(iter(per_group.values())).description
    return AnalysisResult(
        algorithm=algorithm,
        pvalues=pvalues,
        root=root,
        confidence_set=ConfidenceSet(members, alpha, K),
        alpha=alpha,
        M=M,
        seed=base.seed,
        score=score_desc,
        elapsed=time.perf_counter() - t0,
        group_pvalues=group_pvalues,
        partition=partition,
    )


def run_croc(X, R: ConstraintSet, S: CppScore, alpha=0.1, M=100, seed=0,
             cap=DEFAULT_GROUP_CAP, n_jobs=1) -> AnalysisResult:
    """CROC confidence set for the root-cause stream.

    ``M = 0`` selects exact enumeration of every split-permutation group.
    """
    K = as_array(X).shape[1]
    res = _bonferroni_engine("croc", X, R, GroupPartition.single(K), S, alpha, M, seed, cap, n_jobs)
    res.group_pvalues = None
    res.partition = None
    return res


def run_conch_agg(X, R: ConstraintSet, scores, alpha=0.1, M=100, seed=0,
                  cap=DEFAULT_GROUP_CAP, n_jobs=1) -> AnalysisResult:
    """Bonferroni combination of single-stream CONCH p-values.

    ``scores`` is either an additive :class:`CppScore` (restricted to each
    stream) or a sequence of ``K`` one-stream scores. Valid under arbitrary
    cross-stream dependence.
    """
    K = as_array(X).shape[1]
    return _bonferroni_engine("conch-agg", X, R, GroupPartition.singletons(K), scores,
                              alpha, M, seed, cap, n_jobs)


def run_croc_dep(X, R: ConstraintSet, partition, scores, alpha=0.1, M=100, seed=0,
                 cap=DEFAULT_GROUP_CAP, n_jobs=1) -> AnalysisResult:
    """CROC within each independent group, Bonferroni across groups."""
    if not isinstance(partition, GroupPartition):
        partition = GroupPartition(tuple(tuple(g) for g in partition))
    return _bonferroni_engine("croc-dep", X, R, partition, scores, alpha, M, seed, cap, n_jobs)


ALGORITHMS = ("croc", "conch-agg", "croc-dep")


def run(algorithm, X, R, score, alpha=0.1, M=100, seed=0, partition=None,
        cap=DEFAULT_GROUP_CAP, n_jobs=1) -> AnalysisResult:
    if algorithm == "croc":
        return run_croc(X, R, score, alpha, M, seed, cap, n_jobs)
    if algorithm == "conch-agg":
        return run_conch_agg(X, R, score, alpha, M, seed, cap, n_jobs)
    if algorithm == "croc-dep":
        if partition is None:
            raise ValidationError("croc-dep needs a partition")
        return run_croc_dep(X, R, partition, score, alpha, M, seed, cap, n_jobs)
    raise ValidationError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")


def bonferroni(pvalues: Sequence[float]) -> float:
    """``min(1, m * min(p))`` over ``m`` p-values."""
    p = np.asarray(pvalues, dtype=float)
    return float(min(1.0, len(p) * p.min()))
