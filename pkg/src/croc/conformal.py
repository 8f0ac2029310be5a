"""Conformal p-values over split-permutation groups.

Three flavours are provided for a single configuration ``t``:

* exact: rank over the whole group (needs enumeration);
* Monte Carlo: ``(1 + #{m : S(pi_m X) <= S(X)}) / (1 + M)`` with ``M``
  uniform draws;
* randomized: strict-rank plus ``u`` times the tie mass, which is exactly
  uniform under the null.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import RootIndexSets, as_array, check_config
from .errors import ValidationError
from .permute import (
    DEFAULT_GROUP_CAP,
    apply_sources,
    as_seed,
    enumerate_sources,
    sample_sources,
)
from .scores import CppScore, single_stream

# panels per score batch; keeps B * n * K floats bounded
_MAX_BATCH_ELEMS = 2_000_000


@dataclass
class PValueTable:
    pvalues: dict
    method: str
    seed: object = None

    def __getitem__(self, t):
        return self.pvalues[tuple(int(v) for v in t)]

    def __contains__(self, t):
        return tuple(int(v) for v in t) in self.pvalues

    def __len__(self):
        return len(self.pvalues)


@dataclass
class RootPValues:
    pvalues: dict
    excluded: dict = field(default_factory=dict)

    def __getitem__(self, k):
        return self.pvalues[k]

    def as_array(self):
        return np.array([self.pvalues[k] for k in sorted(self.pvalues)])


def _scores(S: CppScore, values: np.ndarray, t: np.ndarray, src: np.ndarray) -> np.ndarray:
    n, K = values.shape
    chunk = max(1, _MAX_BATCH_ELEMS // (n * K))
    out = [S.batch(apply_sources(values, src[i:i + chunk]), t) for i in range(0, len(src), chunk)]
    return np.concatenate(out)


def _prepare(X, t):
    values = as_array(X)
    n, K = values.shape
    t = np.asarray(check_config(t, n, K), dtype=np.intp)
    return values, t


def permutation_scores(S: CppScore, X, t, src) -> tuple[float, np.ndarray]:
    """Observed score and the scores of the permuted panels ``src``.

    The identity is evaluated in the same batch as the first permutations.
    """
    values, t = _prepare(X, t)
    ident = np.broadcast_to(np.arange(values.shape[0])[:, None], values.shape)[None]
    scores = _scores(S, values, t, np.concatenate([ident, src]))
    return float(scores[0]), scores[1:]


def exact_scores(S: CppScore, X, t, cap=DEFAULT_GROUP_CAP) -> tuple[float, np.ndarray]:
    values, t = _prepare(X, t)
    src = enumerate_sources(t, values.shape[0], cap)
    scores = _scores(S, values, t, src)
    # enumerate_sources puts the identity first
    return float(scores[0]), scores


def pvalue_exact(S: CppScore, X, t, cap=DEFAULT_GROUP_CAP) -> float:
    obs, scores = exact_scores(S, X, t, cap)
    return int(np.count_nonzero(scores <= obs)) / len(scores)


def mc_draws(t, n, M, seed) -> np.ndarray:
    return sample_sources(t, n, M, as_seed(seed).generator())


def pvalue_mc(S: CppScore, X, t, M: int, seed=0) -> float:
    if M < 0:
        raise ValidationError(f"M must be >= 0, got {M}")
    if M == 0:
        return 1.0
    values, tt = _prepare(X, t)
    src = mc_draws(tt, values.shape[0], M, seed)
    obs, scores = permutation_scores(S, values, tt, src)
    return (1 + int(np.count_nonzero(scores <= obs))) / (1 + M)


def pvalue_randomized(S: CppScore, X, t, u: float, cap=DEFAULT_GROUP_CAP) -> float:
    if not 0.0 <= u <= 1.0:
        raise ValidationError(f"u must lie in [0, 1], got {u}")
    obs, scores = exact_scores(S, X, t, cap)
    size = len(scores)
    less = int(np.count_nonzero(scores < obs))
    ties = int(np.count_nonzero(scores == obs))
    return less / size + u * ties / size


def pvalue(S: CppScore, X, t, M: int, seed=0, cap=DEFAULT_GROUP_CAP) -> float:
    """Exact p-value when ``M == 0``, otherwise the Monte Carlo one."""
    if M == 0:
        return pvalue_exact(S, X, t, cap)
    return pvalue_mc(S, X, t, M, seed)


def pvalue_table(S: CppScore, X, R, M: int, seed=0, cap=DEFAULT_GROUP_CAP) -> PValueTable:
    """p-values for every config of ``R``; config ``j`` uses seed path ``(j,)``."""
    seed = as_seed(seed)
    pv = {cfg: pvalue(S, X, cfg, M, seed.child(j), cap) for j, cfg in enumerate(R)}
    return PValueTable(pv, "exact" if M == 0 else f"mc({M})", seed)


def aggregate_root(pt, I: RootIndexSets) -> RootPValues:
    """``p_(k) = max_{t in I_k} p_t``; an empty ``I_k`` gives 0 and a flag."""
    table = pt.pvalues if isinstance(pt, PValueTable) else pt
    out, excluded = {}, {}
    for k in sorted(I.sets):
        configs = I.sets[k]
        if not configs:
            out[k], excluded[k] = 0.0, True
            continue
        vals = []
        for cfg in configs:
            if cfg not in table:
                raise KeyError(f"p-value table has no entry for config {cfg}")
            vals.append(table[cfg])
        out[k], excluded[k] = float(max(vals)), False
    return RootPValues(out, excluded)


def conch_pvalue(S_single, x, t: int, M: int, seed=0, cap=DEFAULT_GROUP_CAP) -> float:
    """Single-stream split-permutation p-value.

    ``S_single`` is either a :class:`CppScore` for one-stream panels or a
    function ``f(x, t) -> float``. ``M == 0`` means exact enumeration.
    """
    S = S_single if isinstance(S_single, CppScore) else single_stream(S_single)
    x = np.asarray(x, dtype=float).reshape(-1, 1)
    return pvalue(S, x, (int(t),), M, seed, cap)
