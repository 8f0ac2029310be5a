"""Data containers: stream panels, changepoint configurations and constraint sets.

Conventions
-----------
Streams are indexed from 0 inside the library. A changepoint ``t_k`` is the
length of the pre-change segment of stream ``k``, so ``1 <= t_k <= n`` and
``t_k == n`` means stream ``k`` never changes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import EnumerationTooLarge, ValidationError

DEFAULT_GRID_CAP = 10**6


@dataclass(frozen=True)
class StreamPanel:
    """An ``n x K`` array of scalar observations, one column per stream."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float, copy=True)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValidationError(f"panel must be 2-D (n, K), got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"panel must be non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("panel contains NaN or infinite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def K(self) -> int:
        return self.values.shape[1]

    def stream(self, k: int) -> np.ndarray:
        return self.values[:, k]

    def subpanel(self, streams) -> "StreamPanel":
        return StreamPanel(self.values[:, list(streams)])

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, StreamPanel):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.values.shape, self.values.tobytes()))


def as_array(X) -> np.ndarray:
    """Return the raw ``(n, K)`` float array behind a panel or array-like."""
    if isinstance(X, StreamPanel):
        return X.values
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


def check_config(t, n: int, K: int | None = None) -> tuple[int, ...]:
    """Validate a changepoint vector and return it as a tuple of ints."""
    cfg = tuple(int(v) for v in np.atleast_1d(t))
    if K is not None and len(cfg) != K:
        raise ValidationError(f"config {cfg} has {len(cfg)} entries, expected K={K}")
    for v in cfg:
        if not 1 <= v <= n:
            raise ValidationError(f"config {cfg} has entry {v} outside [1, {n}]")
    return cfg


def root_of(t) -> int | None:
    """Index of the strict unique minimum of ``t``, or None on ties."""
    t = tuple(t)
    m = min(t)
    hits = [k for k, v in enumerate(t) if v == m]
    return hits[0] if len(hits) == 1 else None


@dataclass(frozen=True)
class ConstraintSet:
    """Finite ordered set of admissible changepoint configurations."""

    n: int
    K: int
    configs: tuple[tuple[int, ...], ...]
    builder: str = "explicit"

    def __post_init__(self):
        configs = tuple(check_config(c, self.n, self.K) for c in self.configs)
        if len(set(configs)) != len(configs):
            raise ValidationError("constraint set contains duplicate configurations")
        object.__setattr__(self, "configs", configs)

    def __len__(self):
        return len(self.configs)

    def __iter__(self):
        return iter(self.configs)

    def __contains__(self, t):
        return tuple(int(v) for v in t) in set(self.configs)

    def union(self, other: "ConstraintSet") -> "ConstraintSet":
        if (self.n, self.K) != (other.n, other.K):
            raise ValidationError("cannot merge constraint sets with different (n, K)")
        seen = dict.fromkeys(self.configs)
        seen.update(dict.fromkeys(other.configs))
        return ConstraintSet(self.n, self.K, tuple(seen), f"{self.builder}|{other.builder}")


def _check_dims(n, K):
    if n < 2:
        raise ValidationError(f"need n >= 2, got {n}")
    if K < 1:
        raise ValidationError(f"need K >= 1, got {K}")


def build_constraint_full_grid(n: int, K: int, cap: int = DEFAULT_GRID_CAP) -> ConstraintSet:
    """All ``n**K`` configurations in lexicographic order."""
    _check_dims(n, K)
    size = n**K
    if size > cap:
        raise EnumerationTooLarge("full-grid constraint set", size, cap)
    configs = tuple(itertools.product(range(1, n + 1), repeat=K))
    return ConstraintSet(n, K, configs, "grid")


def build_constraint_common(n: int, K: int) -> ConstraintSet:
    """Synchronised changes: ``{(t, ..., t) : t in [n]}``."""
    _check_dims(n, K)
    return ConstraintSet(n, K, tuple((t,) * K for t in range(1, n + 1)), "common")


def build_constraint_one_early(n: int, K: int, early: int, late: int) -> ConstraintSet:
    """One stream changes at ``early``, every other stream at ``late``.

    The ``k``-th configuration (0-based) is the one with stream ``k`` early.
    """
    _check_dims(n, K)
    if not (1 <= early < late <= n):
        raise ValidationError(
            f"need 1 <= early < late <= n, got early={early}, late={late}, n={n}"
        )
    configs = []
    for k in range(K):
        cfg = [late] * K
        cfg[k] = early
        configs.append(tuple(cfg))
    return ConstraintSet(n, K, tuple(configs), f"one-early:{early},{late}")


def build_constraint_explicit(n: int, K: int, configs) -> ConstraintSet:
    return ConstraintSet(n, K, tuple(tuple(int(v) for v in c) for c in configs), "explicit")


@dataclass(frozen=True)
class RootIndexSets:
    """For each stream ``k`` the configurations in which ``k`` changes strictly first."""

    sets: dict[int, tuple[tuple[int, ...], ...]]
    tied: tuple[tuple[int, ...], ...] = ()

    def __getitem__(self, k):
        return self.sets[k]

    @property
    def K(self):
        return len(self.sets)


def root_index_sets(R: ConstraintSet, K: int | None = None) -> RootIndexSets:
    """Split ``R`` into the index sets ``I_k``.

    Configurations whose minimum is shared by several streams belong to no
    ``I_k`` and are reported in ``tied``.
    """
    K = R.K if K is None else K
    if len(R) == 0:
        raise ValidationError("constraint set is empty")
    sets: dict[int, list] = {k: [] for k in range(K)}
    tied = []
    for cfg in R:
        k = root_of(cfg)
        if k is None:
            tied.append(cfg)
        else:
            sets[k].append(cfg)
    return RootIndexSets({k: tuple(v) for k, v in sets.items()}, tuple(tied))


@dataclass(frozen=True)
class ConfidenceSet:
    members: frozenset[int]
    alpha: float
    K: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(m) for m in self.members))
        if not 0 < self.alpha < 1:
            raise ValidationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.K and any(not 0 <= m < self.K for m in self.members):
            raise ValidationError(f"members {sorted(self.members)} not inside [0, {self.K})")

    def __contains__(self, k):
        return k in self.members

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members))
