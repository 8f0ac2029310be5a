"""Split-permutation groups.

A split permutation for configuration ``t`` shuffles each stream ``k``
separately inside its pre-change rows ``[0, t_k)`` and its post-change rows
``[t_k, n)``. We store a permutation by its *source index* array ``src`` of
shape ``(n, K)``: the permuted panel is ``Y[i, k] = X[src[i, k], k]``, i.e.
``src[:, k]`` is the inverse of ``pi_k``.

Randomness
----------
Every random draw comes from a :class:`RngSeed`, a base seed plus an integer
path. The generator is ``PCG64(SeedSequence(seed, spawn_key=path))``, so a
task that knows its own path reproduces its draws regardless of which worker
runs it or in what order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import as_array, check_config
from .errors import EnumerationTooLarge, ValidationError

DEFAULT_GROUP_CAP = 10**5


@dataclass(frozen=True)
class RngSeed:
    seed: int
    path: tuple[int, ...] = ()

    def child(self, *path) -> "RngSeed":
        return RngSeed(self.seed, self.path + tuple(int(p) for p in path))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed) & (2**64 - 1), spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(ss))


def as_seed(seed) -> RngSeed:
    if isinstance(seed, RngSeed):
        return seed
    return RngSeed(0 if seed is None else int(seed))


@dataclass(frozen=True)
class SplitPermutation:
    src: np.ndarray
    config: tuple[int, ...]

    def __post_init__(self):
        src = np.array(self.src, dtype=np.intp)
        if src.ndim == 1:
            src = src[:, None]
        src.setflags(write=False)
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "config", tuple(int(v) for v in self.config))

    @property
    def n(self):
        return self.src.shape[0]

    @property
    def K(self):
        return self.src.shape[1]

    def forward(self) -> np.ndarray:
        """The maps ``pi_k`` themselves, as an ``(n, K)`` array."""
        fwd = np.empty_like(self.src)
        rows = np.arange(self.n)
        for k in range(self.K):
            fwd[self.src[:, k], k] = rows
        return fwd

    def respects_split(self) -> bool:
        return bool(is_split_permutation(self.src, self.config))

    def compose(self, other: "SplitPermutation") -> "SplitPermutation":
        """``self o other``: apply ``other`` first, then ``self``."""
        src = np.take_along_axis(other.src, self.src, axis=0)
        return SplitPermutation(src, self.config)

    def __eq__(self, other):
        if not isinstance(other, SplitPermutation):
            return NotImplemented
        return self.config == other.config and np.array_equal(self.src, other.src)

    def __hash__(self):
        return hash((self.config, self.src.tobytes()))


def is_split_permutation(src, t) -> bool:
    src = np.asarray(src)
    if src.ndim == 1:
        src = src[:, None]
    n, K = src.shape
    rows = np.arange(n)
    for k in range(K):
        col = src[:, k]
        if not np.array_equal(np.sort(col), rows):
            return False
        pre = rows < t[k]
        if not np.all((col < t[k]) == pre):
            return False
    return True


def identity(t, n: int) -> SplitPermutation:
    t = check_config(t, n)
    return SplitPermutation(np.tile(np.arange(n)[:, None], (1, len(t))), t)


def group_size(t, n: int) -> int:
    """``prod_k t_k! (n - t_k)!`` as an exact integer."""
    t = check_config(t, n)
    size = 1
    for tk in t:
        size *= math.factorial(tk) * math.factorial(n - tk)
    return size


def enumerate_sources(t, n: int, cap: int = DEFAULT_GROUP_CAP) -> np.ndarray:
    """All elements of the group as a ``(|group|, n, K)`` source-index array.

    The identity comes first; the remaining order is the lexicographic order
    of ``itertools`` permutations, stream 0 varying slowest.
    """
    t = check_config(t, n)
    size = group_size(t, n)
    if size > cap:
        raise EnumerationTooLarge(f"split-permutation group for t={t}", size, cap)
    per_stream = []
    for tk in t:
        cols = [
            left + right
            for left in itertools.permutations(range(tk))
            for right in itertools.permutations(range(tk, n))
        ]
        per_stream.append(np.asarray(cols, dtype=np.intp).reshape(len(cols), n))
    out = np.empty((size, n, len(t)), dtype=np.intp)
    for g, combo in enumerate(itertools.product(*(range(len(c)) for c in per_stream))):
        for k, j in enumerate(combo):
            out[g, :, k] = per_stream[k][j]
    return out


def enumerate_group(t, n: int, cap: int = DEFAULT_GROUP_CAP) -> list[SplitPermutation]:
    t = check_config(t, n)
    return [SplitPermutation(s, t) for s in enumerate_sources(t, n, cap)]


def sample_sources(t, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` i.i.d. uniform group elements as source-index arrays.

    Each row gets a uniform key; post-change rows are offset by one so that
    sorting keeps the two segments apart and shuffles uniformly inside each.
    """
    t = np.asarray(check_config(t, n))
    keys = rng.random((size, n, len(t)))
    keys += np.arange(n)[:, None] >= t[None, :]
    return np.argsort(keys, axis=1, kind="stable")


def sample_uniform(t, n: int, seed) -> SplitPermutation:
    rng = as_seed(seed).generator()
    t = check_config(t, n)
    return SplitPermutation(sample_sources(t, n, 1, rng)[0], t)


def apply(pi: SplitPermutation, X):
    """Permute a panel: ``out[i, k] = X[pi_k^{-1}(i), k]``."""
    from .core import StreamPanel

    arr = as_array(X)
    if arr.shape != pi.src.shape:
        raise ValidationError(
            f"permutation shape {pi.src.shape} does not match panel shape {arr.shape}"
        )
    out = np.take_along_axis(arr, pi.src, axis=0)
    return StreamPanel(out) if isinstance(X, StreamPanel) else out


def apply_sources(values: np.ndarray, src: np.ndarray) -> np.ndarray:
    """Batched :func:`apply`: ``values`` is ``(n, K)``, ``src`` is ``(B, n, K)``."""
    return np.take_along_axis(values[None, :, :], src, axis=1)
