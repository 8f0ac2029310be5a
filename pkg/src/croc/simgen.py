"""Seeded Gaussian mean-shift panels.

Normal variates are produced by inverse-CDF sampling: a 53-bit integer ``j``
from ``PCG64(SeedSequence(seed))`` becomes ``u = (j + 0.5) / 2**53`` and then
``scipy.special.ndtri(u)``. Both steps are deterministic, so a given seed
gives a bit-identical panel on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtri

from .core import StreamPanel
from .densities import GaussianModel
from .engine import GroupPartition
from .errors import ValidationError


@dataclass(frozen=True)
class GaussianShiftSpec:
    """Independent unit-variance streams with one mean shift each.

    ``root`` is 0-based. Pre-change means are equi-spaced on
    ``[mean_lo, mean_hi]`` in stream order.
    """

    n: int = 80
    K: int = 10
    root: int = 1
    early: int = 20
    late: int = 50
    mean_lo: float = -2.0
    mean_hi: float = 3.0
    delta_root: float = 1.0
    delta_other: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.early < self.late <= self.n:
            raise ValidationError(f"need 1 <= early < late <= n, got {self.early}, {self.late}, {self.n}")
        if not 0 <= self.root < self.K:
            raise ValidationError(f"root {self.root} outside [0, {self.K})")

    @property
    def xi(self) -> tuple[int, ...]:
        return tuple(self.early if k == self.root else self.late for k in range(self.K))

    def pre_means(self) -> np.ndarray:
        if self.K == 1:
            return np.array([self.mean_lo])
        return self.mean_lo + (self.mean_hi - self.mean_lo) * np.arange(self.K) / (self.K - 1)

    def post_means(self) -> np.ndarray:
        shift = np.full(self.K, self.delta_other)
        shift[self.root] = self.delta_root
        return self.pre_means() + shift

    def oracle_model(self) -> GaussianModel:
        return GaussianModel(self.pre_means(), 1.0, self.post_means(), 1.0, "oracle")

    def with_seed(self, seed):
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class CorrelatedSpec(GaussianShiftSpec):
    """Gaussian shifts with correlated noise inside disjoint stream pairs."""

    pairs: tuple = ((0, 1), (2, 3), (4, 5))
    rho: float = 0.65
    groups: tuple = field(default=((0, 2, 4), (1, 3, 5)))

    def __post_init__(self):
        super().__post_init__()
        flat = [k for p in self.pairs for k in p]
        if len(flat) != len(set(flat)) or any(len(p) != 2 for p in self.pairs):
            raise ValidationError(f"pairs must be disjoint 2-tuples, got {self.pairs}")
        if any(not 0 <= k < self.K for k in flat):
            raise ValidationError(f"pairs {self.pairs} reference streams outside [0, {self.K})")
        if not -1 < self.rho < 1:
            raise ValidationError(f"rho must lie in (-1, 1), got {self.rho}")


def setting1(**kw) -> GaussianShiftSpec:
    """Moderate signal: root shift 1, other shifts 2."""
    return GaussianShiftSpec(**kw)


def setting2(**kw) -> GaussianShiftSpec:
    """Weak signal: root shift 0.25, other shifts 0.75."""
    kw.setdefault("delta_root", 0.25)
    kw.setdefault("delta_other", 0.75)
    return GaussianShiftSpec(**kw)


def correlated_pairs(**kw) -> CorrelatedSpec:
    """Six streams, n=50, pairs (1,2), (3,4), (5,6) correlated at 0.65."""
    defaults = dict(n=50, K=6, root=1, early=15, late=30, mean_lo=-3.0, mean_hi=3.0,
                    delta_root=1.0, delta_other=1.5)
    defaults.update(kw)
    return CorrelatedSpec(**defaults)


def standard_normal(rng: np.random.Generator, shape) -> np.ndarray:
    j = rng.integers(0, 2**53, size=shape, dtype=np.int64)
    return ndtri((j + 0.5) / 2.0**53)


def _rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def _means(spec: GaussianShiftSpec) -> np.ndarray:
    rows = np.arange(spec.n)[:, None]
    xi = np.asarray(spec.xi)[None, :]
    return np.where(rows < xi, spec.pre_means()[None, :], spec.post_means()[None, :])


def gen_setting(spec: GaussianShiftSpec):
    """Draw a panel; returns ``(panel, xi, oracle_model)``."""
    noise = standard_normal(_rng(spec.seed), (spec.n, spec.K))
    return StreamPanel(_means(spec) + noise), spec.xi, spec.oracle_model()


def gen_correlated(spec: CorrelatedSpec):
    """Draw a panel with correlated pair noise.

    Returns ``(panel, xi, oracle_model, partition)``. At each time index the
    noise of a pair is ``(z1, rho z1 + sqrt(1 - rho^2) z2)``, i.e. the Cholesky
    factor of the 2x2 correlation matrix applied to independent normals.
    """
    z = standard_normal(_rng(spec.seed), (spec.n, spec.K))
    noise = z.copy()
    c = np.sqrt(1.0 - spec.rho**2)
    for a, b in spec.pairs:
        noise[:, b] = spec.rho * z[:, a] + c * z[:, b]
    partition = GroupPartition(spec.groups).validate(spec.K)
    return StreamPanel(_means(spec) + noise), spec.xi, spec.oracle_model(), partition


def generate(spec):
    """Dispatch on the spec type; always returns a 4-tuple (partition may be None)."""
    if isinstance(spec, CorrelatedSpec):
        return gen_correlated(spec)
    return (*gen_setting(spec), None)


PRESETS = {"setting1": setting1, "setting2": setting2, "correlated": correlated_pairs}
