"""Per-stream pre/post-change density models and the changepoint MLE.

Log-densities are floored at ``log(1e-300)`` so that a single outlying point
cannot drive a likelihood to ``-inf``. Log-likelihood ratios are then snapped
to a dyadic grid (``2**-32``): sums of snapped values are exact in double
precision for any realistic panel, so a partial sum does not depend on the
order in which a permutation presents the terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .core import as_array
from .errors import ValidationError

DENSITY_FLOOR = 1e-300
LOG_FLOOR = float(np.log(DENSITY_FLOOR))
VARIANCE_FLOOR = 1e-6
BANDWIDTH_FLOOR = 1e-3
_SNAP = 2.0**32
_HALF_LOG_2PI = 0.5 * np.log(2 * np.pi)


def snap(values):
    """Round to the ``2**-32`` grid (exact scaling, so idempotent)."""
    return np.round(np.asarray(values, dtype=float) * _SNAP) / _SNAP


def gaussian_logpdf(x, mean, sd):
    z = (x - mean) / sd
    return np.maximum(-_HALF_LOG_2PI - np.log(sd) - 0.5 * z * z, LOG_FLOOR)


class DensityModel:
    """Pre- and post-change log-densities for each of ``K`` streams.

    Subclasses implement :meth:`log_f0` and :meth:`log_f1`, which take an
    array whose last axis indexes streams.
    """

    source = "abstract"

    @property
    def K(self) -> int:
        raise NotImplementedError

    def log_f0(self, values):
        raise NotImplementedError

    def log_f1(self, values):
        raise NotImplementedError

    def restrict(self, streams) -> "DensityModel":
        raise NotImplementedError

    def llr_panel(self, values):
        """Snapped ``log f0 - log f1`` for every entry of ``values`` (..., K)."""
        values = np.asarray(values, dtype=float)
        return snap(self.log_f0(values) - self.log_f1(values))

    def llr(self, k: int, x):
        """Log-likelihood ratio of stream ``k`` at ``x`` (not snapped)."""
        if not 0 <= k < self.K:
            raise ValidationError(f"stream {k} outside [0, {self.K})")
        sub = self.restrict([k])
        x = np.asarray(x, dtype=float)
        out = sub.log_f0(x[..., None]) - sub.log_f1(x[..., None])
        out = out[..., 0]
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GaussianModel(DensityModel):
    mean0: np.ndarray
    sd0: np.ndarray
    mean1: np.ndarray
    sd1: np.ndarray
    source: str = "oracle"
    split: tuple | None = None

    def __post_init__(self):
        arrs = [np.atleast_1d(np.asarray(a, dtype=float)) for a in
                (self.mean0, self.sd0, self.mean1, self.sd1)]
        K = max(a.size for a in arrs)
        arrs = [np.broadcast_to(a, (K,)).copy() for a in arrs]
        for a in arrs:
            a.setflags(write=False)
        if np.any(arrs[1] <= 0) or np.any(arrs[3] <= 0):
            raise ValidationError("standard deviations must be positive")
        for name, a in zip(("mean0", "sd0", "mean1", "sd1"), arrs):
            object.__setattr__(self, name, a)

    @property
    def K(self):
        return self.mean0.size

    def log_f0(self, values):
        return gaussian_logpdf(values, self.mean0, self.sd0)

    def log_f1(self, values):
        return gaussian_logpdf(values, self.mean1, self.sd1)

    def restrict(self, streams):
        s = list(streams)
        split = None if self.split is None else tuple(self.split[i] for i in s)
        return GaussianModel(self.mean0[s], self.sd0[s], self.mean1[s], self.sd1[s],
                             self.source, split)


def silverman_bandwidth(x) -> float:
    """``0.9 * min(sd, IQR / 1.34) * m**(-1/5)``, floored at ``BANDWIDTH_FLOOR``."""
    x = np.asarray(x, dtype=float)
    m = x.size
    sd = np.std(x, ddof=1) if m > 1 else 0.0
    q75, q25 = np.percentile(x, [75, 25])
    h = 0.9 * min(sd, (q75 - q25) / 1.34) * m ** (-0.2)
    return max(float(h), BANDWIDTH_FLOOR)


def kde_logpdf(x, sample, bandwidth):
    """Log of a Gaussian-kernel density estimate, floored."""
    x = np.asarray(x, dtype=float)
    sample = np.asarray(sample, dtype=float)
    z = (x[..., None] - sample) / bandwidth
    out = logsumexp(-0.5 * z * z, axis=-1) - np.log(sample.size) - np.log(bandwidth) - _HALF_LOG_2PI
    return np.maximum(out, LOG_FLOOR)


@dataclass(frozen=True)
class KdeModel(DensityModel):
    pre: tuple
    post: tuple
    bw0: tuple
    bw1: tuple
    source: str = "kde-learned"
    split: tuple | None = None

    @property
    def K(self):
        return len(self.pre)

    def _eval(self, values, samples, bws):
        values = np.asarray(values, dtype=float)
        out = np.empty_like(values)
        for k in range(self.K):
            out[..., k] = kde_logpdf(values[..., k], samples[k], bws[k])
        return out

    def log_f0(self, values):
        return self._eval(values, self.pre, self.bw0)

    def log_f1(self, values):
        return self._eval(values, self.post, self.bw1)

    def restrict(self, streams):
        s = list(streams)
        split = None if self.split is None else tuple(self.split[i] for i in s)
        return KdeModel(tuple(self.pre[i] for i in s), tuple(self.post[i] for i in s),
                        tuple(self.bw0[i] for i in s), tuple(self.bw1[i] for i in s),
                        self.source, split)


@dataclass(frozen=True)
class LogitModel(DensityModel):
    """Treats each observation as its own log-likelihood ratio.

    Used for classifier logits: ``log_f0(x) = x`` and ``log_f1(x) = 0``.
    """

    n_streams: int
    source: str = "logits"

    @property
    def K(self):
        return self.n_streams

    def log_f0(self, values):
        return np.asarray(values, dtype=float)

    def log_f1(self, values):
        return np.zeros_like(np.asarray(values, dtype=float))

    def restrict(self, streams):
        return LogitModel(len(list(streams)), self.source)


# -- learning -----------------------------------------------------------------

def profile_split(values, min_segment: int = 2):
    """Gaussian profile-likelihood split of each stream.

    ``values`` has shape ``(..., n, K)``. For each stream and each candidate
    ``t`` in ``[min_segment, n - min_segment]`` a normal distribution is fitted
    to each side (variance floored at ``VARIANCE_FLOOR``); the ``t`` with the
    largest total log-likelihood wins, the smallest on ties.

    Returns ``(split, mean0, var0, mean1, var1)``, each of shape ``(..., K)``.
    """
    x = np.asarray(values, dtype=float)
    n = x.shape[-2]
    if n < 2 * min_segment:
        raise ValidationError(f"need n >= {2 * min_segment} to split, got n={n}")
    x = x - x.mean(axis=-2, keepdims=True)
    zeros = np.zeros(x.shape[:-2] + (1,) + x.shape[-1:])
    c1 = np.concatenate([zeros, np.cumsum(x, axis=-2)], axis=-2)
    c2 = np.concatenate([zeros, np.cumsum(x * x, axis=-2)], axis=-2)
    ts = np.arange(min_segment, n - min_segment + 1)
    left_m = ts[:, None].astype(float)
    right_m = (n - ts)[:, None].astype(float)

    def side(s1, s2, m):
        mean = s1 / m
        var = np.maximum(s2 / m - mean * mean, 0.0)
        v = np.maximum(var, VARIANCE_FLOOR)
        ll = -0.5 * m * (np.log(2 * np.pi * v) + var / v)
        return mean, v, ll

    m0, v0, ll0 = side(c1[..., ts, :], c2[..., ts, :], left_m)
    m1, v1, ll1 = side(c1[..., -1:, :] - c1[..., ts, :], c2[..., -1:, :] - c2[..., ts, :], right_m)
    best = np.argmax(ll0 + ll1, axis=-2)
    pick = lambda a: np.take_along_axis(a, best[..., None, :], axis=-2)[..., 0, :]
    shift = np.asarray(values, dtype=float).mean(axis=-2)
    return ts[best], pick(m0) + shift, pick(v0), pick(m1) + shift, pick(v1)


def fit_gaussian_model(X) -> GaussianModel:
    """Fit a normal pre/post pair to each stream by profile likelihood."""
    arr = as_array(X)
    if arr.shape[0] < 4:
        raise ValidationError(f"need n >= 4 to fit, got n={arr.shape[0]}")
    split, m0, v0, m1, v1 = profile_split(arr)
    return GaussianModel(m0, np.sqrt(v0), m1, np.sqrt(v1), "gaussian-learned",
                         tuple(int(s) for s in split))


def fit_kde_model(X, split=None) -> KdeModel:
    """Gaussian-kernel KDE of each stream's two segments.

    ``split`` gives the pre-change length per stream (an :class:`MleEstimate`,
    a sequence of ints, or None for the Gaussian profile split).
    """
    arr = as_array(X)
    n, K = arr.shape
    if split is None:
        split = profile_split(arr, min_segment=3)[0]
    elif isinstance(split, MleEstimate):
        split = split.xi_hat
    split = [int(s) for s in np.atleast_1d(split)]
    if len(split) != K:
        raise ValidationError(f"split has {len(split)} entries, expected {K}")
    pre, post, bw0, bw1 = [], [], [], []
    for k, s in enumerate(split):
        if s < 3 or n - s < 3:
            raise ValidationError(f"stream {k}: split {s} leaves a segment with < 3 points")
        a, b = arr[:s, k].copy(), arr[s:, k].copy()
        pre.append(a)
        post.append(b)
        bw0.append(silverman_bandwidth(a))
        bw1.append(silverman_bandwidth(b))
    return KdeModel(tuple(pre), tuple(post), tuple(bw0), tuple(bw1), "kde-learned", tuple(split))


# -- maximum likelihood changepoints ------------------------------------------

@dataclass(frozen=True)
class MleEstimate:
    """Per-stream MLE changepoints with their profile log-likelihood curves.

    ``profiles[t - 1, k]`` is the log-likelihood of stream ``k`` when its
    pre-change segment has length ``t``.
    """

    xi_hat: tuple[int, ...]
    profiles: np.ndarray = field(repr=False)


def partial_sums(llr_values):
    """Cumulative sums of snapped LLRs along the time axis (axis -2)."""
    return np.cumsum(llr_values, axis=-2)


def mle_changepoints(X, model: DensityModel) -> MleEstimate:
    """``argmax_t sum_{i<=t} llr_k(X_ik)`` per stream; smallest ``t`` on ties."""
    arr = as_array(X)
    if arr.shape[1] != model.K:
        raise ValidationError(f"panel has {arr.shape[1]} streams, model has {model.K}")
    L = partial_sums(model.llr_panel(arr))
    xi_hat = tuple(int(i) + 1 for i in np.argmax(L, axis=0))
    profiles = L + model.log_f1(arr).sum(axis=0)
    return MleEstimate(xi_hat, profiles)
