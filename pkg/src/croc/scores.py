"""Changepoint-plausibility (CPP) scores.

A score maps a panel and a candidate configuration ``t`` to a real number,
larger meaning ``t`` is more plausible. Every score here is evaluated in
batches: ``score.batch(values, t)`` takes ``values`` of shape ``(B, n, K)``
and returns ``B`` scores. The single-panel call ``score(X, t)`` goes through
the same path so observed and permuted scores are computed identically.

The likelihood-ratio family works on partial sums
``L_k(s) = sum_{i<=s} llr_k(x_ik)``::

    learned    sum_k L_k(t_k) - max_s L_k(s)        (MLE refitted on the input)
    frozen     sum_k L_k(t_k) - L_k(xi_hat_k)       (xi_hat fixed in advance)
    opt        sum_k L_k(t_k) - L_k(xi_k)           (true changepoints known)
"""

from __future__ import annotations

from collections.abc import Callable, Mapping

import numpy as np
from scipy.special import logsumexp

from .core import as_array, root_of
from .densities import (
    _HALF_LOG_2PI,
    BANDWIDTH_FLOOR,
    LOG_FLOOR,
    VARIANCE_FLOOR,
    DensityModel,
    LogitModel,
    MleEstimate,
    gaussian_logpdf,
    partial_sums,
    profile_split,
    snap,
)
from .errors import ValidationError


class CppScore:
    description = "score"

    def batch(self, values: np.ndarray, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, X, t) -> float:
        arr = as_array(X)
        return float(self.batch(arr[None], np.asarray(t, dtype=np.intp))[0])

    def restrict(self, streams) -> "CppScore":
        """Score for the sub-panel made of ``streams`` (additive scores only)."""
        raise ValidationError(f"score {self.description!r} cannot be restricted to a stream subset")

    def transform(self, f: Callable, description: str | None = None) -> "CppScore":
        return TransformedScore(self, f, description)

    def __repr__(self):
        return f"<{type(self).__name__} {self.description}>"


class TransformedScore(CppScore):
    def __init__(self, base: CppScore, f: Callable, description=None):
        self.base = base
        self.f = f
        self.description = description or f"f({base.description})"

    def batch(self, values, t):
        return np.asarray(self.f(self.base.batch(values, t)), dtype=float)

    def restrict(self, streams):
        return TransformedScore(self.base.restrict(streams), self.f, self.description)


class PartialSumScore(CppScore):
    """Likelihood-ratio score built from partial sums of per-observation LLRs.

    Parameters
    ----------
    anchor : sequence of int or None
        Reference changepoints. ``None`` re-estimates them on every evaluated
        panel (the maximiser of ``L_k``).
    """

    def __init__(self, anchor=None, description="llr"):
        self.anchor = None if anchor is None else np.asarray(anchor, dtype=np.intp)
        self.description = description

    def llr_values(self, values: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def batch(self, values, t):
        values = np.asarray(values, dtype=float)
        t = np.asarray(t, dtype=np.intp)
        L = partial_sums(self.llr_values(values))
        cols = np.arange(L.shape[-1])
        at_t = L[:, t - 1, cols]
        if self.anchor is None:
            ref = L.max(axis=1)
        else:
            ref = L[:, self.anchor - 1, cols]
        return (at_t - ref).sum(axis=1)

    def _anchor_subset(self, streams):
        return None if self.anchor is None else self.anchor[list(streams)]


class ModelScore(PartialSumScore):
    """LLR score with a fixed density model."""

    def __init__(self, model: DensityModel, anchor=None, description="llr"):
        super().__init__(anchor, description)
        self.model = model

    def llr_values(self, values):
        return self.model.llr_panel(values)

    def restrict(self, streams):
        return ModelScore(self.model.restrict(streams), self._anchor_subset(streams), self.description)


class GaussianRefitScore(PartialSumScore):
    """Learned LLR score whose Gaussian densities are refitted on each input panel.

    The profile-likelihood split depends on row order, so fitting once on the
    observed panel and reusing the fit on permuted panels would break the
    exchangeability argument behind the p-values. Refitting keeps the score a
    fixed function of its input.
    """

    def __init__(self, description="gaussian-profile"):
        super().__init__(None, description)

    def llr_values(self, values):
        _, m0, v0, m1, v1 = profile_split(values)
        x = values
        lf0 = gaussian_logpdf(x, m0[:, None, :], np.sqrt(v0)[:, None, :])
        lf1 = gaussian_logpdf(x, m1[:, None, :], np.sqrt(v1)[:, None, :])
        return snap(lf0 - lf1)

    def restrict(self, streams):
        return self


def _segment_moments(values, t):
    """Mean and floored variance of each stream's two segments under ``t``.

    Sums run over snapped values so they are exact, hence identical for
    every panel in the split-permutation orbit of ``values``.
    """
    x = snap(values)
    n = x.shape[1]
    pre = np.arange(n)[None, :, None] < t[None, None, :]
    m0 = t.astype(float)
    m1 = (n - t).astype(float)

    def moments(mask, m):
        s1 = np.where(mask, x, 0.0).sum(axis=1)
        s2 = np.where(mask, snap(x * x), 0.0).sum(axis=1)
        safe = np.maximum(m, 1.0)
        mean = s1 / safe
        var = np.maximum(s2 / safe - mean * mean, 0.0)
        return mean, var

    mu0, var0 = moments(pre, m0)
    mu1, var1 = moments(~pre, m1)
    mu_all, var_all = moments(np.ones_like(pre), np.full_like(m0, n))
    # segments too short to estimate a spread borrow the whole-stream one
    var0 = np.where(m0 < 2, var_all, var0)
    var1 = np.where(m1 < 2, var_all, var1)
    mu1 = np.where(m1 < 1, mu0, mu1)
    var1 = np.where(m1 < 1, var0, var1)
    return mu0, np.maximum(var0, VARIANCE_FLOOR), mu1, np.maximum(var1, VARIANCE_FLOOR)


class GaussianSegmentScore(PartialSumScore):
    """Learned LLR score with Gaussian densities fitted to the segments of ``t``.

    For candidate ``t`` the pre-change density of stream ``k`` is the normal
    fit to rows ``[0, t_k)`` of the evaluated panel and the post-change one
    the fit to rows ``[t_k, n)``. These fits are unchanged by any split
    permutation of ``t``, so only the MLE part of the score reacts to the
    shuffling.
    """

    def __init__(self, description="gaussian"):
        super().__init__(None, description)

    def batch(self, values, t):
        self._t = np.asarray(t, dtype=np.intp)
        return super().batch(values, t)

    def llr_values(self, values):
        mu0, v0, mu1, v1 = _segment_moments(values, self._t)
        lf0 = gaussian_logpdf(values, mu0[:, None, :], np.sqrt(v0)[:, None, :])
        lf1 = gaussian_logpdf(values, mu1[:, None, :], np.sqrt(v1)[:, None, :])
        return snap(lf0 - lf1)

    def restrict(self, streams):
        return self


def _batch_silverman(samples):
    """Silverman bandwidth along the last axis, floored."""
    m = samples.shape[-1]
    if m < 2:
        return np.full(samples.shape[:-1], BANDWIDTH_FLOOR)
    sd = np.std(samples, axis=-1, ddof=1)
    q75, q25 = np.percentile(samples, [75, 25], axis=-1)
    h = 0.9 * np.minimum(sd, (q75 - q25) / 1.34) * m ** (-0.2)
    return np.maximum(h, BANDWIDTH_FLOOR)


def _batch_kde_logpdf(x, samples, h):
    """``x`` (B, n), ``samples`` (B, m), ``h`` (B,) -> (B, n)."""
    z = (x[:, :, None] - samples[:, None, :]) / h[:, None, None]
    out = logsumexp(-0.5 * z * z, axis=-1) - np.log(samples.shape[1]) - np.log(h)[:, None] - _HALF_LOG_2PI
    return np.maximum(out, LOG_FLOOR)


class KdeSegmentScore(GaussianSegmentScore):
    """Learned LLR score with KDE densities fitted to the segments of ``t``.

    Segment samples are sorted before use so the estimate is a function of
    the segment multiset only. Segments with fewer than three points fall
    back to the segment-wise Gaussian fit.
    """

    def __init__(self, description="kde"):
        PartialSumScore.__init__(self, None, description)

    def llr_values(self, values):
        t = self._t
        n = values.shape[1]
        gauss = GaussianSegmentScore.llr_values(self, values)
        out = np.empty_like(values)
        for k, tk in enumerate(t):
            if tk < 3 or n - tk < 3:
                out[:, :, k] = gauss[:, :, k]
                continue
            x = values[:, :, k]
            a = np.sort(x[:, :tk], axis=1)
            b = np.sort(x[:, tk:], axis=1)
            out[:, :, k] = snap(_batch_kde_logpdf(x, a, _batch_silverman(a))
                                - _batch_kde_logpdf(x, b, _batch_silverman(b)))
        return out


def learned_score(model: DensityModel, description=None) -> ModelScore:
    """Learned CPP score: the MLE changepoints are recomputed on every panel.

    With the true densities this is the oracle LLR score.
    """
    return ModelScore(model, None, description or f"learned[{model.source}]")


def oracle_score(model: DensityModel) -> ModelScore:
    return learned_score(model, "oracle")


def oracle_opt_score(model: DensityModel, xi) -> ModelScore:
    """Optimal score for known densities and known true changepoints ``xi``."""
    xi = np.asarray(xi, dtype=np.intp)
    if xi.size != model.K:
        raise ValidationError(f"xi has {xi.size} entries, model has {model.K} streams")
    return ModelScore(model, xi, "opt")


def frozen_score(model: DensityModel, xi_hat_fixed) -> ModelScore:
    """Same form as :func:`learned_score` but with ``xi_hat`` frozen."""
    if isinstance(xi_hat_fixed, MleEstimate):
        xi_hat_fixed = xi_hat_fixed.xi_hat
    return ModelScore(model, np.asarray(xi_hat_fixed, dtype=np.intp), f"frozen[{model.source}]")


def gaussian_score() -> GaussianSegmentScore:
    return GaussianSegmentScore()


def kde_score() -> KdeSegmentScore:
    return KdeSegmentScore()


def gaussian_profile_score() -> GaussianRefitScore:
    return GaussianRefitScore("gaussian-profile")


def logit_score(K: int) -> ModelScore:
    """Learned score that reads each panel entry as a precomputed LLR (logit)."""
    return ModelScore(LogitModel(K), None, "logits")


class ConstantScore(CppScore):
    def __init__(self, value=0.0):
        self.value = float(value)
        self.description = f"constant({self.value:g})"

    def batch(self, values, t):
        return np.full(len(values), self.value)

    def restrict(self, streams):
        return self


def constant_score(value=0.0) -> ConstantScore:
    return ConstantScore(value)


class FunctionScore(CppScore):
    """Wrap a plain function ``f(values: (n, K) array, t: tuple) -> float``."""

    def __init__(self, f: Callable, description="function"):
        self.f = f
        self.description = description

    def batch(self, values, t):
        tt = tuple(int(v) for v in t)
        return np.array([float(self.f(v, tt)) for v in values])


class WrapperScore(CppScore):
    """``S(x, t) = 1{argmin_k t_k in C(x)}`` for a set-valued procedure ``C``."""

    def __init__(self, C: Callable, description="wrapper"):
        self.C = C
        self.description = description

    def batch(self, values, t):
        k = root_of(t)
        if k is None:
            raise ValidationError(f"config {tuple(int(v) for v in t)} has no unique minimum")
        return np.array([1.0 if k in set(self.C(v)) else 0.0 for v in values])


def wrapper_score(C: Callable) -> WrapperScore:
    return WrapperScore(C)


class TableScore(CppScore):
    """Dispatch to a per-configuration entry.

    Each entry is either a :class:`CppScore` or a function of the ``(n, K)``
    panel array returning a float.
    """

    def __init__(self, entries: Mapping, description="table"):
        self.entries = {tuple(int(v) for v in k): v for k, v in entries.items()}
        self.description = description

    def batch(self, values, t):
        key = tuple(int(v) for v in t)
        try:
            entry = self.entries[key]
        except KeyError:
            raise KeyError(f"score table has no entry for config {key}") from None
        if isinstance(entry, CppScore):
            return entry.batch(values, t)
        return np.array([float(entry(v)) for v in values])


def table_score(entries: Mapping) -> TableScore:
    return TableScore(entries)


def single_stream(f: Callable, description="conch") -> CppScore:
    """Adapt a one-stream score ``f(x: 1-D array, t: int) -> float``."""
    return FunctionScore(lambda v, t: f(v[:, 0], t[0]), description)


__all__ = [
    "CppScore", "TransformedScore", "PartialSumScore", "ModelScore", "GaussianRefitScore",
    "ConstantScore", "FunctionScore", "WrapperScore", "TableScore",
    "learned_score", "oracle_score", "oracle_opt_score", "frozen_score", "gaussian_score",
    "GaussianSegmentScore", "KdeSegmentScore", "gaussian_profile_score",
    "kde_score", "logit_score", "constant_score", "wrapper_score", "table_score",
    "single_stream",
]
