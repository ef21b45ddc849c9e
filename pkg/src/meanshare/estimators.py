"""Submission rules and mean estimators.

Submission rules map an agent's collected dataset to the dataset actually
handed to the mechanism. Estimators map the agent's own data plus the
mechanism allocation to a point estimate of the mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mechanisms import Allocation
from .params import ProblemParams

__all__ = [
    "SubsetTooLarge",
    "EmptyInput",
    "DimensionMismatch",
    "Identity",
    "Scale",
    "Shift",
    "SubmitConstant",
    "Subset",
    "FabricateFitGaussian",
    "Empty",
    "ShrinkEll",
    "apply_submission",
    "PlainMeanAll",
    "RecommendedWeighted",
    "FixedWeighted",
    "CleanOnlyMean",
    "OwnDataOnlyMean",
    "PosteriorMean",
    "estimate",
    "shrink_factor",
]


class SubsetTooLarge(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


# ---------------------------------------------------------------------------
# submission rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Identity:
    pass


@dataclass(frozen=True)
class Scale:
    gamma: float


@dataclass(frozen=True)
class Shift:
    delta: float


@dataclass(frozen=True)
class SubmitConstant:
    """Submit |X| copies of the constant vector v (broadcast per dim)."""

    v: float


@dataclass(frozen=True)
class Subset:
    """Keep the first k collected points (deterministic prefix)."""

    k: int


@dataclass(frozen=True)
class FabricateFitGaussian:
    """Fit a Gaussian to the collected points and submit n_fake fresh draws."""

    n_fake: int


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class ShrinkEll:
    """Shrink every point by (1 + sigma^2/(|X| ell^2))^{-1}: the Bayes-optimal
    submission under a centered Gaussian prior with variance ell^2."""

    ell: float


def shrink_factor(n: int, sigma: float, ell: float) -> float:
    return 1.0 / (1.0 + sigma**2 / (n * ell**2))


def apply_submission(rule, X: np.ndarray, p: ProblemParams, stream=None) -> np.ndarray:
    """Produce the submitted dataset Y = f(X)."""
    d = X.shape[1] if X.ndim == 2 else 1
    if isinstance(rule, Identity):
        return X
    if isinstance(rule, Scale):
        return X * rule.gamma
    if isinstance(rule, Shift):
        return X + rule.delta
    if isinstance(rule, SubmitConstant):
        return np.full_like(X, rule.v)
    if isinstance(rule, Subset):
        if rule.k > len(X):
            raise SubsetTooLarge(f"subset size {rule.k} exceeds collected {len(X)}")
        return X[: rule.k]
    if isinstance(rule, FabricateFitGaussian):
        if len(X) == 0:
            raise EmptyInput("cannot fit a Gaussian to an empty sample")
        mu = X.mean(axis=0)
        sd = X.std(axis=0)
        return mu + sd * stream.standard_normal((rule.n_fake, d))
    if isinstance(rule, Empty):
        return np.empty((0, d))
    if isinstance(rule, ShrinkEll):
        if len(X) == 0:
            return X
        return X * shrink_factor(len(X), p.sigma, rule.ell)
    raise TypeError(f"unknown submission rule {rule!r}")


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlainMeanAll:
    pass


@dataclass(frozen=True)
class RecommendedWeighted:
    """Inverse-variance weighted average: clean points at weight 1/sigma^2,
    corrupted points at weight 1/(sigma^2 + eta^2) per dimension."""


@dataclass(frozen=True)
class FixedWeighted:
    """Weighted average with a deterministic corrupted-data variance tau^2
    in place of the allocation's eta^2 (used in the bounded-variance,
    high-dimensional setting)."""

    tau_sq: float


@dataclass(frozen=True)
class CleanOnlyMean:
    pass


@dataclass(frozen=True)
class OwnDataOnlyMean:
    pass


@dataclass(frozen=True)
class PosteriorMean:
    """Posterior mean under a centered Gaussian prior with variance ell^2."""

    ell: float


def _sums(X: np.ndarray, alloc: Allocation, d: int):
    def sc(a):
        return (a.sum(axis=0), len(a)) if len(a) else (np.zeros(d), 0)

    sx, nx = sc(X)
    sd_, nd = sc(alloc.clean)
    sp, np_ = sc(alloc.corrupted)
    return sx + sd_, nx + nd, sp, np_


def _weighted(X, alloc, sigma, corr_var, extra_prec=0.0):
    d = X.shape[1] if X.ndim == 2 else alloc.clean.shape[1]
    s_clean, n_clean, s_corr, n_corr = _sums(X, alloc, d)
    corr_var = np.broadcast_to(np.asarray(corr_var, float), (d,))
    w_corr = np.where(np.isinf(corr_var), 0.0, n_corr / (sigma**2 + corr_var))
    num = s_clean / sigma**2 + np.where(w_corr > 0, s_corr, 0.0) * np.where(
        w_corr > 0, 1.0 / (sigma**2 + corr_var), 0.0
    )
    den = n_clean / sigma**2 + w_corr + extra_prec
    if np.any(den == 0):
        raise EmptyInput("no data with positive weight")
    return num / den


def estimate(choice, X: np.ndarray, Y: np.ndarray, alloc: Allocation, sigma: float) -> np.ndarray:
    """Point estimate of the mean from own data X and allocation alloc.

    Y (the submission) is accepted for interface completeness; none of the
    implemented estimators depend on it.
    """
    d = X.shape[1] if len(X) else (alloc.clean.shape[1] if alloc.clean.ndim == 2 else 1)
    if len(X) and alloc.clean.ndim == 2 and len(alloc.clean) and alloc.clean.shape[1] != X.shape[1]:
        raise DimensionMismatch("X and allocation dimensions differ")

    if isinstance(choice, PlainMeanAll):
        parts = [a for a in (X, alloc.clean, alloc.corrupted) if len(a)]
        if not parts:
            raise EmptyInput("nothing to average")
        return np.concatenate(parts, axis=0).mean(axis=0)
    if isinstance(choice, RecommendedWeighted):
        return _weighted(X, alloc, sigma, alloc.eta_sq)
    if isinstance(choice, FixedWeighted):
        return _weighted(X, alloc, sigma, choice.tau_sq)
    if isinstance(choice, CleanOnlyMean):
        parts = [a for a in (X, alloc.clean) if len(a)]
        if not parts:
            raise EmptyInput("nothing to average")
        return np.concatenate(parts, axis=0).mean(axis=0)
    if isinstance(choice, OwnDataOnlyMean):
        if not len(X):
            raise EmptyInput("no own data")
        return X.mean(axis=0)
    if isinstance(choice, PosteriorMean):
        return _weighted(X, alloc, sigma, alloc.eta_sq, extra_prec=1.0 / choice.ell**2)
    raise TypeError(f"unknown estimator {choice!r}")
