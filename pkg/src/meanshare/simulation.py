"""Monte-Carlo verification engine.

Plays full mechanism rounds with one focal agent deviating (or not) while
all other agents follow the recommended profile, and measures the focal
agent's empirical penalty.

The engine is vectorized across replications. Since the non-focal agents
are i.i.d. and honest, their pooled submission is an exchangeable sample,
so the mechanism's uniform without-replacement cross-check subset is
distribution-equal to a prefix of the pooled draw; similarly, the sum of
independent corruption noises collapses to a single Gaussian with the
summed variance. Every named estimator depends on the corrupted set only
through its sum and count, so these collapses are exact, not
approximations. A slow reference path that runs the object-level
mechanisms point by point is provided for cross-validation.

Reproducibility: replications are processed in fixed-size chunks, each
chunk drawing from its own hierarchically-derived stream, and the chunk
results are reduced in index order. Outputs are therefore identical for
any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import estimators as est
from . import mechanisms as mech
from .analytics import penalty_closed_form, sizecheck_penalty
from .params import DistributionSpec, ProblemParams, spawn_stream

__all__ = [
    "Strategy",
    "Scenario",
    "EmpiricalPenalty",
    "recommended_strategy",
    "is_translation_equivariant",
    "run_replications",
    "run_replications_reference",
    "nash_deviation_sweep",
    "ir_check",
    "highdim_nic_check",
    "default_menu",
    "DEFAULT_MU_GRID_SCALE",
]

DEFAULT_MU_GRID_SCALE = (0.0, 5.0, -5.0, 50.0, -50.0)


@dataclass(frozen=True)
class Strategy:
    """An agent's choice: sample count, submission rule, estimator."""

    n: int
    submission: object
    estimator: object
    label: str = ""


@dataclass(frozen=True)
class Scenario:
    params: ProblemParams
    mechanism: str  # "pool" | "size-check" | "corrupt-deploy" | "cross-check"
    focal: Strategy
    distribution: DistributionSpec
    replications: int
    master_seed: int
    mu_grid: tuple[float, ...] = (0.0,)
    epsilon: float | None = None
    alpha: float | None = None
    chunk_size: int = 1 << 16
    workers: int = 1


@dataclass(frozen=True)
class EmpiricalPenalty:
    mean_sq_error: float
    std_error: float
    cost: float
    total: float
    per_mu: tuple[tuple[float, float, float], ...] = field(default=())


def recommended_strategy(p: ProblemParams, mechanism: str = "cross-check",
                         epsilon: float | None = None) -> Strategy:
    """The profile the mechanism asks every agent to follow."""
    if mechanism == "cross-check":
        if p.agents <= 4:
            e = est.PlainMeanAll()
        else:
            e = est.RecommendedWeighted()
    elif mechanism == "corrupt-deploy":
        e = est.PlainMeanAll()  # stands for the deployed sample mean
    else:
        e = est.PlainMeanAll()
    return Strategy(n=p.n_star, submission=est.Identity(), estimator=e, label="recommended")


def is_translation_equivariant(strategy: Strategy) -> bool:
    """Whether the focal profile's risk is independent of the true mean.

    Scaling and constant submissions break translation equivariance; the
    rest commute with adding a constant to all data (corruption variances
    are functions of mean differences)."""
    return not isinstance(strategy.submission, (est.Scale, est.SubmitConstant))


# ---------------------------------------------------------------------------
# vectorized draws and submission statistics
# ---------------------------------------------------------------------------


def _draw(spec: DistributionSpec, stream, shape, mu_offset: float):
    if spec.family == "gaussian":
        pts = stream.standard_normal(shape) * spec.scale
    elif spec.family == "uniform_box":
        pts = stream.uniform(-spec.scale, spec.scale, size=shape)
    else:
        pts = spec.scale * (2.0 * stream.integers(0, 2, size=shape) - 1.0)
    return pts + spec.mean + mu_offset


def _submission_stats(rule, X, p: ProblemParams, stream, d: int):
    """(count, sum (b,d)) of the submitted dataset, or (0, None) if empty.

    Consumes stream draws only for fabrication, in a fixed order."""
    b = X.shape[0] if X is not None else None
    if isinstance(rule, est.Identity):
        return X.shape[1], X.sum(axis=1)
    if isinstance(rule, est.Scale):
        return X.shape[1], rule.gamma * X.sum(axis=1)
    if isinstance(rule, est.Shift):
        return X.shape[1], X.sum(axis=1) + X.shape[1] * rule.delta
    if isinstance(rule, est.SubmitConstant):
        return X.shape[1], np.full((b, d), X.shape[1] * rule.v)
    if isinstance(rule, est.Subset):
        if rule.k > X.shape[1]:
            raise est.SubsetTooLarge(f"subset size {rule.k} exceeds collected {X.shape[1]}")
        return rule.k, X[:, : rule.k].sum(axis=1)
    if isinstance(rule, est.FabricateFitGaussian):
        mu = X.mean(axis=1)
        sd = X.std(axis=1)
        z = stream.standard_normal((b, rule.n_fake, d))
        return rule.n_fake, rule.n_fake * mu + sd * z.sum(axis=1)
    if isinstance(rule, est.Empty):
        return 0, None
    if isinstance(rule, est.ShrinkEll):
        f = est.shrink_factor(X.shape[1], p.sigma, rule.ell)
        return X.shape[1], f * X.sum(axis=1)
    raise TypeError(f"unknown submission rule {rule!r}")


def _weighted_estimate(s_clean, n_clean, s_corr, n_corr, corr_var, sigma_sq,
                       extra_prec: float = 0.0):
    """Vectorized inverse-variance weighted average; corr_var may be +inf
    (per replication and dimension), in which case the corrupted block is
    ignored."""
    with np.errstate(invalid="ignore"):
        w_corr = np.where(np.isinf(corr_var), 0.0, n_corr / (sigma_sq + corr_var))
        contrib = np.where(w_corr > 0, s_corr, 0.0) * np.where(
            w_corr > 0, 1.0 / (sigma_sq + corr_var), 0.0
        )
    num = s_clean / sigma_sq + contrib
    den = n_clean / sigma_sq + w_corr + extra_prec
    return num / den


def _apply_estimator(choice, sum_x, n_x, sum_clean_alloc, n_clean_alloc,
                     sum_corr, n_corr, eta_sq, sigma):
    s_clean = sum_x + sum_clean_alloc
    n_clean = n_x + n_clean_alloc
    s2 = sigma**2
    if isinstance(choice, est.RecommendedWeighted):
        return _weighted_estimate(s_clean, n_clean, sum_corr, n_corr, eta_sq, s2)
    if isinstance(choice, est.FixedWeighted):
        return _weighted_estimate(s_clean, n_clean, sum_corr, n_corr, choice.tau_sq, s2)
    if isinstance(choice, est.PosteriorMean):
        return _weighted_estimate(s_clean, n_clean, sum_corr, n_corr, eta_sq, s2,
                                  extra_prec=1.0 / choice.ell**2)
    if isinstance(choice, est.PlainMeanAll):
        if n_clean + n_corr == 0:
            return np.full_like(s_clean, np.inf)  # no data at all
        return (s_clean + sum_corr) / (n_clean + n_corr)
    if isinstance(choice, est.CleanOnlyMean):
        if n_clean == 0:
            return np.full_like(s_clean, np.inf)
        return s_clean / n_clean
    if isinstance(choice, est.OwnDataOnlyMean):
        if n_x == 0:
            return np.full_like(sum_x, np.inf)
        return sum_x / n_x
    raise TypeError(f"unknown estimator {choice!r}")


def _chunk_sq_errors(sc: Scenario, mu_offset: float, b: int, stream) -> np.ndarray:
    """Squared estimation errors ||est - mu||^2 for one chunk of b rounds."""
    p = sc.params
    d, ns, m = p.dim, p.n_star, p.agents
    spec = sc.distribution
    true_mu = spec.mean + mu_offset
    foc = sc.focal
    s2 = p.sigma**2

    if foc.n > 0:
        X = _draw(spec, stream, (b, foc.n, d), mu_offset)
        sum_x = X.sum(axis=1)
    else:
        X = np.empty((b, 0, d))
        sum_x = np.zeros((b, d))
    n_y, sum_y = _submission_stats(foc.submission, X, p, stream, d)
    mean_y = None if n_y == 0 else sum_y / n_y

    k_pool = (m - 1) * ns
    P = _draw(spec, stream, (b, k_pool, d), mu_offset)
    sum_p = P.sum(axis=1)

    if sc.mechanism == "pool":
        estv = _apply_estimator(foc.estimator, sum_x, foc.n, sum_p, k_pool,
                                np.zeros((b, d)), 0, np.zeros((b, d)), p.sigma)

    elif sc.mechanism == "size-check":
        if n_y >= ns:
            estv = _apply_estimator(foc.estimator, sum_x, foc.n, sum_p, k_pool,
                                    np.zeros((b, d)), 0, np.zeros((b, d)), p.sigma)
        else:
            estv = _apply_estimator(foc.estimator, sum_x, foc.n, np.zeros((b, d)), 0,
                                    np.zeros((b, d)), 0, np.zeros((b, d)), p.sigma)

    elif sc.mechanism == "corrupt-deploy":
        if n_y == 0:
            raise mech.EmptySubmission("corrupt-and-deploy requires a nonempty submission")
        k = mech.k_eps(sc.epsilon)
        beta_sq = mech.beta_sq_published(n_y + k_pool, p, k)
        delta = mean_y - sum_p / k_pool
        eta_sq = beta_sq * delta ** (2 * k)
        z = stream.standard_normal((b, d))
        sum_corr = sum_p + math.sqrt(k_pool) * np.sqrt(eta_sq) * z
        if isinstance(foc.estimator, est.PlainMeanAll):
            # the estimate the mechanism deploys: mean of Y_i and the corrupted pool
            estv = (sum_y + sum_corr) / (n_y + k_pool)
        else:
            estv = _apply_estimator(foc.estimator, sum_x, foc.n, np.zeros((b, d)), 0,
                                    sum_corr, k_pool, eta_sq, p.sigma)

    elif sc.mechanism == "cross-check":
        if m <= 4:
            estv = _apply_estimator(foc.estimator, sum_x, foc.n, sum_p, k_pool,
                                    np.zeros((b, d)), 0, np.zeros((b, d)), p.sigma)
        else:
            take = min(k_pool, ns)
            sum_d = P[:, :take].sum(axis=1)
            n_rest = k_pool - take
            sum_rest = sum_p - sum_d
            if mean_y is None:
                eta_sq = np.full((b, d), np.inf)
            else:
                eta_sq = (sc.alpha**2) * (mean_y - sum_d / take) ** 2
            z = stream.standard_normal((b, d))
            with np.errstate(invalid="ignore"):
                noise_sum = math.sqrt(n_rest) * np.sqrt(eta_sq) * z
            sum_corr = sum_rest + noise_sum
            estv = _apply_estimator(foc.estimator, sum_x, foc.n, sum_d, take,
                                    sum_corr, n_rest, eta_sq, p.sigma)
    else:
        raise ValueError(f"unknown mechanism {sc.mechanism!r}")

    err = estv - true_mu
    return np.einsum("bd,bd->b", err, err)


def run_replications(sc: Scenario, focal_agent: int = 0) -> EmpiricalPenalty:
    """Empirical penalty of the focal agent: max-over-mu mean squared error
    plus the data-collection cost, with the standard error of the
    max-achieving cell."""
    p = sc.params
    mus = (0.0,) if is_translation_equivariant(sc.focal) else tuple(sc.mu_grid)
    n = sc.replications
    chunks = [(ci, min(sc.chunk_size, n - ci * sc.chunk_size))
              for ci in range((n + sc.chunk_size - 1) // sc.chunk_size)]

    per_mu = []
    for mi, mu in enumerate(mus):
        def work(item, _mi=mi, _mu=mu):
            ci, b = item
            stream = spawn_stream(sc.master_seed, focal_agent, _mi, ci)
            sq = _chunk_sq_errors(sc, _mu, b, stream)
            return float(sq.sum()), float((sq * sq).sum())

        if sc.workers > 1:
            with ThreadPoolExecutor(max_workers=sc.workers) as ex:
                parts = list(ex.map(work, chunks))
        else:
            parts = [work(item) for item in chunks]
        s1 = math.fsum(x[0] for x in parts)
        s2 = math.fsum(x[1] for x in parts)
        mse = s1 / n
        var = max(s2 / n - mse * mse, 0.0)
        se = math.sqrt(var / n)
        per_mu.append((mu, mse, se))

    mu_star, mse, se = max(per_mu, key=lambda t: t[1])
    cost = p.cost * sc.focal.n
    return EmpiricalPenalty(mean_sq_error=mse, std_error=se, cost=cost,
                            total=mse + cost, per_mu=tuple(per_mu))


def run_replications_reference(sc: Scenario, focal_agent: int = 0) -> EmpiricalPenalty:
    """Slow reference path: one object-level mechanism round per
    replication. Used to cross-validate the vectorized engine."""
    p = sc.params
    d, ns, m = p.dim, p.n_star, p.agents
    spec = sc.distribution
    foc = sc.focal
    mus = (0.0,) if is_translation_equivariant(foc) else tuple(sc.mu_grid)

    per_mu = []
    for mi, mu in enumerate(mus):
        sqs = np.empty(sc.replications)
        for r in range(sc.replications):
            agent_stream = spawn_stream(sc.master_seed, 1000 + focal_agent, mi, r)
            mech_streams = [spawn_stream(sc.master_seed, 2000 + j, mi, r) for j in range(m)]
            X = _draw(spec, agent_stream, (foc.n, d), mu) if foc.n else np.empty((0, d))
            Y = est.apply_submission(foc.submission, X, p, agent_stream)
            subs = [Y if j == 0 else _draw(spec, agent_stream, (ns, d), mu)
                    for j in range(m)]
            true_mu = spec.mean + mu
            if sc.mechanism == "pool":
                alloc = mech.Allocation(mech.mech_pool(subs)[0], np.empty((0, d)), np.zeros(d))
                v = est.estimate(foc.estimator, X, Y, alloc, p.sigma)
            elif sc.mechanism == "size-check":
                alloc = mech.Allocation(mech.mech_size_check(subs, p)[0],
                                        np.empty((0, d)), np.zeros(d))
                v = est.estimate(foc.estimator, X, Y, alloc, p.sigma)
            elif sc.mechanism == "corrupt-deploy":
                dep = mech.mech_corrupt_deploy(subs, p, sc.epsilon, mech_streams[0])[0]
                if isinstance(foc.estimator, est.PlainMeanAll):
                    v = dep.value
                else:
                    alloc = mech.Allocation(np.empty((0, d)), dep.corrupted, dep.eta_sq)
                    v = est.estimate(foc.estimator, X, Y, alloc, p.sigma)
            elif sc.mechanism == "cross-check":
                alloc = mech.mech_cross_check_corrupt(subs, p, sc.alpha, mech_streams)[0]
                v = est.estimate(foc.estimator, X, Y, alloc, p.sigma)
            else:
                raise ValueError(f"unknown mechanism {sc.mechanism!r}")
            e = v - true_mu
            sqs[r] = float(e @ e)
        mse = sqs.mean()
        se = sqs.std() / math.sqrt(len(sqs))
        per_mu.append((mu, float(mse), float(se)))

    mu_star, mse, se = max(per_mu, key=lambda t: t[1])
    cost = p.cost * foc.n
    return EmpiricalPenalty(mse, se, cost, mse + cost, tuple(per_mu))


# ---------------------------------------------------------------------------
# experiment drivers
# ---------------------------------------------------------------------------


def default_menu(p: ProblemParams, estimator=None) -> list[Strategy]:
    """The fixed deviation menu swept by the equilibrium checks: sample-count
    deviations, submission manipulations, and estimator swaps."""
    if estimator is None:
        estimator = est.RecommendedWeighted()
    ns = p.n_star
    half = max(ns // 2, 1)
    menu = [
        Strategy(0, est.Identity(), estimator, "n=0"),
        Strategy(half, est.Identity(), estimator, f"n={half}"),
        Strategy(2 * ns, est.Identity(), estimator, f"n={2 * ns}"),
        Strategy(ns, est.Scale(0.5), estimator, "scale 0.5"),
        Strategy(ns, est.Shift(1.0), estimator, "shift 1"),
        Strategy(ns, est.SubmitConstant(0.0), estimator, "constant 0"),
        Strategy(ns, est.Subset(half), estimator, f"subset {half}"),
        Strategy(1, est.FabricateFitGaussian(ns), estimator, f"fabricate {ns} from 1"),
        Strategy(1, est.Empty(), estimator, "submit nothing"),
        Strategy(ns, est.Identity(), est.PlainMeanAll(), "estimator: plain mean"),
        Strategy(ns, est.Identity(), est.CleanOnlyMean(), "estimator: clean only"),
    ]
    return menu


@dataclass(frozen=True)
class SweepRow:
    strategy: Strategy
    penalty: EmpiricalPenalty
    closed_form: float | None
    profitable: bool


def nash_deviation_sweep(sc: Scenario, menu: list[Strategy] | None = None) -> list[SweepRow]:
    """Run the focal agent through the deviation menu (others fixed at the
    recommended profile) and flag any entry that beats the recommended
    strategy by more than 3 combined standard errors. The first row is the
    recommended profile itself."""
    p = sc.params
    if menu is None:
        menu = default_menu(p, recommended_strategy(p, sc.mechanism).estimator)
    base_strategy = recommended_strategy(p, sc.mechanism, sc.epsilon)
    base = run_replications(replace(sc, focal=base_strategy))

    def closed(s: Strategy):
        if sc.mechanism == "cross-check" and p.agents >= 5 and \
                isinstance(s.submission, est.Identity) and \
                isinstance(s.estimator, est.RecommendedWeighted) and s.n > 0:
            return penalty_closed_form(s.n, p, sc.alpha)
        if sc.mechanism == "size-check" and isinstance(s.submission, est.Identity):
            return sizecheck_penalty(s.n, p)
        return None

    rows = [SweepRow(base_strategy, base, closed(base_strategy), False)]
    for s in menu:
        pen = run_replications(replace(sc, focal=s))
        gap = base.total - pen.total
        tol = 3.0 * math.hypot(base.std_error, pen.std_error)
        rows.append(SweepRow(s, pen, closed(s), gap > tol))
    return rows


def ir_check(sc: Scenario) -> dict:
    """Participating penalty at the recommended profile vs. the best
    standalone penalty 2 sigma sqrt(c d)."""
    p = sc.params
    standalone = 2 * p.sigma * math.sqrt(p.cost * p.dim)
    pen = run_replications(replace(sc, focal=recommended_strategy(p, sc.mechanism, sc.epsilon)))
    return {
        "participating": pen.total,
        "std_error": pen.std_error,
        "standalone": standalone,
        "ok": pen.total < standalone,
    }


def highdim_nic_check(sc: Scenario, menu: list[Strategy] | None = None) -> dict:
    """Approximate-equilibrium check for the bounded-variance setting:
    recommended penalty <= (1 + 5/m) * (menu minimum), within 3 combined
    standard errors, plus the social-penalty ratio proxy against the
    2 + 10/m bound."""
    p = sc.params
    tau_sq = 2 * sc.alpha**2 * p.sigma**2 / p.n_star
    fixed = est.FixedWeighted(tau_sq)
    base_strategy = Strategy(p.n_star, est.Identity(), fixed, "recommended")
    ns = p.n_star
    half = max(ns // 2, 1)
    if menu is None:
        # zero-collection entries are excluded: with the fixed tau^2 weighting
        # the infinitely-corrupted allocation makes their risk unbounded
        menu = [
            Strategy(half, est.Identity(), fixed, f"n={half}"),
            Strategy(2 * ns, est.Identity(), fixed, f"n={2 * ns}"),
            Strategy(ns, est.Scale(0.5), fixed, "scale 0.5"),
            Strategy(ns, est.Shift(1.0), fixed, "shift 1"),
            Strategy(ns, est.Subset(half), fixed, f"subset {half}"),
            Strategy(1, est.FabricateFitGaussian(ns), fixed, f"fabricate {ns} from 1"),
        ]
    base = run_replications(replace(sc, focal=base_strategy))
    entries = [(s, run_replications(replace(sc, focal=s))) for s in menu]
    best_s, best = min(entries, key=lambda t: t[1].total)
    ratio = base.total / best.total
    bound = 1 + 5.0 / p.agents
    slack = 3.0 * math.hypot(base.std_error, best.std_error) / best.total
    pos_proxy = p.agents * base.total / (2 * p.sigma * math.sqrt(p.cost * p.agents * p.dim))
    return {
        "recommended": base.total,
        "best_deviation": best.total,
        "best_label": best_s.label,
        "ratio": ratio,
        "bound": bound,
        "ok": ratio <= bound + slack,
        "pos_proxy": pos_proxy,
        "pos_bound": 2 + 10.0 / p.agents,
        "pos_ok": pos_proxy < 2 + 10.0 / p.agents,
        "rows": entries,
    }
