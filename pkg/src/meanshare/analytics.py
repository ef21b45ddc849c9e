"""Closed-form and quadrature-based penalty analytics.

Everything here is deterministic: baseline penalties, the equilibrium
penalty function p(n) and its closed-form value/derivative at n*, the
Gaussian integral identities behind those closed forms, price-of-stability
formulas, Bayes risks, and the bounded-variance high-dimensional bounds.

Exponential-times-erfc products are always evaluated through the scaled
kernel erfcx(z) = e^{z^2} erfc(z); the raw product overflows for large
agent counts.

Standard-normal expectations are integrated on [-12, 12] (the tail beyond
12 standard deviations is far below the 1e-12 tolerance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erfcx

from .mechanisms import k_eps
from .params import ProblemParams

__all__ = [
    "NonpositiveL",
    "QuadratureFailure",
    "baseline_penalties",
    "gauss_int_I",
    "gauss_int_J",
    "penalty_closed_form",
    "rinf_max_risk",
    "penalty_at_nstar",
    "penalty_at_nstar_simplified",
    "penalty_derivative_at_nstar",
    "pos_mechany",
    "pos_mechpk",
    "pos_smallm",
    "bayes_risk_Rl",
    "highdim_penalty_bound",
    "e_of_m",
    "mechpk_exploit_risk",
    "mechpk_recommended_penalty",
    "sizecheck_penalty",
    "smallm_participating_penalty",
    "PenaltyProfile",
    "penalty_profile",
]

_SQRT2PI = math.sqrt(2 * math.pi)


class NonpositiveL(ValueError):
    pass


class QuadratureFailure(RuntimeError):
    pass


def _std_normal_expectation(f, epsabs: float = 1e-12) -> float:
    """E[f(x)] for x ~ N(0,1) by adaptive quadrature on [-12, 12]."""

    def integrand(x):
        return f(x) * math.exp(-0.5 * x * x) / _SQRT2PI

    val, err = quad(integrand, -12.0, 12.0, epsabs=epsabs, epsrel=1e-12, limit=300)
    if err > 1e-9:
        raise QuadratureFailure(f"quadrature error estimate {err} too large")
    return val


def baseline_penalties(p: ProblemParams) -> dict[str, float]:
    """Reference penalties (all carry the sqrt(d) scaling):

    - p_min_ir: best standalone penalty 2 sigma sqrt(c d); participation
      must not exceed it.
    - global_min_social: unconstrained social optimum 2 sigma sqrt(c m d).
    - pool_ne_social: social penalty at the naive-pooling equilibrium,
      sigma sqrt(c d) (m + 1).
    - free_rider_penalty: a zero-collection agent's penalty under naive
      pooling against n*-collecting peers, sigma sqrt(m c d)/(m - 1).
    """
    s, c, m, d = p.sigma, p.cost, p.agents, p.dim
    return {
        "p_min_ir": 2 * s * math.sqrt(c * d),
        "global_min_social": 2 * s * math.sqrt(c * m * d),
        "pool_ne_social": s * math.sqrt(c * d) * (m + 1),
        "free_rider_penalty": s * math.sqrt(m * c * d) / (m - 1),
    }


def gauss_int_I(L: float) -> float:
    """E[1/(L + x^2)] for x ~ N(0,1): sqrt(pi/(2L)) e^{L/2} erfc(sqrt(L/2))."""
    if L <= 0:
        raise NonpositiveL("L must be positive")
    return math.sqrt(math.pi / (2 * L)) * erfcx(math.sqrt(L / 2))


def gauss_int_J(L: float) -> float:
    """E[1/(L + x^2)^2] for x ~ N(0,1)."""
    if L <= 0:
        raise NonpositiveL("L must be positive")
    return (math.sqrt(math.pi) / (2 * math.sqrt(2) * L**1.5)) * (1 - L) * erfcx(
        math.sqrt(L / 2)
    ) + 1 / (2 * L)


def _risk_integrand_factory(n_i: float, p: ProblemParams, alpha: float):
    s2 = p.sigma**2
    ns = p.n_star
    m = p.agents

    def l_of_x(x):
        v = s2 + alpha**2 * (s2 / n_i + s2 / ns) * x * x
        return 1.0 / ((m - 2) * ns / v + (n_i + ns) / s2)

    return l_of_x


def rinf_max_risk(n_i: float, p: ProblemParams, alpha: float) -> float:
    """Maximum risk (per problem, i.e. summed over dimensions) of the
    recommended estimator when collecting n_i points against an
    n*-collecting field: d * E_x[ l(n_i, x) ]."""
    if p.agents < 5:
        raise ValueError("the corrupted-allocation risk applies to m >= 5")
    if alpha == 0.0:
        # no corruption: plain pooled-mean risk
        return p.dim * p.sigma**2 / (n_i + (p.agents - 1) * p.n_star)
    return p.dim * _std_normal_expectation(_risk_integrand_factory(n_i, p, alpha))


def penalty_closed_form(n_i: float, p: ProblemParams, alpha: float) -> float:
    """Equilibrium-field penalty p(n_i) = risk + c n_i, by quadrature."""
    return rinf_max_risk(n_i, p, alpha) + p.cost * n_i


def penalty_at_nstar(p: ProblemParams, alpha: float) -> float:
    """Closed form of p(n*), via the scaled-erfc kernel."""
    m, ns, s2 = p.agents, p.n_star, p.sigma**2
    r = math.sqrt(alpha**2 / (m * ns))
    z = 1.0 / (2 * math.sqrt(2) * r)
    risk_1d = r * s2 * (2 * m * _SQRT2PI * r - (m - 2) * math.pi * erfcx(z)) / (4 * _SQRT2PI * alpha**2)
    return p.dim * risk_1d + p.cost * ns


def penalty_at_nstar_simplified(p: ProblemParams, alpha: float) -> float:
    """Algebraically reduced form of p(n*) (no special functions)."""
    m, ns = p.agents, p.n_star
    a2 = alpha**2 / ns
    return p.dim * p.sigma * math.sqrt(p.cost_eff / m) * (
        (10 * a2 - 1) / (4 * a2 * (m + 1) / m - 1) + 1
    )


def penalty_derivative_at_nstar(p: ProblemParams, alpha: float) -> float:
    """Closed form of p'(n*); zero when alpha solves the corruption-level
    equation (first-order condition of the recommended sample count)."""
    m, ns, s2 = p.agents, p.n_star, p.sigma**2
    rt = math.sqrt(m * ns)
    z = rt / (2 * math.sqrt(2) * alpha)
    pref = -s2 / (64 * (alpha**2 / (m - 2)) * (alpha / rt) * m * ns)
    inner = (4 * alpha / rt) * (4 * alpha**2 * m / ((m - 2) * ns) - 1) - erfcx(z) * (
        4 * alpha**2 * (m + 1) / (m * ns) - 1
    ) * _SQRT2PI
    return p.dim * pref * inner + p.cost


def pos_mechany(p: ProblemParams, alpha: float) -> float:
    """Price of stability of the cross-check mechanism (m >= 5); < 2."""
    m, ns = p.agents, p.n_star
    a2 = alpha**2 / ns
    return 0.5 * ((10 * a2 - 1) / (4 * a2 * (m + 1) / m - 1) + 1)


def pos_mechpk(epsilon: float) -> float:
    """Price of stability of corrupt-and-deploy: 1 + 1/(2 k) <= 1 + epsilon."""
    return 1.0 + 1.0 / (2 * k_eps(epsilon))


def pos_smallm(p: ProblemParams) -> float:
    """Price of stability of the m <= 4 pooling branch: (m+1)/(2 sqrt(m))."""
    m = p.agents
    return (m + 1) / (2 * math.sqrt(m))


def bayes_risk_Rl(ell: float, n_i: int, p: ProblemParams, alpha: float) -> float:
    """Bayes risk under a centered Gaussian prior with variance ell^2
    (one-dimensional form), for an agent collecting and submitting n_i
    points against an n*-collecting field. Increases to the maximum risk
    as ell grows."""
    if ell <= 0:
        raise ValueError("ell must be positive")
    s2, ns, m = p.sigma**2, p.n_star, p.agents
    sig_tilde_sq = s2 / ns + 1.0 / (n_i / s2 + 1.0 / ell**2)
    n_corr = (m - 2) * ns

    def f(e):
        return 1.0 / (
            n_corr / (s2 + alpha**2 * sig_tilde_sq * e * e) + (n_i + ns) / s2 + 1.0 / ell**2
        )

    return _std_normal_expectation(f)


def highdim_penalty_bound(p: ProblemParams, alpha: float) -> float:
    """Upper bound on the recommended-profile penalty when only the
    per-dimension variance (not Gaussianity) is assumed."""
    m, ns = p.agents, p.n_star
    a2 = alpha**2 / ns
    return p.sigma * math.sqrt(p.cost * p.dim / m) * (m / (2 + (m - 2) / (1 + 2 * a2)) + 1)


def e_of_m(m: int, a_m: float) -> float:
    """Approximate-equilibrium slack E(m) at the solved ratio A_m; < 5/m."""
    A2 = a_m**2
    num = 4 * A2 * ((A2 - 1) * m + 1 - 4 * A2) * m
    den = (4 * A2 + m) * ((7 * A2 - 1) * m + 2 * A2)
    return num / den


def mechpk_recommended_penalty(p: ProblemParams, epsilon: float) -> float:
    """Expected penalty at the recommended profile of corrupt-and-deploy:
    (2 + 1/k) sigma sqrt(c)/sqrt(m), exact for Gaussian data."""
    k = k_eps(epsilon)
    return (2 + 1.0 / k) * p.sigma * math.sqrt(p.cost) / math.sqrt(p.agents)


def mechpk_exploit_risk(p: ProblemParams, epsilon: float) -> tuple[float, float]:
    """(deployed_risk, exploit_risk) for corrupt-and-deploy at the
    recommended profile: the deployed sample mean's risk and the risk of
    the inverse-variance weighted average an agent could compute instead.
    The exploit is strictly better, which is why the deployed-estimate
    design does not extend to unrestricted estimators."""
    k = k_eps(epsilon)
    m, ns, s2 = p.agents, p.n_star, p.sigma**2
    deployed = (1 + 1.0 / k) * s2 / (m * ns)
    r = (1.0 / k) * m / (m - 1)
    exploit = (1 + r) / (m + r) * s2 / ns
    assert exploit < deployed
    return deployed, exploit


def sizecheck_penalty(n: int, p: ProblemParams) -> float:
    """Penalty of an agent collecting n honest points under size-checked
    pooling, everyone else at n*: pooled-mean risk when the check passes,
    own-data risk otherwise."""
    m, ns, s2 = p.agents, p.n_star, p.sigma**2
    if n >= ns:
        return p.dim * s2 / (n + (m - 1) * ns) + p.cost * n
    if n == 0:
        return math.inf
    return p.dim * s2 / n + p.cost * n


def smallm_participating_penalty(p: ProblemParams) -> float:
    """Recommended-profile penalty for the m <= 4 pooling branch:
    (1 + 1/m) sigma sqrt(c d)."""
    m = p.agents
    return (1 + 1.0 / m) * p.sigma * math.sqrt(p.cost * p.dim)


@dataclass(frozen=True)
class PenaltyProfile:
    n_grid: np.ndarray
    p_values: np.ndarray
    risk_values: np.ndarray
    derivative_at_nstar: float


def penalty_profile(p: ProblemParams, alpha: float, n_grid) -> PenaltyProfile:
    n_grid = np.asarray(n_grid)
    risks = np.array([rinf_max_risk(float(n), p, alpha) for n in n_grid])
    return PenaltyProfile(
        n_grid=n_grid,
        p_values=risks + p.cost * n_grid,
        risk_values=risks,
        derivative_at_nstar=penalty_derivative_at_nstar(p, alpha),
    )
