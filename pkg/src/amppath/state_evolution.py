"""Scalar state evolution for the LASSO / AMP fixed point.

The coupled system in the variables (sigma_hat, beta, lambda) is

    sigma_hat^2 = sigma_w^2 + risk(prior, sigma_hat, beta*sigma_hat) / delta
    lambda      = beta * sigma_hat * (1 - detection/delta)

with detection = P(|X + sigma_hat*Z| > beta*sigma_hat).  For fixed beta the
first equation is a concave, nondecreasing map of sigma^2 with at most one
fixed point, so plain fixed-point iteration converges monotonically; a
safeguarded Aitken step accelerates it.  lambda is strictly increasing in
beta above the lambda = 0 crossing, which makes all calibrations
(lambda -> beta, gamma -> beta) bracketed scalar root-finds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.optimize import brentq

from .exceptions import BracketFailure, NegativeLambda, NonConvergence, RangeError
from .policies import FixedDetection, FixedFalseAlarm, FixedThreshold, ThresholdPolicy
from .priors import (
    Prior,
    PsiParams,
    detection_prob,
    psi_map,
    risk,
    std_normal_cdf,
    std_normal_pdf,
)

_MAX_FP_ITERS = 10_000
_FP_RTOL = 1e-13
_BETA_MAX = 50.0
_SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class SEModel:
    """Problem ensemble: undersampling ratio delta in (0,1), noise variance
    sigma_w_sq > 0, and the signal prior."""

    delta: float
    sigma_w_sq: float
    prior: Prior

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise RangeError(f"delta must be in (0, 1), got {self.delta}")
        if self.sigma_w_sq <= 0.0:
            raise RangeError(f"sigma_w_sq must be > 0, got {self.sigma_w_sq}")


@dataclass(frozen=True)
class SEPoint:
    """One consistent solution of the fixed-point system.

    Satisfies sigma_hat^2 = sigma_w_sq + mse/delta, tau = beta*sigma_hat,
    lam = tau*(1 - gamma), gamma = detection/delta, all within solver
    tolerance.
    """

    sigma_hat: float
    beta: float
    tau: float
    lam: float
    gamma: float
    mse: float
    detection: float


@dataclass(frozen=True)
class SETrajectory:
    """Per-iteration effective-noise levels sigma_t and thresholds tau_t,
    starting from sigma_0^2 = E[X^2]/delta."""

    sigma: tuple[float, ...]
    tau: tuple[float, ...]

    def __len__(self):
        return len(self.sigma)

    @property
    def sigma_sq(self) -> tuple[float, ...]:
        return tuple(s * s for s in self.sigma)


def _fixed_point(g, s0: float, rtol: float = _FP_RTOL) -> float:
    """Safeguarded Steffensen iteration for s = g(s) on s > 0.

    g must be nondecreasing and concave with a unique fixed point (true for
    the variance maps used here); the plain iteration is then monotone and
    the Aitken extrapolation only shortcuts it.
    """
    s = max(s0, _SIGMA_FLOOR**2)
    for _ in range(_MAX_FP_ITERS // 2):
        s1 = g(s)
        if abs(s1 - s) <= rtol * max(1.0, abs(s1)):
            return s1
        s2 = g(s1)
        denom = s2 - 2.0 * s1 + s
        s_next = s2
        if denom != 0.0:
            accel = s - (s1 - s) ** 2 / denom
            if math.isfinite(accel) and accel > 0.0:
                s_next = accel
        if not math.isfinite(s_next) or s_next > 1e30:
            raise NonConvergence("variance iteration diverged (no fixed point)")
        s = s_next
    raise NonConvergence(f"no fixed point after {_MAX_FP_ITERS} map evaluations")


def solve_sigma_for_beta(model: SEModel, beta: float, sigma_sq0: float | None = None) -> float:
    """Effective-noise level sigma_hat at a fixed false-alarm ratio beta.

    Returns the unique sigma_hat with Psi(sigma_hat^2) = sigma_hat^2; the
    result is independent of the starting point sigma_sq0.  Raises
    NonConvergence when the map has no fixed point (beta below the
    contraction threshold) or the iteration cap is exceeded.
    """
    if beta < 0.0:
        raise RangeError(f"beta must be >= 0, got {beta}")
    params = PsiParams(model.delta, model.sigma_w_sq, model.prior, beta)
    g = lambda s: psi_map(s, params)
    if sigma_sq0 is None:
        sigma_sq0 = model.sigma_w_sq + model.prior.second_moment / model.delta
    s = _fixed_point(g, sigma_sq0)
    if abs(g(s) - s) > 1e-12 * max(1.0, s):
        raise NonConvergence("fixed-point residual above tolerance")
    return math.sqrt(s)


def _point_at_beta(model: SEModel, beta: float) -> SEPoint:
    sigma_hat = solve_sigma_for_beta(model, beta)
    tau = beta * sigma_hat
    det = detection_prob(model.prior, sigma_hat, tau)
    gamma = det / model.delta
    lam = tau * (1.0 - gamma)
    mse = risk(model.prior, sigma_hat, tau)
    return SEPoint(sigma_hat, beta, tau, lam, gamma, mse, det)


def lambda_of_beta(model: SEModel, beta: float) -> SEPoint:
    """Full state-evolution point at a given beta.

    Raises NegativeLambda when beta sits below the lambda = 0 crossing
    (survivor fraction above delta), where no LASSO parameter corresponds.
    """
    point = _point_at_beta(model, beta)
    if point.gamma > 1.0:
        raise NegativeLambda(
            f"detection {point.detection:.6g} exceeds delta {model.delta:.6g}; increase beta"
        )
    return point


def _zero_prior_unit_risk(beta: float) -> float:
    # Unit-noise risk of the pure-noise prior; its value against delta
    # decides whether the variance map contracts at infinity.
    return 2.0 * ((1.0 + beta * beta) * std_normal_cdf(-beta) - beta * std_normal_pdf(beta))


@lru_cache(maxsize=None)
def _critical_beta(delta: float) -> float:
    # Below this beta the variance map grows faster than the identity and
    # has no fixed point.
    return brentq(lambda b: _zero_prior_unit_risk(b) - delta, 0.0, _BETA_MAX, xtol=1e-13)


@lru_cache(maxsize=None)
def _beta_zero_lambda(model: SEModel) -> float:
    """beta of the lambda = 0 boundary, where detection equals delta.

    Bisection on [critical beta, BETA_MAX]; a NonConvergence at the probe
    point means the map diverges there, which sits on the same side as
    gamma > 1, so the probe is folded into the left branch.
    """
    lo = _critical_beta(model.delta)
    hi = _BETA_MAX
    point_hi = _point_at_beta(model, hi)
    if point_hi.gamma >= 1.0:
        raise BracketFailure("detection exceeds delta over the whole beta range")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        try:
            gamma_mid = _point_at_beta(model, mid).gamma
        except NonConvergence:
            gamma_mid = math.inf
        if gamma_mid >= 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(1.0, hi):
            break
    return hi


def beta_of_lambda(model: SEModel, lam: float) -> SEPoint:
    """Invert the strictly increasing map beta -> lambda.

    Root-find on beta in [beta(lambda=0), 50]; raises BracketFailure when
    lam lies beyond lambda(50).
    """
    if lam < 0.0:
        raise RangeError(f"lambda must be >= 0, got {lam}")
    beta_lo = _beta_zero_lambda(model)
    if lam == 0.0:
        return lambda_of_beta(model, beta_lo)
    lam_hi = _point_at_beta(model, _BETA_MAX).lam
    if lam > lam_hi:
        raise BracketFailure(
            f"lambda {lam:.6g} above the representable maximum {lam_hi:.6g}"
        )
    lam_lo = _point_at_beta(model, beta_lo).lam
    if lam <= lam_lo:
        return lambda_of_beta(model, beta_lo)
    beta = brentq(
        lambda b: _point_at_beta(model, b).lam - lam,
        beta_lo,
        _BETA_MAX,
        xtol=1e-13,
    )
    return lambda_of_beta(model, beta)


def solve_tau_for_detection(prior: Prior, sigma: float, target: float) -> float:
    """Threshold with P(|X + sigma*Z| > tau) = target, target in (0, 1).

    detection_prob is continuous and strictly decreasing in tau, so the
    root is unique; the bracket extends past the largest atom so it holds
    even when the atoms dominate the noise scale.
    """
    if not 0.0 < target < 1.0:
        raise RangeError(f"detection target must be in (0, 1), got {target}")
    hi = 50.0 * sigma + prior.max_abs_value
    return brentq(
        lambda t: detection_prob(prior, sigma, t) - target,
        0.0,
        hi,
        xtol=1e-14,
    )


def calibrate_gamma(model: SEModel, gamma: float, method: str = "bisect") -> SEPoint:
    """State-evolution point with survivor fraction detection/delta = gamma.

    ``method="bisect"`` root-finds on beta using the monotonicity of the
    survivor fraction; ``method="alternate"`` iterates the fixed-detection
    variance map directly (threshold re-solved from the detection target at
    every step).  Both converge to the same unique point.
    """
    if not 0.0 < gamma < 1.0:
        raise RangeError(f"gamma must be in (0, 1), got {gamma}")
    if method == "bisect":
        lo = _critical_beta(model.delta)
        hi = _BETA_MAX
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            try:
                gamma_mid = _point_at_beta(model, mid).gamma
            except NonConvergence:
                gamma_mid = math.inf
            if gamma_mid >= gamma:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * max(1.0, hi):
                break
        return _point_at_beta(model, hi)
    if method == "alternate":
        target = gamma * model.delta
        tau_of = lambda s: solve_tau_for_detection(model.prior, math.sqrt(s), target)
        g = lambda s: model.sigma_w_sq + risk(model.prior, math.sqrt(s), tau_of(s)) / model.delta
        s0 = model.sigma_w_sq + model.prior.second_moment / model.delta
        s = _fixed_point(g, s0, rtol=1e-14)
        sigma_hat = math.sqrt(s)
        tau = solve_tau_for_detection(model.prior, sigma_hat, target)
        det = detection_prob(model.prior, sigma_hat, tau)
        return SEPoint(
            sigma_hat=sigma_hat,
            beta=tau / sigma_hat,
            tau=tau,
            lam=tau * (1.0 - gamma),
            gamma=det / model.delta,
            mse=risk(model.prior, sigma_hat, tau),
            detection=det,
        )
    raise RangeError(f"unknown method {method!r}")


def lasso_path(model: SEModel, lambda_grid) -> list[SEPoint]:
    """State-evolution points along an increasing lambda grid.

    Along the path the survivor fraction decreases strictly and the
    asymptotic MSE is quasi-convex (successive differences change sign at
    most once, negative to positive).
    """
    grid = [float(l) for l in lambda_grid]
    if len(grid) < 3:
        raise RangeError("lambda grid needs at least 3 points")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise RangeError("lambda grid must be strictly increasing")
    return [beta_of_lambda(model, lam) for lam in grid]


def _policy_threshold(policy: ThresholdPolicy, prior: Prior, sigma: float, delta: float) -> float:
    if isinstance(policy, FixedFalseAlarm):
        return policy.beta * sigma
    if isinstance(policy, FixedThreshold):
        return policy.tau
    if isinstance(policy, FixedDetection):
        return solve_tau_for_detection(prior, sigma, policy.gamma * delta)
    raise RangeError(f"unknown policy {policy!r}")


def se_trajectory(model: SEModel, policy: ThresholdPolicy, t_max: int) -> SETrajectory:
    """Iterate the variance recursion t_max times from sigma_0^2 = E[X^2]/delta.

    Record t carries the noise level sigma_t and the threshold tau_t the
    policy picks at that level; sigma_{t+1}^2 folds the resulting risk back
    through the noise floor.
    """
    if t_max < 1:
        raise RangeError(f"t_max must be >= 1, got {t_max}")
    sigmas, taus = [], []
    s = model.prior.second_moment / model.delta
    for _ in range(t_max + 1):
        sigma = math.sqrt(max(s, _SIGMA_FLOOR**2))
        tau = _policy_threshold(policy, model.prior, sigma, model.delta)
        sigmas.append(sigma)
        taus.append(tau)
        s = model.sigma_w_sq + risk(model.prior, sigma, tau) / model.delta
    return SETrajectory(tuple(sigmas), tuple(taus))
