"""AMP iteration with pluggable threshold policies.

The update is

    z_t     = y - A x_t + (|support of x_t| / n) * z_{t-1}
    x_{t+1} = eta(x_t + A^T z_t; tau_t)

with x_0 = 0 and z_{-1} = 0 (so z_0 = y).  The memory coefficient on
z_{t-1} is always the exact nonzero count of the current x_t divided by n.
The correction keeps the effective noise v_t = x_t + A^T z_t - x_o close
to Gaussian, which the trace can quantify per iteration (excess kurtosis
and Kolmogorov-Smirnov distance to the best-fit normal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .exceptions import Divergence, RangeError, RankError
from .instances import ProblemInstance
from .policies import FixedDetection, FixedFalseAlarm, FixedThreshold, ThresholdPolicy


@dataclass(frozen=True)
class AmpState:
    """Final iterate: x is the estimate after the last update, z the
    residual it was computed from, tau the last threshold used."""

    t: int
    x: np.ndarray
    z: np.ndarray
    tau: float
    active_count: int


@dataclass(frozen=True)
class AmpTrace:
    """Row t describes iteration t: the threshold tau_t applied to
    x_t + A^T z_t, the support size and MSE of the resulting x_{t+1},
    the residual scale ||z_t||/sqrt(n), and Gaussianity diagnostics of
    v_t = x_t + A^T z_t - x_o (NaN unless requested)."""

    t: np.ndarray
    tau: np.ndarray
    active_count: np.ndarray
    residual_norm: np.ndarray
    mse: np.ndarray
    kurtosis: np.ndarray
    ks: np.ndarray

    def __len__(self):
        return len(self.t)


def fixed_detection_tau(u: np.ndarray, gamma: float, n: int) -> float:
    """The floor(gamma*n)-th largest magnitude of u, by introselect.

    Thresholding at this value keeps exactly the strictly larger
    magnitudes, i.e. floor(gamma*n) - 1 entries for continuous data (the
    marginal entry shrinks to zero; ties at the marginal magnitude all
    drop, independent of index order).
    """
    # the 1e-9 nudge keeps decimal gammas like 0.3 from flooring one short
    k = math.floor(gamma * n + 1e-9)
    if not 1 <= k <= u.size:
        raise RankError(f"order statistic {k} outside [1, {u.size}]")
    mag = np.abs(u)
    return float(np.partition(mag, mag.size - k)[mag.size - k])


def fixed_false_alarm_tau(z: np.ndarray, beta: float) -> float:
    """beta times the residual-norm estimate ||z||_2/sqrt(n) of the
    effective noise level."""
    if beta <= 0.0:
        raise RangeError(f"beta must be > 0, got {beta}")
    n = z.size
    return beta * float(np.linalg.norm(z)) / math.sqrt(n)


def median_abs_sigma(u: np.ndarray) -> float:
    """Median-magnitude noise estimate |u|_med / 0.6745 (biased upward by
    the signal's nonzero entries; kept behind the policy flag)."""
    return float(np.median(np.abs(u))) / 0.6745


def gaussianity_stats(v: np.ndarray) -> tuple[float, float]:
    """(excess kurtosis, KS distance to the fitted normal) of a sample.

    Returns (nan, nan) for a degenerate (zero-variance) sample.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.size < 100:
        raise RangeError(f"need at least 100 samples, got {v.size}")
    mean = float(np.mean(v))
    std = float(np.std(v))
    if std == 0.0 or not math.isfinite(std):
        return (math.nan, math.nan)
    kurt = float(stats.kurtosis(v, fisher=True, bias=True))
    ks = float(stats.kstest(v, "norm", args=(mean, std)).statistic)
    return (kurt, ks)


def _threshold(policy: ThresholdPolicy, u: np.ndarray, z: np.ndarray, n: int) -> float:
    if isinstance(policy, FixedDetection):
        return fixed_detection_tau(u, policy.gamma, n)
    if isinstance(policy, FixedFalseAlarm):
        if policy.estimator == "median":
            return policy.beta * median_abs_sigma(u)
        return fixed_false_alarm_tau(z, policy.beta)
    if isinstance(policy, FixedThreshold):
        return policy.tau
    raise RangeError(f"unknown policy {policy!r}")


def amp_run(
    instance: ProblemInstance,
    policy: ThresholdPolicy,
    max_iter: int = 500,
    conv_tol: float = 1e-10,
    compute_gaussianity: bool = False,
) -> tuple[AmpState, AmpTrace]:
    """Run AMP until the iterate stalls or max_iter is reached.

    Convergence is relative iterate change ||x_{t+1} - x_t|| / max(||x_t||,
    1e-12) < conv_tol.  Raises Divergence when ||x_t|| exceeds 1e12 ||y||
    (e.g. detection target above the phase transition).
    """
    if max_iter < 1:
        raise RangeError(f"max_iter must be >= 1, got {max_iter}")
    A, y, x_o = instance.A, instance.y, instance.x_o
    n, N = A.shape
    sqrt_n = math.sqrt(n)
    y_norm = float(np.linalg.norm(y))

    x = np.zeros(N)
    z_prev = np.zeros(n)
    rows_t, rows_tau, rows_active, rows_res, rows_mse = [], [], [], [], []
    rows_kurt, rows_ks = [], []

    tau = 0.0
    z = z_prev
    for t in range(max_iter):
        active = int(np.count_nonzero(x))
        z = y - A @ x + (active / n) * z_prev
        u = x + A.T @ z
        tau = _threshold(policy, u, z, n)
        x_new = np.sign(u) * np.maximum(np.abs(u) - tau, 0.0)

        if float(np.linalg.norm(x_new)) > 1e12 * max(y_norm, 1.0):
            raise Divergence(f"iterate blew up at t={t}")

        if compute_gaussianity:
            kurt, ks = gaussianity_stats(u - x_o)
        else:
            kurt, ks = math.nan, math.nan
        rows_t.append(t)
        rows_tau.append(tau)
        rows_active.append(int(np.count_nonzero(x_new)))
        rows_res.append(float(np.linalg.norm(z)) / sqrt_n)
        rows_mse.append(float(np.mean((x_new - x_o) ** 2)))
        rows_kurt.append(kurt)
        rows_ks.append(ks)

        step = float(np.linalg.norm(x_new - x))
        denom = max(float(np.linalg.norm(x)), 1e-12)
        x, z_prev = x_new, z
        if step / denom < conv_tol:
            break

    state = AmpState(
        t=len(rows_t),
        x=x,
        z=z,
        tau=tau,
        active_count=int(np.count_nonzero(x)),
    )
    trace = AmpTrace(
        t=np.array(rows_t, dtype=np.int64),
        tau=np.array(rows_tau),
        active_count=np.array(rows_active, dtype=np.int64),
        residual_norm=np.array(rows_res),
        mse=np.array(rows_mse),
        kurtosis=np.array(rows_kurt),
        ks=np.array(rows_ks),
    )
    return state, trace
