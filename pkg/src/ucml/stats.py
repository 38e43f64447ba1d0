"""Lifetime statistics and curve fitting: censored exponential fits,
the super-exponential lifetime scaling, velocity-curve aggregation, and
re-fitting of the intermittency constants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps
from scipy.optimize import curve_fit

from .bifurcation import IntermittencyFit, SaddleNode

# Conversion from the integer all-zero detection time to the escape-time
# convention of the rate picture: relaminarization is detected one step
# after the last active one, and the escape itself happens between two
# observations (half-step offset).  With this offset the sub-threshold
# ensemble mean reproduces tau_s = 1/ln(h/2) without further correction.
LIFETIME_OFFSET = 1.5


def adjusted_lifetimes(lifetimes: np.ndarray) -> np.ndarray:
    """Integer all-zero times -> escape-time convention (see LIFETIME_OFFSET)."""
    return np.asarray(lifetimes, dtype=float) - LIFETIME_OFFSET


@dataclass
class LifetimeEstimate:
    mean: float
    ci_lo: float
    ci_hi: float
    n: int
    n_censored: int


def mean_lifetime(lifetimes: np.ndarray, censored: np.ndarray | None = None,
                  z: float = 1.96) -> LifetimeEstimate:
    """Ensemble mean lifetime with a normal-approximation CI.

    With right-censored samples present, the sample mean is biased, so
    the exponential-rate estimator (events / total observed time) is
    used instead; lifetimes are exponentially distributed in the puff
    regime, making this the MLE of the mean."""
    tau = adjusted_lifetimes(lifetimes)
    n = tau.size
    if censored is None:
        censored = np.zeros(n, dtype=bool)
    censored = np.asarray(censored, dtype=bool)
    d = int(n - censored.sum())
    if censored.any():
        if d == 0:
            raise ValueError("all samples censored; mean not identifiable")
        total = float(tau.sum())
        mean = total / d
        half = z / math.sqrt(d)
        return LifetimeEstimate(mean, mean / (1 + half), mean / max(1 - half, 1e-12),
                                n, n - d)
    mean = float(tau.mean())
    se = float(tau.std(ddof=1)) / math.sqrt(n) if n > 1 else math.inf
    return LifetimeEstimate(mean, mean - z * se, mean + z * se, n, 0)


@dataclass
class ExponentialFit:
    rate: float
    rate_ci: tuple[float, float]
    mean: float
    n_events: int
    n_censored: int
    ks_stat: float
    ks_pvalue: float
    location: float  # lifetimes below this were excluded and subtracted


def fit_exponential_lifetimes(lifetimes: np.ndarray,
                              censored: np.ndarray | None = None,
                              min_lifetime: float = 0.0) -> ExponentialFit:
    """Maximum-likelihood exponential rate with right censoring.

    Samples with lifetime <= min_lifetime are dropped and the remaining
    ones shifted by it; by memorylessness the conditional excess of an
    exponential is exponential, and the shift removes the immediate-decay
    transient that is not part of the established-puff statistics.
    Censored samples contribute their observation time to the likelihood.
    The KS statistic is computed on the uncensored samples against the
    fitted distribution."""
    tau = adjusted_lifetimes(lifetimes)
    n0 = tau.size
    if censored is None:
        censored = np.zeros(n0, dtype=bool)
    censored = np.asarray(censored, dtype=bool)
    keep = tau > min_lifetime
    tau = tau[keep] - min_lifetime
    censored = censored[keep]
    d = int((~censored).sum())
    if d == 0:
        raise ValueError("no uncensored samples above min_lifetime")
    total = float(tau.sum())
    rate = d / total
    z = 1.96
    rate_ci = (max(rate * (1 - z / math.sqrt(d)), 0.0),
               rate * (1 + z / math.sqrt(d)))
    uncens = np.sort(tau[~censored])
    ks = sps.kstest(uncens, "expon", args=(0.0, 1.0 / rate))
    return ExponentialFit(rate=rate, rate_ci=rate_ci, mean=1.0 / rate,
                          n_events=d, n_censored=int(censored.sum()),
                          ks_stat=float(ks.statistic), ks_pvalue=float(ks.pvalue),
                          location=min_lifetime)


def survival_table(lifetimes: np.ndarray, censored: np.ndarray | None = None
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Empirical survival function S(t) = P(tau > t) on the sorted
    uncensored times.  Valid as-is when all censoring happens at the
    common max_time (the only censoring scheme the engine produces)."""
    tau = adjusted_lifetimes(lifetimes)
    n = tau.size
    if censored is None:
        censored = np.zeros(n, dtype=bool)
    t = np.sort(tau[~np.asarray(censored, dtype=bool)])
    surv = 1.0 - np.searchsorted(np.sort(tau), t, side="right") / n
    return t, surv


@dataclass
class ScalingFit:
    """ln(tau/B) = C * tau_s regression result."""
    B: float
    C: float
    r_squared: float
    residuals: np.ndarray


def fit_superexponential(tau_s: np.ndarray, tau_mean: np.ndarray) -> ScalingFit:
    """Linear regression of ln(tau) on tau_s = 1/ln(h/2).

    Straight-line behavior of ln(tau) vs tau_s is the super-exponential
    lifetime law; slope C and intercept ln B are free, alpha-dependent
    fit outputs."""
    tau_s = np.asarray(tau_s, dtype=float)
    tau_mean = np.asarray(tau_mean, dtype=float)
    if tau_s.size < 3:
        raise ValueError("need at least 3 (tau_s, tau) points")
    y = np.log(tau_mean)
    C, lnB = np.polyfit(tau_s, y, 1)
    pred = lnB + C * tau_s
    resid = y - pred
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(B=float(math.exp(lnB)), C=float(C), r_squared=r2,
                      residuals=resid)


def refit_intermittency_constants(delta_alpha: np.ndarray, v_l: np.ndarray,
                                  p0: IntermittencyFit = IntermittencyFit()
                                  ) -> tuple[IntermittencyFit, np.ndarray]:
    """Nonlinear least squares of the leading-edge velocity formula in
    (a, nu_c, A, xi), initialized at the default constants.  Returns the
    fit and the per-point residuals; raises on non-convergence with the
    residual trace in the message."""
    delta_alpha = np.asarray(delta_alpha, dtype=float)
    v_l = np.asarray(v_l, dtype=float)
    if delta_alpha.size < 4:
        raise ValueError("need at least 4 (delta_alpha, v_l) points for 4 constants")

    def model(da, a, nu_c, A, xi):
        nu = nu_c + A * np.exp(-da / xi)
        return 1.0 / (1.0 + np.sqrt(da) / (a * nu))

    try:
        popt, _ = curve_fit(model, delta_alpha, v_l,
                            p0=[p0.a, p0.nu_c, p0.A, p0.xi],
                            bounds=(1e-6, np.inf), maxfev=20000)
    except RuntimeError as exc:
        resid = v_l - model(delta_alpha, p0.a, p0.nu_c, p0.A, p0.xi)
        raise RuntimeError(f"intermittency fit did not converge "
                           f"(residuals at start values: {resid})") from exc
    fit = IntermittencyFit(*map(float, popt))
    return fit, v_l - model(delta_alpha, *popt)


@dataclass
class VelocityCurve:
    x: np.ndarray       # alpha values (leading) or h values (trailing)
    v: np.ndarray
    std: np.ndarray
    n_used: np.ndarray  # trajectories active through the window


def aggregate_velocity_curve(x_values, samples_per_point) -> VelocityCurve:
    """Mean/std per grid point over per-trajectory edge slopes; NaN
    samples (trajectories that died before the window closed) are
    dropped."""
    x = np.asarray(x_values, dtype=float)
    v = np.empty(x.size)
    std = np.empty(x.size)
    n_used = np.empty(x.size, np.int64)
    for i, s in enumerate(samples_per_point):
        s = np.asarray(s, dtype=float)
        s = s[np.isfinite(s)]
        n_used[i] = s.size
        v[i] = s.mean() if s.size else np.nan
        std[i] = s.std(ddof=1) if s.size > 1 else np.nan
    return VelocityCurve(x=x, v=v, std=std, n_used=n_used)
