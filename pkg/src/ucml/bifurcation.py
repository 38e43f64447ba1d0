"""Analytical thresholds and velocity curves.

Covers the saddle-node bifurcation of the coupling function alpha*g
(ballistic front propagation for alpha above it), the laminar-to-puff
threshold alpha_P, the trailing/leading edge velocity estimates, and the
implicitly defined puff-slug transition line alpha_PS(h).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .params import H_CRITICAL, ModelParams
from . import dynamics

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class SaddleNode:
    """Tangency point of alpha*g with the diagonal: alpha_sn*g(x_f) = x_f
    and alpha_sn*g'(x_f) = 1."""

    alpha_sn: float
    x_fixed: float


@dataclass(frozen=True)
class IntermittencyFit:
    """Constants of the leading-edge velocity formula.

    a: tunnel-time prefactor, T = a / sqrt(delta_alpha).
    nu_c, A, xi: baseline rate, amplitude and decay scale of the
    injection rate nu = nu_c + A*exp(-delta_alpha/xi).
    """

    a: float = 1.55
    nu_c: float = 0.039
    A: float = 0.034
    xi: float = 0.023

    def __post_init__(self) -> None:
        if min(self.a, self.nu_c, self.A, self.xi) <= 0:
            raise ValueError("all intermittency constants must be positive")


PAPER_FIT = IntermittencyFit()


def find_saddle_node(params: ModelParams) -> SaddleNode:
    """Solve both tangency conditions on the rising branch of g.

    Eliminating alpha gives g(x) - x*g'(x) = 0 on (1+delta, 1+delta+1/sqrt(3));
    then alpha_sn = 1/g'(x_f).
    """
    d = params.delta

    def tangency(x: float) -> float:
        return dynamics.coupling_map(x, params) - x * dynamics.coupling_map_deriv(x, params)

    lo = 1.0 + d + 1e-12
    hi = 1.0 + d + 1.0 / SQRT3 - 1e-12
    if tangency(lo) * tangency(hi) > 0:
        raise ValueError(f"no saddle-node tangency bracketed for delta={d}")
    x_f = brentq(tangency, lo, hi, xtol=1e-14, rtol=8.9e-16)
    alpha_sn = 1.0 / dynamics.coupling_map_deriv(x_f, params)
    return SaddleNode(alpha_sn=alpha_sn, x_fixed=x_f)


def alpha_puff_threshold(params: ModelParams) -> float:
    """Closed-form laminar-to-puff threshold alpha_P = delta / g(x2).

    x2 = h*(2+delta)/(h+1) is the upper unstable fixed point of f; the
    threshold is the coupling at which repeated kicks of size alpha*g(x2)
    push a laminar neighbor past the cutoff delta.
    """
    d = params.delta
    x2 = dynamics.onsite_fixed_points(params).x2
    if not (1.0 + d < x2 < 2.0 + d):
        raise ValueError(f"x2={x2} outside (1+delta, 2+delta); g(x2) <= 0, no threshold")
    return d / dynamics.coupling_map(x2, params)


def scan_puff_threshold(params: ModelParams, tol: float = 1e-4,
                        n_steps: int = 500, bracket: tuple[float, float] = (0.01, 1.0)) -> float:
    """Brute-force bracket of alpha_P by simulating propagation.

    Site 0 is pinned at the fixed point x2 (a sustained kick source) and
    we bisect on alpha for whether site 1 ever enters the spreading
    window within n_steps.  Independent of the closed form above.
    """
    x2 = dynamics.onsite_fixed_points(params).x2
    d = params.delta

    def propagates(alpha: float) -> bool:
        p = params.replace(alpha=alpha)
        kick = alpha * dynamics.coupling_map(x2, p)
        y = 0.0
        for _ in range(n_steps):
            y = max(kick + dynamics.onsite_map(y, p), 0.0)
            if y > 1.0 + d:
                return True
        return False

    lo, hi = bracket
    if propagates(lo) or not propagates(hi):
        raise ValueError("bracket does not straddle the propagation threshold")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if propagates(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def trailing_velocity_theory(params: ModelParams) -> float:
    """Trailing-edge velocity estimate v_t = 1/tau_s = ln(h/2).

    A lower bound on the measured trailing velocity; sharp for h close
    to 2, undershooting at larger h where the edge jumps several sites.
    """
    if params.h <= H_CRITICAL:
        raise ValueError("trailing velocity estimate requires h > 2")
    return math.log(params.h / H_CRITICAL)


def leading_velocity_theory(alpha: float, sn: SaddleNode,
                            fit: IntermittencyFit = PAPER_FIT) -> float:
    """Leading-edge velocity below the saddle-node bifurcation.

    v_l = [1 + sqrt(da) / (a*(nu_c + A*exp(-da/xi)))]^-1 with
    da = alpha_sn - alpha; exactly 1 at da = 0.  Rejects alpha beyond
    the bifurcation (ballistic regime, see leading_velocity).
    """
    da = sn.alpha_sn - alpha
    if da < 0:
        raise ValueError("alpha > alpha_sn: ballistic regime, v_l = 1")
    if da == 0:
        return 1.0
    nu = fit.nu_c + fit.A * math.exp(-da / fit.xi)
    return 1.0 / (1.0 + math.sqrt(da) / (fit.a * nu))


def leading_velocity(alpha: float, sn: SaddleNode,
                     fit: IntermittencyFit = PAPER_FIT) -> float:
    """leading_velocity_theory extended by the ballistic branch v_l = 1
    for alpha >= alpha_sn."""
    if alpha >= sn.alpha_sn:
        return 1.0
    return leading_velocity_theory(alpha, sn, fit)


@dataclass
class TransitionCurves:
    """Sampled threshold curves over h, with linear interpolation between
    samples.  alpha_ps entries are NaN where the transition line is
    truncated (no alpha with v_l(alpha) = v_t(h) in the sampled range)."""

    h: np.ndarray
    alpha_p: np.ndarray
    alpha_ps: np.ndarray


def alpha_puff_curve(h_grid: np.ndarray, delta: float = 0.1) -> np.ndarray:
    """alpha_P(h) evaluated pointwise from the closed form."""
    return np.array([alpha_puff_threshold(ModelParams(0.0, h, delta)) for h in h_grid])


def transition_line_puff_slug(
    h_grid: np.ndarray,
    sn: SaddleNode | None = None,
    fit: IntermittencyFit = PAPER_FIT,
    vl_table: tuple[np.ndarray, np.ndarray] | None = None,
    vt_table: tuple[np.ndarray, np.ndarray] | None = None,
    delta: float = 0.1,
) -> TransitionCurves:
    """Puff-slug boundary alpha_PS(h): solve v_l(alpha) = v_t(h) per h.

    vl_table/vt_table are (alpha, v) resp. (h, v) samples from measured
    ensembles; when omitted, the theoretical curves are used (v_l from
    the intermittency formula, v_t = ln(h/2)).  Out-of-range h values
    yield NaN (curve truncation, not an error).
    """
    h_grid = np.asarray(h_grid, dtype=float)

    if vl_table is None:
        if sn is None:
            sn = find_saddle_node(ModelParams(0.0, 2.1, delta))
        alphas = np.linspace(sn.alpha_sn - 0.6, sn.alpha_sn, 2001)
        vls = np.array([leading_velocity(a, sn, fit) for a in alphas])
    else:
        alphas, vls = (np.asarray(t, dtype=float) for t in vl_table)
        order = np.argsort(alphas)
        alphas, vls = alphas[order], vls[order]

    def vt_of(h: float) -> float:
        if vt_table is None:
            return math.log(h / H_CRITICAL) if h > H_CRITICAL else 0.0
        ht, vt = vt_table
        return float(np.interp(h, ht, vt))

    # v_l is monotone increasing in alpha; enforce this on noisy measured
    # samples before inverting by interpolation.
    vls_mono = np.maximum.accumulate(vls)
    alpha_ps = np.full(h_grid.shape, np.nan)
    truncated = []
    for i, h in enumerate(h_grid):
        v = vt_of(float(h))
        if v < vls_mono.min() or v > vls_mono.max():
            truncated.append(float(h))
            continue
        alpha_ps[i] = float(np.interp(v, vls_mono, alphas))
    if truncated:
        warnings.warn(f"transition line truncated at h = {truncated}: "
                      "v_t outside the sampled v_l range")
    return TransitionCurves(h=h_grid, alpha_p=alpha_puff_curve(h_grid, delta),
                            alpha_ps=alpha_ps)
