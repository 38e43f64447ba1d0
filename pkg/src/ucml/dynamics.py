"""Core lattice dynamics: the maps f and g, the synchronous update rule,
and the closed-form fixed points of the on-site map.

The state variable x >= 0 mimics turbulent kinetic energy; x = 0 is the
laminar state.  Each site is driven by its own tent-like map f plus a
nonlinear function alpha*g of its left neighbor only:

    x_{t+1}^i = alpha * g(x_t^{i-1}) + f(x_t^i)

The sum is clamped at zero (alpha*g can be negative on (delta, 1+delta));
any value below delta is dynamically equivalent to 0 one step later, so
the clamp changes no lifetime or velocity observable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import H_CRITICAL, ModelParams


def onsite_map(x: float, params: ModelParams) -> float:
    """Modified tent map with a flat piece on [0, delta).

    Piecewise: h*(x-delta) on [delta, 1+delta), -h*(x-2-delta) on
    [1+delta, inf), 0 elsewhere (all x < delta).
    """
    d = params.delta
    if x < d:
        return 0.0
    if x < 1.0 + d:
        return params.h * (x - d)
    return -params.h * (x - 2.0 - d)


def coupling_map(x: float, params: ModelParams) -> float:
    """Cubic forward-coupling function g, supported on [delta, 2+delta).

    g is negative on (delta, 1+delta) and positive on (1+delta, 2+delta);
    its maximum on the rising branch sits at x = 1 + delta + 1/sqrt(3).
    """
    d = params.delta
    if x < d or x >= 2.0 + d:
        return 0.0
    return -1.5 * (x - d) * (x - 1.0 - d) * (x - 2.0 - d)


def coupling_map_deriv(x: float, params: ModelParams) -> float:
    """Derivative of the coupling map on its support, 0 outside."""
    d = params.delta
    if x < d or x >= 2.0 + d:
        return 0.0
    u = x - d
    return -1.5 * (3.0 * u * u - 6.0 * u + 2.0)


def onsite_map_array(x: np.ndarray, params: ModelParams) -> np.ndarray:
    """Vectorized onsite_map."""
    d = params.delta
    out = np.where(x < 1.0 + d, params.h * (x - d), -params.h * (x - 2.0 - d))
    out[x < d] = 0.0
    return out


def coupling_map_array(x: np.ndarray, params: ModelParams) -> np.ndarray:
    """Vectorized coupling_map."""
    d = params.delta
    out = -1.5 * (x - d) * (x - 1.0 - d) * (x - 2.0 - d)
    out[(x < d) | (x >= 2.0 + d)] = 0.0
    return out


@dataclass
class LatticeState:
    """Site values x^i (>= 0) plus the integer time counter."""

    sites: np.ndarray
    time: int = 0

    def copy(self) -> "LatticeState":
        return LatticeState(self.sites.copy(), self.time)


def step(state: LatticeState, params: ModelParams) -> LatticeState:
    """One synchronous update of the whole lattice.

    Open boundary on the left: a virtual zero site feeds site 0.  Every
    site reads the pre-update values of itself and its left neighbor;
    results are clamped at zero.
    """
    x = state.sites
    left = np.empty_like(x)
    left[0] = 0.0
    left[1:] = x[:-1]
    new = params.alpha * coupling_map_array(left, params) + onsite_map_array(x, params)
    np.maximum(new, 0.0, out=new)
    return LatticeState(new, state.time + 1)


@dataclass(frozen=True)
class FixedPoints:
    """The three fixed points of the on-site map f, with stability flags."""

    x0: float
    x1: float
    x2: float
    stable: tuple[bool, bool, bool] = (True, False, False)


def onsite_fixed_points(params: ModelParams) -> FixedPoints:
    """Closed-form fixed points: x0 = 0 (stable), x1 = h*delta/(h-1) and
    x2 = h*(2+delta)/(1+h) (both unstable)."""
    h, d = params.h, params.delta
    if h <= 1:
        raise ValueError("fixed-point formulas require h > 1")
    return FixedPoints(x0=0.0, x1=h * d / (h - 1.0), x2=h * (2.0 + d) / (1.0 + h))


def single_site_lifetime_theory(params: ModelParams) -> float:
    """Mean chaotic-transient lifetime tau_s = 1/ln(h/2) of the uncoupled
    on-site map.  Defined for h > 2 only (no escape otherwise)."""
    if params.h <= H_CRITICAL:
        raise ValueError("single-site lifetime requires h > 2")
    return 1.0 / math.log(params.h / H_CRITICAL)


def single_site_escape_steps(x0: float, params: ModelParams, max_steps: int = 10_000_000) -> int:
    """Number of map iterations until an uncoupled site leaves the chaotic
    band (delta, 2+delta).  The escape itself happens between the last
    in-band observation and the first out-of-band one, so the mean of
    (escape_steps - 1/2) is the quantity to compare against tau_s."""
    d = params.delta
    x = x0
    for t in range(1, max_steps + 1):
        x = onsite_map(x, params)
        if x <= d or x >= 2.0 + d:
            return t
    raise RuntimeError("site did not escape within max_steps")
