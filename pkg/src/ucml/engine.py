"""Trajectory simulation: seeded perturbations, edge tracking, lifetimes,
outcome classification, and deterministic ensembles.

The lattice realizes an infinitely long pipe: open boundary on the left
(a virtual zero site feeds the first site) and dynamic extension on the
right whenever the leading edge approaches the end of the allocated
buffer.  Exact-zero prefixes are dropped via an index offset, so memory
stays proportional to the active width.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit

from .params import ModelParams
from . import dynamics

GUARD = 64  # right-hand guard band before the buffer is extended

CAUSE_DECAYED = "decayed"
CAUSE_MAX_TIME = "max-time"


@njit(cache=True, nogil=True, inline="always")
def _f(x, h, d):
    if x < d:
        return 0.0
    if x < 1.0 + d:
        return h * (x - d)
    return -h * (x - 2.0 - d)


@njit(cache=True, nogil=True, inline="always")
def _g(x, d):
    if x < d or x >= 2.0 + d:
        return 0.0
    return -1.5 * (x - d) * (x - 1.0 - d) * (x - 2.0 - d)


@njit(cache=True, nogil=True)
def _run(profile, alpha, h, d, max_time, record, lead, trail, count):
    """Advance the lattice until relaminarization or max_time.

    profile holds the initial values of absolute sites 0..m-1.  Returns
    (t_end, decayed) where t_end is the time of the last recorded step:
    the first all-zero time when decayed, else max_time.  When record is
    True, lead/trail/count[t] hold the absolute leading/trailing edge
    indices and the number of nonzero sites for t = 0..t_end-ish (the
    final all-zero step is not recorded; counts there are zero).
    """
    m = profile.size
    n = 256
    while n < m + 2 * GUARD:
        n *= 2
    x = np.zeros(n)
    buf = np.zeros(n)
    base = -1  # absolute index of x[0]; initial profile sits at x[1:m+1]
    for i in range(m):
        x[i + 1] = profile[i] if profile[i] > 0.0 else 0.0

    lo = -1
    hi = -1
    cnt = 0
    for i in range(1, m + 1):
        if x[i] > 0.0:
            cnt += 1
            hi = i
            if lo < 0:
                lo = i
    if cnt == 0:
        return 0, True
    if record:
        lead[0] = base + hi
        trail[0] = base + lo
        count[0] = cnt

    for t in range(1, max_time + 1):
        # keep room for the coupling to reach site hi+1
        if hi + 2 >= n:
            if lo > n // 2:
                s = lo - 1
                for i in range(lo, hi + 1):
                    x[i - s] = x[i]
                for i in range(hi + 1 - s, hi + 1):
                    x[i] = 0.0
                base += s
                lo -= s
                hi -= s
            else:
                nx = np.zeros(2 * n)
                nx[: hi + 1] = x[: hi + 1]
                x = nx
                buf = np.zeros(2 * n)
                n = 2 * n
        # synchronous update over the active window (reads all old values)
        for i in range(lo, hi + 2):
            v = alpha * _g(x[i - 1], d) + _f(x[i], h, d)
            buf[i] = v if v > 0.0 else 0.0
        nlo = -1
        nhi = -1
        cnt = 0
        for i in range(lo, hi + 2):
            x[i] = buf[i]
            if buf[i] > 0.0:
                cnt += 1
                nhi = i
                if nlo < 0:
                    nlo = i
        if cnt == 0:
            return t, True
        lo = nlo
        hi = nhi
        if record:
            lead[t] = base + hi
            trail[t] = base + lo
            count[t] = cnt
    return max_time, False


@dataclass(frozen=True)
class InitialCondition:
    """Seeded perturbation of the laminar lattice.

    kind "single-site": one site at a uniform random amplitude in the
    spreading window (1+delta, 2+delta).  kind "multi-site": n_sites
    consecutive sites, each drawn the same way.  kind "explicit": the
    given profile, verbatim.
    """

    kind: str = "single-site"
    seed: int = 0
    n_sites: int = 1
    profile: np.ndarray | None = None

    def build(self, params: ModelParams, rng: np.random.Generator | None = None) -> np.ndarray:
        if self.kind == "explicit":
            if self.profile is None:
                raise ValueError("explicit initial condition requires a profile")
            return np.asarray(self.profile, dtype=float)
        if rng is None:
            rng = np.random.default_rng(np.random.SeedSequence(self.seed))
        lo, hi = params.spreading_window
        if self.kind == "single-site":
            return rng.uniform(lo, hi, size=1)
        if self.kind == "multi-site":
            return rng.uniform(lo, hi, size=self.n_sites)
        raise ValueError(f"unknown initial-condition kind: {self.kind}")


@dataclass
class TrajectoryRecord:
    """Per-step edge positions and activity, plus the terminal outcome.

    lifetime is the number of steps until all sites are exactly 0; when
    the run hits max_time first, lifetime equals max_time and the sample
    is right-censored (cause "max-time").
    """

    params: ModelParams
    lifetime: int
    cause: str
    max_time: int
    lead: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    trail: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    count: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    seed: int | None = None

    @property
    def censored(self) -> bool:
        return self.cause == CAUSE_MAX_TIME

    @property
    def last_active_time(self) -> int:
        return self.lifetime - 1 if self.cause == CAUSE_DECAYED else self.max_time


def run_trajectory(params: ModelParams, ic: InitialCondition, max_time: int,
                   record_edges: bool = True) -> TrajectoryRecord:
    """Run one trajectory; deterministic given (params, ic, max_time)."""
    if max_time < 1:
        raise ValueError("max_time must be >= 1")
    profile = ic.build(params)
    if record_edges:
        lead = np.empty(max_time + 1, np.int64)
        trail = np.empty(max_time + 1, np.int64)
        count = np.empty(max_time + 1, np.int64)
    else:
        lead = trail = count = np.empty(1, np.int64)
    t_end, decayed = _run(profile, params.alpha, params.h, params.delta,
                          max_time, record_edges, lead, trail, count)
    cause = CAUSE_DECAYED if decayed else CAUSE_MAX_TIME
    lifetime = t_end if decayed else max_time
    n_rec = (lifetime if decayed else max_time + 1) if record_edges else 0
    return TrajectoryRecord(
        params=params, lifetime=lifetime, cause=cause, max_time=max_time,
        lead=lead[:n_rec].copy(), trail=trail[:n_rec].copy(),
        count=count[:n_rec].copy(),
        seed=ic.seed if ic.kind != "explicit" else None)


def run_field_trajectory(params: ModelParams, ic: InitialCondition,
                         max_time: int) -> tuple[np.ndarray, TrajectoryRecord]:
    """Like run_trajectory but also returns the full space-time field
    (one row per step, columns = absolute sites 0..).  Meant for small
    runs feeding the space-time export; uses the reference numpy step."""
    profile = ic.build(params)
    rows = [profile.copy()]
    state = dynamics.LatticeState(profile.copy())
    lead, trail, count = [], [], []

    def edges(x):
        nz = np.nonzero(x > 0)[0]
        if nz.size == 0:
            return -1, -1, 0
        return int(nz[-1]), int(nz[0]), int(nz.size)

    li, ti, ci = edges(state.sites)
    lead.append(li); trail.append(ti); count.append(ci)
    lifetime, cause = max_time, CAUSE_MAX_TIME
    for t in range(1, max_time + 1):
        if edges(state.sites)[0] + GUARD >= state.sites.size:
            state = dynamics.LatticeState(
                np.concatenate([state.sites, np.zeros(state.sites.size)]), state.time)
        state = dynamics.step(state, params)
        rows.append(state.sites.copy())
        li, ti, ci = edges(state.sites)
        if ci == 0:
            lifetime, cause = t, CAUSE_DECAYED
            rows.pop()
            break
        lead.append(li); trail.append(ti); count.append(ci)
    width = max(r.size for r in rows)
    fieldarr = np.zeros((len(rows), width))
    for i, r in enumerate(rows):
        fieldarr[i, : r.size] = r
    rec = TrajectoryRecord(
        params=params, lifetime=lifetime, cause=cause, max_time=max_time,
        lead=np.array(lead, np.int64), trail=np.array(trail, np.int64),
        count=np.array(count, np.int64),
        seed=ic.seed if ic.kind != "explicit" else None)
    return fieldarr, rec


def measure_edge_velocities(record: TrajectoryRecord,
                            window: tuple[int, int]) -> tuple[float, float]:
    """Least-squares slopes of leading/trailing edge index vs time over
    [t0, t1].  Regression absorbs the multi-site jumps of the trailing
    edge.  The record must be active through the whole window."""
    t0, t1 = window
    if t1 - t0 < 10:
        raise ValueError("velocity window must span at least 10 steps")
    if t1 > record.last_active_time or record.lead.size <= t1:
        raise ValueError("record not active over the requested window")
    t = np.arange(t0, t1 + 1, dtype=float)
    v_l = np.polyfit(t, record.lead[t0:t1 + 1].astype(float), 1)[0]
    v_t = np.polyfit(t, record.trail[t0:t1 + 1].astype(float), 1)[0]
    return float(v_l), float(v_t)


@dataclass(frozen=True)
class Classification:
    label: str  # decay | puff | slug
    v_l: float
    v_t: float
    width_slope: float
    long_lived: bool


# Classification thresholds (overridable per call):
DECAY_LIFETIME_MULTIPLE = 10.0       # decay if tau <= 10 * tau_s
LONG_LIVED_MULTIPLE = 1e3            # long-lived puff marker: tau > 1e3 * tau_s
SLUG_MARGIN = 0.01                   # slug if v_l - v_t exceeds this ...
SLUG_MIN_WINDOW = 500                # ... over at least this many active steps


def classify(record: TrajectoryRecord,
             decay_multiple: float = DECAY_LIFETIME_MULTIPLE,
             slug_margin: float = SLUG_MARGIN,
             slug_min_window: int = SLUG_MIN_WINDOW) -> Classification:
    """Label a finished trajectory as decay, puff, or slug.

    Decay: lifetime at most decay_multiple * tau_s.  Slug: the width
    trend (v_l - v_t from regression over the later part of the record)
    exceeds slug_margin over a window of at least slug_min_window active
    steps.  Everything else is a puff; the long_lived flag marks
    tau > 1e3 * tau_s (the phase-diagram marker rule)."""
    tau_s = dynamics.single_site_lifetime_theory(record.params)
    t_last = record.last_active_time
    long_lived = record.lifetime > LONG_LIVED_MULTIPLE * tau_s
    if record.cause == CAUSE_DECAYED and record.lifetime <= decay_multiple * tau_s:
        return Classification("decay", math.nan, math.nan, math.nan, False)
    v_l = v_t = slope = math.nan
    if record.lead.size and t_last >= 20:
        t0 = max(t_last // 5, 10)
        v_l, v_t = measure_edge_velocities(record, (t0, t_last))
        slope = v_l - v_t
        if slope > slug_margin and t_last - t0 >= slug_min_window:
            return Classification("slug", v_l, v_t, slope, long_lived)
    return Classification("puff", v_l, v_t, slope, long_lived)


@dataclass
class EnsembleResult:
    """Per-trajectory samples from a deterministic ensemble.

    Trajectory i is fully reproducible: its initial profile is
    amplitudes[i] (row i for multi-site laws), drawn in one batch from
    default_rng(SeedSequence(master_seed)).  Worker count and scheduling
    never affect the samples."""

    params: ModelParams
    master_seed: int
    max_time: int
    lifetimes: np.ndarray          # int64, steps until all-zero (or max_time)
    censored: np.ndarray           # bool
    amplitudes: np.ndarray
    v_l: np.ndarray | None = None  # per-trajectory slopes, NaN if window unavailable
    v_t: np.ndarray | None = None


def run_ensemble(params: ModelParams, n: int, max_time: int,
                 master_seed: int = 0, ic_kind: str = "single-site",
                 n_sites: int = 1, fixed_amplitude: float | None = None,
                 threads: int | None = None,
                 velocity_window: tuple[int, int] | None = None) -> EnsembleResult:
    """Run n independent trajectories with deterministic seeding.

    fixed_amplitude replaces the uniform amplitude law by a constant
    kick (used for threshold scans and sensitivity checks).  When
    velocity_window=(t0, t1) is given, per-trajectory edge slopes over
    that window are measured (NaN for trajectories not active through
    t1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(master_seed))
    lo, hi = params.spreading_window
    cols = n_sites if ic_kind == "multi-site" else 1
    if fixed_amplitude is not None:
        amplitudes = np.full((n, cols), float(fixed_amplitude))
    else:
        amplitudes = rng.uniform(lo, hi, size=(n, cols))

    record = velocity_window is not None
    lifetimes = np.empty(n, np.int64)
    censored = np.empty(n, bool)
    v_l = np.full(n, np.nan) if record else None
    v_t = np.full(n, np.nan) if record else None

    def work(i0: int, i1: int) -> None:
        if record:
            lead = np.empty(max_time + 1, np.int64)
            trail = np.empty(max_time + 1, np.int64)
            count = np.empty(max_time + 1, np.int64)
        else:
            lead = trail = count = np.empty(1, np.int64)
        for i in range(i0, i1):
            t_end, decayed = _run(amplitudes[i], params.alpha, params.h,
                                  params.delta, max_time, record,
                                  lead, trail, count)
            lifetimes[i] = t_end if decayed else max_time
            censored[i] = not decayed
            if record:
                t0, t1 = velocity_window
                t_last = t_end - 1 if decayed else max_time
                if t_last >= t1 and t1 - t0 >= 10:
                    t = np.arange(t0, t1 + 1, dtype=float)
                    v_l[i] = np.polyfit(t, lead[t0:t1 + 1].astype(float), 1)[0]
                    v_t[i] = np.polyfit(t, trail[t0:t1 + 1].astype(float), 1)[0]

    threads = resolve_threads(threads)
    if threads <= 1 or n < 4:
        work(0, n)
    else:
        chunk = -(-n // threads)
        with ThreadPoolExecutor(max_workers=threads) as ex:
            futures = [ex.submit(work, i, min(i + chunk, n))
                       for i in range(0, n, chunk)]
            for f in futures:
                f.result()
    return EnsembleResult(params=params, master_seed=master_seed,
                          max_time=max_time, lifetimes=lifetimes,
                          censored=censored, amplitudes=amplitudes,
                          v_l=v_l, v_t=v_t)


def resolve_threads(threads: int | None) -> int:
    """Default worker count: UCML_THREADS env var, else the CPU count."""
    import os
    if threads is not None:
        return max(1, threads)
    env = os.environ.get("UCML_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def export_space_time(path, fieldarr: np.ndarray, params: ModelParams,
                      seed: int | None) -> None:
    """Write the space-time field as CSV: a header line carrying params
    and seed, then one comma-separated row of site values per step."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# alpha={params.alpha!r},h={params.h!r},delta={params.delta!r},"
                 f"seed={seed}\n")
        for row in fieldarr:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
