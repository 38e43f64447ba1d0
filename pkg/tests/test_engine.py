"""Tests of the trajectory engine: determinism, the infinite-pipe
contract, edge tracking, and outcome classification."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ucml import (
    Classification,
    InitialCondition,
    ModelParams,
    TrajectoryRecord,
    classify,
    measure_edge_velocities,
    run_ensemble,
    run_trajectory,
)
from ucml.dynamics import single_site_lifetime_theory
from ucml.engine import run_field_trajectory

P = ModelParams(0.5, 2.2, 0.1)


class TestRunTrajectory:
    def test_deterministic(self):
        a = run_trajectory(P, InitialCondition(seed=9), 5000)
        b = run_trajectory(P, InitialCondition(seed=9), 5000)
        assert a.lifetime == b.lifetime
        assert np.array_equal(a.lead, b.lead)
        assert np.array_equal(a.trail, b.trail)

    def test_zero_profile_is_dead(self):
        r = run_trajectory(P, InitialCondition(kind="explicit",
                                               profile=np.zeros(8)), 100)
        assert r.lifetime == 0 and r.cause == "decayed"

    def test_extending_max_time_keeps_lifetime(self):
        short = run_trajectory(P, InitialCondition(seed=3), 2000)
        if short.cause == "decayed":
            long = run_trajectory(P, InitialCondition(seed=3), 50000)
            assert long.lifetime == short.lifetime

    def test_matches_reference_step(self):
        """The compiled kernel agrees exactly with the plain numpy
        update, including edge positions."""
        ic = InitialCondition(seed=4)
        fast = run_trajectory(P, ic, 3000)
        _, slow = run_field_trajectory(P, ic, 3000)
        assert fast.lifetime == slow.lifetime
        assert np.array_equal(fast.lead, slow.lead)
        assert np.array_equal(fast.trail, slow.trail)
        assert np.array_equal(fast.count, slow.count)

    def test_edges_ordered_while_active(self):
        r = run_trajectory(P, InitialCondition(seed=5), 3000)
        assert np.all(r.lead >= r.trail)
        assert np.all(r.count >= 1)

    def test_lattice_size_independence(self):
        """Padding the initial profile with trailing zeros changes no
        observable (infinitely-long-pipe contract)."""
        kick = np.zeros(4)
        kick[0] = 1.8
        a = run_trajectory(P, InitialCondition(kind="explicit", profile=kick), 4000)
        b = run_trajectory(P, InitialCondition(
            kind="explicit", profile=np.concatenate([kick, np.zeros(500)])), 4000)
        assert a.lifetime == b.lifetime
        assert np.array_equal(a.lead, b.lead)
        assert np.array_equal(a.count, b.count)

    def test_unidirectional_influence(self):
        """A second kick placed right of the structure never changes the
        sites left of it."""
        k = 40
        base = np.zeros(k + 1)
        base[0] = 1.9
        mod = base.copy()
        mod[k] = 1.7
        fa, _ = run_field_trajectory(
            P, InitialCondition(kind="explicit", profile=base), 60)
        fb, _ = run_field_trajectory(
            P, InitialCondition(kind="explicit", profile=mod), 60)
        t = min(fa.shape[0], fb.shape[0])
        assert np.array_equal(fa[:t, :k], fb[:t, :k])


class TestMeasureEdgeVelocities:
    def synthetic(self, n, lead_step):
        lead = (np.arange(n) // lead_step).astype(np.int64)
        return TrajectoryRecord(params=P, lifetime=n, cause="max-time",
                                max_time=n - 1, lead=lead,
                                trail=np.zeros(n, np.int64),
                                count=np.ones(n, np.int64))

    def test_exact_slope(self):
        r = self.synthetic(401, 4)
        v_l, v_t = measure_edge_velocities(r, (0, 400))
        assert v_l == pytest.approx(0.25, abs=1e-3)
        assert v_t == 0.0

    def test_rejects_short_window(self):
        with pytest.raises(ValueError):
            measure_edge_velocities(self.synthetic(401, 4), (0, 5))

    def test_rejects_inactive_window(self):
        r = run_trajectory(ModelParams(0.1, 2.5), InitialCondition(seed=0), 1000)
        with pytest.raises(ValueError):
            measure_edge_velocities(r, (0, 900))


class TestClassify:
    def test_quick_decay(self):
        r = run_trajectory(ModelParams(0.1, 2.5), InitialCondition(seed=0), 10000)
        assert classify(r).label == "decay"

    def test_slug_parameters(self):
        r = run_trajectory(ModelParams(2.8, 2.1), InitialCondition(seed=1), 2000)
        c = classify(r)
        assert c.label == "slug"
        assert c.v_l - c.v_t > 0.01

    def test_decaying_puff_parameters(self):
        """Established structures at (0.8, 2.1) are puffs whose median
        lifetime is of the order of a few thousand steps."""
        p = ModelParams(0.8, 2.1)
        tau_s = single_site_lifetime_theory(p)
        res = run_ensemble(p, 400, 100000, master_seed=11, threads=1)
        established = res.lifetimes[res.lifetimes > 10 * tau_s]
        med = np.median(established)
        assert 350 < med < 35000
        # and an established trajectory classifies as puff, not slug
        for seed in range(30):
            r = run_trajectory(p, InitialCondition(seed=seed), 100000)
            if r.lifetime > 10 * tau_s:
                assert classify(r).label == "puff"
                break
        else:
            pytest.fail("no established puff found in 30 seeds")

    def test_long_lived_marker(self):
        p = ModelParams(0.5, 2.1)
        tau_s = single_site_lifetime_theory(p)
        r = TrajectoryRecord(params=p, lifetime=int(2e3 * tau_s) + 1,
                             cause="decayed", max_time=10**6)
        assert classify(r).long_lived

    def test_returns_dataclass(self):
        r = run_trajectory(ModelParams(0.1, 2.5), InitialCondition(seed=2), 1000)
        assert isinstance(classify(r), Classification)


class TestRunEnsemble:
    def test_single_matches_trajectory(self):
        res = run_ensemble(P, 1, 5000, master_seed=13)
        r = run_trajectory(P, InitialCondition(seed=13), 5000)
        assert res.lifetimes[0] == r.lifetime

    @pytest.mark.parametrize("threads", [2, 4, 7])
    def test_thread_count_never_changes_samples(self, threads):
        a = run_ensemble(P, 200, 3000, master_seed=21, threads=1)
        b = run_ensemble(P, 200, 3000, master_seed=21, threads=threads)
        assert np.array_equal(a.lifetimes, b.lifetimes)
        assert np.array_equal(a.censored, b.censored)
        assert np.array_equal(a.amplitudes, b.amplitudes)

    def test_velocity_window_samples(self):
        res = run_ensemble(ModelParams(2.9, 2.16), 30, 3000, master_seed=2,
                           velocity_window=(300, 2500))
        ok = np.isfinite(res.v_l)
        assert ok.sum() >= 20
        assert np.all(res.v_l[ok] > res.v_t[ok])

    def test_amplitudes_in_spreading_window(self):
        res = run_ensemble(P, 500, 100, master_seed=3)
        lo, hi = P.spreading_window
        assert np.all((res.amplitudes >= lo) & (res.amplitudes < hi))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            run_ensemble(P, 0, 100)

    @settings(max_examples=10)
    @given(st.integers(0, 2**63 - 1), st.integers(1, 6))
    def test_seed_splitting_property(self, seed, threads):
        a = run_ensemble(P, 16, 500, master_seed=seed, threads=1)
        b = run_ensemble(P, 16, 500, master_seed=seed, threads=threads)
        assert np.array_equal(a.lifetimes, b.lifetimes)
