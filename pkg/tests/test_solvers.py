import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from l1lap import (
    AgsState,
    BpInstance,
    RunStatus,
    SolverConfig,
    ags2_step,
    ags_step,
    brute_force_bp,
    default_beta,
    init_point,
    pgs_step,
    potential,
    random_instance,
    solve,
    theoretical_iters,
)
from l1lap.errors import DimensionMismatch, InvalidEps, StepOverflow
from l1lap.solvers import PRACTICAL_BETA

from conftest import tiny_instance


class TestParameters:
    def test_pgs_beta(self):
        inst = BpInstance([[1.0, 1.0]], [1.0])
        assert default_beta("pgs", inst, 0.5) == pytest.approx(128.0)

    def test_ags_beta(self, scalar):
        assert default_beta("ags", scalar, 0.5) == pytest.approx(128.0)
        assert default_beta("ags2", scalar, 0.5) == default_beta("ags", scalar, 0.5)

    def test_pgs_beta_quadratic_in_m(self):
        a, b = random_instance(4, 2, 0.5, 0), random_instance(8, 2, 0.5, 0)
        assert default_beta("pgs", b, 0.3) / default_beta("pgs", a, 0.3) == pytest.approx(4.0)

    def test_iters(self, pair11, scalar):
        assert theoretical_iters("ags", pair11, 0.5) == 384
        assert theoretical_iters("ags2", pair11, 0.5) == 384
        assert theoretical_iters("pgs", scalar, 0.5) == 533

    @given(st.floats(0.01, 0.98), st.floats(0.001, 0.01))
    def test_iters_nonincreasing_in_eps(self, eps, step):
        inst = random_instance(5, 2, 0.5, 0)
        for v in ("pgs", "ags"):
            assert theoretical_iters(v, inst, eps + step) <= theoretical_iters(v, inst, eps)

    def test_bad_eps(self, pair11):
        with pytest.raises(InvalidEps):
            default_beta("pgs", pair11, 1.0)
        with pytest.raises(InvalidEps):
            SolverConfig(eps=0.0)

    def test_bad_variant(self):
        with pytest.raises(ValueError):
            SolverConfig(variant="fista")

    def test_practical_defaults(self, pair11):
        assert PRACTICAL_BETA == {"pgs": 3.5, "ags": 3.5, "ags2": 1.1}
        beta, delta, iters = SolverConfig("ags2").resolve(pair11)
        assert (beta, delta, iters) == (1.1, 1e-15, 10_000)

    def test_theoretical_sentinels(self, pair11):
        cfg = SolverConfig("pgs", eps=0.5, beta="theoretical", delta="theoretical",
                           max_iters="theoretical")
        beta, delta, iters = cfg.resolve(pair11)
        assert beta == pytest.approx(128.0)
        assert delta == pytest.approx(0.5 * math.sqrt(0.5) / 4)
        assert iters == theoretical_iters("pgs", pair11, 0.5)


class TestInit:
    def test_least_squares(self, pair11):
        np.testing.assert_allclose(init_point(pair11, SolverConfig()), [0.5, 0.5])

    def test_scalar(self, scalar):
        np.testing.assert_allclose(init_point(scalar, SolverConfig()), [1.0])

    def test_ones(self):
        inst = BpInstance([[1.0, 2.0, 3.0]], [1.0])
        np.testing.assert_array_equal(init_point(inst, SolverConfig(init="ones")), np.ones(3))

    def test_custom_clamped(self, pair11):
        x = init_point(pair11, SolverConfig(init=np.array([-1.0, 2.0]), delta=0.1))
        np.testing.assert_array_equal(x, [0.1, 2.0])

    def test_custom_shape(self, pair11):
        with pytest.raises(DimensionMismatch):
            init_point(pair11, SolverConfig(init=np.ones(3)))

    def test_least_squares_floored(self):
        inst = BpInstance(np.eye(2), [1.0, 0.0])
        np.testing.assert_array_equal(init_point(inst, SolverConfig(delta=1e-3)), [1.0, 1e-3])


class TestSteps:
    def test_pgs_example(self, pair11):
        x = pgs_step(pair11, np.ones(2), beta=1.0, delta=0.01)
        np.testing.assert_allclose(x, [math.exp(-0.75)] * 2)
        assert x[0] == pytest.approx(0.472367, abs=1e-6)

    def test_pgs_fixed_point(self, scalar):
        np.testing.assert_array_equal(pgs_step(scalar, [1.0], 3.5, 1e-15, g=np.zeros(1)), [1.0])

    def test_pgs_floor(self, pair11):
        x = pgs_step(pair11, [1e-3, 1.0], beta=1.0, delta=1e-3, g=np.array([50.0, 0.0]))
        np.testing.assert_array_equal(x, [1e-3, 1.0])

    def test_pgs_overflow_guard(self, pair11):
        with pytest.raises(StepOverflow):
            pgs_step(pair11, [1.0, 1.0], beta=1e-3, delta=1e-15, g=np.array([1.0, 0.0]))

    def test_ags_example(self, pair11):
        st_ = ags_step(pair11, AgsState.start(np.ones(2)), beta=1.0, delta=0.01)
        np.testing.assert_allclose(st_.y, [0.25, 0.25])
        np.testing.assert_allclose(st_.z, [0.625, 0.625])
        np.testing.assert_allclose(st_.x, [0.5, 0.5])
        np.testing.assert_allclose(st_.cumulative_gradient, [0.375, 0.375])
        assert st_.k == 1

    def test_ags_schedule(self, pair11):
        # alpha_0 = 1/2, alpha_1 = 1; tau_0 = 2/3, tau_1 = 1/2
        g = np.array([1.0, -1.0])
        s0 = AgsState.start(np.ones(2))
        s1 = ags_step(pair11, s0, 10.0, 1e-6, g=g)
        s2 = ags_step(pair11, s1, 10.0, 1e-6, g=g)
        np.testing.assert_allclose(s1.cumulative_gradient, 0.5 * g)
        np.testing.assert_allclose(s2.cumulative_gradient, 1.5 * g)
        np.testing.assert_allclose(s1.x, 2 / 3 * s1.z + 1 / 3 * s1.y)
        np.testing.assert_allclose(s2.x, 1 / 2 * s2.z + 1 / 2 * s2.y)

    def test_ags2_example(self, pair11):
        st_ = ags2_step(pair11, AgsState.start(np.ones(2)), beta=1.0, delta=0.01, tau=1e-15)
        np.testing.assert_allclose(st_.y, [0.25, 0.25])
        np.testing.assert_allclose(st_.z, [0.625, 0.625])
        np.testing.assert_allclose(st_.x, [0.25, 0.25], rtol=1e-12)

    @pytest.mark.parametrize("step", [ags_step, ags2_step])
    def test_fixed_point(self, scalar, step):
        s = step(scalar, AgsState.start(np.array([1.0])), 3.5, 1e-15)
        np.testing.assert_allclose(s.x, [1.0])
        np.testing.assert_allclose(s.y, [1.0])
        np.testing.assert_allclose(s.z, [1.0])

    @given(st.integers(0, 10_000), st.integers(0, 5))
    def test_ags2_reduces_to_ags(self, seed, k):
        # with unit weights and the ags schedule the two steps coincide
        rng = np.random.default_rng(seed)
        inst = tiny_instance(seed)
        ones = np.ones(inst.m)
        state = AgsState(x=ones, y=ones, z=ones, cumulative_gradient=rng.standard_normal(inst.m),
                         k=k, x0=ones)
        g = rng.standard_normal(inst.m)
        a = ags_step(inst, state, 4.0, 1e-3, g=g)
        b = ags2_step(inst, state, 4.0, 1e-3, tau=2 / (k + 3), g=g)
        np.testing.assert_allclose(a.x, b.x, rtol=1e-15)
        np.testing.assert_allclose(a.cumulative_gradient, b.cumulative_gradient)

    @given(st.integers(0, 10_000), st.sampled_from(["pgs", "ags", "ags2"]),
           st.floats(1e-8, 1e-2))
    def test_iterates_stay_above_floor(self, seed, variant, delta):
        inst = tiny_instance(seed)
        rng = np.random.default_rng(seed)
        x = np.maximum(rng.uniform(0, 2, inst.m), delta)
        state = AgsState.start(x)
        for _ in range(5):
            g = 5 * rng.standard_normal(inst.m)
            if variant == "pgs":
                x = pgs_step(inst, x, 1.0, delta, g=g)
                assert x.min() >= delta
            else:
                step = ags_step if variant == "ags" else ags2_step
                state = step(inst, state, 1.0, delta, g=g)
                for v in (state.x, state.y, state.z):
                    assert v.min() >= delta


class TestSolve:
    def test_pair_pgs(self, pair11):
        run = solve(pair11, SolverConfig("pgs", beta=3.5, delta=1e-15, gap_tol=1e-8))
        assert run.status is RunStatus.GAP_REACHED
        assert run.l1 == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("variant", ["pgs", "ags", "ags2"])
    def test_unique_solution(self, scalar, variant):
        run = solve(scalar, SolverConfig(variant))
        assert run.status is RunStatus.GAP_REACHED
        np.testing.assert_allclose(run.final_s, [1.0])

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_oracle(self, seed):
        inst = random_instance(10, 5, 0.5, seed)
        run = solve(inst, SolverConfig("pgs"))
        assert run.status is RunStatus.GAP_REACHED
        assert run.l1 == pytest.approx(brute_force_bp(inst).optimum_value, rel=1e-6)
        np.testing.assert_allclose(inst.A @ run.final_s, inst.b, atol=1e-10)

    def test_max_iters_and_trace(self):
        inst = random_instance(10, 5, 0.5, 1)
        run = solve(inst, SolverConfig("ags2", max_iters=5, gap_tol=0.0))
        assert run.status is RunStatus.MAX_ITERS
        assert run.iterations == 5
        assert [r.k for r in run.trace] == [1, 2, 3, 4, 5]
        assert run.initial.k == 0

    def test_trace_every(self):
        inst = random_instance(10, 5, 0.5, 1)
        run = solve(inst, SolverConfig("pgs", max_iters=10, gap_tol=0.0, trace_every=4))
        assert [r.k for r in run.trace] == [4, 8, 10]

    def test_gap_met_at_start(self, scalar):
        run = solve(scalar, SolverConfig("pgs"))
        assert run.iterations == 0
        assert [r.k for r in run.trace] == [0]

    def test_overrides(self):
        inst = BpInstance([[1.0, 2.0]], [1.0])
        run = solve(inst, variant="ags2", max_iters=3, gap_tol=0.0)
        assert run.params["variant"] == "ags2" and run.iterations == 3

    def test_theoretical_budget(self):
        inst = BpInstance([[1.0, 2.0]], [1.0])
        cfg = SolverConfig("ags", eps=0.5, beta="theoretical", delta="theoretical",
                           max_iters="theoretical", gap_tol=0.0)
        run = solve(inst, cfg)
        assert run.params["max_iters"] == 384
        assert run.iterations == 384

    def test_error_keeps_last_iterate(self):
        # beta far too small: the guard trips on the first step
        inst = random_instance(10, 5, 0.5, 2)
        run = solve(inst, SolverConfig("pgs", beta=1e-6, init="ones"))
        assert run.status is RunStatus.ERROR
        assert run.iterations == 0
        assert "exceeds" in run.message
        assert not run.breakdown
        np.testing.assert_allclose(inst.A @ run.final_s, inst.b, atol=1e-10)

    @pytest.mark.parametrize("seed", range(4))
    def test_trace_invariants(self, seed):
        inst = tiny_instance(seed)
        opt = brute_force_bp(inst).optimum_value
        for variant in ("pgs", "ags2"):
            run = solve(inst, SolverConfig(variant, max_iters=300))
            ks = [r.k for r in run.trace]
            assert ks == sorted(set(ks))
            for r in [run.initial, *run.trace]:
                assert r.l1 <= r.f / 2 + 1e-12
                assert r.gap >= -1e-10
                assert r.l1 - opt <= r.gap + 1e-9

    def test_cg_path_with_warm_start(self):
        inst = random_instance(30, 15, 0.3, 4)
        dense = solve(inst, SolverConfig("pgs", max_iters=50, gap_tol=0.0))
        cg = solve(inst, SolverConfig("pgs", max_iters=50, gap_tol=0.0, linear_solver="cg"))
        assert cg.status is RunStatus.MAX_ITERS
        assert cg.l1 == pytest.approx(dense.l1, rel=1e-8)

    def test_pgs_theoretical_descent(self):
        inst = random_instance(6, 3, 0.5, 9)
        cfg = SolverConfig("pgs", eps=0.25, beta="theoretical", delta="theoretical",
                           init="ones", max_iters=200, gap_tol=0.0)
        run = solve(inst, cfg)
        f = [run.initial.f] + [r.f for r in run.trace]
        assert np.all(np.diff(f) <= 1e-10)
