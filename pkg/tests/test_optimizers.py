import numpy as np
import pytest

from dualavg import optimizers as opt
from dualavg import schedules
from dualavg.errors import ContractError
from dualavg.problems import (GradientSample, full_subgradient, quadratic_problem,
                              stochastic_subgradient)
from dualavg.projections import box, contains, l2_ball, whole_space


def grad(v):
    v = np.asarray(v, dtype=float)
    return GradientSample(v, float(v @ v))


@pytest.fixture
def unit_quad():
    return quadratic_problem([0.0, 0.0], mu=1.0)


class TestGda:
    def test_one_step_solves_pure_quadratic(self, unit_quad):
        s = opt.init_state("gda", 2, whole_space(), [2.0, 0.0])
        g = full_subgradient(unit_quad, s.w)
        np.testing.assert_array_equal(g.vector, [2.0, 0.0])
        s = opt.gda_step(s, unit_quad, whole_space(), g)
        np.testing.assert_array_equal(s.w, [0.0, 0.0])
        np.testing.assert_array_equal(np.asarray(s.weighted_sum(1.0), float), [0.0, 0.0])

    def test_averaged_output_after_one_step(self, quad5):
        w1 = np.arange(5.0)
        s = opt.init_state("gda", 5, whole_space(), w1)
        s = opt.gda_step(s, quad5, whole_space(), full_subgradient(quad5, s.w))
        np.testing.assert_array_equal(opt.gda_averaged_output(s), w1)

    def test_averaged_output_linear_weights(self):
        # iterates 1 then 4 with weights 1 and 2: (1 + 8) / 3
        p = quadratic_problem([4.0], mu=1.0)
        s = opt.init_state("gda", 1, whole_space(), [1.0])
        s = opt.gda_step(s, p, whole_space(), grad([-3.0]))   # w_2 = w_1 - g / mu = 4
        np.testing.assert_allclose(s.w, [4.0])
        s = opt.gda_step(s, p, whole_space(), full_subgradient(p, s.w))
        np.testing.assert_allclose(opt.gda_averaged_output(s), [3.0], rtol=1e-15)

    def test_averaged_output_constant_is_uniform_mean(self, quad5, rng):
        s = opt.init_state("gda", 5, whole_space(), rng.normal(size=5), "constant")
        seen = []
        for _ in range(7):
            seen.append(s.w)
            s = opt.gda_step(s, quad5, whole_space(), full_subgradient(quad5, s.w))
        np.testing.assert_allclose(opt.gda_averaged_output(s), np.mean(seen, axis=0),
                                   rtol=1e-13)

    def test_averaged_output_needs_a_step(self):
        with pytest.raises(ContractError):
            opt.gda_averaged_output(opt.init_state("gda", 3, whole_space()))

    def test_unadvanced_schedule_rejected(self, quad5):
        s = opt.init_state("gda", 5, whole_space())
        bad = opt.GdaState(s.w, s.primal_sum, s.grad_sum, schedules.fresh(), s.averaged_num, 0)
        with pytest.raises(ContractError):
            opt.gda_step(bad, quad5, whole_space(), grad(np.zeros(5)))


class TestScPda:
    def test_first_step_combination(self, unit_quad):
        s = opt.init_state("scpda", 2, whole_space(), [2.0, 0.0])
        s = opt.scpda_step(s, unit_quad, whole_space(), full_subgradient(unit_quad, s.w))
        np.testing.assert_array_equal(s.w_plus, [0.0, 0.0])
        np.testing.assert_allclose(s.w, [2.0 / 3.0, 0.0], rtol=1e-15)
        assert (s.sched.t, s.sched.A) == (2, 3)

    def test_iterate_stays_in_set(self, svm_small, rng):
        fset = l2_ball(0.2)
        s = opt.init_state("scpda", svm_small.dim, fset, rng.normal(size=svm_small.dim))
        for _ in range(50):
            s = opt.scpda_step(s, svm_small, fset, stochastic_subgradient(svm_small, s.w, rng))
            assert contains(fset, s.w_plus, 1e-12) and contains(fset, s.w, 1e-9)


class TestPegasos:
    def test_unit_step(self):
        s = opt.pegasos_step(opt.PegasosState(np.array([2.0, 0.0]), 1), whole_space(), 1.0,
                             grad([2.0, 0.0]))
        np.testing.assert_array_equal(s.w, [0.0, 0.0])
        assert s.t == 2

    def test_step_size_one_over_mu_t(self):
        s = opt.pegasos_step(opt.PegasosState(np.zeros(1), 4), whole_space(), 2.0, grad([1.0]))
        np.testing.assert_array_equal(s.w, [-0.125])

    def test_zero_gradient_is_fixed_point(self):
        w = np.array([0.3, -0.7])
        s = opt.pegasos_step(opt.PegasosState(w, 9), whole_space(), 1.0, grad([0.0, 0.0]))
        np.testing.assert_array_equal(s.w, w)


class TestPaPsg:
    def test_delta(self):
        assert opt.papsg_delta(1, 1.0) == 0.5

    def test_regularizer_only_gradient_shrinks(self):
        fset = box(-10.0, 10.0)
        s = opt.init_state("papsg", 2, fset, [1.0, -2.0])
        mu = 0.5
        s2 = opt.papsg_step(s, fset, mu, grad(mu * s.w))
        np.testing.assert_allclose(s2.w_plus_prev, opt.papsg_delta(1, mu) * s.w_plus_prev)

    def test_vanishing_mu_limit(self, rng):
        """At mu = 1e-12 the inner step matches w+ = P(w+_prev - a g) to rounding."""
        fset = l2_ball(3.0)
        s = opt.init_state("papsg", 4, fset, rng.normal(size=4))
        for _ in range(5):
            g = grad(rng.normal(size=4))
            expect = s.w_plus_prev - s.sched.a * g.vector
            nrm = np.linalg.norm(expect)
            expect = expect * min(1.0, 3.0 / nrm)
            s = opt.papsg_step(s, fset, 1e-12, g)
            np.testing.assert_allclose(s.w_plus_prev, expect, rtol=1e-9, atol=1e-9)


class TestScRda:
    def test_closed_form_first_step(self):
        s = opt.init_state("scrda", 2, whole_space())
        s, w = opt.scrda_step(s, whole_space(), 1.0, grad([-1.0, 0.0]))
        np.testing.assert_array_equal(w, [1.0, 0.0])

    def test_zero_gradients(self):
        s = opt.init_state("scrda", 3, whole_space())
        for _ in range(4):
            s, w = opt.scrda_step(s, whole_space(), 2.0, grad(2.0 * s.w))
        np.testing.assert_array_equal(w, np.zeros(3))


class TestDa:
    def test_single_step_on_ball(self):
        s = opt.init_state("da", 2, l2_ball(1.0), schedule="constant")
        s, w = opt.da_step(s, l2_ball(1.0), grad([1.0, 1.0]))
        np.testing.assert_allclose(w, [-1 / np.sqrt(2), -1 / np.sqrt(2)], rtol=1e-15)

    def test_zero_gradients_give_projected_origin(self):
        fset = box(0.5, 1.0)
        s = opt.init_state("da", 2, fset, schedule="constant")
        s, w = opt.da_step(s, fset, grad([0.0, 0.0]))
        np.testing.assert_array_equal(w, [0.5, 0.5])

    def test_bad_gamma(self):
        with pytest.raises(ContractError):
            opt.init_state("da", 2, whole_space(), da_gamma=0.0)


@pytest.mark.parametrize("algo", opt.ALGORITHMS)
@pytest.mark.parametrize("fset", [l2_ball(0.5), box(-0.1, 0.3)], ids=["ball", "box"])
def test_every_iterate_feasible(algo, fset, svm_small):
    rng = np.random.default_rng(5)
    s = opt.init_state(algo, svm_small.dim, fset, rng.normal(size=svm_small.dim) * 4)
    assert contains(fset, s.w, 1e-12)
    for _ in range(60):
        s = opt.step(algo, s, svm_small, fset, stochastic_subgradient(svm_small, s.w, rng))
        assert contains(fset, s.w, 1e-9)


def test_states_are_not_mutated(quad5):
    s = opt.init_state("scpda", 5, whole_space(), np.ones(5))
    before = s.w.copy(), s.w_plus.copy()
    opt.scpda_step(s, quad5, whole_space(), full_subgradient(quad5, s.w))
    np.testing.assert_array_equal(s.w, before[0])
    np.testing.assert_array_equal(s.w_plus, before[1])


def test_unknown_algorithm():
    with pytest.raises(ContractError):
        opt.init_state("adam", 2, whole_space())


def test_init_projects_start():
    s = opt.init_state("pegasos", 2, box(1.0, 2.0))
    np.testing.assert_array_equal(s.w, [1.0, 1.0])


def test_fault_hook_flips_gda_only(quad5):
    s = opt.init_state("gda", 5, whole_space(), np.ones(5))
    g = full_subgradient(quad5, s.w)
    clean = opt.gda_step(s, quad5, whole_space(), g).w
    with opt.inject_fault(opt.FAULT_GDA_SIGN):
        broken = opt.gda_step(s, quad5, whole_space(), g).w
    assert not np.allclose(clean, broken)
    np.testing.assert_array_equal(opt.gda_step(s, quad5, whole_space(), g).w, clean)
    with pytest.raises(ContractError):
        with opt.inject_fault("nope"):
            pass
