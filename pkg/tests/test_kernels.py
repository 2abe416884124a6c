import math

import numpy as np
import pytest

from hawkes_renewal import (ConfigError, EnvelopeFns, ExponentialKernel,
                            GammaSchedule, PowerLawKernel, RateSpec, TableKernel,
                            ZeroKernel, eval_F, eval_f, gamma_inverse, pos_part)
from hawkes_renewal.quadrature import integrate, integrate_to_inf


def const_sched(c):
    return GammaSchedule(lambda t: c, form="custom", inverse_fn=lambda y: 0.0)


def make_env(kernel, rate, sched, r=None, D=0.0):
    return EnvelopeFns(kernel, rate, sched, r=r, D=D)


class TestEnvelopeValues:
    def test_zero_kernel_gives_zero_f(self):
        env = make_env(ZeroKernel(), RateSpec.linear(1.0, 1.0), const_sched(0.0))
        for t in [0.0, 0.5, 3.0]:
            for t2 in [0.0, 1.0, math.inf]:
                assert eval_f(env, t, t2) == 0.0

    def test_pure_majorant_case(self):
        # gamma = 0, delta = inf: prefactor 1, inner integral vanishes
        env = make_env(ExponentialKernel(1.0, 1.0), RateSpec.linear(1.0, 1.0),
                       const_sched(0.0))
        for t in [0.0, 0.3, 2.0, 7.5]:
            assert eval_f(env, t) == pytest.approx(math.exp(-t), rel=1e-8)

    def test_constant_schedule_with_refractory(self):
        # gamma = 1, delta = 1: prefactor 3, analytic integral e^{-t}
        rate = RateSpec(psi=lambda x, a: 1.0, L=0.5, c_psi=1.0,
                        g=lambda t: math.exp(-t), delta=1.0, K=1.0, setup="AD")
        env = make_env(ExponentialKernel(1.0, 1.0), rate, const_sched(1.0))
        for t in [0.0, 1.0, 2.5]:
            assert eval_f(env, t) == pytest.approx(6.0 * math.exp(-t), rel=1e-7)

    def test_envelope_collapses_to_delay_plateau(self):
        # f == 0 and g == 0 leave only the head piece c_psi on [0, D]
        env = make_env(ZeroKernel(), RateSpec.linear(1.5, 1.0), const_sched(0.0),
                       D=2.0)
        assert eval_F(env, 1.0) == pytest.approx(1.5)
        assert eval_F(env, 2.0) == pytest.approx(1.5)
        assert eval_F(env, 2.1) == 0.0
        assert env.F_l1 == pytest.approx(3.0, rel=1e-7)

    def test_f_pre_substitution(self):
        # D = 0, f = 6e^-t, g = e^-t, L = 0.5, c_psi = 1 -> F = 7 e^-t
        rate = RateSpec(psi=lambda x, a: 1.0, L=0.5, c_psi=1.0,
                        g=lambda t: math.exp(-t), delta=1.0, K=1.0, setup="AD")
        env = make_env(ExponentialKernel(1.0, 1.0), rate, const_sched(1.0))
        for t in [0.0, 0.7, 3.0]:
            assert eval_F(env, t) == pytest.approx(7.0 * math.exp(-t), rel=1e-7)
        assert env.F_l1 == pytest.approx(7.0, rel=1e-7)

    def test_quadrature_riemann_consistency(self):
        rate = RateSpec(psi=lambda x, a: 1.0, L=0.5, c_psi=1.0,
                        g=lambda t: math.exp(-t), delta=1.0, K=1.0, setup="AD")
        env = make_env(ExponentialKernel(1.0, 1.0), rate, const_sched(1.0))
        h = 1e-4
        ts = np.arange(0.0, 40.0, h) + 0.5 * h  # midpoint rule at the stated step
        riemann = float(np.sum(7.0 * np.exp(-ts) * h)) + 7.0 * math.exp(-40.0)
        assert env.F_l1 == pytest.approx(riemann, rel=1e-5)

    def test_moment_transfer_bound(self):
        # int t^p f dt is controlled by int u^{p+1} gamma(u+1) hbar(u) du
        k = ExponentialKernel(1.0, 0.2)
        rate = RateSpec.refractory_linear(0.5, 0.4, 1.0)
        sched = GammaSchedule.linear(1.0)
        env = make_env(k, rate, sched)
        p = 2.0
        lhs = integrate_to_inf(lambda t: t**p * env.f(t), 0.0)
        single = integrate_to_inf(lambda t: t**p * float(k.majorant(t)), 0.0)
        double = integrate_to_inf(
            lambda u: u ** (p + 1.0) * sched.value(u + 1.0) * float(k.majorant(u)), 0.0)
        bound = env.prefactor * (single + double / (p + 1.0))
        assert lhs <= bound * (1 + 1e-6)
        assert math.isfinite(lhs)

    def test_cumulative_band_mass_interpolant(self):
        rate = RateSpec.refractory_linear(0.5, 0.4, 1.0)
        env = make_env(ExponentialKernel(1.0, 0.2), rate,
                       GammaSchedule.linear(1.0), D=1.0)
        rng = np.random.default_rng(2)
        for t in rng.uniform(0.0, 15.0, 12):
            direct = integrate(env.F, 0.0, float(t), points=[env.D, 1.0])
            assert env.cum_F(float(t)) == pytest.approx(direct, abs=1e-6)
        assert env.tail_mass(0.0) == pytest.approx(env.F_l1, rel=1e-9)
        tc = env.t_cut(1e-3)
        assert env.tail_mass(tc) == pytest.approx(1e-3 * env.F_l1, rel=1e-3)
        m = 0.4 * env.F_l1
        assert env.cum_F(env.inv_cum(m)) == pytest.approx(m, rel=1e-6)

    def test_monotonicity(self):
        rate = RateSpec.refractory_linear(0.5, 0.4, 1.0)
        env = make_env(ExponentialKernel(1.0, 0.2), rate, GammaSchedule.linear(1.0))
        rng = np.random.default_rng(0)
        for _ in range(20):
            t1, t1b = sorted(rng.uniform(0, 5, 2))
            t2, t2b = sorted(rng.uniform(0, 10, 2))
            assert env.f(t1b, t2) <= env.f(t1, t2) + 1e-12
            assert env.f(t1, t2) <= env.f(t1, t2b) + 1e-12


class TestGammaSchedule:
    def test_identity_inverse(self):
        sched = GammaSchedule.linear(1.0)
        assert gamma_inverse(sched, 3.5) == pytest.approx(3.5)

    def test_log_inverse_at_zero(self):
        sched = GammaSchedule.log(C=2.0)
        assert gamma_inverse(sched, 0.0) == 0.0

    def test_step_function_inverse(self):
        sched = GammaSchedule(lambda t: 2.0 if t >= 1.0 else 0.0, form="custom")
        assert gamma_inverse(sched, 1.0) == pytest.approx(1.0, abs=1e-9)

    def test_bounded_schedule_gives_inf(self):
        sched = GammaSchedule(lambda t: 1.0, form="custom")
        assert gamma_inverse(sched, 2.0) == math.inf

    @pytest.mark.parametrize("sched", [
        GammaSchedule.linear(0.7),
        GammaSchedule.log(C=1.3),
        GammaSchedule(lambda t: math.floor(t) * 0.5, form="custom"),
    ])
    def test_inverse_equivalence(self, sched):
        # y <= gamma(t)  <=>  inverse(y) <= t
        rng = np.random.default_rng(1)
        for _ in range(100):
            y = rng.uniform(0, 4)
            t = rng.uniform(0, 20)
            left = y <= sched.value(t) + 1e-12
            right = sched.inverse(y) <= t + 1e-9
            assert left == right

    def test_ceil_inverse_matches_search(self):
        for sched in [GammaSchedule.linear(0.7), GammaSchedule.log(C=1.3)]:
            for y in [0.0, 0.3, 1.0, 2.5, 7.7]:
                m = sched.ceil_inverse(y)
                assert sched.value(m) >= y
                assert m == 0 or sched.value(m - 1) < y

    def test_int_shifted_log_closed_form(self):
        sched = GammaSchedule.log(C=1.0)
        for i in [1, 3, 10]:
            expect = (i + 1.0) * math.log(i + 1.0) - i
            assert sched.int_shifted(float(i)) == pytest.approx(expect, rel=1e-8)

    def test_assumption_checks(self):
        lin = GammaSchedule.linear(1.0)
        assert lin.check_assumption("AD", "B") == []
        logsched = GammaSchedule.log(p=2.0, c_h=0.2)
        assert logsched.check_assumption("O", "A", p=2.0, c_h=0.2) == []
        slow = GammaSchedule.log(C=0.01)
        assert slow.check_assumption("O", "A", p=2.0, c_h=0.2)


class TestKernels:
    def test_table_majorant_running_max(self):
        k = TableKernel([(0.0, 1.0), (1.0, -3.0), (2.0, 0.5), (3.0, 0.0)])
        assert float(k.majorant(0.0)) == 3.0
        assert float(k.majorant(0.99)) == 3.0
        assert float(k.majorant(1.5)) == 3.0
        assert float(k.majorant(2.5)) == 0.5
        assert float(k.majorant(3.5)) == 0.0
        ts = np.linspace(0, 4, 400)
        assert np.all(k.majorant(ts) >= np.abs(k.value(ts)) - 1e-12)
        assert np.all(np.diff(k.majorant(ts)) <= 1e-12)

    def test_table_pos_l1_with_sign_change(self):
        k = TableKernel([(0.0, 1.0), (1.0, -1.0), (2.0, 0.0)])
        # positive triangle on [0, 0.5] has area 1/4
        assert k.pos_l1 == pytest.approx(0.25)

    def test_exponential_tail_helpers(self):
        k = ExponentialKernel(2.0, -3.0)
        assert k.pos_l1 == 0.0
        assert k.majorant_l1 == pytest.approx(1.5)
        t = k.majorant_decay_time(1e-6)
        assert float(k.majorant(t)) == pytest.approx(1e-6, rel=1e-9)

    def test_powerlaw_needs_integrable_exponent(self):
        with pytest.raises(ConfigError):
            PowerLawKernel(1.0, 0.9)

    def test_pos_part_wrapper(self):
        k = pos_part(ExponentialKernel(1.0, -2.0))
        assert float(k.value(0.0)) == 0.0
        assert float(k.majorant(0.0)) == 2.0
        same = pos_part(ExponentialKernel(1.0, 2.0))
        assert isinstance(same, ExponentialKernel)

    def test_displacement_sampling_matches_density(self):
        rng = np.random.default_rng(7)
        k = PowerLawKernel(1.0, 3.0)
        x = k.sample_displacement(rng, 20000)
        # CDF is 1 - (1+t)^{-2}
        emp = np.mean(x <= 1.0)
        assert emp == pytest.approx(0.75, abs=0.02)


class TestRateSpec:
    def test_reference_rates_validate(self):
        assert RateSpec.linear(0.5, 1.0).validate() == []
        assert RateSpec.refractory_linear(0.5, 0.4, 1.0).validate() == []
        assert RateSpec.hard_refractory(1.0, 0.5).validate() == []

    def test_non_monotone_rate_is_caught(self):
        bad = RateSpec(psi=lambda x, a: max(1.0 - x, 0.0), L=1.0, c_psi=1.0,
                       g=lambda t: 0.0, delta=math.inf, setup="O")
        assert any("increasing in x" in p for p in bad.validate())

    def test_bad_delta_is_caught(self):
        bad = RateSpec.refractory_linear(0.5, 0.4, 0.3)
        assert any("reciprocal" in p for p in bad.validate())

    def test_refractory_bound_violation_is_caught(self):
        bad = RateSpec(psi=lambda x, a: 1.0 + max(x, 0.0), L=1.0, c_psi=1.0,
                       g=lambda t: 1.0 if t <= 1 else 0.0, delta=1.0, K=1.0,
                       setup="AD")
        assert any("refractory" in p for p in bad.validate())


class TestQuadrature:
    def test_known_integrals(self):
        assert integrate(math.sin, 0.0, math.pi) == pytest.approx(2.0, rel=1e-9)
        assert integrate_to_inf(lambda t: math.exp(-0.5 * t), 0.0) == \
            pytest.approx(2.0, rel=1e-7)

    def test_breakpoint_handling(self):
        fn = lambda t: 1.0 if t < 1.0 else 0.0
        assert integrate(fn, 0.0, 2.0, points=[1.0]) == pytest.approx(1.0, rel=1e-9)
