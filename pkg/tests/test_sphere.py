import math

import numpy as np
import pytest

from helpers import gen_for, random_projection
from nearrep import (
    RngSpec,
    concentration_bound,
    concentration_check,
    haar_unitary,
    mass_transport_bound,
    mass_transport_gap,
    onb_in_set,
    sample_sphere,
    sample_sphere_many,
    sphere_trace_integral,
)
from nearrep.errors import (
    BadParamsError,
    OnbSearchExhausted,
    RankMismatchError,
    UnknownFunctionError,
)
from nearrep.linalg import Projection, op_norm


class TestSampleSphere:
    def test_unit_norm_and_determinism(self):
        rng = RngSpec(seed=42, stream=7)
        x = sample_sphere(16, rng)
        assert abs(np.linalg.norm(x) - 1.0) < 1e-12
        assert np.array_equal(x, sample_sphere(16, rng))
        assert not np.array_equal(x, sample_sphere(16, RngSpec(seed=42, stream=8)))

    def test_dim_one_is_a_phase(self):
        x = sample_sphere(1, RngSpec(3))
        assert abs(abs(x[0]) - 1.0) < 1e-12

    def test_first_coordinate_mean_is_zero(self):
        trials = 100_000
        x = sample_sphere_many(8, trials, RngSpec(5))
        assert abs(x[:, 0].mean()) <= 4 / math.sqrt(trials)

    def test_coordinate_weight_is_one_over_dim(self):
        # sphere integral of the rank-1 quadratic form |<e1, x>|^2 = 1/d
        trials = 100_000
        for d in (2, 10):
            x = sample_sphere_many(d, trials, RngSpec(6, d))
            weight = np.abs(x[:, 0]) ** 2
            assert abs(weight.mean() - 1.0 / d) <= 4 / math.sqrt(trials)


class TestHaarUnitary:
    def test_columns_are_onb(self):
        u = haar_unitary(24, RngSpec(9)).matrix
        assert op_norm(u.conj().T @ u - np.eye(24)) <= 1e-10

    def test_dim_one_uniform_phase(self):
        vals = [haar_unitary(1, RngSpec(10, s)).matrix[0, 0] for s in range(2000)]
        vals = np.array(vals)
        assert np.all(np.abs(np.abs(vals) - 1.0) < 1e-12)
        assert abs(vals.mean()) < 0.1  # phases average out

    def test_trace_second_moment(self):
        # classical identity E|tr u|^2 = 1 for Haar unitaries
        gen = gen_for(11)
        from nearrep.sphere import _haar_unitary

        trials = 10_000
        acc = 0.0
        for _ in range(trials):
            acc += abs(np.trace(_haar_unitary(gen, 6))) ** 2
        assert abs(acc / trials - 1.0) < 0.1

    def test_first_column_overlap_beta_moment(self):
        # |<e1, u e1>|^2 ~ Beta(1, dim-1): mean 1/dim
        d, trials = 12, 20_000
        gen = gen_for(12)
        from nearrep.sphere import _haar_unitary

        vals = np.array(
            [abs(_haar_unitary(gen, d)[0, 0]) ** 2 for _ in range(trials)]
        )
        var = (d - 1.0) / (d**2 * (d + 1.0))
        assert abs(vals.mean() - 1.0 / d) <= 4 * math.sqrt(var / trials)


class TestSphereTraceIntegral:
    def test_identity_is_exact(self):
        est = sphere_trace_integral(np.eye(7), 500, RngSpec(13))
        assert abs(est.estimate - 1.0) <= 1e-13
        assert est.stderr <= 1e-13

    def test_rank_one_diagonal(self):
        d = 9
        a = np.zeros((d, d))
        a[0, 0] = 1.0
        est = sphere_trace_integral(a, 20_000, RngSpec(14))
        assert abs(est.estimate - 1.0 / d) <= 4 * est.stderr

    def test_traceless_permutation(self):
        d = 8
        a = np.zeros((d, d))
        a[np.arange(d), (np.arange(d) + 1) % d] = 1.0
        est = sphere_trace_integral(a, 20_000, RngSpec(15))
        assert abs(est.estimate) <= 4 * est.stderr + 1e-12

    def test_unbiased_over_repetitions(self):
        d = 5
        gen = gen_for(16)
        a = np.diag(gen.random(d))
        target = np.trace(a) / d
        inside = 0
        for rep in range(30):
            est = sphere_trace_integral(a, 4000, RngSpec(17, rep))
            if abs(est.estimate - target) <= 4 * est.stderr:
                inside += 1
        assert inside >= 28


class TestConcentration:
    def test_bound_closed_forms(self):
        # dim=100, eps=0.5: 2 exp(-0.25 * 199 / 2) ~ 3.2e-11
        b = concentration_bound(100, 0.5, 1.0, complex_valued=False)
        assert abs(b - 2 * math.exp(-24.875)) < 1e-24
        assert 3.1e-11 < b < 3.3e-11
        # dim=25, eps=0.3: 2 exp(-0.09 * 49 / 2) ~ 0.221
        b = concentration_bound(25, 0.3, 1.0, complex_valued=False)
        assert abs(b - 2 * math.exp(-2.205)) < 1e-12
        assert 0.22 < b < 0.222
        # unitary quadratic form: 4 exp(-eps^2 (2 rk - 1) / 16)
        b = concentration_bound(200, 0.4, 2.0, complex_valued=True)
        assert abs(b - 4 * math.exp(-0.16 * 399 / 16.0)) < 1e-12

    def test_re_coord_tail_large_dim(self):
        report = concentration_check("re_coord", 100, 0.5, 20_000, RngSpec(18))
        assert report.empirical_tail == 0.0
        assert report.theoretical_bound < 3.3e-11
        assert report.passed

    def test_re_coord_tail_small_dim(self):
        report = concentration_check("re_coord", 25, 0.3, 20_000, RngSpec(19))
        assert report.empirical_tail <= report.theoretical_bound + 0.05
        assert report.passed

    def test_dim_one_bound_vacuous(self):
        report = concentration_check("re_coord", 1, 0.5, 2000, RngSpec(20))
        assert report.theoretical_bound >= 1.2
        assert report.passed

    def test_tail_monotone_in_dim(self):
        tails = [
            concentration_check("re_coord", d, 0.3, 20_000, RngSpec(21, d)).empirical_tail
            for d in (25, 100, 400)
        ]
        slack = 5 / math.sqrt(20_000)
        assert tails[0] + slack >= tails[1]
        assert tails[1] + slack >= tails[2]

    def test_quad_form_uses_analytic_mean_and_lemma_bound(self):
        d = 50
        u = haar_unitary(d, RngSpec(22)).matrix
        report = concentration_check("quad_form", d, 0.4, 10_000, RngSpec(23), a=u)
        assert report.complex_valued
        assert abs(report.lipschitz_const - 2.0) < 1e-9  # 2 ||u|| with ||u|| = 1
        expected = 4 * math.exp(-0.16 * (2 * d - 1) / 16.0)
        assert abs(report.theoretical_bound - expected) < 1e-12
        assert report.passed

    def test_abs_quad_form_real_bound(self):
        d = 40
        u = haar_unitary(d, RngSpec(24)).matrix
        report = concentration_check("abs_quad_form", d, 0.4, 5_000, RngSpec(25), a=u)
        assert not report.complex_valued
        expected = 2 * math.exp(-0.16 * (2 * d - 1) / 8.0)
        assert abs(report.theoretical_bound - expected) < 1e-12

    def test_dist_to_vector_runs(self):
        report = concentration_check("dist_to_vector", 30, 0.25, 5_000, RngSpec(26))
        assert report.passed

    def test_unknown_function(self):
        with pytest.raises(UnknownFunctionError):
            concentration_check("nope", 10, 0.1, 100, RngSpec(0))

    def test_quad_form_needs_matrix(self):
        with pytest.raises(BadParamsError):
            concentration_check("quad_form", 10, 0.1, 100, RngSpec(0))

    def test_determinism(self):
        a = concentration_check("re_coord", 25, 0.3, 5000, RngSpec(27))
        b = concentration_check("re_coord", 25, 0.3, 5000, RngSpec(27))
        assert a == b


class TestOnbInSet:
    def test_everything_passes_first_try(self):
        result = onb_in_set(lambda c: np.ones(c.shape[1], bool), 6, RngSpec(28), 4)
        assert result.tries == 1
        gram = result.basis.conj().T @ result.basis
        assert op_norm(gram - np.eye(6)) <= 1e-9

    def test_impossible_predicate_exhausts_with_diagnostics(self):
        with pytest.raises(OnbSearchExhausted) as info:
            onb_in_set(lambda c: np.zeros(c.shape[1], bool), 4, RngSpec(29), 3)
        assert info.value.max_tries == 3
        assert info.value.pass_rates == (0.0, 0.0, 0.0)

    def test_halfspace_condition_dim8(self):
        def predicate(c):
            return c[0].real <= 0.9

        result = onb_in_set(predicate, 8, RngSpec(30), 5)
        assert result.tries <= 5
        assert np.all(result.basis[0].real <= 0.9)

    def test_cyclic_shift_diag_condition(self):
        # |<x, ux>| <= 0.5 for the traceless shift: per-try failure ~ 6e-3
        d = 400
        u = np.zeros((d, d))
        u[np.arange(d), (np.arange(d) - 1) % d] = 1.0

        def predicate(c):
            return np.abs(np.sum(c.conj() * (u @ c), axis=0)) <= 0.5

        result = onb_in_set(predicate, d, RngSpec(31), 3)
        assert result.tries <= 3
        vals = np.abs(np.sum(result.basis.conj() * (u @ result.basis), axis=0))
        assert float(vals.max()) <= 0.5


class TestMassTransport:
    def test_equal_projections_gap_near_zero(self):
        p = random_projection(gen_for(32), 12, 3)
        gap = mass_transport_gap(p, p, 20, 2000, RngSpec(33))
        assert gap <= 5 / math.sqrt(2000)

    def test_orthogonal_lines_bound_is_two(self):
        p = Projection(np.diag([1.0, 0.0]))
        q = Projection(np.diag([0.0, 1.0]))
        assert abs(mass_transport_bound(p, q) - 2.0) < 1e-12
        gap = mass_transport_gap(p, q, 20, 2000, RngSpec(34))
        assert gap <= 2.0 + 5 / math.sqrt(2000)

    def test_random_same_rank_pairs(self):
        gen = gen_for(35)
        for trial in range(10):
            d = int(gen.integers(2, 65))
            r = int(gen.integers(1, min(d, 16) + 1))
            p = random_projection(gen, d, r)
            q = random_projection(gen, d, r)
            gap = mass_transport_gap(p, q, 20, 2000, RngSpec(36, trial))
            assert gap <= mass_transport_bound(p, q) + 5 / math.sqrt(2000)

    def test_rank_mismatch(self):
        gen = gen_for(37)
        with pytest.raises(RankMismatchError):
            mass_transport_gap(
                random_projection(gen, 6, 2),
                random_projection(gen, 6, 3),
                10,
                100,
                RngSpec(0),
            )
