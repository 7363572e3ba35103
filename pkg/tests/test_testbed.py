import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holderbandit.testbed import (
    CertificateMethod,
    NoiseKind,
    NoiseModel,
    Oracle,
    certify,
    evaluate,
    evaluate_many,
    make_power_bump,
    make_quadratic,
    make_trig_mixture,
    power_bump_factor,
    sample_reward,
    taylor_polynomial,
    true_max,
)


def _numeric_remainder_sup(alpha, n=4001):
    """sup over u, h of |ψ(u+h) - T_u ψ(u+h)| / |h|^alpha for ψ(u) = |u|^alpha, by brute force."""
    u = np.linspace(-2, 2, n)[:, None]
    h = np.concatenate([-np.logspace(-4, 0.6, 400), np.logspace(-4, 0.6, 400)])[None, :]
    psi = np.abs(u + h) ** alpha
    taylor = np.abs(u) ** alpha
    if alpha > 1:
        taylor = taylor + alpha * np.abs(u) ** (alpha - 1) * np.sign(u) * h
    return float(np.max(np.abs(psi - taylor) / np.abs(h) ** alpha))


class TestPowerBump:
    def test_alpha_two_value(self):
        f = make_power_bump(1, 2.0, 1.0, [0.5])
        assert evaluate(f, [0.25]) == pytest.approx(0.9375, abs=1e-15)
        assert evaluate(f, [0.75]) == pytest.approx(0.9375, abs=1e-15)

    def test_alpha_one_at_far_end(self):
        f = make_power_bump(1, 1.0, 1.0, [0.0])
        assert evaluate(f, [1.0]) == 0.0

    def test_peak_in_two_dimensions(self):
        f = make_power_bump(2, 1.5, 1.0, [0.5, 0.5])
        assert evaluate(f, [0.5, 0.5]) == 1.0 == f.f_star

    def test_default_optimum_is_centre(self):
        f = make_power_bump(3, 1.0)
        np.testing.assert_array_equal(f.x_star, [0.5, 0.5, 0.5])

    @pytest.mark.parametrize("alpha", [0.0, -1.0, 2.5])
    def test_rejects_bad_alpha(self, alpha):
        with pytest.raises(ValueError):
            make_power_bump(1, alpha)

    def test_rejects_optimum_outside_domain(self):
        with pytest.raises(ValueError):
            make_power_bump(1, 1.0, 1.0, [1.2])

    def test_rejects_range_violation(self):
        with pytest.raises(ValueError):
            make_power_bump(1, 1.0, 3.0, [0.0])

    def test_out_of_domain_evaluation(self):
        f = make_power_bump(1, 2.0)
        with pytest.raises(ValueError):
            evaluate(f, [1.5])

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 1.1, 1.3, 1.5, 1.8, 2.0])
    def test_recorded_factor_dominates_brute_force_remainder(self, alpha):
        # the recorded constant must be valid; brute force over a dense (u, h) grid is the oracle
        # cancellation at tiny h costs ~1e-7 relative accuracy
        assert _numeric_remainder_sup(alpha) <= power_bump_factor(alpha) * (1 + 1e-6)

    def test_recorded_factor_is_nearly_tight_at_the_ends(self):
        assert _numeric_remainder_sup(2.0) == pytest.approx(1.0, rel=1e-6)
        assert _numeric_remainder_sup(1.0) == pytest.approx(1.0, rel=1e-6)


class TestOtherFamilies:
    def test_quadratic_peak(self):
        f = make_quadratic(1, 1.0, [0.5])
        assert evaluate(f, [0.5]) == 1.0
        assert evaluate(f, [0.0]) == pytest.approx(0.75)

    def test_quadratic_rejects_indefinite(self):
        with pytest.raises(ValueError):
            make_quadratic(2, Q=[[1.0, 0.0], [0.0, -1.0]])

    def test_trig_single_term(self):
        f = make_trig_mixture(1, [0.5], [[1.0]])
        assert evaluate(f, [0.0]) == pytest.approx(0.5)

    def test_trig_amplitudes_rescaled(self):
        f = make_trig_mixture(1, [0.8, 0.8], [[1.0], [2.0]], offset=0.4)
        p = f.params
        assert abs(p["offset"]) + np.abs(p["amplitudes"]).sum() == pytest.approx(1.0)


@pytest.fixture(scope="module")
def functions():
    return [
        make_power_bump(1, 0.5, 1.0, [0.2]),
        make_power_bump(2, 1.0, 1.0, [0.3, 0.9]),
        make_power_bump(2, 1.5, 1.0, [0.7, 0.1]),
        make_power_bump(1, 2.0, 1.0, [0.37]),
        make_power_bump(3, 1.2, 1.0),
        make_quadratic(2, 1.0, [0.4, 0.6], Q=[[0.6, 0.2], [0.2, 0.4]]),
        make_trig_mixture(2, [0.5, 0.3], [[1.0, 0.0], [1.0, 2.0]], [0.1, 0.7], 0.1, alpha=2.0),
        make_trig_mixture(1, [0.5], [[3.0]], alpha=0.7),
    ]

class TestBoundednessAndTaylor:
    def test_bounded_on_random_probes(self, functions):
        rng = np.random.default_rng(0)
        for f in functions:
            X = rng.uniform(size=(10_000, f.d))
            assert np.max(np.abs(evaluate_many(f, X))) <= 1.0 + 1e-12

    def test_taylor_gap(self, functions):
        rng = np.random.default_rng(1)
        for f in functions:
            for _ in range(1000):
                x, y = rng.uniform(size=f.d), rng.uniform(size=f.d)
                gap = abs(evaluate(f, x) - taylor_polynomial(f, y, x))
                assert gap <= f.certified_L * np.max(np.abs(x - y)) ** f.alpha * (1 + 1e-9) + 1e-15

    def test_analytic_optimum_beats_probes(self, functions):
        rng = np.random.default_rng(2)
        for f in functions[:6]:
            X = rng.uniform(size=(5000, f.d))
            assert np.all(evaluate_many(f, X) <= f.f_star + 1e-15)


class TestTrueMax:
    def test_analytic(self):
        cert = true_max(make_power_bump(1, 1.0, 1.0, [0.3]))
        assert cert.method == CertificateMethod.ANALYTIC
        assert cert.x_star[0] == 0.3 and cert.f_star == 1.0

    def test_quadratic(self):
        cert = true_max(make_quadratic(1, 1.0, [0.5]))
        assert (cert.x_star[0], cert.f_star) == (0.5, 1.0)

    def test_trig_grid_refined(self):
        f = make_trig_mixture(1, [0.5], [[1.0]])
        cert = true_max(f, 1e-4)
        assert cert.method == CertificateMethod.GRID_REFINED
        assert cert.f_star == pytest.approx(0.5, abs=1e-12)
        assert min(cert.x_star[0], 1 - cert.x_star[0]) < 1e-6

    def test_trig_dense_grid_oracle(self):
        f = make_trig_mixture(1, [0.4, 0.3], [[1.0], [3.0]], [0.3, 1.1])
        cert = true_max(f, 1e-4)
        dense = evaluate_many(f, np.linspace(0, 1, 2_000_001)[:, None]).max()
        assert cert.f_star >= dense - 1e-12
        assert cert.f_star <= dense + cert.error_bound

    def test_refuses_coarse_resolution(self):
        f = make_trig_mixture(1, [0.5], [[5.0]], alpha=0.5)
        with pytest.raises(ValueError, match="too coarse"):
            true_max(f, 0.1)

    def test_certify_fills_in_optimum(self):
        f = certify(make_trig_mixture(2, [0.5], [[1.0, 1.0]], [0.5]), 2e-3)
        assert f.f_star == pytest.approx(0.5, abs=1e-6)


class TestNoiseAndOracle:
    def test_zero_noise_is_exact(self):
        f = make_power_bump(1, 2.0)
        assert sample_reward(f, [0.3], NoiseModel(0.0), np.random.default_rng(0)) == evaluate(f, [0.3])

    def test_replay_determinism(self):
        f = make_power_bump(1, 2.0)
        a = [sample_reward(f, [0.3], NoiseModel(1.0), rng) for rng in [np.random.default_rng(5)] * 2]
        b = [sample_reward(f, [0.3], NoiseModel(1.0), rng) for rng in [np.random.default_rng(5)] * 2]
        assert a == b and a[0] != a[1]

    def test_monte_carlo_mean(self):
        f = make_power_bump(1, 2.0, 1.0, [0.5])
        oracle = Oracle(f, NoiseModel(1.0), np.random.default_rng(3), record=False)
        ys = np.array([oracle([0.2]) for _ in range(100_000)])
        # standard error sigma / sqrt(N) ~ 0.0032, tolerance 0.02 is > 6 SE
        assert abs(ys.mean() - evaluate(f, [0.2])) < 0.02

    @pytest.mark.parametrize("kind", list(NoiseKind))
    def test_noise_scale(self, kind):
        draws = NoiseModel(0.5, kind).draw(np.random.default_rng(0), 200_000)
        assert abs(draws.mean()) < 0.01
        if kind == NoiseKind.UNIFORM_BOUNDED:
            assert np.max(np.abs(draws)) <= 0.5
        else:
            assert draws.std() == pytest.approx(0.5, rel=0.01)

    def test_oracle_records_noiseless_values(self):
        f = make_power_bump(1, 2.0)
        oracle = Oracle(f, NoiseModel(0.1), np.random.default_rng(0))
        oracle([0.1])
        oracle([0.9])
        assert oracle.calls == 2
        assert oracle.values == [evaluate(f, [0.1]), evaluate(f, [0.9])]

    def test_oracle_stream_depends_only_on_seed_and_queries(self):
        f = make_power_bump(1, 2.0)
        xs = np.random.default_rng(9).uniform(size=5000)
        runs = []
        for _ in range(2):
            oracle = Oracle(f, NoiseModel(0.3), np.random.default_rng(11))
            runs.append([oracle([x]) for x in xs])
        assert runs[0] == runs[1]

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            NoiseModel(-1.0)


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(0.05, 2.0),
    x_star=st.floats(0.0, 1.0),
    x=st.floats(0.0, 1.0),
    y=st.floats(0.0, 1.0),
)
def test_power_bump_taylor_property(alpha, x_star, x, y):
    f = make_power_bump(1, alpha, 1.0, [x_star])
    gap = abs(evaluate(f, [x]) - taylor_polynomial(f, [y], [x]))
    assert gap <= f.certified_L * abs(x - y) ** alpha * (1 + 1e-9) + 1e-12


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0.05, 2.0), x_star=st.floats(0.0, 1.0), probe=st.floats(0.0, 1.0))
def test_power_bump_optimum_is_certified(alpha, x_star, probe):
    f = make_power_bump(1, alpha, 1.0, [x_star])
    assert evaluate(f, [probe]) <= f.f_star
    assert math.isclose(evaluate(f, [x_star]), f.f_star)
