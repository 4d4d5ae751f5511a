"""Unit tests for the Chernoff Lagrangian, B-PD / MS-PD runs and the reference equilibrium."""
import logging

import numpy as np
import pytest

from features.harness.reports import trace_table
from features.problem_core import Decision, FlexProblem, build_corridor, eval_constraints, eval_objective, realize
from features.response_models import (
    NoiseSpec,
    ResponseModel,
    estimate_misspecification_bound,
    factorized_law,
    sample_responses,
    slope_bounds,
)
from features.saddle_dynamics import (
    ChanceParams,
    IterateTrace,
    SaddlePoint,
    SearchRegion,
    TraceRecord,
    bpd_run,
    compute_reference_equilibrium,
    contraction_factor,
    estimate_constants,
    estimate_mu_L,
    grad_phi,
    grad_phi_batch,
    mean_grad_phi,
    mean_step_oracle,
    mspd_run,
    phi_value,
    projected_step,
    saddle_field,
    step_size_range,
)
from shared.utils import DimensionError, DomainError, ReferenceNonConvergenceError


@pytest.fixture
def corridor_instance():
    problem = FlexProblem(
        epsilon_x=0.5, epsilon_beta=1.0, weights=[0.4, 0.9, 0.7], x_ref=[0.2, -0.1, 0.4], gamma=3.0,
        D=build_corridor(3), e=np.ones(2),
    )
    return problem, ChanceParams(u=2.0, delta=0.2, nu=0.3)


def _random_point(rng, problem):
    return SaddlePoint(
        y=Decision(x=problem.x_ref + rng.normal(0, 0.5, problem.n), beta=rng.uniform(0.1, 1.0, problem.n)),
        lam=rng.uniform(0.0, 2.0, problem.m),
    )


@pytest.fixture
def corridor_setup(corridor_instance):
    """Corridor instance on a small region, with eta half the certified step-size range."""
    problem, chance = corridor_instance
    region = SearchRegion.around(problem, x_margin=0.5, beta_max=0.5, lambda_max=1.0)
    model = ResponseModel(kind="custom-additive", offset=0.0, x_slope=0.02, pivot=0.0, beta_slope=0.02)
    estimate = estimate_mu_L(problem, chance, region, 500, np.random.default_rng(1))
    L = 1.5 * estimate.L
    eps, _ = slope_bounds(model, region.y_box)
    step_range = step_size_range(estimate.mu, L, eps)
    assert not step_range.empty
    eta = 0.5 * step_range.high
    reference = compute_reference_equilibrium(problem, chance, region, model, eta, tol=1e-13)
    return problem, chance, region, model, reference, eta, L, contraction_factor(eta, estimate.mu, L, eps)


def _assert_contracts(trace, rho, floor):
    distances = trace.column("saddle_dist")
    for before, after in zip(distances[:-1], distances[1:]):
        if before > floor:
            assert after <= rho * before + 1e-12


def _decile_means(column):
    tenth = len(column) // 10
    return float(np.mean(column[:tenth])), float(np.mean(column[-tenth:]))


@pytest.fixture
def tame_reference(tame_problem, tame_chance, tame_region, tame_model):
    return compute_reference_equilibrium(tame_problem, tame_chance, tame_region, tame_model, 0.1, tol=1e-13)


class TestModels:
    def test_chance_params_validated(self):
        with pytest.raises(DomainError):
            ChanceParams(u=0.0, delta=0.2, nu=0.1)
        with pytest.raises(DomainError):
            ChanceParams(u=1.0, delta=0.0, nu=0.1)
        with pytest.raises(DomainError):
            ChanceParams(u=1.0, delta=0.2, nu=-0.1)

    def test_region_projection(self, tame_problem, tame_region):
        point = SaddlePoint(y=Decision(x=[10.0, -10.0], beta=[5.0, 0.5]), lam=[7.0])
        projected = tame_region.project(point)
        np.testing.assert_allclose(projected.y.x, [3.0, -2.5])
        np.testing.assert_allclose(projected.y.beta, [1.0, 0.5])
        np.testing.assert_allclose(projected.lam, [2.0])
        assert tame_region.contains(projected)

    def test_origin_starts_at_reference_setpoints(self, tame_problem, tame_region):
        origin = tame_region.origin(tame_problem)
        np.testing.assert_allclose(origin.y.x, tame_problem.x_ref)
        assert not np.any(origin.y.beta) and not np.any(origin.lam)

    def test_trace_rejects_out_of_order_records(self):
        trace = IterateTrace()
        record = TraceRecord(k=0, y=Decision(x=[0.0], beta=[0.0]), lam=np.zeros(1), objective=0.0)
        trace.append(record)
        with pytest.raises(DomainError):
            trace.append(record)
        assert np.isnan(trace.column("dist_to_ref")[0])


class TestLagrangian:
    def test_no_multipliers_gives_cost(self, tame_problem):
        chance = ChanceParams(u=1.5, delta=0.2, nu=0.0)
        point = SaddlePoint(y=Decision(x=[0.3, 0.1], beta=[0.5, 0.2]), lam=[0.0])
        assert phi_value(tame_problem, chance, point, [0.4, -0.7]) == eval_objective(tame_problem, point.y)

    def test_active_constraint_adds_one_minus_delta(self):
        problem = FlexProblem(epsilon_x=1.0, epsilon_beta=1.0, weights=[1.0], x_ref=[0.0], gamma=1.0)
        chance = ChanceParams(u=1.5, delta=0.2, nu=0.0)
        point = SaddlePoint(y=Decision(x=[1.0], beta=[0.0]), lam=[1.0])
        expected = eval_objective(problem, point.y) + 0.8
        assert phi_value(problem, chance, point, [0.3]) == pytest.approx(expected)

    def test_value_matches_hand_evaluation(self, corridor_instance, rng):
        problem, chance = corridor_instance
        point = _random_point(rng, problem)
        z = rng.uniform(-1, 1, problem.n)
        x, beta, lam = point.y.x, point.y.beta, point.lam
        v = x + beta * z
        h = [np.sum((v - problem.x_ref) ** 2) - problem.gamma, v[0] - v[1] - 1.0, v[1] - v[2] - 1.0]
        expected = (
            0.5 * problem.epsilon_x * np.sum(x ** 2)
            + np.sum(problem.weights * (-beta + 0.5 * problem.epsilon_beta * beta ** 2))
            + sum(lam[j] * (np.exp(h[j] / chance.u) - chance.delta) for j in range(3))
            - 0.5 * chance.nu * np.sum(lam ** 2)
        )
        assert phi_value(problem, chance, point, z) == pytest.approx(expected, rel=1e-12)

    def test_gradient_without_multipliers_is_cost_gradient(self, tame_problem, tame_chance):
        point = SaddlePoint(y=Decision(x=[0.3, 0.1], beta=[0.5, 0.2]), lam=[0.0])
        grad_y, _ = grad_phi(tame_problem, tame_chance, point, [0.4, -0.7])
        x, beta = point.y.x, point.y.beta
        expected = np.concatenate([tame_problem.epsilon_x * x, tame_problem.weights * (2.0 * beta - 1.0)])
        np.testing.assert_allclose(grad_y, expected)

    def test_gradients_match_finite_differences(self, corridor_instance, rng):
        problem, chance = corridor_instance
        step = 1e-6
        for _ in range(100):
            point = _random_point(rng, problem)
            z = rng.uniform(-1, 1, problem.n)
            grad_y, grad_lambda = grad_phi(problem, chance, point, z)
            p = point.stacked()
            numeric = np.empty_like(p)
            for k in range(p.shape[0]):
                offset = np.zeros_like(p)
                offset[k] = step
                upper = phi_value(problem, chance, SaddlePoint.from_stacked(p + offset, problem.n), z)
                lower = phi_value(problem, chance, SaddlePoint.from_stacked(p - offset, problem.n), z)
                numeric[k] = (upper - lower) / (2 * step)
            analytic = np.concatenate([grad_y, grad_lambda])
            np.testing.assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-6)

    def test_beta_block_depends_on_response(self, corridor_instance):
        problem, chance = corridor_instance
        point = SaddlePoint(y=Decision(x=[0.2, -0.1, 0.4], beta=[0.0, 0.0, 0.0]), lam=[1.0, 1.0, 1.0])
        at_zero, _ = grad_phi(problem, chance, point, np.zeros(3))
        at_z, _ = grad_phi(problem, chance, point, np.array([0.5, -0.5, 1.0]))
        np.testing.assert_allclose(at_zero[problem.n:], problem.weights * -1.0)
        assert not np.allclose(at_z[problem.n:], at_zero[problem.n:])

    def test_mean_gradient_matches_sample_average(self, corridor_instance, rng):
        problem, chance = corridor_instance
        model = ResponseModel(kind="custom-additive", offset=0.1, x_slope=0.2, beta_slope=-0.3, pivot=0.0,
                              noise=NoiseSpec(scale=0.4))
        point = _random_point(rng, problem)
        law = factorized_law(model, point.y)
        exact_y, exact_lambda = mean_grad_phi(problem, chance, point, law)
        Z = sample_responses(model, point.y, rng, 400_000)
        grad_y, grad_lambda = grad_phi_batch(problem, chance, point, Z)
        sampled = np.hstack([grad_y, grad_lambda])
        error = sampled.std(axis=0) / np.sqrt(Z.shape[0])
        assert np.all(np.abs(np.concatenate([exact_y, exact_lambda]) - sampled.mean(axis=0)) <= 5 * error + 1e-9)

    def test_saddle_field_flips_the_dual_block(self, corridor_instance, rng):
        problem, chance = corridor_instance
        point = _random_point(rng, problem)
        z = rng.uniform(-1, 1, problem.n)
        grad_y, grad_lambda = grad_phi(problem, chance, point, z)
        np.testing.assert_allclose(saddle_field(problem, chance, point.stacked(), z),
                                   np.concatenate([grad_y, -grad_lambda]))

    def test_errors(self, corridor_instance):
        problem, chance = corridor_instance
        point = SaddlePoint(y=Decision(x=[0.0, 0.0], beta=[0.0, 0.0]), lam=[0.0])
        with pytest.raises(DimensionError):
            grad_phi(problem, chance, point, np.zeros(2))
        good = SaddlePoint(y=Decision(x=np.zeros(3), beta=np.zeros(3)), lam=np.zeros(3))
        with pytest.raises(DomainError):
            grad_phi(problem, chance, good, np.array([2.0, 0.0, 0.0]))


class TestProjectedStep:
    def test_descends_in_y_and_ascends_in_lambda(self, tame_region):
        point = SaddlePoint(y=Decision(x=[1.0, -0.5], beta=[0.5, 0.5]), lam=[1.0])
        stepped = projected_step(tame_region, point, np.array([1.0, -1.0, 1.0, -1.0]), np.array([1.0]), 0.1)
        np.testing.assert_allclose(stepped.y.x, [0.9, -0.4])
        np.testing.assert_allclose(stepped.y.beta, [0.4, 0.6])
        np.testing.assert_allclose(stepped.lam, [1.1])

    def test_clipping(self, tame_region):
        point = SaddlePoint(y=Decision(x=[1.0, -0.5], beta=[0.0, 1.0]), lam=[0.0])
        stepped = projected_step(tame_region, point, np.array([0.0, 0.0, 5.0, -5.0]), np.array([-3.0]), 1.0)
        np.testing.assert_allclose(stepped.y.beta, [0.0, 1.0])
        np.testing.assert_allclose(stepped.lam, [0.0])

    def test_frozen_dual(self, tame_problem):
        region = SearchRegion.around(tame_problem, 2.0, 1.0, lambda_max=0.0)
        point = SaddlePoint(y=Decision(x=[1.0, -0.5], beta=[0.5, 0.5]), lam=[0.0])
        stepped = projected_step(region, point, np.zeros(4), np.array([10.0]), 0.1)
        assert stepped.lam[0] == 0.0


class TestBPD:
    def test_trace_length(self, tame_problem, tame_chance, tame_region, tame_noisy_model, rng):
        trace = bpd_run(tame_problem, tame_chance, tame_region, tame_noisy_model, 0.1, 25, rng)
        assert len(trace) == 26
        np.testing.assert_array_equal(trace.column("k"), np.arange(26))
        for record in trace.records:
            assert tame_region.contains(SaddlePoint(y=record.y, lam=record.lam))

    def test_same_seed_same_trace(self, tame_problem, tame_chance, tame_region, tame_noisy_model):
        first = bpd_run(tame_problem, tame_chance, tame_region, tame_noisy_model, 0.1, 30, np.random.default_rng(4))
        second = bpd_run(tame_problem, tame_chance, tame_region, tame_noisy_model, 0.1, 30, np.random.default_rng(4))
        np.testing.assert_array_equal(first.final_point().stacked(), second.final_point().stacked())

    def test_fixed_point_is_stationary(self, tame_problem, tame_chance, tame_region, tame_model, tame_reference, rng):
        trace = bpd_run(tame_problem, tame_chance, tame_region, tame_model, 0.1, 20, rng,
                        start=tame_reference, reference=tame_reference)
        assert np.nanmax(trace.column("saddle_dist")) < 1e-9

    def test_contraction_toward_reference(self, tame_problem, tame_chance, tame_region, tame_model, tame_reference):
        eta = 0.1
        estimate = estimate_mu_L(tame_problem, tame_chance, tame_region, 500, np.random.default_rng(1))
        eps, _ = slope_bounds(tame_model, tame_region.y_box)
        rho = contraction_factor(eta, estimate.mu, estimate.L, eps)
        assert rho < 1.0
        trace = bpd_run(tame_problem, tame_chance, tame_region, tame_model, eta, 1000, np.random.default_rng(0),
                        reference=tame_reference)
        assert len(trace) == 1001
        _assert_contracts(trace, rho, floor=1e-8)

    def test_contraction_on_corridor(self, corridor_setup):
        problem, chance, region, model, reference, eta, _, rho = corridor_setup
        assert rho < 1.0
        trace = bpd_run(problem, chance, region, model, eta, 1000, np.random.default_rng(0), reference=reference)
        assert trace.records[0].saddle_dist > 1e-2
        _assert_contracts(trace, rho, floor=1e-6)

    def test_mean_distance_inside_noise_ball(self, tame_problem, tame_chance, tame_region, tame_noisy_model):
        eta, steps, runs = 0.1, 1000, 20
        constants = estimate_constants(tame_problem, tame_chance, tame_region, tame_noisy_model, None,
                                       np.random.default_rng(3), pairs=500, points=5, samples=2000)
        assert constants.rho(eta) < 1.0
        reference = compute_reference_equilibrium(tame_problem, tame_chance, tame_region, tame_noisy_model, eta,
                                                  tol=1e-12)
        tails = np.array([
            np.mean(bpd_run(tame_problem, tame_chance, tame_region, tame_noisy_model, eta, steps,
                            np.random.default_rng(seed), reference=reference).column("saddle_dist")[-steps // 10:])
            for seed in range(runs)
        ])
        standard_error = tails.std(ddof=1) / np.sqrt(runs)
        assert tails.mean() <= constants.ball_stochastic(eta) + 3.0 * standard_error

    def test_distance_falls_tenfold_by_last_decile(self, tame_problem, tame_chance, tame_region, tame_noisy_model):
        reference = compute_reference_equilibrium(tame_problem, tame_chance, tame_region, tame_noisy_model, 0.1,
                                                  tol=1e-12)
        trace = bpd_run(tame_problem, tame_chance, tame_region, tame_noisy_model, 0.1, 300,
                        np.random.default_rng(5), reference=reference)
        first, last = _decile_means(trace_table(trace)["dist_to_ref"])
        assert last < first / 10.0

    def test_invalid_step(self, tame_problem, tame_chance, tame_region, tame_model, rng):
        with pytest.raises(DomainError):
            bpd_run(tame_problem, tame_chance, tame_region, tame_model, 0.0, 5, rng)


class TestMSPD:
    def test_bitwise_reproducible(self, tame_problem, tame_chance, tame_region, tame_noisy_model):
        first = mspd_run(tame_problem, tame_chance, tame_region, tame_noisy_model, 0.1, 40)
        second = mspd_run(tame_problem, tame_chance, tame_region, tame_noisy_model, 0.1, 40)
        for a, b in zip(first.records, second.records):
            np.testing.assert_array_equal(a.y.stacked(), b.y.stacked())
            np.testing.assert_array_equal(a.lam, b.lam)

    def test_true_model_reaches_reference(self, tame_problem, tame_chance, tame_region, tame_model, tame_reference):
        trace = mspd_run(tame_problem, tame_chance, tame_region, tame_model, 0.1, 5000, stop_tol=1e-13)
        assert len(trace) < 5001
        assert trace.final_point().distance(tame_reference) < 1e-10

    def test_misspecified_limit_inside_model_ball(self, tame_problem, tame_chance, tame_region, tame_model,
                                                  tame_reference):
        ms_model = ResponseModel(kind="custom-additive", offset=0.0, x_slope=0.1, pivot=0.0, beta_slope=0.0)
        eta = 0.1
        estimate = estimate_mu_L(tame_problem, tame_chance, tame_region, 500, np.random.default_rng(1))
        eps, _ = slope_bounds(tame_model, tame_region.y_box)
        rho = contraction_factor(eta, estimate.mu, estimate.L, eps)
        B = estimate_misspecification_bound(tame_model, ms_model, tame_region.y_box, 10, np.random.default_rng(2)).value
        ball = np.sqrt(2.0) * eta * estimate.L * B / (1.0 - rho)
        trace = mspd_run(tame_problem, tame_chance, tame_region, ms_model, eta, 2000, reference=tame_reference)
        assert 0.0 < trace.final.saddle_dist <= ball

    def test_misspecified_limit_inside_model_ball_on_corridor(self, corridor_setup):
        problem, chance, region, model, reference, eta, L, rho = corridor_setup
        ms_model = ResponseModel(kind="custom-additive", offset=0.0, x_slope=0.02, pivot=0.0, beta_slope=0.0)
        B = estimate_misspecification_bound(model, ms_model, region.y_box, 10, np.random.default_rng(2)).value
        ball = np.sqrt(2.0) * eta * L * B / (1.0 - rho)
        trace = mspd_run(problem, chance, region, ms_model, eta, 3000, reference=reference)
        assert 0.0 < trace.final.saddle_dist <= ball

    def test_distance_falls_tenfold_by_last_decile(self, tame_problem, tame_chance, tame_region, tame_model,
                                                   tame_reference):
        ms_model = ResponseModel(kind="custom-additive", offset=0.0, x_slope=0.1, pivot=0.0, beta_slope=0.0)
        trace = mspd_run(tame_problem, tame_chance, tame_region, ms_model, 0.1, 300, reference=tame_reference)
        first, last = _decile_means(trace_table(trace)["dist_to_ref"])
        assert last < first / 10.0

    def test_early_stop(self, tame_problem, tame_chance, tame_region, tame_model):
        trace = mspd_run(tame_problem, tame_chance, tame_region, tame_model, 0.1, 100, stop_tol=10.0)
        assert len(trace) == 2


class TestReference:
    def test_restart_does_not_move(self, tame_problem, tame_chance, tame_region, tame_model, tame_reference):
        trace = mspd_run(tame_problem, tame_chance, tame_region, tame_model, 0.1, 1, start=tame_reference)
        assert trace.final_point().distance(tame_reference) < 1e-9

    def test_restarts_agree(self, tame_problem, tame_chance, tame_region, tame_model, tame_reference):
        rng = np.random.default_rng(17)
        for p in tame_region.sample(rng, 5):
            start = SaddlePoint.from_stacked(p, tame_problem.n)
            other = compute_reference_equilibrium(tame_problem, tame_chance, tame_region, tame_model, 0.1,
                                                  tol=1e-13, start=start)
            assert other.distance(tame_reference) < 1e-6

    def test_reference_is_worst_case_sensible(self, tame_problem, tame_reference):
        # nominal setpoints stay inside the comfort ball
        v = realize(tame_reference.y, np.zeros(tame_problem.n))
        assert eval_constraints(tame_problem, v).ball < 0

    def test_non_convergence_names_residual(self, tame_problem, tame_chance, tame_region, tame_model):
        with pytest.raises(ReferenceNonConvergenceError, match="residual"):
            compute_reference_equilibrium(tame_problem, tame_chance, tame_region, tame_model, 0.1, max_iters=3)

    def test_needs_an_iteration(self, tame_problem, tame_chance, tame_region, tame_model):
        with pytest.raises(DomainError):
            compute_reference_equilibrium(tame_problem, tame_chance, tame_region, tame_model, 0.1, max_iters=0)

    def test_halving_keeps_tolerance_at_requested_eta(self, tame_problem, tame_chance, tame_region, tame_model,
                                                      tame_reference, caplog):
        # eta = 3 overshoots the unit curvature, so the iteration must halve before it settles
        eta, tol = 3.0, 1e-9
        with caplog.at_level(logging.WARNING):
            point = compute_reference_equilibrium(tame_problem, tame_chance, tame_region, tame_model, eta,
                                                  tol=tol, window=20)
        assert "halving eta" in caplog.text
        grad_y, grad_lambda = mean_step_oracle(tame_problem, tame_chance, tame_model)(point)
        following = projected_step(tame_region, point, grad_y, grad_lambda, eta)
        assert following.distance(point) <= tol * (1.0 + 1e-9) + 1e-15
        assert point.distance(tame_reference) < 1e-6
