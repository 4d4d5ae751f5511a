"""Unit tests for the problem core: realization, cost, constraints and worst cases."""
import itertools

import numpy as np
import pytest

from features.problem_core import (
    Decision,
    DecisionBox,
    FlexProblem,
    build_corridor,
    eval_constraints,
    eval_objective,
    realize,
    robust_margin,
    vertex_feasibility_oracle,
    worst_case_affine_margin,
    worst_case_constraints,
    worst_case_norm_envelope,
)
from shared.utils import DimensionError, DomainError, OracleCapExceededError


def _random_problem(rng, n, c):
    return FlexProblem(
        epsilon_x=0.001,
        epsilon_beta=0.01,
        weights=rng.uniform(0.1, 1.0, n),
        x_ref=rng.normal(19.5, 1.0, n),
        gamma=2.0 * n,
        D=rng.normal(size=(c, n)),
        e=rng.uniform(0.5, 1.5, c),
    )


class TestModels:
    def test_problem_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            FlexProblem(epsilon_x=0.0, epsilon_beta=0.01, weights=[1.0], x_ref=[20.0], gamma=4.0)
        with pytest.raises(DomainError):
            FlexProblem(epsilon_x=0.001, epsilon_beta=0.01, weights=[-1.0], x_ref=[20.0], gamma=4.0)
        with pytest.raises(DomainError):
            FlexProblem(epsilon_x=0.001, epsilon_beta=0.01, weights=[1.0], x_ref=[20.0], gamma=0.0)
        with pytest.raises(DimensionError):
            FlexProblem(epsilon_x=0.001, epsilon_beta=0.01, weights=[1.0, 1.0], x_ref=[20.0], gamma=4.0)
        with pytest.raises(DimensionError):
            FlexProblem(epsilon_x=0.001, epsilon_beta=0.01, weights=[1.0, 1.0], x_ref=[20.0, 20.0],
                        gamma=4.0, D=[[1.0, -1.0]], e=[1.0, 2.0])

    def test_problem_counts(self, corridor_problem, tiny_problem):
        assert (corridor_problem.n, corridor_problem.c, corridor_problem.m) == (2, 1, 2)
        assert (tiny_problem.n, tiny_problem.c, tiny_problem.m) == (1, 0, 1)

    def test_arrays_are_read_only(self, tiny_problem):
        with pytest.raises(ValueError):
            tiny_problem.x_ref[0] = 0.0

    def test_decision_rejects_negative_beta(self):
        with pytest.raises(DomainError):
            Decision(x=[1.0], beta=[-0.1])

    def test_decision_box_projection_and_sampling(self, rng):
        box = DecisionBox.around(np.array([20.0, 19.0]), x_margin=1.0, beta_max=0.5)
        projected = box.project(Decision(x=[25.0, 10.0], beta=[2.0, 0.2]))
        np.testing.assert_allclose(projected.x, [21.0, 18.0])
        np.testing.assert_allclose(projected.beta, [0.5, 0.2])
        draws = box.sample(rng, 50)
        assert draws.shape == (50, 4)
        assert np.all(draws >= box.lower) and np.all(draws <= box.upper)


class TestRealize:
    def test_zero_response_returns_nominal(self):
        decision = Decision(x=[19.0, 18.0], beta=[1.0, 0.5])
        np.testing.assert_allclose(realize(decision, [0.0, 0.0]), [19.0, 18.0])

    def test_vertex_response(self):
        decision = Decision(x=[19.0, 18.0], beta=[1.0, 0.5])
        np.testing.assert_allclose(realize(decision, [1.0, -1.0]), [20.0, 17.5])

    def test_zero_flexibility_ignores_response(self):
        decision = Decision(x=[19.0, 18.0], beta=[0.0, 0.0])
        np.testing.assert_allclose(realize(decision, [0.7, -0.3]), [19.0, 18.0])

    def test_errors(self):
        decision = Decision(x=[19.0, 18.0], beta=[1.0, 0.5])
        with pytest.raises(DimensionError):
            realize(decision, [0.0])
        with pytest.raises(DomainError):
            realize(decision, [1.5, 0.0])


class TestObjectiveAndConstraints:
    def test_objective_at_origin(self, corridor_problem):
        assert eval_objective(corridor_problem, Decision(x=[0.0, 0.0], beta=[0.0, 0.0])) == 0.0

    def test_objective_single_user(self, tiny_problem):
        value = eval_objective(tiny_problem, Decision(x=[20.0], beta=[2.0]))
        assert value == pytest.approx(-1.78)

    def test_weights_do_not_matter_without_flexibility(self):
        base = dict(epsilon_x=0.001, epsilon_beta=0.01, x_ref=[20.0, 20.0], gamma=4.0)
        decision = Decision(x=[19.0, 21.0], beta=[0.0, 0.0])
        first = eval_objective(FlexProblem(weights=[0.3, 0.7], **base), decision)
        second = eval_objective(FlexProblem(weights=[0.6, 1.4], **base), decision)
        assert first == second

    def test_objective_dimension_mismatch(self, tiny_problem):
        with pytest.raises(DimensionError):
            eval_objective(tiny_problem, Decision(x=[1.0, 2.0], beta=[0.0, 0.0]))

    def test_constraints_at_center(self, corridor_problem):
        values = eval_constraints(corridor_problem, corridor_problem.x_ref)
        assert values.ball == -corridor_problem.gamma

    def test_constraints_hand_example(self, corridor_problem):
        values = eval_constraints(corridor_problem, [21.0, 20.0])
        np.testing.assert_allclose(values.values, [-3.0, 0.0])
        assert values.feasible()

    def test_violated_affine_row_is_positive(self, corridor_problem):
        values = eval_constraints(corridor_problem, [21.5, 20.0])
        assert values.affine[0] > 0
        assert not values.feasible()

    def test_strong_convexity_floor(self, corridor_problem):
        assert corridor_problem.strong_convexity == pytest.approx(0.001)


class TestWorstCase:
    def test_affine_margin_hand_example(self):
        decision = Decision(x=[19.0, 18.5], beta=[0.5, 0.5])
        assert worst_case_affine_margin([1.0, -1.0], 1.0, decision) == pytest.approx(0.5)

    def test_affine_margin_without_flexibility(self):
        decision = Decision(x=[19.0, 18.5], beta=[0.0, 0.0])
        assert worst_case_affine_margin([1.0, -1.0], 1.0, decision) == pytest.approx(-0.5)

    def test_affine_margin_zero_row(self):
        decision = Decision(x=[19.0, 18.5], beta=[0.5, 0.5])
        assert worst_case_affine_margin([0.0, 0.0], 1.0, decision) == -1.0

    def test_envelope_examples(self):
        assert np.all(worst_case_norm_envelope(Decision(x=[20.0], beta=[0.0]), [20.0]) == 0.0)
        s = worst_case_norm_envelope(Decision(x=[21.0], beta=[0.5]), [20.0])
        np.testing.assert_allclose(s, [1.5])
        assert float(s @ s) == pytest.approx(2.25)
        s = worst_case_norm_envelope(Decision(x=[21.0, 18.0], beta=[0.0, 0.0]), [20.0, 20.0])
        np.testing.assert_allclose(s, [1.0, 2.0])

    def test_closed_forms_match_vertex_enumeration(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(1, 11))
            problem = _random_problem(rng, n, 2)
            decision = Decision(x=problem.x_ref + rng.normal(0, 0.5, n), beta=rng.uniform(0, 1, n))
            signs = np.array(list(itertools.product([-1.0, 1.0], repeat=n)))
            realized = decision.x + decision.beta * signs
            for j in range(problem.c):
                exact = float(np.max(realized @ problem.D[j] - problem.e[j]))
                closed = worst_case_affine_margin(problem.D[j], problem.e[j], decision)
                assert closed == pytest.approx(exact, abs=1e-10)
            exact_ball = float(np.max(np.sum((realized - problem.x_ref) ** 2, axis=1)))
            envelope = worst_case_norm_envelope(decision, problem.x_ref)
            assert float(envelope @ envelope) == pytest.approx(exact_ball, rel=1e-12)

    def test_shrinking_beta_never_hurts(self, corridor_problem):
        rng = np.random.default_rng(5)
        for _ in range(20):
            decision = Decision(x=corridor_problem.x_ref + rng.normal(0, 1, 2), beta=rng.uniform(0, 2, 2))
            smaller = decision.with_beta(decision.beta * rng.uniform(0, 1, 2))
            assert np.all(worst_case_constraints(corridor_problem, smaller)
                          <= worst_case_constraints(corridor_problem, decision) + 1e-12)


class TestVertexOracle:
    def test_strictly_feasible_point(self, corridor_problem):
        certificate = vertex_feasibility_oracle(corridor_problem, Decision(x=[20.0, 20.0], beta=[0.0, 0.0]))
        assert certificate.feasible
        assert certificate.worst_margin < 0

    def test_hand_example_vertex(self):
        problem = FlexProblem(
            epsilon_x=0.001, epsilon_beta=0.01, weights=[1.0, 1.0], x_ref=[19.0, 18.5], gamma=4.0,
            D=[[1.0, -1.0]], e=[1.0],
        )
        certificate = vertex_feasibility_oracle(problem, Decision(x=[19.0, 18.5], beta=[0.5, 0.5]))
        assert certificate.worst_margin == pytest.approx(0.5)
        assert certificate.worst_vertex == (1, -1)
        assert certificate.worst_constraint == 1
        assert not certificate.feasible

    def test_feasible_certificate_survives_sampling(self, corridor_problem):
        rng = np.random.default_rng(11)
        decision = Decision(x=[19.8, 19.9], beta=[0.3, 0.3])
        certificate = vertex_feasibility_oracle(corridor_problem, decision)
        assert certificate.feasible
        z = rng.uniform(-1.0, 1.0, size=(1000, 2))
        for sample in z:
            assert eval_constraints(corridor_problem, realize(decision, sample)).worst <= certificate.tolerance

    def test_oracle_matches_closed_form(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            n = int(rng.integers(1, 9))
            problem = _random_problem(rng, n, 3)
            decision = Decision(x=problem.x_ref + rng.normal(0, 0.5, n), beta=rng.uniform(0, 1, n))
            certificate = vertex_feasibility_oracle(problem, decision)
            assert certificate.worst_margin == pytest.approx(robust_margin(problem, decision), abs=1e-9)

    def test_cap_refusal_names_the_cap(self):
        problem = FlexProblem(epsilon_x=1.0, epsilon_beta=1.0, weights=np.ones(5), x_ref=np.zeros(5), gamma=1.0)
        with pytest.raises(OracleCapExceededError, match="cap is n <= 4"):
            vertex_feasibility_oracle(problem, Decision(x=np.zeros(5), beta=np.zeros(5)), cap=4)


class TestCorridor:
    def test_one_sided(self):
        D = build_corridor(7)
        assert D.shape == (6, 7)
        np.testing.assert_allclose(D[0, :2], [1.0, -1.0])
        np.testing.assert_allclose(D.sum(axis=1), 0.0)

    def test_two_sided(self):
        D = build_corridor(3, two_sided=True)
        assert D.shape == (4, 3)
        np.testing.assert_allclose(D[2:], -D[:2])

    def test_single_user_has_no_rows(self):
        assert build_corridor(1).shape == (0, 1)
