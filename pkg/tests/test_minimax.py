"""Backward-induction game values and optimal strategies."""


import numpy as np
import pytest

from regretlab.comparators import FiniteTableFamily, best_comparator_loss
from regretlab.complexity import offset_rademacher_sup, seq_rademacher
from regretlab.errors import DomainError, ProtocolError, ResourceGuardError
from regretlab.forecasters import ExpertsForecaster, GridSnapForecaster
from regretlab.losses import absolute_loss, square_loss
from regretlab.minimax import (
    GameSpec,
    SolvedGame,
    minimax_value,
    optimal_adversary,
    value_monotonicity,
)
from regretlab.trees import LabeledTree

PM_ONE = FiniteTableFamily(["x0"], [[1.0], [-1.0]])
HALVES = FiniteTableFamily(["x0"], [[0.5], [-0.5]])
P5 = tuple(np.linspace(-1.0, 1.0, 5))


def abs_game(n):
    return GameSpec(PM_ONE, absolute_loss(1.0), n, ("x0",), (-1.0, 1.0), (-1.0, 0.0, 1.0))


def sq_game(n):
    return GameSpec(HALVES, square_loss(1.0), n, ("x0",), (-1.0, 1.0), P5)


class TestMinimaxValue:
    def test_one_round_absolute(self):
        assert minimax_value(abs_game(1)) == pytest.approx(1.0)

    def test_zero_horizon(self):
        assert minimax_value(abs_game(0)) == 0.0

    def test_singleton_family_is_free(self):
        fam = FiniteTableFamily(["a", "b"], [[0.5, -0.5]])
        spec = GameSpec(
            fam, square_loss(1.0), 2, ("a", "b"), (-1.0, 1.0), (-1.0, -0.5, 0.0, 0.5, 1.0)
        )
        assert minimax_value(spec) == pytest.approx(0.0, abs=1e-12)

    def test_one_round_square_halves(self):
        # learner equalizes at 0; comparator pays 1/4 either way
        assert minimax_value(sq_game(1)) == pytest.approx(0.75)

    def test_state_guard(self):
        with pytest.raises(ResourceGuardError):
            GameSpec(PM_ONE, absolute_loss(1.0), 50, ("x0",), (-1.0, 1.0), (-1.0, 0.0, 1.0))

    def test_grid_validation(self):
        with pytest.raises(DomainError):
            GameSpec(PM_ONE, absolute_loss(1.0), 1, ("x0",), (-2.0, 1.0), (0.0,))


class TestStrategies:
    def test_adversary_flips_sign_breaking_ties_low(self):
        solved = optimal_adversary(abs_game(1))
        assert solved.adversary_outcome([], [], "x0", 0.5) == -1.0
        assert solved.adversary_outcome([], [], "x0", -0.5) == 1.0
        assert solved.adversary_outcome([], [], "x0", 0.0) == -1.0  # tie -> smallest

    def test_optimal_prediction_equalizes(self):
        solved = SolvedGame(abs_game(1))
        assert solved.optimal_prediction([], [], "x0") == 0.0

    def test_replay_reproduces_value(self):
        for spec in (abs_game(2), abs_game(3), sq_game(2)):
            solved = SolvedGame(spec)
            _, regret = solved.replay_optimal()
            assert regret == pytest.approx(solved.value, abs=1e-9)

    def test_replay_deterministic(self):
        solved = SolvedGame(abs_game(3))
        assert solved.replay_optimal() == solved.replay_optimal()

    def test_protocol_errors(self):
        solved = SolvedGame(abs_game(2))
        with pytest.raises(ProtocolError):
            solved.adversary_covariate(["x0"], [])
        with pytest.raises(ProtocolError):
            solved.adversary_outcome([], [], "bogus", 0.0)
        with pytest.raises(ProtocolError):
            solved.adversary_covariate(["x0", "x0"], [1.0, 0.5])  # off-grid outcome

    def test_mimicking_learner_never_loses_to_singleton(self):
        fam = FiniteTableFamily(["a"], [[0.5]])
        spec = GameSpec(fam, square_loss(1.0), 2, ("a",), (-1.0, 1.0), (-1.0, 0.5, 1.0))
        solved = SolvedGame(spec)
        xs, ys = [], []
        total = 0.0
        for _ in range(2):
            x = solved.adversary_covariate(xs, ys)
            yhat = 0.5  # play the only comparator
            y = solved.adversary_outcome(xs, ys, x, yhat)
            total += spec.model.value(yhat, y)
            xs.append(x)
            ys.append(y)
        best = best_comparator_loss(fam, spec.model, list(zip(xs, ys)))
        assert total - best <= 1e-12


class TestMonotonicityAndSandwiches:
    def test_singleton_all_zero(self):
        fam = FiniteTableFamily(["a"], [[0.0]])
        spec = GameSpec(fam, absolute_loss(1.0), 3, ("a",), (-1.0, 1.0), (-1.0, 0.0, 1.0))
        assert value_monotonicity(spec, [0, 1, 2, 3]) == pytest.approx([0.0] * 4)

    def test_absolute_game_nondecreasing_from_one(self):
        vals = value_monotonicity(abs_game(3), [1, 2, 3])
        assert vals[0] == pytest.approx(1.0)
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_zero_horizon_leads(self):
        vals = value_monotonicity(abs_game(2), [0, 1, 2])
        assert vals[0] == 0.0

    def test_absolute_rademacher_sandwich(self):
        for n in (1, 2, 3):
            rad = seq_rademacher(PM_ONE, LabeledTree.constant(n, "x0"))
            v = minimax_value(abs_game(n))
            assert rad - 1e-9 <= v <= 2 * rad + 1e-9

    def test_square_offset_upper_bound_dominates(self):
        spec = sq_game(2)
        v = minimax_value(spec)
        g_grid = max(
            abs(spec.model.subgradient(p, y))
            for p in spec.prediction_grid
            for y in spec.outcome_grid
        )
        upper = offset_rademacher_sup(
            HALVES, ("x0",), P5, 2, C=g_grid, offset=spec.model.curvature_minorant
        )
        assert upper >= v - 1e-9

    def test_square_two_point_lower_bound(self):
        # witness 0, outcomes at the boundary, values inside half the range:
        # one round at the depth-1 shattering scale beta = 1/2
        v1 = minimax_value(sq_game(1))
        assert v1 >= (2.0 / 2.0) * 1 * 0.5 - 1e-9

    def test_square_offset_lower_bound_sandwich(self):
        # two-point offset complexity with slope R = 2B, witness grid {0},
        # and the smoothness majorant as the penalty never exceeds the value
        model = square_loss(1.0)
        for n in (1, 2, 3):
            v = minimax_value(sq_game(n))
            lower = offset_rademacher_sup(
                HALVES, ("x0",), (0.0,), n, C=1.0, offset=model.smoothness_majorant
            )
            assert lower <= v + 1e-9


class TestForecasterDominance:
    def test_grid_learner_cannot_beat_the_value(self):
        rng = np.random.default_rng(0)
        fam = FiniteTableFamily(["a", "b"], rng.uniform(-1, 1, size=(3, 2)))
        spec = GameSpec(
            fam, square_loss(1.0), 3, ("a", "b"), (-1.0, 1.0), tuple(np.linspace(-1, 1, 5))
        )
        solved = SolvedGame(spec)
        forecaster = GridSnapForecaster(ExpertsForecaster(fam, 1.0), spec.prediction_grid)
        forecaster.reset()
        xs, ys, hist = [], [], []
        total = 0.0
        for _ in range(spec.horizon):
            x = solved.adversary_covariate(xs, ys)
            yhat = forecaster.predict(x)
            y = solved.adversary_outcome(xs, ys, x, yhat)
            forecaster.observe(x, y)
            total += spec.model.value(yhat, y)
            xs.append(x)
            ys.append(y)
            hist.append((x, y))
        regret = total - best_comparator_loss(fam, spec.model, hist)
        assert regret >= solved.value - 1e-9

    def test_json_spec_roundtrip(self):
        doc = {
            "family": {
                "variant": "finite_table",
                "covariate_ids": ["x0"],
                "values": [[1.0], [-1.0]],
            },
            "loss": {"name": "absolute", "B": 1.0},
            "horizon": 1,
            "covariate_set": ["x0"],
            "outcome_grid": [-1.0, 1.0],
            "prediction_grid": [-1.0, 0.0, 1.0],
        }
        spec = GameSpec.from_json_dict(doc)
        assert minimax_value(spec) == pytest.approx(1.0)
