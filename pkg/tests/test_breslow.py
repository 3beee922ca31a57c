"""
Tests for the Breslow baseline estimator and survival predictions.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import ArgumentError
from survival.baseline import BaselineHazard, StepFunction, breslow_cumhaz, predict_survival
from survival.dataset import SurvivalDataset


@pytest.fixture
def three_events():
    return SurvivalDataset.from_arrays([1.0, 2.0, 3.0], [1, 1, 1])


class TestStepFunction:
    """Tests for the right-continuous step function."""

    def test_zero_before_first_knot(self):
        step = StepFunction([1.0, 2.0], [0.5, 1.5])
        assert step(0.99) == 0.0

    def test_right_continuous_at_knots(self):
        step = StepFunction([1.0, 2.0], [0.5, 1.5])
        assert_allclose(step([1.0, 1.5, 2.0, 10.0]), [0.5, 0.5, 1.5, 1.5])

    def test_empty_function_is_zero(self):
        assert_allclose(StepFunction.zero()([0.0, 5.0]), [0.0, 0.0])

    def test_rejects_unsorted_knots(self):
        with pytest.raises(ArgumentError):
            StepFunction([2.0, 1.0], [0.1, 0.2])

    def test_rejects_decreasing_values(self):
        with pytest.raises(ArgumentError):
            StepFunction([1.0, 2.0], [0.5, 0.1])


class TestBreslowCumhaz:
    """Tests for breslow_cumhaz."""

    def test_hand_computed_steps(self, three_events):
        cumhaz = breslow_cumhaz(np.zeros(3), three_events)
        assert_allclose(cumhaz.knots, [1.0, 2.0, 3.0])
        assert_allclose(cumhaz.values, [1 / 3, 1 / 3 + 1 / 2, 1 / 3 + 1 / 2 + 1])
        assert cumhaz(2.5) == pytest.approx(5 / 6)

    def test_all_censored_is_zero(self):
        data = SurvivalDataset.from_arrays([1.0, 2.0], [0, 0])
        cumhaz = breslow_cumhaz(np.array([0.3, -0.2]), data)
        assert_allclose(cumhaz([0.0, 1.5, 100.0]), 0.0)

    def test_tied_events_jump_together(self):
        data = SurvivalDataset.from_arrays([1.0, 1.0, 2.0], [1, 1, 0])
        cumhaz = breslow_cumhaz(np.zeros(3), data)
        assert_allclose(cumhaz.knots, [1.0])
        assert_allclose(cumhaz.values, [2 / 3])

    def test_censored_times_are_not_knots(self):
        data = SurvivalDataset.from_arrays([1.0, 2.0, 3.0], [1, 0, 1])
        cumhaz = breslow_cumhaz(np.zeros(3), data)
        assert_allclose(cumhaz.knots, [1.0, 3.0])

    def test_shift_divides_by_exponential(self, three_events):
        rng = np.random.default_rng(12)
        f = rng.normal(size=3)
        grid = np.linspace(0, 4, 17)
        base = breslow_cumhaz(f, three_events)(grid)
        shifted = breslow_cumhaz(f + 1.3, three_events)(grid)
        assert_allclose(shifted, base / math.exp(1.3), rtol=1e-12)

    def test_nondecreasing_on_random_data(self):
        rng = np.random.default_rng(13)
        data = SurvivalDataset.from_arrays(rng.exponential(size=60), rng.random(60) < 0.5)
        values = breslow_cumhaz(rng.normal(size=60), data)(np.linspace(0, 5, 200))
        assert np.all(np.diff(values) >= 0)
        assert np.all(values >= 0)


class TestPredictSurvival:
    """Tests for predict_survival and baseline hazards."""

    def test_shape_and_values(self, three_events):
        cumhaz = breslow_cumhaz(np.zeros(3), three_events)
        surv = predict_survival(np.array([0.0, math.log(2.0)]), cumhaz, [0.5, 2.5])
        assert surv.shape == (2, 2)
        assert_allclose(surv[:, 0], [1.0, 1.0])
        assert_allclose(surv[:, 1], [math.exp(-5 / 6), math.exp(-5 / 3)])

    def test_higher_hazard_survives_less(self, three_events):
        cumhaz = breslow_cumhaz(np.zeros(3), three_events)
        surv = predict_survival(np.array([-1.0, 0.0, 1.0]), cumhaz, 3.0)[:, 0]
        assert surv[0] > surv[1] > surv[2]

    def test_constant_baseline(self):
        baseline = BaselineHazard.constant(0.5)
        assert_allclose(baseline.hazard(np.array([1.0, 7.0])), [0.5, 0.5])
        assert_allclose(baseline.cumulative(np.array([1.0, 7.0])), [0.5, 3.5])
