import numpy as np
import pytest

from secl.errors import NumericError, ShapeError
from secl.optim import AdamState, adam_step, finite_difference_grad


class TestAdam:
    def test_zero_gradient_is_fixed_point(self):
        p = [np.array([[1.0, 2.0]])]
        state = AdamState(learning_rate=0.01)
        out = adam_step(p, [np.zeros((1, 2))], state)
        assert np.array_equal(out[0], p[0])
        assert np.array_equal(state.m[0], np.zeros((1, 2)))
        assert np.array_equal(state.v[0], np.zeros((1, 2)))
        assert state.t == 1

    def test_first_step_is_signed_learning_rate(self):
        # at t=1 the bias-corrected update is lr * g / (|g| + eps') ~ lr * sign(g)
        g = np.array([[3.0, -0.2, 7.5]])
        p = [np.zeros((1, 3))]
        state = AdamState(learning_rate=0.001)
        out = adam_step(p, [g], state)
        assert np.allclose(out[0], -0.001 * np.sign(g), atol=1e-6)

    def test_quadratic_converges(self):
        # freeze the expected endpoint by running the scalar recurrence
        x = np.array([[1.0]])
        state = AdamState(learning_rate=0.1)
        for _ in range(200):
            (x,) = adam_step([x], [2.0 * x], state)
        assert abs(float(x[0, 0])) < 0.01

    def test_t_increments_by_one(self):
        state = AdamState()
        p = [np.ones((2, 2))]
        for expect in (1, 2, 3):
            p = adam_step(p, [np.ones((2, 2))], state)
            assert state.t == expect

    def test_shape_mismatch_rejected(self):
        state = AdamState()
        with pytest.raises(ShapeError):
            adam_step([np.ones((2, 2))], [np.ones((3, 2))], state)

    def test_non_finite_gradient_rejected(self):
        state = AdamState()
        bad = np.array([[np.nan, 1.0]])
        with pytest.raises(NumericError):
            adam_step([np.ones((1, 2))], [bad], state)


class TestFiniteDifferences:
    def test_square_function(self):
        fn = lambda ps: float(ps[0][0, 0] ** 2)
        (g,) = finite_difference_grad(fn, [np.array([[3.0]])], h=1e-5)
        assert abs(g[0, 0] - 6.0) <= 1e-8

    def test_constant_function(self):
        fn = lambda ps: 42.0
        (g,) = finite_difference_grad(fn, [np.ones((2, 3))], h=1e-5)
        assert np.abs(g).max() <= 1e-9

    def test_multi_parameter(self):
        fn = lambda ps: float((ps[0] ** 2).sum() + 3.0 * ps[1].sum())
        a = np.array([[1.0, -1.0]])
        b = np.array([[2.0]])
        ga, gb = finite_difference_grad(fn, [a, b], h=1e-6)
        assert np.allclose(ga, 2 * a, atol=1e-8)
        assert np.allclose(gb, 3.0, atol=1e-8)

    def test_params_not_mutated(self):
        a = np.array([[1.0, 2.0]])
        keep = a.copy()
        finite_difference_grad(lambda ps: float(ps[0].sum()), [a])
        assert np.array_equal(a, keep)
