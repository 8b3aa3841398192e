#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
校验工具测试
"""

import numpy as np
import pytest

from src.losses import SigmoidParams, sigmoid_tau
from src.oracles import brute_force_map, finite_diff_grad
from src.utils.errors import InstanceMismatch, MissingPositive, NonFinite
from tests.helpers import make_fs


class TestFiniteDiff:
    def test_squared_norm(self):
        x = np.random.default_rng(0).normal(size=(3, 4))
        grad = finite_diff_grad(lambda v: float(np.sum(v * v)), x)
        assert np.max(np.abs(grad - 2 * x)) <= 1e-8

    def test_logistic_at_zero(self):
        grad = finite_diff_grad(lambda v: float(np.sum(sigmoid_tau(v, SigmoidParams(1.0)))), np.zeros((1, 1)))
        assert grad[0, 0] == pytest.approx(0.25, abs=1e-8)

    def test_constant(self):
        grad = finite_diff_grad(lambda v: 3.0, np.ones((2, 2)))
        assert np.all(grad == 0.0)

    def test_input_not_modified(self):
        x = np.arange(4.0).reshape(2, 2)
        finite_diff_grad(lambda v: float(np.sum(v ** 3)), x)
        assert np.array_equal(x, np.arange(4.0).reshape(2, 2))

    def test_non_finite(self):
        with pytest.raises(NonFinite):
            finite_diff_grad(lambda v: float("nan"), np.zeros((1, 1)))

    @pytest.mark.parametrize("h", [1e-8, 1e-2])
    def test_step_range(self, h):
        with pytest.raises(ValueError):
            finite_diff_grad(lambda v: 0.0, np.zeros((1, 1)), h)


class TestBruteForceMap:
    def test_perfect_separation(self):
        query = make_fs(np.eye(2), [0, 1], [10, 11])
        gallery = make_fs(np.eye(2), [0, 1])
        assert brute_force_map(query, gallery) == 1.0

    def test_ranks_1_and_3(self):
        query = make_fs([[1.0, 0.0]], [0], [100])
        gallery = make_fs([[1.0, 0.0], [0.9, 0.1], [0.5, 0.5], [0.0, 1.0]], [0, 1, 0, 1])
        assert brute_force_map(query, gallery) == pytest.approx(0.8333333, abs=1e-7)

    def test_missing_positive(self):
        with pytest.raises(MissingPositive):
            brute_force_map(make_fs([[1.0]], [3], [9]), make_fs([[1.0]], [0]))

    def test_overlapping_ids(self):
        fs = make_fs([[1.0], [2.0]], [0, 1])
        with pytest.raises(InstanceMismatch):
            brute_force_map(fs, fs)
