#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
有限差分梯度
"""

import math
from typing import Callable

import numpy as np

from src.utils.errors import NonFinite

MIN_STEP = 1e-7
MAX_STEP = 1e-3


def finite_diff_grad(
    loss_fn: Callable[[np.ndarray], float], at: np.ndarray, h: float = 1e-5
) -> np.ndarray:
    """
    逐坐标中心差分 (f(x+h·e) - f(x-h·e)) / (2h)

    参数:
        loss_fn: 关于矩阵的纯函数，返回实数
        at: 求导点（不会被修改）
        h: 步长，取值 [1e-7, 1e-3]

    返回:
        与 at 同形状的梯度
    """
    if not MIN_STEP <= h <= MAX_STEP:
        raise ValueError(f"步长必须在 [{MIN_STEP}, {MAX_STEP}] 内: {h}")
    x = np.array(at, dtype=np.float64)
    grad = np.zeros_like(x)

    def probe(point: np.ndarray) -> float:
        value = float(loss_fn(point))
        if not math.isfinite(value):
            raise NonFinite(f"损失函数返回非有限值: {value}")
        return value

    flat = x.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        upper = probe(x.copy())
        flat[i] = orig - h
        lower = probe(x.copy())
        flat[i] = orig
        out[i] = (upper - lower) / (2.0 * h)
    return grad
