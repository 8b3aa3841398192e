#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
动量梯度下降
"""

from typing import List, Sequence

import numpy as np


class MomentumSGD:
    """恒定学习率的动量梯度下降，原地更新参数数组"""

    def __init__(self, params: List[np.ndarray], lr: float, momentum: float = 0.9):
        self.params = params
        self.lr = lr
        self.momentum = momentum
        self.velocity = [np.zeros_like(p) for p in params]

    def step(self, grads: Sequence[np.ndarray]) -> None:
        for p, v, g in zip(self.params, self.velocity, grads):
            v *= self.momentum
            v += g
            p -= self.lr * v
