#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
损失报告模块
"""

from dataclasses import dataclass, field

import numpy as np

from src.losses.ranking import TripletTerms


@dataclass(frozen=True)
class LossReport:
    """
    单步训练的各项损失

    l_m 保存兼容项的值：rbcl 时为平滑mAP损失，基线方法时为对应基线损失，
    不使用兼容损失时为 0。
    """

    l_m: float
    l_tri: float
    l_id: float
    grad_query: np.ndarray
    terms: TripletTerms = field(default_factory=TripletTerms)
    dgr_active: bool = False

    @property
    def l_total(self) -> float:
        return self.l_m + self.l_tri + self.l_id

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.grad_query))
