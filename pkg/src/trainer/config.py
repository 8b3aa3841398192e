#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
训练配置与训练轨迹模块
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.losses.ranking import DGRParams, SigmoidParams
from src.losses.report import LossReport
from src.losses.reid import DEFAULT_LABEL_SMOOTHING, DEFAULT_MARGIN

COMPAT_LOSSES = ("none", "rbcl", "l2", "mmd", "influence", "triplet_align")

# 三元组项直方图的取值范围（两个余弦相似度之差）
HIST_RANGE = (-2.0, 2.0)


@dataclass(frozen=True)
class TrainConfig:
    """
    训练配置

    epochs 从 1 开始计数；dgr_start_epoch 为 None 时取总轮数的 2/3。
    batches_per_epoch 为 None 时取覆盖全部身份所需的批数。
    """

    epochs: int = 40
    batches_per_epoch: Optional[int] = None
    p: int = 4
    k_inst: int = 4
    learning_rate: float = 0.05
    momentum: float = 0.9
    tau: SigmoidParams = SigmoidParams(0.01)
    dgr: DGRParams = DGRParams(alpha=0.5, enabled=True)
    dgr_start_epoch: Optional[int] = None
    nca_k: int = 10
    use_nca: bool = True
    compat_loss: str = "none"
    seed: int = 0
    init_from_old: bool = True
    margin: float = DEFAULT_MARGIN
    label_smoothing: float = DEFAULT_LABEL_SMOOTHING
    mmd_bandwidth: Union[float, str] = "auto"
    hist_epochs: Tuple[int, ...] = ()
    hist_bins: int = 40

    def __post_init__(self):
        object.__setattr__(self, "hist_epochs", tuple(int(e) for e in self.hist_epochs))
        if self.epochs < 0:
            raise ValueError(f"训练轮数不能为负: {self.epochs}")
        if self.compat_loss not in COMPAT_LOSSES:
            raise ValueError(f"未知的兼容损失: {self.compat_loss}")
        if self.nca_k < 0:
            raise ValueError(f"近邻数不能为负: {self.nca_k}")
        if not self.learning_rate >= 0:
            raise ValueError(f"学习率不能为负: {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"动量必须在 [0,1) 内: {self.momentum}")
        if self.batches_per_epoch is not None and self.batches_per_epoch < 1:
            raise ValueError(f"每轮批数至少为 1: {self.batches_per_epoch}")

    @property
    def dgr_start(self) -> int:
        if self.dgr_start_epoch is not None:
            return self.dgr_start_epoch
        return max(1, int(round(self.epochs * 2.0 / 3.0)))

    def dgr_active(self, epoch: int) -> bool:
        """该轮是否启用 DGR（只对 rbcl 有意义）"""
        return self.compat_loss == "rbcl" and self.dgr.enabled and epoch >= self.dgr_start


@dataclass(frozen=True)
class EpochSummary:
    """单轮损失均值"""

    epoch: int
    l_m: float
    l_tri: float
    l_id: float
    l_total: float
    dgr_active: bool
    grad_norm: float


@dataclass
class TrainTrace:
    """训练轨迹：每轮汇总、每步报告与三元组项直方图"""

    epochs: List[EpochSummary] = field(default_factory=list)
    steps: List[LossReport] = field(default_factory=list)
    histograms: Dict[int, np.ndarray] = field(default_factory=dict)
    shifted_histograms: Dict[int, np.ndarray] = field(default_factory=dict)
    hist_edges: Optional[np.ndarray] = None
    notes: List[str] = field(default_factory=list)

    @property
    def dgr_active(self) -> List[bool]:
        return [e.dgr_active for e in self.epochs]

    def record_epoch(
        self,
        epoch: int,
        reports: Sequence[LossReport],
        dgr_active: bool,
        hist_bins: int,
        keep_histogram: bool,
    ) -> EpochSummary:
        """汇总一轮的每步报告"""
        def mean(values):
            return float(np.mean(values)) if len(values) else 0.0

        summary = EpochSummary(
            epoch=epoch,
            l_m=mean([r.l_m for r in reports]),
            l_tri=mean([r.l_tri for r in reports]),
            l_id=mean([r.l_id for r in reports]),
            l_total=mean([r.l_total for r in reports]),
            dgr_active=dgr_active,
            grad_norm=mean([r.grad_norm for r in reports]),
        )
        self.epochs.append(summary)
        self.steps.extend(reports)

        if keep_histogram:
            raw = np.concatenate([r.terms.values for r in reports]) if reports else np.zeros(0)
            counts, edges = np.histogram(raw, bins=hist_bins, range=HIST_RANGE)
            self.histograms[epoch] = counts
            self.hist_edges = edges
            if dgr_active:
                shifted = np.concatenate([r.terms.shifted_values for r in reports])
                self.shifted_histograms[epoch], _ = np.histogram(shifted, bins=hist_bins, range=HIST_RANGE)
        return summary
