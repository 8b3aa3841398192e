#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
排序损失模块
平滑mAP损失与动态梯度重激活（DGR）

查询特征来自新模型，图库特征来自旧模型且视为常量，
梯度只回传到查询特征。
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import expit

from src.featurespace.feature_set import FeatureSet
from src.featurespace.geometry import normalize_rows
from src.utils.errors import NoPositive

DGR_SCOPES = ("negatives_only", "all_terms")


@dataclass(frozen=True)
class SigmoidParams:
    """排序 sigmoid 的温度参数"""

    tau: float = 0.01

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau 必须为正数: {self.tau}")


@dataclass(frozen=True)
class DGRParams:
    """
    动态梯度重激活参数

    alpha: 压缩 sigmoid 的退火系数
    enabled: 是否启用
    scope: all_terms 同时平移正-正项与负项；negatives_only 只平移负项
    """

    alpha: float = 0.5
    enabled: bool = False
    scope: str = "all_terms"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha 必须为正数: {self.alpha}")
        if self.scope not in DGR_SCOPES:
            raise ValueError(f"未知的 DGR 作用范围: {self.scope}")


@dataclass(frozen=True)
class TripletTerms:
    """一次损失计算中的负项三元组 d_nj（原始值与平移后的值）"""

    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    shifted_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class SmoothAPResult:
    """平滑mAP损失的计算结果"""

    l_m: float
    grad_query: np.ndarray
    terms: TripletTerms
    ap: np.ndarray


def sigmoid_tau(x, p: SigmoidParams = SigmoidParams()):
    """
    带温度的 sigmoid，1/(1+exp(-x/tau))，大幅值时饱和而不溢出

    参数:
        x: 标量或数组
        p: 温度参数

    返回:
        (0,1) 区间内的值
    """
    return expit(np.asarray(x, dtype=np.float64) / p.tau)


def dgr_constant(d, g: DGRParams):
    """
    重激活常数 c = (sigmoid(d/alpha) - 0.5) - d

    调用方使用 d + c 作为平移后的值；c 不参与求导。
    """
    d = np.asarray(d, dtype=np.float64)
    return (expit(d / g.alpha) - 0.5) - d


def _shift_matrix(d: np.ndarray, pos: np.ndarray, g: DGRParams) -> np.ndarray:
    """单个查询的平移常数矩阵，行为图库样本，列为正样本"""
    if not g.enabled:
        return np.zeros_like(d)
    c = dgr_constant(d, g)
    if g.scope == "negatives_only":
        c[pos, :] = 0.0
    return c


def _pairwise_terms(sims_row: np.ndarray, pos_idx: np.ndarray) -> np.ndarray:
    """d[k, j] = s_k - s_j，j 取遍正样本"""
    return sims_row[:, None] - sims_row[pos_idx][None, :]


def _positive_mask(query: FeatureSet, gallery: FeatureSet, i: int) -> np.ndarray:
    pos = gallery.labels == query.labels[i]
    if not pos.any():
        raise NoPositive(i)
    return pos


def reactivation_constants(
    query: FeatureSet, gallery: FeatureSet, g: DGRParams
) -> List[np.ndarray]:
    """
    计算每个查询的重激活常数矩阵（前向传播时的取值）

    将结果传回 smooth_ap_loss 的 shift_constants，可在常数冻结的前提下重新求值。
    """
    q_hat, _ = normalize_rows(query.features)
    g_hat, _ = normalize_rows(gallery.features)
    sims = q_hat @ g_hat.T
    constants = []
    for i in range(len(query)):
        pos = _positive_mask(query, gallery, i)
        d = _pairwise_terms(sims[i], np.flatnonzero(pos))
        constants.append(_shift_matrix(d, pos, g))
    return constants


def smooth_ap_loss(
    query: FeatureSet,
    gallery: FeatureSet,
    p: SigmoidParams = SigmoidParams(),
    g: DGRParams = DGRParams(),
    shift_constants: Optional[Sequence[np.ndarray]] = None,
) -> SmoothAPResult:
    """
    平滑mAP损失及其对查询特征的解析梯度

    参数:
        query: 新模型提取的查询特征
        gallery: 旧模型提取的图库特征（常量）
        p: sigmoid 温度
        g: DGR 参数
        shift_constants: 可选，冻结的重激活常数（见 reactivation_constants）

    返回:
        SmoothAPResult
    """
    q_hat, q_norm = normalize_rows(query.features)
    g_hat, _ = normalize_rows(gallery.features)
    sims = q_hat @ g_hat.T

    num_q = len(query)
    grad_s = np.zeros_like(sims)
    ap = np.empty(num_q)
    raw_terms, shifted_terms = [], []

    for i in range(num_q):
        pos = _positive_mask(query, gallery, i)
        pos_idx = np.flatnonzero(pos)
        num_pos = pos_idx.size

        d = _pairwise_terms(sims[i], pos_idx)
        c = shift_constants[i] if shift_constants is not None else _shift_matrix(d, pos, g)
        e = d + c

        sig = expit(e / p.tau)
        dsig = sig * expit(-e / p.tau) / p.tau
        # 正样本 j 不与自身比较
        sig[pos_idx, np.arange(num_pos)] = 0.0
        dsig[pos_idx, np.arange(num_pos)] = 0.0

        a = 1.0 + sig[pos].sum(axis=0)
        b = sig[~pos].sum(axis=0)
        total = a + b
        ap[i] = np.mean(a / total)

        coef = np.where(pos[:, None], (b / total ** 2)[None, :], (-a / total ** 2)[None, :]) * dsig
        grad_row = coef.sum(axis=1)
        grad_row[pos_idx] -= coef.sum(axis=0)
        grad_s[i] = grad_row / num_pos

        raw_terms.append(d[~pos].ravel())
        shifted_terms.append(e[~pos].ravel())

    l_m = 1.0 - float(np.mean(ap))
    grad_s *= -1.0 / num_q

    # 通过余弦相似度链式求导
    radial = (grad_s * sims).sum(axis=1)
    grad_query = (grad_s @ g_hat - radial[:, None] * q_hat) / q_norm[:, None]

    terms = TripletTerms(np.concatenate(raw_terms), np.concatenate(shifted_terms))
    return SmoothAPResult(l_m, grad_query, terms, ap)
