#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
基线兼容损失模块
L2、MMD 与 Influence 三种蒸馏式损失，梯度只回传到新特征
"""

from typing import Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist, pdist
from scipy.special import log_softmax, softmax

from src.featurespace.feature_set import FeatureSet
from src.model.classifier import ClassifierHead
from src.utils.errors import DimensionMismatch, InstanceMismatch


def _aligned_old(new: FeatureSet, old: FeatureSet) -> np.ndarray:
    """按 new 的 instance_id 顺序取出旧特征"""
    if new.dim != old.dim:
        raise InstanceMismatch(f"新旧特征维度不同: {new.dim} vs {old.dim}")
    if len(new) != len(old) or set(new.instance_ids.tolist()) != set(old.instance_ids.tolist()):
        raise InstanceMismatch("新旧特征的 instance_id 集合不一致")
    return old.select_ids(new.instance_ids).features


def l2_compat_loss(new: FeatureSet, old: FeatureSet) -> Tuple[float, np.ndarray]:
    """
    新旧特征之间的平均平方欧氏距离

    返回:
        (损失值, 对新特征的梯度)
    """
    diff = new.features - _aligned_old(new, old)
    n = len(new)
    value = float(np.sum(diff ** 2) / n)
    return value, 2.0 * diff / n


def median_bandwidth(x: np.ndarray, y: np.ndarray) -> float:
    """合并批次两两距离的中位数，为零时退化为 1.0"""
    pooled = np.vstack([x, y])
    if pooled.shape[0] < 2:
        return 1.0
    median = float(np.median(pdist(pooled, metric="euclidean")))
    return median if median > 0 else 1.0


def mmd_loss(
    new: FeatureSet, old: FeatureSet, bandwidth: Union[float, str] = "auto"
) -> Tuple[float, np.ndarray]:
    """
    高斯核下的有偏 MMD 平方估计

    参数:
        new: 新特征
        old: 旧特征
        bandwidth: 核宽度 sigma，"auto" 时取中位数启发式（求导时视为常数）

    返回:
        (损失值, 对新特征的梯度)
    """
    x, y = new.features, old.features
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatch(f"新旧特征维度不同: {x.shape[1]} vs {y.shape[1]}")
    sigma = median_bandwidth(x, y) if bandwidth == "auto" else float(bandwidth)
    if not sigma > 0:
        raise ValueError(f"核宽度必须为正数: {sigma}")
    two_var = 2.0 * sigma ** 2

    k_xx = np.exp(-cdist(x, x, metric="sqeuclidean") / two_var)
    k_yy = np.exp(-cdist(y, y, metric="sqeuclidean") / two_var)
    k_xy = np.exp(-cdist(x, y, metric="sqeuclidean") / two_var)
    n, m = x.shape[0], y.shape[0]
    value = float(k_xx.mean() + k_yy.mean() - 2.0 * k_xy.mean())

    # d k(x,z)/dx = -k (x - z) / sigma^2
    grad_xx = -(k_xx.sum(axis=1)[:, None] * x - k_xx @ x) / sigma ** 2
    grad_xy = -(k_xy.sum(axis=1)[:, None] * x - k_xy @ y) / sigma ** 2
    grad = 2.0 * grad_xx / n ** 2 - 2.0 * grad_xy / (n * m)
    return value, grad


def influence_loss(
    new: FeatureSet, old: FeatureSet, old_classifier: ClassifierHead
) -> Tuple[float, np.ndarray]:
    """
    通过冻结的旧分类头做 logits 蒸馏（温度为 1）

    目标分布为 softmax(旧分类头(旧特征))，预测分布为 softmax(旧分类头(新特征))。

    返回:
        (交叉熵均值, 对新特征的梯度)
    """
    if old_classifier.embed_dim != new.dim:
        raise DimensionMismatch(
            f"旧分类头输入维度 {old_classifier.embed_dim} 与特征维度 {new.dim} 不一致"
        )
    old_aligned = _aligned_old(new, old)
    target = softmax(old_classifier.logits(old_aligned), axis=1)
    logits = old_classifier.logits(new.features)
    n = len(new)
    value = float(-np.sum(target * log_softmax(logits, axis=1)) / n)
    grad_logits = (softmax(logits, axis=1) - target) / n
    return value, grad_logits @ old_classifier.weight
