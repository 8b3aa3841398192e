#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
重识别判别损失模块
难样本挖掘三元组损失与带标签平滑的ID损失
"""

from typing import Tuple

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import log_softmax, softmax

from src.featurespace.feature_set import FeatureSet
from src.utils.errors import DegenerateBatch, DimensionMismatch, LabelOutOfRange

# BoT 基线的默认超参数
DEFAULT_MARGIN = 0.3
DEFAULT_LABEL_SMOOTHING = 0.1


def hard_triplet_loss(batch: FeatureSet, margin: float = DEFAULT_MARGIN) -> Tuple[float, np.ndarray]:
    """
    难样本挖掘三元组损失（欧氏距离）

    参数:
        batch: 批次特征
        margin: 间隔

    返回:
        (损失值, 对批次特征的次梯度)
    """
    x = batch.features
    labels = batch.labels
    n = x.shape[0]

    dist = cdist(x, x, metric="euclidean")
    same = labels[:, None] == labels[None, :]
    pos_mask = same & ~np.eye(n, dtype=bool)
    neg_mask = ~same

    if not pos_mask.any(axis=1).all():
        raise DegenerateBatch("存在没有正样本的锚点")
    if not neg_mask.any(axis=1).all():
        raise DegenerateBatch("批次中没有负样本")

    # argmax/argmin 取第一个出现的位置，即最小索引
    hardest_pos = np.argmax(np.where(pos_mask, dist, -np.inf), axis=1)
    hardest_neg = np.argmin(np.where(neg_mask, dist, np.inf), axis=1)
    anchors = np.arange(n)
    d_ap = dist[anchors, hardest_pos]
    d_an = dist[anchors, hardest_neg]

    hinge = margin + d_ap - d_an
    active = hinge > 0
    loss = float(np.mean(np.where(active, hinge, 0.0)))

    grad = np.zeros_like(x)
    for a in np.flatnonzero(active):
        p, q = hardest_pos[a], hardest_neg[a]
        if d_ap[a] > 0:
            u = (x[a] - x[p]) / d_ap[a]
            grad[a] += u
            grad[p] -= u
        if d_an[a] > 0:
            v = (x[a] - x[q]) / d_an[a]
            grad[a] -= v
            grad[q] += v
    grad /= n

    return loss, grad


def id_loss(
    logits: np.ndarray, labels: np.ndarray, epsilon: float = DEFAULT_LABEL_SMOOTHING
) -> Tuple[float, np.ndarray]:
    """
    带标签平滑的交叉熵

    参数:
        logits: N×C 分类得分
        labels: 长度为 N 的列索引
        epsilon: 标签平滑系数，取值 [0,1)

    返回:
        (损失值, 对 logits 的梯度)
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    n, num_classes = logits.shape
    if num_classes < 2:
        raise DimensionMismatch(f"类别数必须至少为 2: {num_classes}")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"标签平滑系数必须在 [0,1) 内: {epsilon}")
    if labels.shape != (n,) or np.any(labels < 0) or np.any(labels >= num_classes):
        raise LabelOutOfRange(f"标签必须是 [0, {num_classes}) 内的列索引")

    target = np.full((n, num_classes), epsilon / num_classes)
    target[np.arange(n), labels] += 1.0 - epsilon

    log_prob = log_softmax(logits, axis=1)
    loss = float(-np.sum(target * log_prob) / n)
    grad = (softmax(logits, axis=1) - target) / n
    return loss, grad
