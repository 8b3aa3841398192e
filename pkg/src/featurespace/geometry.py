#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
特征空间几何模块
余弦相似度、类中心与类别近邻索引
"""

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from src.featurespace.feature_set import FeatureSet
from src.utils.errors import ZeroNormRow
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

# 判定零范数的阈值
NORM_EPS = 1e-12


@dataclass(frozen=True)
class SimilarityMatrix:
    """Q×G 余弦相似度矩阵"""

    values: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class NeighborIndex:
    """
    类别近邻索引

    class_ids: 升序类别标识
    centroids: 与 class_ids 对齐的类中心
    neighbors: 类别 -> 最近的 K 个其它类别（由近到远）
    """

    class_ids: np.ndarray
    centroids: np.ndarray
    neighbors: Dict[int, Tuple[int, ...]]

    @property
    def k(self) -> int:
        if not self.neighbors:
            return 0
        return max(len(v) for v in self.neighbors.values())

    def neighbors_of(self, class_id: int) -> Tuple[int, ...]:
        return self.neighbors[int(class_id)]


def normalize_rows(x: np.ndarray, offset: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """
    行归一化

    参数:
        x: 矩阵
        offset: 报错时行号的偏移

    返回:
        (归一化矩阵, 行范数)
    """
    norms = np.linalg.norm(x, axis=1)
    bad = np.flatnonzero(norms <= NORM_EPS)
    if bad.size:
        raise ZeroNormRow(int(bad[0]) + offset)
    return x / norms[:, None], norms


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """两组行向量之间的余弦相似度"""
    a_hat, _ = normalize_rows(a)
    if b is a:
        values = a_hat @ a_hat.T
        return 0.5 * (values + values.T)
    b_hat, _ = normalize_rows(b)
    return a_hat @ b_hat.T


def cosine_similarity_matrix(a: FeatureSet, b: FeatureSet) -> SimilarityMatrix:
    """
    计算特征集之间的余弦相似度矩阵

    参数:
        a: 查询特征集
        b: 图库特征集

    返回:
        SimilarityMatrix
    """
    return SimilarityMatrix(cosine_similarity(a.features, b.features))


def class_centroids(s: FeatureSet) -> Tuple[np.ndarray, np.ndarray]:
    """
    计算每个类别的中心

    参数:
        s: 特征集

    返回:
        (升序类别标识, 类中心矩阵)
    """
    members = s.class_members
    class_ids = np.array(sorted(members), dtype=np.int64)
    # 成员按 instance_id 排序后求均值，样本顺序不影响结果
    centroids = np.stack([s.features[members[int(c)]].mean(axis=0) for c in class_ids])
    return class_ids, centroids


def build_neighbor_index(s: FeatureSet, k: int) -> NeighborIndex:
    """
    按类中心欧氏距离构建近邻索引

    参数:
        s: 旧特征空间中的特征集
        k: 每个类别的近邻数，超过 C-1 时截断

    返回:
        NeighborIndex
    """
    if k < 0:
        raise ValueError(f"近邻数不能为负: {k}")
    class_ids, centroids = class_centroids(s)
    num_classes = len(class_ids)
    effective_k = min(k, num_classes - 1)
    if effective_k < k:
        logger.warning(f"近邻数 {k} 超过类别数-1，截断为 {effective_k}")

    dist = cdist(centroids, centroids, metric="euclidean")
    neighbors = {}
    for row, c in enumerate(class_ids):
        # 距离为主键，类别标识为次键
        order = np.lexsort((class_ids, dist[row]))
        ranked = [int(class_ids[j]) for j in order if j != row]
        neighbors[int(c)] = tuple(ranked[:effective_k])

    return NeighborIndex(class_ids, centroids, neighbors)
