#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
测试辅助函数
"""

import numpy as np

from src.featurespace.feature_set import FeatureSet

# 相对误差的分母下限
REL_FLOOR = 1e-3


def rel_error(analytic, numeric, floor: float = REL_FLOOR) -> float:
    """max|a-f| / max(max|f|, floor)"""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = max(float(np.max(np.abs(numeric))), floor)
    return float(np.max(np.abs(analytic - numeric))) / scale


def make_fs(features, labels, ids=None, source="test:A") -> FeatureSet:
    features = np.asarray(features, dtype=np.float64)
    if ids is None:
        ids = np.arange(features.shape[0])
    return FeatureSet(features, np.asarray(labels), np.asarray(ids), source)


def random_fs(rng: np.random.Generator, num_classes: int, per_class: int, dim: int, id_offset: int = 0) -> FeatureSet:
    """每类 per_class 个样本的随机特征集"""
    labels = np.repeat(np.arange(num_classes), per_class)
    features = rng.normal(size=(labels.size, dim))
    return make_fs(features, labels, np.arange(labels.size) + id_offset)
