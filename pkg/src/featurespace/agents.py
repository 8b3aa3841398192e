#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
近邻上下文代理采样模块
每次迭代为批次内每个类别及其近邻类别各随机抽取一个旧特征
"""

from typing import Iterable

import numpy as np

from src.featurespace.feature_set import FeatureSet
from src.featurespace.geometry import NeighborIndex
from src.utils.errors import MissingClass


def sample_ncas(
    batch_classes: Iterable[int],
    index: NeighborIndex,
    old: FeatureSet,
    rng: np.random.Generator,
) -> FeatureSet:
    """
    采样近邻上下文代理作为图库

    参数:
        batch_classes: 当前批次的类别集合
        index: 旧特征空间上的近邻索引
        old: 预先计算的旧特征
        rng: 随机数生成器（只消耗该流）

    返回:
        代理特征集，按 instance_id 去重，保留旧标签
    """
    members = old.class_members
    picked = []
    seen = set()

    for c in sorted({int(c) for c in batch_classes}):
        if c not in index.neighbors:
            raise MissingClass(c)
        for k in (c,) + index.neighbors_of(c):
            rows = members.get(k)
            if rows is None or rows.size == 0:
                raise MissingClass(k)
            row = int(rows[rng.integers(rows.size)])
            iid = int(old.instance_ids[row])
            if iid not in seen:
                seen.add(iid)
                picked.append(row)

    return old.take(picked)
