#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
暴力 mAP 校验器
逐对计算余弦相似度并对每个查询完整排序，不依赖评估模块的任何代码
"""

import math

from src.featurespace.feature_set import FeatureSet
from src.utils.errors import InstanceMismatch, MissingPositive


def _cosine(u, v) -> float:
    dot = math.fsum(a * b for a, b in zip(u, v))
    return dot / (math.sqrt(math.fsum(a * a for a in u)) * math.sqrt(math.fsum(b * b for b in v)))


def brute_force_map(query: FeatureSet, gallery: FeatureSet) -> float:
    """
    暴力计算 mAP

    参数:
        query: 查询特征
        gallery: 图库特征

    返回:
        mAP
    """
    q_rows = query.features.tolist()
    g_rows = gallery.features.tolist()
    q_labels = query.labels.tolist()
    g_labels = gallery.labels.tolist()
    g_ids = gallery.instance_ids.tolist()

    if set(query.instance_ids.tolist()) & set(g_ids):
        raise InstanceMismatch("查询与图库的 instance_id 重叠")

    aps = []
    for q, label in zip(q_rows, q_labels):
        if label not in g_labels:
            raise MissingPositive(label)
        scored = sorted(
            ((-_cosine(q, g), gid, gl) for g, gid, gl in zip(g_rows, g_ids, g_labels)),
        )
        hits = 0
        precisions = []
        for position, (_, _, gl) in enumerate(scored):
            if gl == label:
                hits += 1
                precisions.append(hits / (position + 1))
        aps.append(math.fsum(precisions) / len(precisions))
    return math.fsum(aps) / len(aps)
