#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
PK 批采样模块
每批 P 个不同身份，每个身份 K 个样本
"""

import math
from typing import Dict, Iterator

import numpy as np

from src.data.synthetic import Dataset
from src.utils.errors import TooFewClasses


def class_index(train: Dataset) -> Dict[int, np.ndarray]:
    """类别 -> 升序 instance_id"""
    return {
        int(c): np.sort(train.instance_ids[train.labels == c]) for c in train.class_ids
    }


def batches_per_epoch(train: Dataset, p: int) -> int:
    """覆盖全部身份所需的批数"""
    return math.ceil(len(train.class_ids) / p)


def pk_batches(train: Dataset, p: int, k_inst: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
    """
    无限的 PK 批次流

    每一轮（batches_per_epoch 个批次）把全部身份随机排列后按 P 个一组切分，
    最后一组不足 P 个时用其它身份补齐，因此每轮覆盖每个身份至少一次。
    身份样本数不足 K 时有放回抽样。

    参数:
        train: 训练集视图
        p: 每批身份数
        k_inst: 每个身份的样本数
        rng: 随机数生成器

    返回:
        instance_id 数组的迭代器
    """
    members = class_index(train)
    classes = np.array(sorted(members), dtype=np.int64)
    if p > classes.size:
        raise TooFewClasses(f"每批身份数 {p} 超过训练身份数 {classes.size}")
    if p < 1 or k_inst < 2:
        raise ValueError(f"P 必须 >= 1 且 K 必须 >= 2: P={p}, K={k_inst}")

    while True:
        order = rng.permutation(classes)
        for start in range(0, order.size, p):
            group = order[start:start + p]
            if group.size < p:
                rest = np.setdiff1d(classes, group)
                group = np.concatenate([group, rng.choice(rest, size=p - group.size, replace=False)])
            batch = []
            for c in group:
                ids = members[int(c)]
                batch.append(rng.choice(ids, size=k_inst, replace=ids.size < k_inst))
            yield np.concatenate(batch)
