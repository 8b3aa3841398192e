#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
特征集模块
带标签的嵌入矩阵及其CSV读写
"""

import csv
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, Union

import numpy as np

from src.utils.errors import FeatureSetError, InstanceMismatch
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

# 浮点数写出精度（有效数字）
FLOAT_FORMAT = ".9g"


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """
    带来源信息的特征集

    features: N×D 特征矩阵
    labels: 长度为 N 的类别标识
    instance_ids: 长度为 N 的样本标识，互不相同
    source: "<编码器>:<域>"
    """

    features: np.ndarray
    labels: np.ndarray
    instance_ids: np.ndarray
    source: str = "unknown:unknown"

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        instance_ids = np.asarray(self.instance_ids, dtype=np.int64)

        if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] < 1:
            raise FeatureSetError(f"特征矩阵形状非法: {features.shape}")
        if not np.all(np.isfinite(features)):
            raise FeatureSetError("特征矩阵包含非有限值")
        n = features.shape[0]
        if labels.shape != (n,) or instance_ids.shape != (n,):
            raise FeatureSetError(
                f"标签或样本标识长度与特征行数 {n} 不一致"
            )
        if np.unique(instance_ids).size != n:
            raise FeatureSetError("instance_ids 存在重复")

        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "instance_ids", instance_ids)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @cached_property
    def class_members(self) -> Dict[int, np.ndarray]:
        """类别 -> 行索引（按 instance_id 升序）"""
        order = np.lexsort((self.instance_ids, self.labels))
        sorted_labels = self.labels[order]
        classes, starts = np.unique(sorted_labels, return_index=True)
        bounds = list(starts[1:]) + [len(order)]
        return {
            int(c): order[s:e] for c, s, e in zip(classes, starts, bounds)
        }

    @cached_property
    def _row_of_id(self) -> Dict[int, int]:
        return {int(i): row for row, i in enumerate(self.instance_ids)}

    def take(self, rows: Iterable[int], source: str = None) -> "FeatureSet":
        """按行索引取子集"""
        rows = np.asarray(list(rows), dtype=np.int64)
        return FeatureSet(
            self.features[rows],
            self.labels[rows],
            self.instance_ids[rows],
            source or self.source,
        )

    def select_ids(self, ids: Iterable[int]) -> "FeatureSet":
        """按 instance_id 取子集，顺序与 ids 一致"""
        try:
            rows = [self._row_of_id[int(i)] for i in ids]
        except KeyError as e:
            raise InstanceMismatch(f"特征集中没有样本 {e.args[0]}") from None
        return self.take(rows)


def meta_path(path: Union[str, Path]) -> Path:
    """侧车文件路径"""
    path = Path(path)
    return path.with_name(path.name + ".meta")


def save_feature_set(fs: FeatureSet, path: Union[str, Path]) -> Path:
    """
    保存特征集为CSV

    参数:
        fs: 特征集
        path: 目标CSV路径

    返回:
        写入的路径
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ["instance_id", "label"] + [f"f{k}" for k in range(fs.dim)]
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for iid, label, row in zip(fs.instance_ids, fs.labels, fs.features):
            writer.writerow(
                [int(iid), int(label)] + [format(float(x), FLOAT_FORMAT) for x in row]
            )
    meta_path(path).write_text(f"source={fs.source}\n", encoding="utf-8")
    logger.debug(f"写出特征集: {path} ({len(fs)} 行)")
    return path


def load_feature_set(path: Union[str, Path]) -> FeatureSet:
    """
    从CSV读取特征集

    参数:
        path: CSV路径

    返回:
        特征集
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header or header[:2] != ["instance_id", "label"]:
            raise FeatureSetError(f"特征文件表头非法: {path}")
        ids, labels, rows = [], [], []
        for record in reader:
            ids.append(int(record[0]))
            labels.append(int(record[1]))
            rows.append([float(x) for x in record[2:]])

    source = "unknown:unknown"
    sidecar = meta_path(path)
    if sidecar.exists():
        line = sidecar.read_text(encoding="utf-8").strip()
        if line.startswith("source="):
            source = line[len("source="):]

    return FeatureSet(np.array(rows, dtype=np.float64), labels, ids, source)
