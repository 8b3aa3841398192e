#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
合成身份数据集模块
高斯类簇 + 可控的域偏移，按开放集协议划分训练/查询/图库
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np
from scipy.stats import ortho_group

from src.featurespace.feature_set import FLOAT_FORMAT, FeatureSet
from src.utils.errors import SettingError
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

SPLITS = ("train", "query", "gallery")


@dataclass(frozen=True)
class DomainShift:
    """域偏移：随机正交旋转 + 平移 + 类内离散度缩放"""

    rotation_seed: int
    translation_scale: float = 0.0
    spread_multiplier: float = 1.0

    def __post_init__(self):
        if self.translation_scale < 0 or not self.spread_multiplier > 0:
            raise ValueError("平移尺度必须非负，离散度倍数必须为正")


@dataclass(frozen=True)
class SyntheticSpec:
    """合成数据集规格"""

    num_classes: int
    instances_per_class: int
    input_dim: int
    cluster_spread: float
    center_scale: float
    domain: str = "A"
    shift: Optional[DomainShift] = None
    seed: int = 0
    test_fraction: float = 0.5

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError(f"类别数至少为 2: {self.num_classes}")
        if self.instances_per_class < 4:
            raise ValueError(f"每类样本数至少为 4: {self.instances_per_class}")
        if self.input_dim < 1:
            raise ValueError(f"输入维度至少为 1: {self.input_dim}")
        if not 0 < self.cluster_spread < self.center_scale:
            raise ValueError("必须满足 0 < cluster_spread < center_scale")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"测试类别比例必须在 (0,1) 内: {self.test_fraction}")


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    数据集（或其视图）

    inputs: N×input_dim
    labels / instance_ids: 长度 N
    domain: 域标签
    splits: 每个样本的划分标签 train/query/gallery
    """

    inputs: np.ndarray
    labels: np.ndarray
    instance_ids: np.ndarray
    domain: str
    splits: np.ndarray

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        instance_ids = np.asarray(self.instance_ids, dtype=np.int64)
        splits = np.asarray(self.splits, dtype=object)
        n = inputs.shape[0]
        if inputs.ndim != 2 or labels.shape != (n,) or instance_ids.shape != (n,) or splits.shape != (n,):
            raise SettingError("数据集字段长度不一致")
        if not set(splits.tolist()) <= set(SPLITS):
            raise SettingError(f"未知的划分标签: {set(splits.tolist()) - set(SPLITS)}")

        train_labels = set(labels[splits == "train"].tolist())
        query_labels = set(labels[splits == "query"].tolist())
        gallery_labels = set(labels[splits == "gallery"].tolist())
        if train_labels & (query_labels | gallery_labels):
            raise SettingError("测试身份与训练身份重叠")
        if gallery_labels and not query_labels <= gallery_labels:
            raise SettingError("存在图库中没有的查询身份")

        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "instance_ids", instance_ids)
        object.__setattr__(self, "splits", splits)

    def __len__(self) -> int:
        return self.inputs.shape[0]

    @property
    def class_ids(self) -> np.ndarray:
        return np.unique(self.labels)

    def _subset(self, mask: np.ndarray) -> "Dataset":
        return Dataset(
            self.inputs[mask], self.labels[mask], self.instance_ids[mask], self.domain, self.splits[mask]
        )

    def view(self, *splits: str) -> "Dataset":
        """只保留指定划分的样本"""
        return self._subset(np.isin(self.splits, splits))

    def with_classes(self, class_ids: Iterable[int]) -> "Dataset":
        """只保留指定类别的样本"""
        return self._subset(np.isin(self.labels, list(class_ids)))

    def rows_of(self, instance_ids: Iterable[int]) -> np.ndarray:
        """instance_id -> 行索引"""
        lookup = {int(i): row for row, i in enumerate(self.instance_ids)}
        return np.array([lookup[int(i)] for i in instance_ids], dtype=np.int64)

    def feature_set(self, features: np.ndarray, encoder_name: str) -> FeatureSet:
        """把编码结果包装为带来源信息的特征集"""
        return FeatureSet(features, self.labels, self.instance_ids, f"{encoder_name}:{self.domain}")


def domain_rotation(rotation_seed: int, dim: int) -> np.ndarray:
    """按种子生成 dim×dim 随机正交矩阵"""
    if dim == 1:
        return np.ones((1, 1))
    return ortho_group.rvs(dim, random_state=np.random.default_rng(rotation_seed))


def generate_dataset(spec: SyntheticSpec) -> Dataset:
    """
    生成合成数据集

    参数:
        spec: 数据集规格

    返回:
        Dataset，一部分类别留作测试，其样本一半作查询一半作图库
    """
    rng = np.random.default_rng(spec.seed)
    num_classes, per_class, dim = spec.num_classes, spec.instances_per_class, spec.input_dim

    centers = rng.normal(0.0, spec.center_scale, size=(num_classes, dim))
    noise = rng.normal(0.0, spec.cluster_spread, size=(num_classes, per_class, dim))

    if spec.shift is not None:
        noise = noise * spec.shift.spread_multiplier
    points = centers[:, None, :] + noise

    if spec.shift is not None:
        rotation = domain_rotation(spec.shift.rotation_seed, dim)
        translation = np.random.default_rng([spec.shift.rotation_seed, 1]).normal(
            0.0, spec.shift.translation_scale, size=dim
        )
        points = points @ rotation.T + translation

    num_test = min(num_classes - 1, max(1, int(round(num_classes * spec.test_fraction))))
    test_classes = set(rng.permutation(num_classes)[:num_test].tolist())

    labels = np.repeat(np.arange(num_classes), per_class)
    splits = []
    half = per_class // 2
    for c in range(num_classes):
        if c in test_classes:
            splits.extend(["query"] * half + ["gallery"] * (per_class - half))
        else:
            splits.extend(["train"] * per_class)

    dataset = Dataset(
        points.reshape(num_classes * per_class, dim),
        labels,
        np.arange(num_classes * per_class),
        spec.domain,
        np.array(splits, dtype=object),
    )
    logger.info(
        f"生成数据集 域={spec.domain}: {num_classes} 类 × {per_class} 样本, "
        f"测试类别 {num_test} 个"
    )
    return dataset


def save_dataset(dataset: Dataset, path: Union[str, Path]) -> Path:
    """
    导出数据集为CSV（在特征集格式上增加 split 列）

    参数:
        dataset: 数据集
        path: 目标路径

    返回:
        写入的路径
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dim = dataset.inputs.shape[1]
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["instance_id", "label", "split"] + [f"f{k}" for k in range(dim)])
        for iid, label, split, row in zip(dataset.instance_ids, dataset.labels, dataset.splits, dataset.inputs):
            writer.writerow([int(iid), int(label), split] + [format(float(x), FLOAT_FORMAT) for x in row])
    path.with_name(path.name + ".meta").write_text(f"source=input:{dataset.domain}\n", encoding="utf-8")
    return path

