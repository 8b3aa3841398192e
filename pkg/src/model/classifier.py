#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
线性分类头模块
"""

from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from src.utils.errors import DimensionMismatch, LabelOutOfRange


@dataclass(eq=False)
class ClassifierHead:
    """
    线性分类头，logits = f @ weight.T + bias

    weight: C×embed_dim
    bias: 长度 C
    class_ids: 每一列对应的类别标识
    """

    weight: np.ndarray
    bias: np.ndarray
    class_ids: Tuple[int, ...] = None

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.weight.shape[0] < 2:
            raise DimensionMismatch(f"分类头至少需要 2 个类别: {self.weight.shape}")
        num_classes = self.weight.shape[0]
        if self.bias.shape != (num_classes,):
            raise DimensionMismatch("偏置长度与类别数不一致")
        if not (np.all(np.isfinite(self.weight)) and np.all(np.isfinite(self.bias))):
            raise DimensionMismatch("分类头参数包含非有限值")
        if self.class_ids is None:
            self.class_ids = tuple(range(num_classes))
        self.class_ids = tuple(int(c) for c in self.class_ids)
        if len(self.class_ids) != num_classes:
            raise DimensionMismatch("class_ids 长度与类别数不一致")

    @property
    def num_classes(self) -> int:
        return self.weight.shape[0]

    @property
    def embed_dim(self) -> int:
        return self.weight.shape[1]

    def column_of(self) -> Dict[int, int]:
        return {c: j for j, c in enumerate(self.class_ids)}

    def columns(self, labels: Sequence[int]) -> np.ndarray:
        """类别标识 -> 列索引"""
        mapping = self.column_of()
        try:
            return np.array([mapping[int(c)] for c in labels], dtype=np.int64)
        except KeyError as e:
            raise LabelOutOfRange(f"分类头中没有类别 {e.args[0]}") from None

    def logits(self, features: np.ndarray) -> np.ndarray:
        if features.shape[1] != self.embed_dim:
            raise DimensionMismatch(
                f"特征维度 {features.shape[1]} 与分类头输入维度 {self.embed_dim} 不一致"
            )
        return features @ self.weight.T + self.bias

    def logits_backward(
        self, features: np.ndarray, grad_logits: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        分类头反向传播

        返回:
            (grad_weight, grad_bias, grad_features)
        """
        return grad_logits.T @ features, grad_logits.sum(axis=0), grad_logits @ self.weight

    def copy(self) -> "ClassifierHead":
        return ClassifierHead(self.weight.copy(), self.bias.copy(), self.class_ids)


def init_classifier(embed_dim: int, class_ids: Sequence[int], seed: int) -> ClassifierHead:
    """
    Glorot 均匀分布初始化分类头，偏置为零

    参数:
        embed_dim: 输入维度
        class_ids: 类别标识（决定列顺序）
        seed: 随机种子
    """
    num_classes = len(class_ids)
    bound = np.sqrt(6.0 / (embed_dim + num_classes))
    rng = np.random.default_rng(seed)
    weight = rng.uniform(-bound, bound, size=(num_classes, embed_dim))
    return ClassifierHead(weight, np.zeros(num_classes), tuple(class_ids))
