#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
实验设置规划模块
按设置名称接线旧训练集、新训练集、测试集与新旧编码器规格
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from src.data.synthetic import Dataset, SyntheticSpec, generate_dataset
from src.model.encoder import EncoderSpec
from src.utils.errors import SettingError, UnsupportedSetting
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

SUPPORTED_SETTINGS = ("ID-S-1", "ID-S-2", "CD-S-1", "CD-S-2")

# 旧模型训练身份占训练身份的比例
OLD_ID_FRACTION = 0.1
# 变结构设置下新编码器的默认隐藏层
WIDE_HIDDEN_DIMS = (128, 128)


@dataclass(frozen=True)
class SettingPlan:
    """一个实验设置的完整接线"""

    name: str
    old_train: Dataset
    new_train: Dataset
    test: Dataset
    old_spec: EncoderSpec
    new_spec: EncoderSpec


def is_wider(new: EncoderSpec, old: EncoderSpec) -> bool:
    """新编码器隐藏单元总数严格多于旧编码器"""
    return sum(new.hidden_dims) > sum(old.hidden_dims)


def old_class_count(num_train_classes: int) -> int:
    """旧模型训练身份数：10% 向上取整，至少 2 个以便构成三元组"""
    return max(2, math.ceil(round(num_train_classes * OLD_ID_FRACTION, 9)))


def _resolve_specs(
    name: str, input_dim: int, encoder_old: Optional[EncoderSpec], encoder_new: Optional[EncoderSpec]
):
    old_spec = replace(encoder_old, input_dim=input_dim) if encoder_old else EncoderSpec(input_dim, seed=1)
    structure_change = name.endswith("-2")

    if encoder_new is None:
        hidden = WIDE_HIDDEN_DIMS if structure_change else old_spec.hidden_dims
        new_spec = replace(old_spec, hidden_dims=hidden, seed=old_spec.seed + 1)
    else:
        new_spec = replace(encoder_new, input_dim=input_dim)

    if structure_change and not is_wider(new_spec, old_spec):
        raise SettingError(f"{name} 要求新编码器比旧编码器更宽")
    if not structure_change and new_spec.hidden_dims != old_spec.hidden_dims:
        raise SettingError(f"{name} 要求新旧编码器结构相同")
    return old_spec, new_spec


def plan_setting(
    name: str,
    domain_a: SyntheticSpec,
    domain_b: Optional[SyntheticSpec] = None,
    encoder_old: Optional[EncoderSpec] = None,
    encoder_new: Optional[EncoderSpec] = None,
) -> SettingPlan:
    """
    规划实验设置

    参数:
        name: 设置名称（ID-S-1/ID-S-2/CD-S-1/CD-S-2）
        domain_a: 域A数据规格（同域设置只使用域A）
        domain_b: 域B数据规格（跨域设置必需）
        encoder_old: 旧编码器规格（input_dim 取自数据）
        encoder_new: 新编码器规格

    返回:
        SettingPlan
    """
    if name not in SUPPORTED_SETTINGS:
        raise UnsupportedSetting(f"不支持的设置: {name}")

    old_spec, new_spec = _resolve_specs(name, domain_a.input_dim, encoder_old, encoder_new)

    if name.startswith("ID"):
        dataset = generate_dataset(domain_a)
        new_train = dataset.view("train")
        train_classes = new_train.class_ids
        count = old_class_count(len(train_classes))
        rng = np.random.default_rng([domain_a.seed, 10])
        old_classes = np.sort(rng.choice(train_classes, size=count, replace=False))
        old_train = new_train.with_classes(old_classes)
        test = dataset.view("query", "gallery")
    else:
        if domain_b is None:
            raise SettingError(f"{name} 需要域B的数据规格")
        if domain_b.domain == domain_a.domain:
            raise SettingError(f"{name} 要求两个域的标签不同")
        if domain_b.input_dim != domain_a.input_dim:
            raise SettingError("两个域的输入维度必须相同")
        old_train = generate_dataset(domain_a).view("train")
        dataset_b = generate_dataset(domain_b)
        new_train = dataset_b.view("train")
        test = dataset_b.view("query", "gallery")

    logger.info(
        f"设置 {name}: 旧训练 {len(old_train.class_ids)} 类 (域 {old_train.domain}), "
        f"新训练 {len(new_train.class_ids)} 类 (域 {new_train.domain}), "
        f"测试 {len(test.class_ids)} 类"
    )
    return SettingPlan(name, old_train, new_train, test, old_spec, new_spec)
