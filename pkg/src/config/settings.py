#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
配置管理模块
"""

import copy
import json
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

from dotenv import load_dotenv
from jsonschema import Draft7Validator

from src.config.schema import CONFIG_SCHEMA
from src.utils.errors import ConfigError

# 加载环境变量
load_dotenv()

RESOLVED_CONFIG_NAME = "config.resolved.json"

# 默认配置（同域设置：30 类，其中 10 类留作测试）
DEFAULT_CONFIG = {
    "setting": "ID-S-1",
    "domainA": {
        "num_classes": 30,
        "instances_per_class": 12,
        "input_dim": 16,
        "cluster_spread": 0.5,
        "center_scale": 1.0,
        "domain": "A",
        "shift": None,
        "seed": 0,
        "test_fraction": 1.0 / 3.0,
    },
    "domainB": None,
    "encoder_old": {
        "hidden_dims": [32],
        "embed_dim": 16,
        "activation": "relu",
        "seed": 1,
    },
    "encoder_new": None,
    "train": {
        "epochs": 40,
        "old_epochs": 40,
        "batches_per_epoch": None,
        "P": 4,
        "K_inst": 4,
        "learning_rate": 0.05,
        "momentum": 0.9,
        "tau": 0.01,
        "alpha": 0.5,
        "dgr_scope": "all_terms",
        "dgr_start_epoch": None,
        "nca_K": 10,
        "seed": 0,
        "init_from_old": True,
        "margin": 0.3,
        "label_smoothing": 0.1,
        "mmd_bandwidth": "auto",
        "hist_epochs": [],
        "hist_bins": 40,
    },
    "methods": ["none", "rbcl"],
    "output_dir": "results",
}

_VALIDATOR = Draft7Validator(CONFIG_SCHEMA)


def load_settings(config_path: Union[str, Path, None] = None) -> Dict[str, Any]:
    """
    加载并校验实验配置

    参数:
        config_path: 配置文件路径，为 None 时读取环境变量 RBCL_CONFIG，再退回 config.json

    返回:
        与默认配置合并后的配置字典
    """
    if config_path is None:
        config_path = os.getenv("RBCL_CONFIG", "config.json")
    path = Path(config_path)
    if not path.is_file():
        raise ConfigError(f"配置文件不存在: {path}")

    try:
        with open(path, "r", encoding="utf-8") as f:
            file_config = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"无法解析配置文件 {path}: {e}") from e
    if not isinstance(file_config, dict):
        raise ConfigError(f"配置文件顶层必须是对象: {path}")

    config = copy.deepcopy(DEFAULT_CONFIG)
    _merge_config(config, file_config)
    validate_settings(config)
    return config


def validate_settings(config: Dict[str, Any]) -> None:
    """按 schema 校验，报告所有错误"""
    errors = sorted(_VALIDATOR.iter_errors(config), key=lambda e: list(e.path))
    if errors:
        details = "; ".join(
            f"{'/'.join(str(p) for p in e.path) or '<root>'}: {e.message}" for e in errors
        )
        raise ConfigError(f"配置校验失败: {details}")


def _merge_config(base_config: Dict[str, Any], new_config: Dict[str, Any]) -> None:
    """
    递归合并配置

    参数:
        base_config: 基础配置
        new_config: 新配置
    """
    for key, value in new_config.items():
        if key in base_config and isinstance(base_config[key], dict) and isinstance(value, dict):
            _merge_config(base_config[key], value)
        else:
            base_config[key] = copy.deepcopy(value)


def workers_from_env() -> int:
    """并行训练的线程数（RBCL_WORKERS，默认 1）"""
    raw = os.getenv("RBCL_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"RBCL_WORKERS 必须是整数: {raw}") from None


def save_settings(config: Dict[str, Any], out_dir: Union[str, Path]) -> Path:
    """
    保存合并后的配置

    参数:
        config: 配置字典
        out_dir: 输出目录

    返回:
        写入的路径
    """
    path = Path(out_dir) / RESOLVED_CONFIG_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config, f, indent=4, ensure_ascii=False, sort_keys=True)
        f.write("\n")
    return path
