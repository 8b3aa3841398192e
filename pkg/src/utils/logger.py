#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
日志工具模块
"""

import os
import sys
from pathlib import Path

from loguru import logger

_configured = False


def setup_logger(name, level=None):
    """
    设置日志记录器

    参数:
        name: 日志记录器名称（模块名，写入文件日志的文件名）
        level: 日志级别，默认读取 RBCL_LOG_LEVEL，未设置时为 INFO

    返回:
        日志记录器实例
    """
    global _configured
    if _configured:
        return logger

    level = level or os.getenv("RBCL_LOG_LEVEL", "INFO")

    # 移除默认处理器
    logger.remove()

    # 控制台输出走标准错误，标准输出留给报告表格
    logger.add(
        sys.stderr,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>: <level>{message}</level>",
        level=level,
        colorize=True
    )

    # 仅在指定目录时写文件日志
    log_dir = os.getenv("RBCL_LOG_DIR")
    if log_dir:
        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)
        logger.add(
            log_path / "rbcl.log",
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}: {message}",
            level=level,
            rotation="10 MB",
            retention="7 days",
            compression="zip"
        )

    _configured = True
    return logger
