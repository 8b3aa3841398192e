#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
模型文件读写模块

文件布局（小端）:
    magic "CRNK" | version u32 | input_dim u32 | embed_dim u32 | n_hidden u32
    | hidden_dims u32*n_hidden | activation u32 | seed u64
    | 每层 W (fan_in×fan_out, 行优先 f64) 与 b (fan_out f64)
    | num_classes u32 | [class_ids i64*C | weight C×embed_dim f64 | bias C f64]
num_classes 为 0 表示文件中没有分类头。
"""

import struct
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from src.model.classifier import ClassifierHead
from src.model.encoder import ACTIVATIONS, Encoder, EncoderSpec
from src.utils.errors import DimensionMismatch, FormatError, ModelIoError, ShapeMismatch
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

MAGIC = b"CRNK"
FORMAT_VERSION = 1


class _Reader:
    """带越界检查的字节读取器"""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise FormatError("模型文件被截断", FORMAT_VERSION)
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, dtype: str, shape) -> np.ndarray:
        count = int(np.prod(shape))
        raw = self.take(count * np.dtype(dtype).itemsize)
        native = np.int64 if dtype.endswith("i8") else np.float64
        return np.frombuffer(raw, dtype=dtype).reshape(shape).astype(native)


def _encode_bytes(encoder: Encoder, classifier: Optional[ClassifierHead]) -> bytes:
    spec = encoder.spec
    parts = [
        MAGIC,
        struct.pack("<IIII", FORMAT_VERSION, spec.input_dim, spec.embed_dim, len(spec.hidden_dims)),
        struct.pack(f"<{len(spec.hidden_dims)}I", *spec.hidden_dims),
        struct.pack("<IQ", ACTIVATIONS.index(spec.activation), spec.seed),
    ]
    for w, b in encoder.weights:
        parts.append(w.astype("<f8").tobytes(order="C"))
        parts.append(b.astype("<f8").tobytes(order="C"))
    if classifier is None:
        parts.append(struct.pack("<I", 0))
    else:
        parts.append(struct.pack("<I", classifier.num_classes))
        parts.append(np.asarray(classifier.class_ids, dtype="<i8").tobytes())
        parts.append(classifier.weight.astype("<f8").tobytes(order="C"))
        parts.append(classifier.bias.astype("<f8").tobytes(order="C"))
    return b"".join(parts)


def save_model(
    path: Union[str, Path], encoder: Encoder, classifier: Optional[ClassifierHead] = None
) -> Path:
    """
    保存编码器（及可选的分类头）

    参数:
        path: 目标文件路径
        encoder: 编码器
        classifier: 分类头

    返回:
        写入的路径
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(_encode_bytes(encoder, classifier))
    except OSError as e:
        raise ModelIoError(f"无法写入模型文件 {path}: {e}") from e
    logger.info(f"保存模型: {path}")
    return path


def load_model(path: Union[str, Path]) -> Tuple[Encoder, Optional[ClassifierHead]]:
    """
    读取模型文件

    参数:
        path: 模型文件路径

    返回:
        (编码器, 分类头或 None)
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise ModelIoError(f"无法读取模型文件 {path}: {e}") from e

    reader = _Reader(data)
    if reader.take(4) != MAGIC:
        raise FormatError("模型文件标识错误")
    version, input_dim, embed_dim, n_hidden = reader.unpack("<IIII")
    if version != FORMAT_VERSION:
        raise FormatError(f"不支持的模型文件版本: {version}", version)
    hidden_dims = reader.unpack(f"<{n_hidden}I")
    activation_code, seed = reader.unpack("<IQ")
    if activation_code >= len(ACTIVATIONS):
        raise FormatError(f"未知的激活函数编码: {activation_code}", version)

    try:
        spec = EncoderSpec(input_dim, tuple(hidden_dims), embed_dim, ACTIVATIONS[activation_code], seed)
    except ValueError as e:
        raise FormatError(f"模型规格非法: {e}", version) from e

    weights = []
    for fan_in, fan_out in spec.layer_dims:
        w = reader.array("<f8", (fan_in, fan_out))
        b = reader.array("<f8", (fan_out,))
        weights.append((w, b))
    try:
        encoder = Encoder(spec, weights)
    except ShapeMismatch as e:
        raise FormatError(f"编码器参数非法: {e}", version) from e

    classifier = None
    (num_classes,) = reader.unpack("<I")
    if num_classes:
        class_ids = reader.array("<i8", (num_classes,))
        weight = reader.array("<f8", (num_classes, embed_dim))
        bias = reader.array("<f8", (num_classes,))
        try:
            classifier = ClassifierHead(weight, bias, tuple(int(c) for c in class_ids))
        except DimensionMismatch as e:
            raise FormatError(f"分类头参数非法: {e}", version) from e

    if reader.pos != len(data):
        raise FormatError("模型文件末尾存在多余数据", version)
    return encoder, classifier
