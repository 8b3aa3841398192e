#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
嵌入编码器模块
小型全连接网络：隐藏层为仿射+激活，输出层为仿射（无激活、不归一化）
"""

from dataclasses import dataclass, field, replace
from typing import List, Tuple

import numpy as np

from src.utils.errors import ShapeMismatch

ACTIVATIONS = ("relu", "tanh")
MAX_HIDDEN_LAYERS = 4


@dataclass(frozen=True)
class EncoderSpec:
    """编码器结构规格"""

    input_dim: int
    hidden_dims: Tuple[int, ...] = (32,)
    embed_dim: int = 16
    activation: str = "relu"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        dims = (self.input_dim, self.embed_dim) + self.hidden_dims
        if any(d < 1 for d in dims):
            raise ValueError(f"所有维度必须 >= 1: {dims}")
        if len(self.hidden_dims) > MAX_HIDDEN_LAYERS:
            raise ValueError(f"隐藏层最多 {MAX_HIDDEN_LAYERS} 层")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"未知的激活函数: {self.activation}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"种子必须是 64 位无符号整数: {self.seed}")

    @property
    def layer_dims(self) -> List[Tuple[int, int]]:
        """每层 (fan_in, fan_out)"""
        dims = (self.input_dim,) + self.hidden_dims + (self.embed_dim,)
        return list(zip(dims[:-1], dims[1:]))

    def same_shape(self, other: "EncoderSpec") -> bool:
        """结构相同（忽略种子）"""
        return replace(self, seed=0) == replace(other, seed=0)


@dataclass(eq=False)
class Encoder:
    """
    编码器

    weights: 每层 (W, b)，W 形状为 fan_in×fan_out，y = x @ W + b
    """

    spec: EncoderSpec
    weights: List[Tuple[np.ndarray, np.ndarray]] = field(default_factory=list)

    def __post_init__(self):
        layers = self.spec.layer_dims
        if len(self.weights) != len(layers):
            raise ShapeMismatch(f"层数 {len(self.weights)} 与规格 {len(layers)} 不一致")
        checked = []
        for (w, b), (fan_in, fan_out) in zip(self.weights, layers):
            w = np.asarray(w, dtype=np.float64)
            b = np.asarray(b, dtype=np.float64)
            if w.shape != (fan_in, fan_out) or b.shape != (fan_out,):
                raise ShapeMismatch(f"权重形状 {w.shape}/{b.shape} 与规格 ({fan_in}, {fan_out}) 不一致")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ShapeMismatch("权重包含非有限值")
            checked.append((w, b))
        self.weights = checked

    def parameters(self) -> List[np.ndarray]:
        """按层顺序展开的参数列表（W1, b1, W2, b2, ...）"""
        return [p for layer in self.weights for p in layer]

    def copy(self) -> "Encoder":
        return Encoder(self.spec, [(w.copy(), b.copy()) for w, b in self.weights])


def init_encoder(spec: EncoderSpec) -> Encoder:
    """
    Glorot 均匀分布初始化编码器，偏置为零

    参数:
        spec: 编码器规格

    返回:
        Encoder
    """
    rng = np.random.default_rng(spec.seed)
    weights = []
    for fan_in, fan_out in spec.layer_dims:
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append((rng.uniform(-bound, bound, size=(fan_in, fan_out)), np.zeros(fan_out)))
    return Encoder(spec, weights)


def _activate(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return np.maximum(z, 0.0)
    return np.tanh(z)


def _activate_grad(z: np.ndarray, a: np.ndarray, activation: str) -> np.ndarray:
    # relu 在 0 处的次梯度取 0
    if activation == "relu":
        return (z > 0).astype(np.float64)
    return 1.0 - a ** 2


def _check_input(e: Encoder, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != e.spec.input_dim:
        raise ShapeMismatch(f"输入形状 {x.shape} 与编码器输入维度 {e.spec.input_dim} 不一致")
    return x


def _forward(e: Encoder, x: np.ndarray):
    """前向传播并保留每层的输入、预激活与激活值"""
    memory = []
    a = x
    last = len(e.weights) - 1
    for idx, (w, b) in enumerate(e.weights):
        z = a @ w + b
        out = z if idx == last else _activate(z, e.spec.activation)
        memory.append((a, z, out))
        a = out
    return a, memory


def encode(e: Encoder, x: np.ndarray) -> np.ndarray:
    """
    编码

    参数:
        e: 编码器
        x: N×input_dim 输入

    返回:
        N×embed_dim 嵌入
    """
    out, _ = _forward(e, _check_input(e, x))
    return out


def encode_backward(
    e: Encoder, x: np.ndarray, upstream_grad: np.ndarray
) -> Tuple[List[Tuple[np.ndarray, np.ndarray]], np.ndarray]:
    """
    反向传播

    参数:
        e: 编码器
        x: 输入
        upstream_grad: 损失对输出嵌入的梯度，N×embed_dim

    返回:
        (每层 (dW, db), 对输入的梯度)
    """
    x = _check_input(e, x)
    upstream_grad = np.asarray(upstream_grad, dtype=np.float64)
    if upstream_grad.shape != (x.shape[0], e.spec.embed_dim):
        raise ShapeMismatch(f"上游梯度形状 {upstream_grad.shape} 与输出形状不一致")

    _, memory = _forward(e, x)
    grads = [None] * len(e.weights)
    delta = upstream_grad
    last = len(e.weights) - 1
    for idx in range(last, -1, -1):
        a_in, z, out = memory[idx]
        if idx != last:
            delta = delta * _activate_grad(z, out, e.spec.activation)
        w, _ = e.weights[idx]
        grads[idx] = (a_in.T @ delta, delta.sum(axis=0))
        delta = delta @ w.T
    return grads, delta
