#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
异常定义模块
库代码统一抛出 RBCLError 子类，命令层负责转换为退出码
"""


class RBCLError(Exception):
    """所有库异常的基类"""


class ConfigError(RBCLError):
    """配置文件解析或校验失败"""


# ===== 特征空间 =====

class FeatureSetError(RBCLError):
    """FeatureSet 不变量被破坏"""


class ZeroNormRow(RBCLError):
    """存在范数为零的特征行，无法计算余弦相似度"""

    def __init__(self, index: int):
        super().__init__(f"第 {index} 行特征范数为零")
        self.index = index


class MissingClass(RBCLError):
    """旧特征中缺少所需类别"""

    def __init__(self, class_id):
        super().__init__(f"旧特征中没有类别 {class_id} 的样本")
        self.class_id = class_id


# ===== 损失函数 =====

class NoPositive(RBCLError):
    """查询在图库中没有同类样本"""

    def __init__(self, query_index: int):
        super().__init__(f"查询 {query_index} 在图库中没有正样本")
        self.query_index = query_index


class DegenerateBatch(RBCLError):
    """批次无法构成三元组"""


class LabelOutOfRange(RBCLError):
    """标签不是合法的列索引"""


class InstanceMismatch(RBCLError):
    """新旧特征无法按 instance_id 对齐"""


class DimensionMismatch(RBCLError):
    """维度不一致或分类头退化"""


# ===== 模型 =====

class ShapeMismatch(RBCLError):
    """输入形状与编码器规格不符"""


class FormatError(RBCLError):
    """模型文件格式错误"""

    def __init__(self, message: str, version=None):
        super().__init__(message)
        self.version = version


class ModelIoError(RBCLError):
    """模型文件读写失败"""


class SpecMismatch(RBCLError):
    """新旧编码器结构不同，无法从旧模型初始化"""


# ===== 数据 =====

class UnsupportedSetting(RBCLError):
    """不支持的实验设置"""


class SettingError(RBCLError):
    """实验设置的接线不满足约束"""


class TooFewClasses(RBCLError):
    """训练类别数少于每批类别数 P"""


# ===== 评估 =====

class NoRelevant(RBCLError):
    """排序中没有相关项"""


class MissingPositive(RBCLError):
    """图库中缺少查询标签"""

    def __init__(self, label):
        super().__init__(f"图库中没有标签 {label}")
        self.label = label


class EmbedDimMismatch(RBCLError):
    """跨模型评估时嵌入维度不同"""


# ===== 校验工具 =====

class NonFinite(RBCLError):
    """差分探测时损失函数返回非有限值"""
