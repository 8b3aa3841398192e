#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
检索评估模块
精确 AP、mAP、Rank-1 与 CMC，以及新旧模型交叉评估矩阵
"""

import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from src.data.synthetic import Dataset
from src.featurespace.feature_set import FeatureSet
from src.featurespace.geometry import cosine_similarity_matrix
from src.model.encoder import Encoder, encode
from src.utils.errors import EmbedDimMismatch, InstanceMismatch, MissingPositive, NoRelevant
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


@dataclass(frozen=True)
class RetrievalReport:
    """
    一次检索评估的结果

    cmc[k] 为前 k+1 名内命中的查询比例，长度等于图库大小。
    """

    map: float
    rank1: float
    cmc: Tuple[float, ...]
    query_encoder: str
    gallery_encoder: str
    num_queries: int

    def cmc_at(self, k: int) -> float:
        """前 k 名命中率，k 超过图库大小时取最后一项"""
        return self.cmc[min(k, len(self.cmc)) - 1]


def exact_ap(ranking: Sequence[bool]) -> float:
    """
    按排序后的相关性标记计算精确 AP

    参数:
        ranking: 排序后的相关性标记（平局须由调用方预先打破）

    返回:
        各相关项所在位置精度的平均值
    """
    precisions = []
    hits = 0
    for rank, relevant in enumerate(ranking, start=1):
        if relevant:
            hits += 1
            precisions.append(hits / rank)
    if not precisions:
        raise NoRelevant("排序中没有相关项")
    return math.fsum(precisions) / len(precisions)


def _encoder_tag(fs: FeatureSet) -> str:
    return fs.source.split(":", 1)[0]


def evaluate_retrieval(
    query: FeatureSet,
    gallery: FeatureSet,
    query_encoder: str = None,
    gallery_encoder: str = None,
) -> RetrievalReport:
    """
    余弦相似度检索评估

    每个查询按相似度降序排列图库，相似度相同时 instance_id 小者在前。

    参数:
        query: 查询特征
        gallery: 图库特征
        query_encoder: 查询编码器标签（默认取自 source）
        gallery_encoder: 图库编码器标签（默认取自 source）

    返回:
        RetrievalReport
    """
    if np.intersect1d(query.instance_ids, gallery.instance_ids).size:
        raise InstanceMismatch("查询与图库的 instance_id 重叠")
    gallery_labels = set(gallery.labels.tolist())
    for label in query.labels.tolist():
        if label not in gallery_labels:
            raise MissingPositive(label)

    sims = cosine_similarity_matrix(query, gallery).values
    num_q, num_g = sims.shape
    aps = []
    first_hit = np.empty(num_q, dtype=np.int64)
    for i in range(num_q):
        # lexsort 以最后一个键为主键
        order = np.lexsort((gallery.instance_ids, -sims[i]))
        relevant = gallery.labels[order] == query.labels[i]
        aps.append(exact_ap(relevant.tolist()))
        first_hit[i] = int(np.argmax(relevant))

    hits_within = np.bincount(first_hit, minlength=num_g)
    cmc = tuple(float(v) for v in np.cumsum(hits_within) / num_q)
    return RetrievalReport(
        map=math.fsum(aps) / num_q,
        rank1=cmc[0],
        cmc=cmc,
        query_encoder=query_encoder or _encoder_tag(query),
        gallery_encoder=gallery_encoder or _encoder_tag(gallery),
        num_queries=num_q,
    )


def cross_model_matrix(
    old: Encoder,
    new: Encoder,
    test: Dataset,
    old_tag: str = "old",
    new_tag: str = "new",
) -> Dict[str, RetrievalReport]:
    """
    新旧模型交叉评估

    参数:
        old: 旧编码器
        new: 新编码器
        test: 测试集视图（query + gallery）
        old_tag: 旧编码器标签
        new_tag: 新编码器标签

    返回:
        {"direct": 旧-旧, "cross": 新查询-旧图库, "ub": 新-新}
    """
    query = test.view("query")
    gallery = test.view("gallery")

    old_q = query.feature_set(encode(old, query.inputs), old_tag)
    old_g = gallery.feature_set(encode(old, gallery.inputs), old_tag)
    new_q = query.feature_set(encode(new, query.inputs), new_tag)
    new_g = gallery.feature_set(encode(new, gallery.inputs), new_tag)

    direct = evaluate_retrieval(old_q, old_g, old_tag, old_tag)
    ub = evaluate_retrieval(new_q, new_g, new_tag, new_tag)
    if new.spec.embed_dim != old.spec.embed_dim:
        raise EmbedDimMismatch(
            f"交叉评估要求嵌入维度一致: {new.spec.embed_dim} vs {old.spec.embed_dim}"
        )
    cross = evaluate_retrieval(new_q, old_g, new_tag, old_tag)

    logger.info(
        f"{new_tag}: direct mAP={direct.map:.4f}, cross mAP={cross.map:.4f}, ub mAP={ub.map:.4f}"
    )
    return {"direct": direct, "cross": cross, "ub": ub}
