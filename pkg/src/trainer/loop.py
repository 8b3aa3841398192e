#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
训练循环模块
判别式训练（L_tri + L_id）与后向兼容训练（额外的兼容项）共用同一个循环
"""

import math
from dataclasses import replace
from typing import List, Optional, Tuple

import numpy as np

from src.data.sampler import batches_per_epoch, pk_batches
from src.data.synthetic import Dataset
from src.featurespace.agents import sample_ncas
from src.featurespace.feature_set import FeatureSet
from src.featurespace.geometry import NeighborIndex, build_neighbor_index
from src.losses.compat import influence_loss, l2_compat_loss, mmd_loss
from src.losses.ranking import TripletTerms, smooth_ap_loss
from src.losses.reid import hard_triplet_loss, id_loss
from src.losses.report import LossReport
from src.model.classifier import ClassifierHead, init_classifier
from src.model.encoder import Encoder, EncoderSpec, encode, encode_backward, init_encoder
from src.trainer.config import TrainConfig, TrainTrace
from src.trainer.optimizer import MomentumSGD
from src.utils.errors import DimensionMismatch, NonFinite, SpecMismatch
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

# 分类头初始化使用的随机流编号
HEAD_STREAM = 7


def head_seed(spec: EncoderSpec) -> int:
    """分类头的初始化种子，由编码器种子派生"""
    state = np.random.SeedSequence([spec.seed, HEAD_STREAM]).generate_state(1, dtype=np.uint64)
    return int(state[0])


class ReIDTrainer:
    """
    判别式训练器

    每步在 PK 批次上计算 L_tri + L_id + 兼容项，并用动量梯度下降同时更新编码器与分类头。
    批次流与代理采样流来自同一个种子的两个独立子流。
    """

    def __init__(self, train: Dataset, encoder: Encoder, classifier: ClassifierHead, cfg: TrainConfig):
        self.train = train
        self.encoder = encoder
        self.classifier = classifier
        self.cfg = cfg
        self.trace = TrainTrace()

        batch_seed, agent_seed = np.random.SeedSequence(cfg.seed).spawn(2)
        self.agent_rng = np.random.default_rng(agent_seed)

        num_classes = len(train.class_ids)
        p = cfg.p
        if p > num_classes:
            logger.warning(f"每批身份数 {p} 超过训练身份数 {num_classes}，已截断")
            p = num_classes
        self.batches = pk_batches(train, p, cfg.k_inst, np.random.default_rng(batch_seed))
        self.steps_per_epoch = cfg.batches_per_epoch or batches_per_epoch(train, p)
        self.optimizer = MomentumSGD(
            encoder.parameters() + [classifier.weight, classifier.bias],
            cfg.learning_rate,
            cfg.momentum,
        )

    def compat_term(
        self, rows: np.ndarray, batch: FeatureSet, epoch: int
    ) -> Tuple[float, np.ndarray, TripletTerms, bool]:
        """兼容项：(值, 对批次特征的梯度, 三元组项, DGR 是否生效)"""
        return 0.0, np.zeros_like(batch.features), TripletTerms(), False

    def compute_step(self, batch_ids: np.ndarray, epoch: int) -> Tuple[LossReport, List[np.ndarray]]:
        """
        计算一步的损失报告与全部参数的梯度（不更新参数）

        批次内使用位置编号作为 instance_id，因此有放回抽样得到的重复样本也合法。
        """
        rows = self.train.rows_of(batch_ids)
        x = self.train.inputs[rows]
        labels = self.train.labels[rows]
        features = encode(self.encoder, x)
        batch = FeatureSet(features, labels, np.arange(len(rows)), "new:batch")

        l_tri, grad_tri = hard_triplet_loss(batch, self.cfg.margin)
        logits = self.classifier.logits(features)
        l_id, grad_logits = id_loss(logits, self.classifier.columns(labels), self.cfg.label_smoothing)
        grad_w, grad_b, grad_id = self.classifier.logits_backward(features, grad_logits)
        l_c, grad_c, terms, active = self.compat_term(rows, batch, epoch)

        encoder_grads, _ = encode_backward(self.encoder, x, grad_tri + grad_id + grad_c)
        report = LossReport(l_c, l_tri, l_id, grad_c, terms, active)
        grads = [g for layer in encoder_grads for g in layer] + [grad_w, grad_b]
        return report, grads

    def step(self, epoch: int) -> LossReport:
        """取下一个批次并更新一次参数"""
        report, grads = self.compute_step(next(self.batches), epoch)
        if not math.isfinite(report.l_total):
            raise NonFinite(f"第 {epoch} 轮损失非有限: {report.l_total}")
        self.optimizer.step(grads)
        logger.debug(
            f"epoch {epoch}: l_m={report.l_m:.6f} l_tri={report.l_tri:.6f} l_id={report.l_id:.6f}"
        )
        return report

    def epoch_dgr_active(self, epoch: int) -> bool:
        return False

    def run(self) -> TrainTrace:
        cfg = self.cfg
        for epoch in range(1, cfg.epochs + 1):
            reports = [self.step(epoch) for _ in range(self.steps_per_epoch)]
            summary = self.trace.record_epoch(
                epoch,
                reports,
                self.epoch_dgr_active(epoch),
                cfg.hist_bins,
                epoch in cfg.hist_epochs,
            )
            logger.info(
                f"第 {epoch}/{cfg.epochs} 轮: l_total={summary.l_total:.4f} "
                f"l_m={summary.l_m:.4f} dgr={summary.dgr_active}"
            )
        return self.trace


class BCTTrainer(ReIDTrainer):
    """
    后向兼容训练器

    旧特征在训练开始前计算一次，行与 train 对齐；兼容项由 cfg.compat_loss 选择。
    """

    def __init__(
        self,
        train: Dataset,
        encoder: Encoder,
        classifier: ClassifierHead,
        cfg: TrainConfig,
        old_features: FeatureSet,
        index: Optional[NeighborIndex] = None,
        old_classifier: Optional[ClassifierHead] = None,
    ):
        super().__init__(train, encoder, classifier, cfg)
        self.old_features = old_features
        self.index = index
        self.old_classifier = old_classifier
        if cfg.compat_loss == "rbcl" and cfg.use_nca and index is None:
            raise ValueError("rbcl 使用近邻代理时需要近邻索引")
        if cfg.compat_loss == "influence" and old_classifier is None:
            raise ValueError("influence 损失需要旧分类头")

    def epoch_dgr_active(self, epoch: int) -> bool:
        return self.cfg.dgr_active(epoch)

    def _old_batch(self, rows: np.ndarray, batch: FeatureSet) -> FeatureSet:
        return FeatureSet(self.old_features.features[rows], batch.labels, batch.instance_ids, "old:batch")

    def _rank_gallery(self, rows: np.ndarray, batch: FeatureSet) -> FeatureSet:
        if self.cfg.use_nca:
            return sample_ncas(np.unique(batch.labels), self.index, self.old_features, self.agent_rng)
        return self.old_features.take(np.unique(rows))

    def compat_term(self, rows, batch, epoch):
        cfg = self.cfg
        kind = cfg.compat_loss
        if kind == "none":
            return super().compat_term(rows, batch, epoch)

        if kind == "rbcl":
            active = cfg.dgr_active(epoch)
            result = smooth_ap_loss(
                batch, self._rank_gallery(rows, batch), cfg.tau, replace(cfg.dgr, enabled=active)
            )
            return result.l_m, result.grad_query, result.terms, active

        old = self._old_batch(rows, batch)
        if kind == "l2":
            value, grad = l2_compat_loss(batch, old)
        elif kind == "mmd":
            value, grad = mmd_loss(batch, old, cfg.mmd_bandwidth)
        elif kind == "influence":
            value, grad = influence_loss(batch, old, self.old_classifier)
        else:
            # 新旧特征合并后的难样本三元组
            n = len(batch)
            union = FeatureSet(
                np.vstack([batch.features, old.features]),
                np.concatenate([batch.labels, old.labels]),
                np.arange(2 * n),
                "union:batch",
            )
            value, grad_union = hard_triplet_loss(union, cfg.margin)
            grad = grad_union[:n]
        return value, grad, TripletTerms(), False


def train_reid(train: Dataset, spec: EncoderSpec, cfg: TrainConfig) -> Tuple[Encoder, ClassifierHead, TrainTrace]:
    """
    判别式训练（旧模型或上界模型）

    参数:
        train: 训练集视图
        spec: 编码器规格
        cfg: 训练配置（compat_loss 必须为 none）

    返回:
        (编码器, 分类头, 训练轨迹)
    """
    if cfg.compat_loss != "none":
        raise ValueError(f"train_reid 不使用兼容损失: {cfg.compat_loss}")
    encoder = init_encoder(spec)
    classifier = init_classifier(spec.embed_dim, train.class_ids.tolist(), head_seed(spec))
    logger.info(f"判别式训练: {len(train.class_ids)} 类, {cfg.epochs} 轮")
    trace = ReIDTrainer(train, encoder, classifier, cfg).run()
    return encoder, classifier, trace


def _initial_encoder(old: Encoder, spec: EncoderSpec, cfg: TrainConfig, trace: TrainTrace) -> Encoder:
    if not cfg.init_from_old:
        return init_encoder(spec)
    if old.spec.same_shape(spec):
        return Encoder(spec, [(w.copy(), b.copy()) for w, b in old.weights])
    error = SpecMismatch(f"新旧编码器结构不同，改为随机初始化: {old.spec} vs {spec}")
    logger.warning(str(error))
    trace.notes.append(f"SpecMismatch: {error}")
    return init_encoder(spec)


def train_bct(
    new_train: Dataset,
    old: Encoder,
    old_classifier: Optional[ClassifierHead],
    spec: EncoderSpec,
    cfg: TrainConfig,
) -> Tuple[Encoder, TrainTrace]:
    """
    后向兼容训练

    参数:
        new_train: 新训练集视图
        old: 冻结的旧编码器（不会被修改）
        old_classifier: 旧分类头（influence 损失使用）
        spec: 新编码器规格
        cfg: 训练配置

    返回:
        (新编码器, 训练轨迹)
    """
    if cfg.compat_loss != "none" and spec.embed_dim != old.spec.embed_dim:
        raise DimensionMismatch(f"兼容训练要求嵌入维度一致: {spec.embed_dim} vs {old.spec.embed_dim}")

    old_features = new_train.feature_set(encode(old, new_train.inputs), "old")
    index = build_neighbor_index(old_features, cfg.nca_k) if cfg.compat_loss == "rbcl" else None

    notes = TrainTrace()
    encoder = _initial_encoder(old, spec, cfg, notes)
    classifier = init_classifier(spec.embed_dim, new_train.class_ids.tolist(), head_seed(spec))

    logger.info(
        f"兼容训练 ({cfg.compat_loss}): {len(new_train.class_ids)} 类, {cfg.epochs} 轮, "
        f"DGR 起始轮 {cfg.dgr_start}"
    )
    trainer = BCTTrainer(new_train, encoder, classifier, cfg, old_features, index, old_classifier)
    trainer.trace.notes.extend(notes.notes)
    trace = trainer.run()
    return encoder, trace
