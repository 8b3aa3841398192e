#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
训练模块测试
"""

import csv
import math
from dataclasses import replace

import numpy as np
import pytest

from src.data import Dataset, SyntheticSpec, generate_dataset
from src.eval import evaluate_retrieval
from src.featurespace import build_neighbor_index
from src.losses import DGRParams
from src.model import Encoder, EncoderSpec, encode, init_classifier, init_encoder
from src.trainer import BCTTrainer, TrainConfig, train_bct, train_reid, write_trace_files
from src.trainer.optimizer import MomentumSGD


def dataset(num_classes=12, spread=0.1, seed=0) -> Dataset:
    return generate_dataset(
        SyntheticSpec(
            num_classes=num_classes,
            instances_per_class=8,
            input_dim=6,
            cluster_spread=spread,
            center_scale=1.0,
            seed=seed,
            test_fraction=0.5,
        )
    )


SPEC = EncoderSpec(6, (12,), 8, seed=5)
OLD_SPEC = EncoderSpec(6, (12,), 8, seed=1)


def small_cfg(**kwargs) -> TrainConfig:
    fields = dict(epochs=2, p=3, k_inst=2, nca_k=2, learning_rate=0.05, seed=3)
    fields.update(kwargs)
    return TrainConfig(**fields)


def weights_bytes(encoder: Encoder):
    return [p.tobytes() for p in encoder.parameters()]


class TestTrainConfig:
    def test_default_dgr_start(self):
        assert TrainConfig(epochs=30).dgr_start == 20

    def test_dgr_active_only_for_rbcl(self):
        cfg = TrainConfig(epochs=3, dgr_start_epoch=2, compat_loss="l2")
        assert not cfg.dgr_active(3)
        cfg = replace(cfg, compat_loss="rbcl")
        assert [cfg.dgr_active(e) for e in (1, 2, 3)] == [False, True, True]

    @pytest.mark.parametrize(
        "kwargs", [{"compat_loss": "cosine"}, {"momentum": 1.0}, {"nca_k": -1}, {"learning_rate": -0.1}]
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            TrainConfig(**kwargs)


class TestMomentumSGD:
    def test_updates_in_place(self):
        p = np.array([1.0, 2.0])
        opt = MomentumSGD([p], lr=0.1, momentum=0.5)
        opt.step([np.array([1.0, 0.0])])
        opt.step([np.array([1.0, 0.0])])
        # v1 = 1, v2 = 0.5 + 1 = 1.5
        np.testing.assert_allclose(p, [1.0 - 0.1 - 0.15, 2.0])


class TestTrainReid:
    def test_zero_epochs_returns_initial_model(self):
        train = dataset().view("train")
        encoder, _, trace = train_reid(train, SPEC, small_cfg(epochs=0))
        assert weights_bytes(encoder) == weights_bytes(init_encoder(SPEC))
        assert trace.epochs == []

    def test_deterministic(self):
        train = dataset().view("train")
        a, head_a, _ = train_reid(train, SPEC, small_cfg())
        b, head_b, _ = train_reid(train, SPEC, small_cfg())
        assert weights_bytes(a) == weights_bytes(b)
        assert head_a.weight.tobytes() == head_b.weight.tobytes()

    def test_rejects_compat_loss(self):
        with pytest.raises(ValueError):
            train_reid(dataset().view("train"), SPEC, small_cfg(compat_loss="l2"))

    def test_trace_losses_consistent(self):
        _, _, trace = train_reid(dataset().view("train"), SPEC, small_cfg())
        assert len(trace.epochs) == 2
        for report in trace.steps:
            assert report.l_m == 0.0
            assert abs(report.l_total - (report.l_m + report.l_tri + report.l_id)) <= 1e-12
        assert all(math.isfinite(e.l_total) for e in trace.epochs)

    def test_well_separated_self_test(self):
        data = dataset(num_classes=12, spread=0.05, seed=7)
        spec = EncoderSpec(6, (32,), 16, seed=2)
        encoder, _, _ = train_reid(data.view("train"), spec, TrainConfig(epochs=30, p=3, k_inst=4, seed=1))
        query, gallery = data.view("query"), data.view("gallery")
        report = evaluate_retrieval(
            query.feature_set(encode(encoder, query.inputs), "new"),
            gallery.feature_set(encode(encoder, gallery.inputs), "new"),
        )
        assert report.map >= 0.95


class TestTrainBCT:
    def _setup(self):
        train = dataset().view("train")
        old = init_encoder(OLD_SPEC)
        old_head = init_classifier(OLD_SPEC.embed_dim, [0, 1], seed=0)
        return train, old, old_head

    def test_none_reduces_to_reid(self):
        train, old, old_head = self._setup()
        cfg = small_cfg(init_from_old=False)
        bct, bct_trace = train_bct(train, old, old_head, SPEC, cfg)
        reid, _, reid_trace = train_reid(train, SPEC, cfg)
        assert weights_bytes(bct) == weights_bytes(reid)
        assert [e.l_total for e in bct_trace.epochs] == [e.l_total for e in reid_trace.epochs]

    def test_old_encoder_untouched(self):
        train, old, old_head = self._setup()
        before = weights_bytes(old)
        train_bct(train, old, old_head, OLD_SPEC, small_cfg(compat_loss="rbcl"))
        assert weights_bytes(old) == before

    def test_init_from_old_copies_weights(self):
        train, old, old_head = self._setup()
        new, _ = train_bct(train, old, old_head, OLD_SPEC, small_cfg(epochs=0))
        assert weights_bytes(new) == weights_bytes(old)

    def test_spec_mismatch_falls_back_to_fresh_init(self):
        train, old, old_head = self._setup()
        wide = EncoderSpec(6, (24,), 8, seed=4)
        new, trace = train_bct(train, old, old_head, wide, small_cfg(epochs=0, compat_loss="rbcl"))
        assert weights_bytes(new) == weights_bytes(init_encoder(wide))
        assert any(note.startswith("SpecMismatch") for note in trace.notes)

    def test_deterministic(self):
        train, old, old_head = self._setup()
        cfg = small_cfg(compat_loss="rbcl", dgr_start_epoch=2)
        a, trace_a = train_bct(train, old, old_head, OLD_SPEC, cfg)
        b, trace_b = train_bct(train, old, old_head, OLD_SPEC, cfg)
        assert weights_bytes(a) == weights_bytes(b)
        assert [e.l_m for e in trace_a.epochs] == [e.l_m for e in trace_b.epochs]

    def test_dgr_schedule(self):
        train, old, old_head = self._setup()
        _, trace = train_bct(train, old, old_head, OLD_SPEC, small_cfg(epochs=3, compat_loss="rbcl", dgr_start_epoch=2))
        assert trace.dgr_active == [False, True, True]
        _, trace = train_bct(train, old, old_head, OLD_SPEC, small_cfg(epochs=3, compat_loss="rbcl", dgr_start_epoch=4))
        assert trace.dgr_active == [False, False, False]

    @pytest.mark.parametrize("loss", ["rbcl", "l2", "mmd", "influence", "triplet_align"])
    def test_compat_losses_run(self, loss):
        train, old, _ = self._setup()
        old_head = init_classifier(OLD_SPEC.embed_dim, [0, 1, 2], seed=0)
        _, trace = train_bct(train, old, old_head, OLD_SPEC, small_cfg(compat_loss=loss, epochs=1))
        assert len(trace.epochs) == 1
        assert all(math.isfinite(r.l_total) for r in trace.steps)
        for report in trace.steps:
            assert abs(report.l_total - (report.l_m + report.l_tri + report.l_id)) <= 1e-12

    def test_ranking_baseline_without_agents(self):
        train, old, old_head = self._setup()
        cfg = small_cfg(compat_loss="rbcl", use_nca=False, dgr=DGRParams(enabled=False), epochs=1)
        _, trace = train_bct(train, old, old_head, OLD_SPEC, cfg)
        assert trace.dgr_active == [False]
        assert all(r.l_m >= 0.0 for r in trace.steps)

    def test_zero_learning_rate_step(self):
        train, old, old_head = self._setup()
        cfg = small_cfg(compat_loss="rbcl", learning_rate=0.0)
        encoder = old.copy()
        old_features = train.feature_set(encode(old, train.inputs), "old")
        index = build_neighbor_index(old_features, cfg.nca_k)
        head = init_classifier(OLD_SPEC.embed_dim, train.class_ids.tolist(), seed=0)
        trainer = BCTTrainer(train, encoder, head, cfg, old_features, index, old_head)
        before = weights_bytes(encoder)
        report = trainer.step(1)
        assert weights_bytes(encoder) == before
        assert report.l_tri >= 0.0 and report.l_id > 0.0 and report.l_m >= 0.0
        assert report.grad_query.shape == (cfg.p * cfg.k_inst, OLD_SPEC.embed_dim)

    def test_histograms_exported(self, tmp_path):
        train, old, old_head = self._setup()
        cfg = small_cfg(epochs=2, compat_loss="rbcl", dgr_start_epoch=2, hist_epochs=(1, 2), hist_bins=10)
        _, trace = train_bct(train, old, old_head, OLD_SPEC, cfg)
        assert set(trace.histograms) == {1, 2}
        assert set(trace.shifted_histograms) == {2}
        names = {p.name for p in write_trace_files(trace, tmp_path, "rbcl")}
        assert names == {
            "trace_rbcl.csv",
            "grad_rbcl.csv",
            "hist_rbcl_1.csv",
            "hist_rbcl_2.csv",
            "hist_rbcl_2_dgr.csv",
        }
        with open(tmp_path / "trace_rbcl.csv", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["epoch", "l_m", "l_tri", "l_id", "l_total", "dgr_active"]
        assert [r[5] for r in rows[1:]] == ["0", "1"]
        with open(tmp_path / "hist_rbcl_1.csv", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["bin_lo", "bin_hi", "count"]
        assert len(rows) == 11


def near_converged_data() -> Dataset:
    """两个类别在单位圆上，类内夹角极小，类间余弦约 0.7"""
    offsets = np.array([-0.01, -0.003, 0.004, 0.01])
    theta = math.acos(0.7)
    angles = np.concatenate([offsets, theta + offsets])
    inputs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return Dataset(inputs, np.repeat([0, 1], 4), np.arange(8), "A", np.array(["train"] * 8, dtype=object))


class TestLossInflation:
    def test_dgr_enlarges_loss_on_converged_batch(self):
        data = near_converged_data()
        spec = EncoderSpec(2, (), 2)
        identity = Encoder(spec, [(np.eye(2), np.zeros(2))])
        old_features = data.feature_set(encode(identity, data.inputs), "old")
        index = build_neighbor_index(old_features, 0)
        cfg = TrainConfig(epochs=3, p=2, k_inst=2, nca_k=0, compat_loss="rbcl", dgr_start_epoch=2, seed=0)
        batch = np.array([0, 1, 4, 5])

        reports = []
        for epoch in (1, 2):
            head = init_classifier(2, [0, 1], seed=0)
            trainer = BCTTrainer(data, identity.copy(), head, cfg, old_features, index)
            report, _ = trainer.compute_step(batch, epoch)
            reports.append(report)

        before, after = reports
        assert not before.dgr_active and after.dgr_active
        assert np.all(before.terms.values < -0.25)
        assert after.l_m > before.l_m
