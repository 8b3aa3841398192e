#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
数据模块测试
"""

import csv

import numpy as np
import pytest
from numpy.testing import assert_array_equal
from scipy.spatial.distance import pdist

from src.data import (
    Dataset,
    DomainShift,
    SyntheticSpec,
    batches_per_epoch,
    domain_rotation,
    generate_dataset,
    pk_batches,
    plan_setting,
    save_dataset,
)
from src.data.planner import is_wider, old_class_count
from src.model import EncoderSpec
from src.utils.errors import SettingError, TooFewClasses, UnsupportedSetting


def spec_a(**kwargs) -> SyntheticSpec:
    fields = dict(
        num_classes=30,
        instances_per_class=8,
        input_dim=6,
        cluster_spread=0.2,
        center_scale=1.0,
        seed=3,
        test_fraction=1.0 / 3.0,
    )
    fields.update(kwargs)
    return SyntheticSpec(**fields)


def spec_b(**kwargs) -> SyntheticSpec:
    return spec_a(domain="B", seed=4, shift=DomainShift(9, 0.5, 1.2), **kwargs)


class TestSyntheticSpec:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"num_classes": 1},
            {"instances_per_class": 3},
            {"cluster_spread": 1.0, "center_scale": 1.0},
            {"test_fraction": 1.0},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            spec_a(**kwargs)


class TestGenerateDataset:
    def test_counts(self):
        ds = generate_dataset(spec_a(num_classes=4, instances_per_class=10, test_fraction=0.5))
        assert len(ds) == 40
        assert len(ds.view("query", "gallery").class_ids) == 2

    def test_deterministic(self):
        a = generate_dataset(spec_b())
        b = generate_dataset(spec_b())
        assert a.inputs.tobytes() == b.inputs.tobytes()
        assert_array_equal(a.splits, b.splits)

    def test_open_set_protocol(self):
        ds = generate_dataset(spec_a())
        train = set(ds.view("train").class_ids.tolist())
        query = set(ds.view("query").class_ids.tolist())
        gallery = set(ds.view("gallery").class_ids.tolist())
        assert not train & (query | gallery)
        assert query <= gallery
        assert len(query) == 10

    def test_rotation_preserves_distances(self):
        centers = np.random.default_rng(0).normal(size=(10, 6))
        rotation = domain_rotation(9, 6)
        assert np.max(np.abs(pdist(centers) - pdist(centers @ rotation.T))) <= 1e-9

    def test_shift_changes_domain(self):
        a = generate_dataset(spec_a())
        shifted = generate_dataset(spec_a(shift=DomainShift(9, 0.5, 1.0)))
        assert not np.allclose(a.inputs, shifted.inputs)

    def test_rejects_overlapping_labels(self):
        with pytest.raises(SettingError):
            Dataset(np.zeros((2, 1)), [0, 0], [0, 1], "A", np.array(["train", "query"], dtype=object))

    def test_query_only_view(self):
        ds = generate_dataset(spec_a())
        query = ds.view("query")
        assert set(query.splits.tolist()) == {"query"}
        assert set(query.class_ids.tolist()) <= set(ds.view("gallery").class_ids.tolist())

    def test_rejects_query_identity_missing_from_gallery(self):
        splits = np.array(["query", "gallery", "query"], dtype=object)
        with pytest.raises(SettingError):
            Dataset(np.zeros((3, 1)), [0, 0, 1], [0, 1, 2], "A", splits)

    def test_save_dataset(self, tmp_path):
        ds = generate_dataset(spec_a(num_classes=4, instances_per_class=4))
        path = save_dataset(ds, tmp_path / "dataset_A.csv")
        with open(path, encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0][:3] == ["instance_id", "label", "split"]
        assert len(rows) == 17
        assert path.with_name("dataset_A.csv.meta").read_text(encoding="utf-8").strip() == "source=input:A"


class TestPlanSetting:
    def test_old_class_count(self):
        assert old_class_count(20) == 2
        assert old_class_count(25) == 3
        assert old_class_count(5) == 2

    def test_id_s_1(self):
        plan = plan_setting("ID-S-1", spec_a())
        new_classes = set(plan.new_train.class_ids.tolist())
        old_classes = set(plan.old_train.class_ids.tolist())
        assert len(new_classes) == 20
        assert len(old_classes) == 2
        assert old_classes < new_classes
        assert plan.old_spec.hidden_dims == plan.new_spec.hidden_dims
        assert set(plan.test.splits.tolist()) == {"query", "gallery"}

    def test_id_s_2_is_wider(self):
        plan = plan_setting("ID-S-2", spec_a())
        assert is_wider(plan.new_spec, plan.old_spec)

    def test_id_s_2_rejects_narrow_new_encoder(self):
        old = EncoderSpec(6, (32,))
        with pytest.raises(SettingError):
            plan_setting("ID-S-2", spec_a(), encoder_old=old, encoder_new=EncoderSpec(6, (16,)))

    def test_cd_s_1(self):
        plan = plan_setting("CD-S-1", spec_a(), spec_b())
        assert plan.old_train.domain != plan.new_train.domain
        assert plan.test.domain == plan.new_train.domain == "B"

    def test_cd_requires_domain_b(self):
        with pytest.raises(SettingError):
            plan_setting("CD-S-1", spec_a())

    def test_unsupported(self):
        with pytest.raises(UnsupportedSetting):
            plan_setting("CD-US", spec_a(), spec_b())


def tiny_train() -> Dataset:
    # 类别 0 只有一个样本
    labels = np.array([0, 1, 1, 1, 2, 2, 2, 2])
    return Dataset(
        np.arange(8, dtype=np.float64)[:, None],
        labels,
        np.arange(100, 108),
        "A",
        np.array(["train"] * 8, dtype=object),
    )


class TestPKBatches:
    def test_batch_shape(self):
        train = generate_dataset(spec_a()).view("train")
        stream = pk_batches(train, 2, 2, np.random.default_rng(0))
        for _ in range(10):
            batch = next(stream)
            rows = train.rows_of(batch)
            labels = train.labels[rows]
            assert batch.size == 4
            assert sorted(np.unique(labels, return_counts=True)[1].tolist()) == [2, 2]

    def test_replacement_for_small_class(self):
        train = tiny_train()
        stream = pk_batches(train, 3, 2, np.random.default_rng(1))
        batch = next(stream)
        assert np.count_nonzero(batch == 100) == 2

    def test_epoch_covers_all_classes(self):
        train = generate_dataset(spec_a()).view("train")
        rng = np.random.default_rng(2)
        stream = pk_batches(train, 3, 2, rng)
        covered = set()
        for _ in range(batches_per_epoch(train, 3)):
            covered.update(train.labels[train.rows_of(next(stream))].tolist())
        assert covered == set(train.class_ids.tolist())

    def test_deterministic(self):
        train = tiny_train()
        a = pk_batches(train, 2, 2, np.random.default_rng(5))
        b = pk_batches(train, 2, 2, np.random.default_rng(5))
        for _ in range(5):
            assert_array_equal(next(a), next(b))

    def test_too_few_classes(self):
        with pytest.raises(TooFewClasses):
            next(pk_batches(tiny_train(), 4, 2, np.random.default_rng(0)))
