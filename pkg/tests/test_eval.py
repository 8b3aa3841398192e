#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
评估模块测试
"""

import numpy as np
import pytest

from src.data import SyntheticSpec, generate_dataset
from src.eval import (
    ResultRow,
    cross_model_matrix,
    evaluate_retrieval,
    exact_ap,
    read_results,
    write_results,
)
from src.model import EncoderSpec, init_encoder
from src.oracles import brute_force_map
from src.utils.errors import EmbedDimMismatch, FormatError, InstanceMismatch, MissingPositive, NoRelevant
from tests.helpers import make_fs, random_fs


def ranks_1_and_3():
    """一个查询，图库中的正样本排在第 1 和第 3 位"""
    query = make_fs([[1.0, 0.0]], [0], [100])
    gallery = make_fs(
        [[1.0, 0.0], [0.9, 0.1], [0.5, 0.5], [0.0, 1.0]],
        [0, 1, 0, 1],
    )
    return query, gallery


class TestExactAP:
    def test_perfect(self):
        assert exact_ap([True, True, False, False]) == 1.0

    def test_ranks_1_and_3(self):
        assert exact_ap([True, False, True, False]) == pytest.approx(0.8333333, abs=1e-7)

    def test_no_relevant(self):
        with pytest.raises(NoRelevant):
            exact_ap([False, False])


class TestEvaluateRetrieval:
    def test_perfect_separation(self):
        query = make_fs(np.eye(3), [0, 1, 2], [10, 11, 12])
        gallery = make_fs(np.eye(3), [0, 1, 2])
        report = evaluate_retrieval(query, gallery)
        assert report.map == 1.0
        assert report.rank1 == 1.0
        assert report.num_queries == 3

    def test_ranks_1_and_3(self):
        report = evaluate_retrieval(*ranks_1_and_3())
        assert report.map == pytest.approx(0.8333333, abs=1e-7)
        assert report.cmc == (1.0, 1.0, 1.0, 1.0)

    def test_missing_positive(self):
        query = make_fs([[1.0, 0.0]], [5], [100])
        gallery = make_fs([[1.0, 0.0], [0.0, 1.0]], [0, 1])
        with pytest.raises(MissingPositive):
            evaluate_retrieval(query, gallery)

    def test_overlapping_ids(self):
        fs = make_fs([[1.0, 0.0], [0.0, 1.0]], [0, 1])
        with pytest.raises(InstanceMismatch):
            evaluate_retrieval(fs, fs)

    def test_ties_broken_by_instance_id(self):
        query = make_fs([[1.0, 0.0]], [0], [100])
        gallery = make_fs([[1.0, 0.0], [1.0, 0.0]], [1, 0], [3, 7])
        assert evaluate_retrieval(query, gallery).map == 0.5
        gallery = make_fs([[1.0, 0.0], [1.0, 0.0]], [1, 0], [7, 3])
        assert evaluate_retrieval(query, gallery).map == 1.0

    def test_encoder_tags_from_source(self):
        query, gallery = ranks_1_and_3()
        report = evaluate_retrieval(query, gallery)
        assert (report.query_encoder, report.gallery_encoder) == ("test", "test")
        report = evaluate_retrieval(query, gallery, "new", "old")
        assert (report.query_encoder, report.gallery_encoder) == ("new", "old")

    def test_gallery_permutation_invariant(self):
        rng = np.random.default_rng(4)
        gallery = random_fs(rng, 5, 4, 6)
        query = random_fs(rng, 5, 2, 6, id_offset=1000)
        a = evaluate_retrieval(query, gallery)
        b = evaluate_retrieval(query, gallery.take(rng.permutation(len(gallery))))
        assert a == b

    def test_scale_invariant(self):
        rng = np.random.default_rng(5)
        gallery = random_fs(rng, 5, 4, 6)
        query = random_fs(rng, 5, 2, 6, id_offset=1000)
        scaled = make_fs(gallery.features * 3.7, gallery.labels, gallery.instance_ids)
        assert evaluate_retrieval(query, gallery) == evaluate_retrieval(query, scaled)

    def test_cmc_monotone(self):
        rng = np.random.default_rng(6)
        gallery = random_fs(rng, 6, 3, 4)
        query = random_fs(rng, 6, 3, 4, id_offset=500)
        report = evaluate_retrieval(query, gallery)
        assert all(a <= b for a, b in zip(report.cmc, report.cmc[1:]))
        assert report.cmc[0] == report.rank1
        assert report.cmc[-1] == 1.0
        assert report.cmc_at(100) == 1.0

    def test_agrees_with_brute_force(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            num_classes = int(rng.integers(2, 5))
            gallery = random_fs(rng, num_classes, int(rng.integers(1, 4)), 4)
            query = random_fs(rng, num_classes, int(rng.integers(1, 3)), 4, id_offset=1000)
            assert evaluate_retrieval(query, gallery).map == brute_force_map(query, gallery)


class TestCrossModelMatrix:
    def _test_view(self):
        spec = SyntheticSpec(num_classes=8, instances_per_class=6, input_dim=5, cluster_spread=0.2, center_scale=1.0)
        return generate_dataset(spec).view("query", "gallery")

    def test_same_weights_gives_identical_reports(self):
        old = init_encoder(EncoderSpec(5, (8,), 4, seed=3))
        matrix = cross_model_matrix(old, old.copy(), self._test_view())
        assert matrix["direct"].map == matrix["cross"].map == matrix["ub"].map
        assert matrix["direct"].cmc == matrix["cross"].cmc == matrix["ub"].cmc
        assert (matrix["cross"].query_encoder, matrix["cross"].gallery_encoder) == ("new", "old")

    def test_embed_dim_mismatch(self):
        old = init_encoder(EncoderSpec(5, (8,), 16, seed=1))
        new = init_encoder(EncoderSpec(5, (8,), 32, seed=2))
        with pytest.raises(EmbedDimMismatch):
            cross_model_matrix(old, new, self._test_view())


class TestResultsCsv:
    def test_write_then_read(self, tmp_path):
        rows = [
            ResultRow("ID-S-1", "old", "old", 0.5, 0.25, 0.25, 0.75, 1.0),
            ResultRow("ID-S-1", "rbcl", "old", 0.625, 0.5, 0.5, 1.0, 1.0),
        ]
        path = write_results(rows, tmp_path / "results.csv")
        assert path.read_text(encoding="utf-8").splitlines()[0] == (
            "setting,query_enc,gallery_enc,map,rank1,cmc1,cmc5,cmc10"
        )
        loaded = read_results(path)
        assert loaded == rows
        assert loaded[0].is_self_test and not loaded[1].is_self_test

    def test_bad_header(self, tmp_path):
        path = tmp_path / "results.csv"
        path.write_text("a,b,c\n", encoding="utf-8")
        with pytest.raises(FormatError):
            read_results(path)

    def test_bad_value(self, tmp_path):
        path = tmp_path / "results.csv"
        path.write_text(
            "setting,query_enc,gallery_enc,map,rank1,cmc1,cmc5,cmc10\nX,old,old,abc,0,0,0,0\n", encoding="utf-8"
        )
        with pytest.raises(FormatError):
            read_results(path)
