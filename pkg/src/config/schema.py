#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
实验配置的 JSON Schema
所有层级都拒绝未知键
"""

METHOD_TAGS = [
    "none",
    "rbcl",
    "rbcl-nodgr",
    "rbcl-nonca",
    "rank-base",
    "l2",
    "mmd",
    "influence",
    "triplet_align",
]

_COUNT = {"type": "integer", "minimum": 1}
_SEED = {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

_SHIFT = {
    "type": "object",
    "additionalProperties": False,
    "required": ["rotation_seed"],
    "properties": {
        "rotation_seed": _SEED,
        "translation_scale": {"type": "number", "minimum": 0},
        "spread_multiplier": _POSITIVE,
    },
}

_DOMAIN = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "num_classes": {"type": "integer", "minimum": 2},
        "instances_per_class": {"type": "integer", "minimum": 4},
        "input_dim": _COUNT,
        "cluster_spread": _POSITIVE,
        "center_scale": _POSITIVE,
        "domain": {"type": "string", "minLength": 1},
        "shift": {"oneOf": [{"type": "null"}, _SHIFT]},
        "seed": _SEED,
        "test_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
    },
}

_ENCODER = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "hidden_dims": {"type": "array", "items": _COUNT, "maxItems": 4},
        "embed_dim": _COUNT,
        "activation": {"enum": ["relu", "tanh"]},
        "seed": _SEED,
    },
}

_TRAIN = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "epochs": {"type": "integer", "minimum": 0},
        "old_epochs": {"type": "integer", "minimum": 0},
        "batches_per_epoch": {"oneOf": [{"type": "null"}, _COUNT]},
        "P": _COUNT,
        "K_inst": {"type": "integer", "minimum": 2},
        "learning_rate": {"type": "number", "minimum": 0},
        "momentum": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "tau": _POSITIVE,
        "alpha": _POSITIVE,
        "dgr_scope": {"enum": ["negatives_only", "all_terms"]},
        "dgr_start_epoch": {"oneOf": [{"type": "null"}, {"type": "integer", "minimum": 0}]},
        "nca_K": {"type": "integer", "minimum": 0},
        "seed": _SEED,
        "init_from_old": {"type": "boolean"},
        "margin": {"type": "number", "minimum": 0},
        "label_smoothing": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "mmd_bandwidth": {"oneOf": [{"const": "auto"}, _POSITIVE]},
        "hist_epochs": {"type": "array", "items": _COUNT},
        "hist_bins": _COUNT,
    },
}

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "required": ["setting", "domainA", "train", "methods", "output_dir"],
    "properties": {
        "setting": {"enum": ["ID-S-1", "ID-S-2", "CD-S-1", "CD-S-2"]},
        "domainA": _DOMAIN,
        "domainB": {"oneOf": [{"type": "null"}, _DOMAIN]},
        "encoder_old": _ENCODER,
        "encoder_new": {"oneOf": [{"type": "null"}, _ENCODER]},
        "train": _TRAIN,
        "methods": {
            "type": "array",
            "items": {"enum": METHOD_TAGS},
            "minItems": 1,
            "uniqueItems": True,
        },
        "output_dir": {"type": "string", "minLength": 1},
    },
}
