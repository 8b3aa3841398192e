#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
实验运行模块
负责按配置生成数据、训练旧模型与各方法的新模型、评估并写出结果文件
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from src.config.settings import save_settings, workers_from_env
from src.data.planner import SettingPlan, plan_setting
from src.data.synthetic import DomainShift, SyntheticSpec, generate_dataset, save_dataset
from src.eval.results import ResultRow, write_results
from src.eval.retrieval import cross_model_matrix
from src.featurespace.feature_set import save_feature_set
from src.losses.ranking import DGRParams, SigmoidParams
from src.model.classifier import ClassifierHead
from src.model.encoder import Encoder, EncoderSpec, encode
from src.model.serialization import save_model
from src.trainer.config import TrainConfig, TrainTrace
from src.trainer.export import write_trace_csv, write_trace_files
from src.trainer.loop import train_bct, train_reid
from src.utils.errors import ConfigError, SettingError, UnsupportedSetting
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

OLD_TAG = "old"
BASELINE_METHOD = "none"

# 方法标签 -> 训练配置覆盖项
METHOD_OVERRIDES: Dict[str, Dict[str, Any]] = {
    "none": {"compat_loss": "none"},
    "rbcl": {"compat_loss": "rbcl"},
    "rbcl-nodgr": {"compat_loss": "rbcl", "dgr_enabled": False},
    "rbcl-nonca": {"compat_loss": "rbcl", "use_nca": False},
    "rank-base": {"compat_loss": "rbcl", "dgr_enabled": False, "use_nca": False},
    "l2": {"compat_loss": "l2"},
    "mmd": {"compat_loss": "mmd"},
    "influence": {"compat_loss": "influence"},
    "triplet_align": {"compat_loss": "triplet_align"},
}

# 跨域设置未给出域B时使用的默认偏移
DEFAULT_DOMAIN_B_SHIFT = {"rotation_seed": 100, "translation_scale": 0.5, "spread_multiplier": 1.0}


def domain_spec(fields: Dict[str, Any]) -> SyntheticSpec:
    """配置字典 -> SyntheticSpec"""
    fields = dict(fields)
    shift = fields.pop("shift", None)
    return SyntheticSpec(**fields, shift=DomainShift(**shift) if shift else None)


def resolve_domain_b(config: Dict[str, Any]) -> Dict[str, Any]:
    """域B未给出的字段沿用域A，默认使用不同的域标签、种子与偏移"""
    domain_a = config["domainA"]
    resolved = dict(domain_a)
    resolved.update(
        domain="B" if domain_a.get("domain", "A") != "B" else "A2",
        seed=domain_a.get("seed", 0) + 1,
        shift=dict(DEFAULT_DOMAIN_B_SHIFT),
    )
    resolved.update(config.get("domainB") or {})
    return resolved


def encoder_specs(config: Dict[str, Any], input_dim: int) -> Tuple[EncoderSpec, Optional[EncoderSpec]]:
    """旧/新编码器规格；新规格缺省字段沿用旧规格"""
    old_fields = dict(config["encoder_old"])
    old = EncoderSpec(input_dim, **old_fields)
    new_fields = config.get("encoder_new")
    if new_fields is None:
        return old, None
    merged = dict(old_fields, seed=old.seed + 1)
    merged.update(new_fields)
    return old, EncoderSpec(input_dim, **merged)


def train_config(train: Dict[str, Any], method: str = BASELINE_METHOD, epochs: Optional[int] = None) -> TrainConfig:
    """
    配置字典中的 train 段 -> TrainConfig

    参数:
        train: train 配置段
        method: 方法标签
        epochs: 覆盖训练轮数（旧模型使用 old_epochs）
    """
    overrides = dict(METHOD_OVERRIDES[method])
    dgr_enabled = overrides.pop("dgr_enabled", True)
    return TrainConfig(
        epochs=train["epochs"] if epochs is None else epochs,
        batches_per_epoch=train["batches_per_epoch"],
        p=train["P"],
        k_inst=train["K_inst"],
        learning_rate=train["learning_rate"],
        momentum=train["momentum"],
        tau=SigmoidParams(train["tau"]),
        dgr=DGRParams(alpha=train["alpha"], enabled=dgr_enabled, scope=train["dgr_scope"]),
        dgr_start_epoch=train["dgr_start_epoch"],
        nca_k=train["nca_K"],
        seed=train["seed"],
        init_from_old=train["init_from_old"],
        margin=train["margin"],
        label_smoothing=train["label_smoothing"],
        mmd_bandwidth=train["mmd_bandwidth"],
        hist_epochs=tuple(train["hist_epochs"]),
        hist_bins=train["hist_bins"],
        **overrides,
    )


@dataclass
class MethodOutcome:
    """单个方法的训练结果"""

    method: str
    encoder: Encoder
    trace: TrainTrace


@dataclass
class ExperimentOutcome:
    """一次实验的全部产物"""

    rows: List[ResultRow]
    files: List[Path] = field(default_factory=list)


class ExperimentRunner:
    """实验运行器"""

    def __init__(self, config: Dict[str, Any], workers: Optional[int] = None):
        """
        初始化实验运行器

        参数:
            config: 已校验的配置字典
            workers: 并行训练线程数，默认读取 RBCL_WORKERS
        """
        self.config = config
        self.workers = workers or workers_from_env()
        self.out_dir = Path(config["output_dir"])

    @property
    def methods(self) -> List[str]:
        """待训练的方法，none 始终在第一位（提供 LB/UB）"""
        listed = [m for m in self.config["methods"] if m != BASELINE_METHOD]
        return [BASELINE_METHOD] + listed

    def domain_specs(self) -> Tuple[SyntheticSpec, Optional[SyntheticSpec]]:
        try:
            spec_a = domain_spec(self.config["domainA"])
            spec_b = None
            if self.config["setting"].startswith("CD"):
                spec_b = domain_spec(resolve_domain_b(self.config))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"数据规格无效: {e}") from e
        return spec_a, spec_b

    def plan(self) -> SettingPlan:
        spec_a, spec_b = self.domain_specs()
        try:
            old_spec, new_spec = encoder_specs(self.config, spec_a.input_dim)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"编码器规格无效: {e}") from e
        try:
            return plan_setting(self.config["setting"], spec_a, spec_b, old_spec, new_spec)
        except (SettingError, UnsupportedSetting) as e:
            raise ConfigError(f"实验设置无效: {e}") from e

    def gen_data(self) -> List[Path]:
        """为每个配置的域写出 dataset_<domain>.csv"""
        written = []
        for spec in self.domain_specs():
            if spec is None:
                continue
            dataset = generate_dataset(spec)
            written.append(save_dataset(dataset, self.out_dir / f"dataset_{spec.domain}.csv"))
            logger.info(f"已写出 {written[-1]}")
        return written

    def _train_method(
        self, method: str, plan: SettingPlan, old: Encoder, old_head: ClassifierHead
    ) -> MethodOutcome:
        cfg = train_config(self.config["train"], method)
        logger.info(f"训练方法 {method}")
        encoder, trace = train_bct(plan.new_train, old, old_head, plan.new_spec, cfg)
        return MethodOutcome(method, encoder, trace)

    def _train_methods(self, plan: SettingPlan, old: Encoder, old_head: ClassifierHead) -> List[MethodOutcome]:
        if self.workers <= 1:
            return [self._train_method(m, plan, old, old_head) for m in self.methods]
        # 各方法只共享只读输入，结果按方法顺序合并
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            futures = [pool.submit(self._train_method, m, plan, old, old_head) for m in self.methods]
            return [f.result() for f in futures]

    def run(self) -> ExperimentOutcome:
        """
        执行完整实验

        返回:
            ExperimentOutcome（结果行与写出的文件）
        """
        plan = self.plan()
        train = self.config["train"]
        files = [save_settings(self.config, self.out_dir)]

        old_cfg = train_config(train, BASELINE_METHOD, epochs=train["old_epochs"])
        old, old_head, old_trace = train_reid(plan.old_train, plan.old_spec, old_cfg)
        files.append(write_trace_csv(old_trace, self.out_dir / f"trace_{OLD_TAG}.csv"))
        files.append(save_model(self.out_dir / f"model_{OLD_TAG}.bin", old, old_head))
        files.append(self._write_features(old, OLD_TAG, plan))

        rows: List[ResultRow] = []
        for outcome in self._train_methods(plan, old, old_head):
            matrix = cross_model_matrix(old, outcome.encoder, plan.test, OLD_TAG, outcome.method)
            if not rows:
                rows.append(ResultRow.from_report(plan.name, matrix["direct"]))
            rows.append(ResultRow.from_report(plan.name, matrix["cross"]))
            rows.append(ResultRow.from_report(plan.name, matrix["ub"]))
            files.extend(write_trace_files(outcome.trace, self.out_dir, outcome.method))
            files.append(save_model(self.out_dir / f"model_{outcome.method}.bin", outcome.encoder))
            files.append(self._write_features(outcome.encoder, outcome.method, plan))
            for note in outcome.trace.notes:
                logger.warning(f"{outcome.method}: {note}")

        files.append(write_results(rows, self.out_dir / "results.csv"))
        logger.info(f"实验 {plan.name} 完成，结果写入 {self.out_dir}")
        return ExperimentOutcome(rows, files)

    def _write_features(self, encoder: Encoder, tag: str, plan: SettingPlan) -> Path:
        features = plan.test.feature_set(encode(encoder, plan.test.inputs), tag)
        return save_feature_set(features, self.out_dir / f"features_{tag}.csv")


def with_overrides(config: Dict[str, Any], seed: Optional[int] = None, out: Optional[str] = None) -> Dict[str, Any]:
    """命令行覆盖：--seed 只覆盖 train.seed，--out 覆盖 output_dir"""
    config = dict(config)
    if seed is not None:
        config["train"] = dict(config["train"], seed=seed)
    if out is not None:
        config["output_dir"] = out
    return config
