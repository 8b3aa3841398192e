# 数据模块
from src.data.synthetic import (
    Dataset,
    DomainShift,
    SyntheticSpec,
    domain_rotation,
    generate_dataset,
    save_dataset,
)
from src.data.planner import SUPPORTED_SETTINGS, SettingPlan, plan_setting
from src.data.sampler import batches_per_epoch, pk_batches
