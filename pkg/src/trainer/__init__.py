# 训练模块
from src.trainer.config import COMPAT_LOSSES, EpochSummary, TrainConfig, TrainTrace
from src.trainer.optimizer import MomentumSGD
from src.trainer.loop import BCTTrainer, ReIDTrainer, train_bct, train_reid
from src.trainer.export import write_trace_csv, write_trace_files
