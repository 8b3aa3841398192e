# 核心模块
from src.core.command_handler import CommandHandler, emit_report, run_experiment
from src.core.experiment import ExperimentRunner
