# 校验工具模块
from src.oracles.brute_force import brute_force_map
from src.oracles.finite_diff import finite_diff_grad
