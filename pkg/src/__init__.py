# 后向兼容表示学习实验包
