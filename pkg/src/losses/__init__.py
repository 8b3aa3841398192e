# 损失函数模块
from src.losses.ranking import (
    DGRParams,
    SigmoidParams,
    SmoothAPResult,
    TripletTerms,
    dgr_constant,
    reactivation_constants,
    sigmoid_tau,
    smooth_ap_loss,
)
from src.losses.reid import hard_triplet_loss, id_loss
from src.losses.compat import influence_loss, l2_compat_loss, mmd_loss
from src.losses.report import LossReport
