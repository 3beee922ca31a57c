# Survival core: losses, risk sets, baseline hazards
from .baseline import BaselineHazard, StepFunction, breslow_cumhaz, predict_survival
from .dataset import SurvivalDataset
from .losses import (
    LossValue,
    bce_loss,
    bce_loss_grad,
    cancer_probability,
    cox_full_loss,
    cox_loss_grad,
    cox_minibatch_loss,
    full_nll,
    loss_and_grad,
    oracle_loss,
    oracle_loss_grad,
    risk_set,
    two_task_loss,
)
