# Batching, epoch loops, experiment runs and reproduction recipes
from .batching import check_partition, make_batches
from .experiment import RunResult, run_experiment
from .trainer import EpochResult, evaluate, train_epoch
