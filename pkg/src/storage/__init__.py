# Persistence for datasets, run artifacts and checkpoints
from .checkpoint import load_checkpoint, save_checkpoint
from .dataset_store import DatasetStore
from .run_store import RunStore
