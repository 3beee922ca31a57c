"""
Simulation dataset builders, one per generator preset.
"""

from models.schemas import GenConfig, GenPreset
from survival.dataset import SurvivalDataset

from .crop_features import build_crop_features
from .nodule_cifar import build_nodule_cifar, gen_nodule_cifar
from .sim_ab import build_sim_ab, gen_sim_ab

BUILDERS = {
    GenPreset.SIM_A: build_sim_ab,
    GenPreset.SIM_B: build_sim_ab,
    GenPreset.NODULE_CIFAR: build_nodule_cifar,
    GenPreset.CROP_FEATURES: build_crop_features,
}


def build_datasets(cfg: GenConfig) -> dict[str, SurvivalDataset]:
    """Generate every split of the preset named in ``cfg``."""
    return BUILDERS[cfg.preset](cfg)
