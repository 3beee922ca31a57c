"""
Pydantic schemas for records, generator/model/experiment configuration
and the serialized run outputs.

Every object that crosses a file or the command line is described here so
it can be validated on the way in and dumped verbatim on the way out.
"""

import math
from enum import Enum
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class CensorMode(str, Enum):
    """How censoring indicators are assigned after times are drawn."""
    NONE = "none"
    MEDIAN_HALF = "median-half"
    NODULE = "nodule"


class GenPreset(str, Enum):
    SIM_A = "sim-a"
    SIM_B = "sim-b"
    NODULE_CIFAR = "nodule-cifar"
    CROP_FEATURES = "crop-features"


class LossKind(str, Enum):
    ORACLE = "oracle"
    FULL_BATCHED = "full-batched"
    MINI_BATCHED = "mini-batched"
    TWO_TASK = "two-task"
    TWO_TASK_FULL = "two-task-full"

    @property
    def is_full_batch(self) -> bool:
        return self in (LossKind.FULL_BATCHED, LossKind.TWO_TASK_FULL)

    @property
    def is_two_task(self) -> bool:
        return self in (LossKind.TWO_TASK, LossKind.TWO_TASK_FULL)


class LayerKind(str, Enum):
    CONV2D = "conv2d"
    MAXPOOL2D = "maxpool2d"
    DENSE = "dense"
    FLATTEN = "flatten"
    RELU = "relu"
    SIGMOID_HEAD = "sigmoid-head"
    CROP_INTEGRATE = "crop-integrate"


class ModelPreset(str, Enum):
    TABLE1 = "table1"
    SIMC = "simc"
    INTEGRATE_HEAD = "integrate-head"
    CUSTOM = "custom"


class C2Group(str, Enum):
    """Which subgroup the second concordance index is computed on."""
    EVENTS = "events"
    DISEASE = "disease"


# ========================================
# Records
# ========================================

class SurvivalRecord(BaseModel):
    """One subject: observed time, event indicator, class label."""
    id: str
    time: float = Field(ge=0.0)
    event: int = Field(ge=0, le=1)
    label: int = Field(default=0, ge=0, le=1)
    size: Optional[float] = None

    @field_validator("time")
    @classmethod
    def _finite_time(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("time must be finite")
        return value


# ========================================
# Data generation
# ========================================

class NoduleParams(BaseModel):
    """Geometry of the simulated nodules. Size ranges are inclusive, in pixels."""
    n_dots: int = Field(default=20, ge=0)
    dot_size: tuple[int, int] = (1, 2)
    n_patches: int = Field(default=2, ge=1)
    event_patch_size: tuple[int, int] = (5, 8)
    censored_patch_size: tuple[int, int] = (3, 5)
    alpha: float = Field(default=0.25, gt=0.0)
    prevalence: float = Field(default=0.5, ge=0.0, le=1.0)
    cancer_censor_rate: float = Field(default=0.5, ge=0.0, le=1.0)

    @field_validator("dot_size", "event_patch_size", "censored_patch_size")
    @classmethod
    def _ordered_range(cls, value: tuple[int, int]) -> tuple[int, int]:
        low, high = value
        if low < 1 or high < low:
            raise ValueError(f"size range must satisfy 1 <= low <= high, got {value}")
        return value

    @property
    def ranges_overlap(self) -> bool:
        return self.censored_patch_size[1] >= self.event_patch_size[0]


# Log relative hazards of the two image classes. A gap of 3 puts the best
# reachable C-index of a two-class predictor near 0.73.
TWO_CLASS_PHI = {0: 0.0, 1: 3.0}


class GenConfig(BaseModel):
    """Everything a dataset generator needs; echoed next to generated data."""
    preset: GenPreset = GenPreset.SIM_A
    seed: int = 1
    phi_map: dict[int, float] = Field(default_factory=lambda: dict(TWO_CLASS_PHI))
    censor_mode: CensorMode = CensorMode.NONE
    counts: dict[str, int] = Field(default_factory=lambda: {"train": 2000, "test": 1000})
    digits: tuple[int, int] = (0, 1)
    nodule: NoduleParams = Field(default_factory=NoduleParams)
    source_dir: Optional[str] = None

    @field_validator("counts")
    @classmethod
    def _positive_counts(cls, value: dict[str, int]) -> dict[str, int]:
        for split, count in value.items():
            if count <= 0:
                raise ValueError(f"count for split '{split}' must be positive, got {count}")
        return value

    @field_validator("phi_map")
    @classmethod
    def _finite_phi(cls, value: dict[int, float]) -> dict[int, float]:
        for cls_id, phi in value.items():
            if not math.isfinite(phi):
                raise ValueError(f"phi for class {cls_id} must be finite")
        return value

    @classmethod
    def for_preset(cls, preset: GenPreset, seed: int = 1, scale: float = 1.0, **overrides) -> "GenConfig":
        """Build the default generator configuration of a simulation preset."""
        preset = GenPreset(preset)
        if preset == GenPreset.NODULE_CIFAR:
            base = {"censor_mode": CensorMode.NODULE, "counts": {"train": 10000, "test": 1000}}
        elif preset == GenPreset.SIM_B:
            base = {"censor_mode": CensorMode.MEDIAN_HALF, "counts": {"train": 2000, "test": 1000}}
        elif preset == GenPreset.CROP_FEATURES:
            base = {"censor_mode": CensorMode.NONE, "counts": {"train": 1000, "test": 500}}
        else:
            base = {"censor_mode": CensorMode.NONE, "counts": {"train": 2000, "test": 1000}}
        base["counts"] = {k: max(2, int(round(v * scale))) for k, v in base["counts"].items()}
        base.update(overrides)
        return cls(preset=preset, seed=seed, **base)

    def default_c2_group(self) -> C2Group:
        """C2 runs over the disease group on nodule data and over events otherwise."""
        return C2Group.DISEASE if self.censor_mode == CensorMode.NODULE else C2Group.EVENTS


class DatasetMeta(BaseModel):
    """Provenance stored beside a serialized dataset split."""
    split: str
    n: int = Field(ge=0)
    image_shape: tuple[int, ...]
    source: str = "synthetic"
    gen: Optional[GenConfig] = None
    pixel_dtype: str = "<f8"
    format_version: int = 1


# ========================================
# Models
# ========================================

class LayerSpec(BaseModel):
    """One layer of a declarative stack."""
    kind: LayerKind
    filters: Optional[int] = Field(default=None, gt=0)
    kernel: Optional[int] = Field(default=None, gt=0)
    stride: Optional[int] = Field(default=None, gt=0)
    padding: Union[int, str, None] = None
    units: Optional[int] = Field(default=None, gt=0)
    hidden: Optional[int] = Field(default=None, gt=0)

    @field_validator("padding")
    @classmethod
    def _padding(cls, value):
        if isinstance(value, str) and value not in ("same", "valid"):
            raise ValueError(f"padding must be 'same', 'valid' or an int, got {value!r}")
        if isinstance(value, int) and value < 0:
            raise ValueError("padding must be non-negative")
        return value

    @model_validator(mode="after")
    def _required_params(self) -> "LayerSpec":
        required = {
            LayerKind.CONV2D: ("filters", "kernel"),
            LayerKind.DENSE: ("units",),
            LayerKind.CROP_INTEGRATE: ("hidden",),
        }.get(self.kind, ())
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.kind.value} layer requires {', '.join(missing)}")
        return self


class ModelConfig(BaseModel):
    """Declarative layer stack; the final layer must emit one scalar per sample."""
    preset: ModelPreset = ModelPreset.CUSTOM
    input_shape: tuple[int, ...]
    layers: list[LayerSpec]
    init: str = "he-uniform"

    @field_validator("input_shape")
    @classmethod
    def _positive_dims(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value or any(d <= 0 for d in value):
            raise ValueError(f"input dims must be positive, got {value}")
        return value

    @field_validator("layers")
    @classmethod
    def _non_empty(cls, value: list[LayerSpec]) -> list[LayerSpec]:
        if not value:
            raise ValueError("a model needs at least one layer")
        return value


# ========================================
# Experiments
# ========================================

class ExperimentConfig(BaseModel):
    """One training run: data, model, loss, schedule and output location."""
    model_config = ConfigDict(protected_namespaces=())

    name: str = "run"
    gen: GenConfig = Field(default_factory=GenConfig)
    data_dir: Optional[str] = None
    model_preset: ModelPreset = ModelPreset.TABLE1
    model: Optional[ModelConfig] = None
    loss: LossKind = LossKind.MINI_BATCHED
    batch_size: int = Field(default=64, ge=1)
    epochs: int = Field(default=50, ge=1)
    lr: float = Field(default=0.01, gt=0.0)
    lr_decay: float = Field(default=0.1, gt=0.0, le=1.0)
    lr_decay_at: float = Field(default=0.75, gt=0.0, le=1.0)
    seed: int = 1
    eval_every: int = Field(default=1, ge=1)
    output_dir: str = "runs/run"
    two_task_weight: float = Field(default=1.0, ge=0.0)
    c2_group: Optional[C2Group] = None
    chunk_size: int = Field(default=256, ge=1)
    record_timing: bool = True

    @model_validator(mode="after")
    def _batch_size_for_batched_losses(self) -> "ExperimentConfig":
        if not self.loss.is_full_batch and self.loss != LossKind.ORACLE and self.batch_size < 2:
            raise ValueError(f"{self.loss.value} runs need batch_size >= 2, got {self.batch_size}")
        if self.model_preset == ModelPreset.CUSTOM and self.model is None:
            raise ValueError("model_preset 'custom' needs an explicit model config")
        return self


class EpochMetrics(BaseModel):
    """Per-epoch record; absent metrics stay None and serialize as null / empty."""
    epoch: int = Field(ge=0)
    train_loss: float
    test_loss: float
    auc: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    c1: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    c2: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    seconds: Optional[float] = Field(default=None, ge=0.0)
    skipped_batches: int = Field(default=0, ge=0)

    @field_validator("train_loss", "test_loss")
    @classmethod
    def _finite_loss(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("serialized losses must be finite")
        return value


class MetricReport(BaseModel):
    """Evaluation measures with their comparable-pair counts."""
    auc: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    c1: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    c2: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    n_pairs_c1: int = Field(default=0, ge=0)
    n_pairs_c2: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _absent_iff_no_pairs(self) -> "MetricReport":
        for metric, pairs in (("c1", self.n_pairs_c1), ("c2", self.n_pairs_c2)):
            if (getattr(self, metric) is None) != (pairs == 0):
                raise ValueError(f"{metric} must be absent exactly when it has no comparable pairs")
        return self


class RunManifest(BaseModel):
    """Everything needed to re-run an experiment exactly."""
    model_config = ConfigDict(protected_namespaces=())

    config: ExperimentConfig
    model: ModelConfig
    data_source: str
    decisions: dict[str, str]
    true_loss: Optional[float] = None
    numpy_version: str
    created_at: str
