"""
Invocation middleware: turns a config file plus command-line flags into
validated configuration objects before any handler runs.

Config file format, one setting per line:

    # comment
    loss = mini-batched
    epochs = 30
    gen.preset = sim-b
    gen.phi_map = 0:0.0, 1:3.0
    gen.nodule.event_patch_size = 5, 8

Keys are ExperimentConfig field names; nested GenConfig and NoduleParams
fields are dotted. ``a:b`` pairs separated by commas become mappings and
plain comma-separated values become lists. Explicit flags override file
values, and unknown keys are rejected.
"""

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, ValidationError

from errors import ConfigError, StorageError
from models.schemas import ExperimentConfig, GenConfig, NoduleParams

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_ROOT = "runs"

# Nested sections reachable through dotted keys.
SECTIONS: dict[type[BaseModel], dict[str, type[BaseModel]]] = {
    ExperimentConfig: {"gen": GenConfig},
    GenConfig: {"nodule": NoduleParams},
    NoduleParams: {},
}


@dataclass
class Invocation:
    """One CLI call: subcommand, explicitly given flags and optional config file."""
    command: str
    flags: dict[str, Any] = field(default_factory=dict)
    config_path: Optional[str] = None

    def settings(self) -> dict[str, Any]:
        """File values overridden by explicit (non-None) flags, still flat and dotted."""
        merged: dict[str, Any] = parse_config_file(self.config_path) if self.config_path else {}
        merged.update({key: value for key, value in self.flags.items() if value is not None})
        return merged


def data_dir_default() -> Optional[str]:
    return os.environ.get("SURVIVAL_DATA_DIR") or None


def output_root() -> Path:
    return Path(os.environ.get("SURVIVAL_OUTPUT_DIR", DEFAULT_OUTPUT_ROOT))


# ========================================
# Config file parsing
# ========================================

def _parse_value(raw: str) -> Any:
    parts = [part.strip() for part in raw.split(",")]
    if all(":" in part for part in parts) and parts != [""]:
        return dict(part.split(":", 1) for part in parts)
    if len(parts) > 1:
        return parts
    return raw


def parse_config_file(path: str) -> dict[str, Any]:
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise StorageError(f"config file not found: {path}")
    except OSError as e:
        raise StorageError(f"cannot read config file {path}: {e}") from e

    values: dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{number}: missing key")
        if key in values:
            raise ConfigError(f"{path}:{number}: duplicate key '{key}'")
        values[key] = _parse_value(raw)
    logger.debug(f"Read {len(values)} setting(s) from {path}")
    return values


# ========================================
# Validation
# ========================================

def nest(flat: dict[str, Any], model: type[BaseModel]) -> dict[str, Any]:
    """Expand dotted keys into nested dicts, rejecting keys ``model`` does not define."""
    nested: dict[str, Any] = {}
    for key, value in flat.items():
        head, _, rest = key.partition(".")
        if head not in model.model_fields:
            raise ConfigError(f"unknown setting '{key}'")
        if rest:
            section = SECTIONS[model].get(head)
            if section is None:
                raise ConfigError(f"setting '{head}' has no nested fields (got '{key}')")
            nested.setdefault(head, {})
            if not isinstance(nested[head], dict):
                raise ConfigError(f"'{head}' is set both directly and through '{key}'")
            nested[head].update(nest({rest: value}, section))
        else:
            nested[key] = value
    return nested


def _validated(model: type[BaseModel], values: dict[str, Any]):
    try:
        return model.model_validate(values)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or model.__name__
        raise ConfigError(f"invalid {location}: {first['msg']}") from e


def build_gen_config(settings: dict[str, Any]) -> GenConfig:
    """
    GenConfig from flat settings. Preset defaults (counts, censoring) apply
    first; ``scale`` shrinks the default counts.
    """
    settings = dict(settings)
    scale = float(settings.pop("scale", 1.0))
    if scale <= 0:
        raise ConfigError(f"scale must be positive, got {scale}")
    nested = nest(settings, GenConfig)
    preset = nested.pop("preset", GenConfig.model_fields["preset"].default)
    try:
        base = GenConfig.for_preset(preset, scale=scale)
    except ValueError as e:
        raise ConfigError(f"invalid preset: {e}") from e
    return _validated(GenConfig, {**base.model_dump(), **nested})


def build_experiment_config(settings: dict[str, Any]) -> ExperimentConfig:
    settings = dict(settings)
    gen_settings = {key[len("gen.") :]: settings.pop(key) for key in list(settings) if key.startswith("gen.")}
    if "scale" in settings:
        gen_settings["scale"] = settings.pop("scale")
    nested = nest(settings, ExperimentConfig)
    nested["gen"] = build_gen_config(gen_settings).model_dump()
    return _validated(ExperimentConfig, nested)
