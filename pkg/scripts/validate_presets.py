#!/usr/bin/env python3
"""
Validate every model preset and every generator preset.

This script is used by CI to ensure:
1. Each model preset builds and its shape chain matches the printed table
2. Each generator preset produces train/test splits at a small scale
3. Generated records satisfy the simulation invariants
"""

import sys
from pathlib import Path

import numpy as np

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from datagen.simulations import build_datasets  # noqa: E402
from models.schemas import CensorMode, GenConfig, GenPreset, ModelPreset  # noqa: E402
from nn.network import PRESET_SHAPES, Network, preset_config  # noqa: E402

GEN_SCALE = 0.02


def validate_model(preset: ModelPreset) -> list[str]:
    errors = []
    print(f"\n=== Validating {preset.value} model ===")
    try:
        network = Network(preset_config(preset))
    except Exception as e:
        return [f"{preset.value}: failed to build: {e}"]

    print(f"  Input: {network.input_shape}")
    for shape in network.shape_table():
        print(f"  -> {' x '.join(map(str, shape))}")
    print(f"  Parameters: {network.n_parameters}")

    if network.shape_table() != PRESET_SHAPES[preset]:
        errors.append(f"{preset.value}: shapes {network.shape_table()} != {PRESET_SHAPES[preset]}")

    x = np.zeros((2,) + network.input_shape)
    f = network.forward(x, cache=False)
    if f.shape != (2,):
        errors.append(f"{preset.value}: forward returned shape {f.shape}")
    return errors


def validate_generator(preset: GenPreset) -> list[str]:
    errors = []
    print(f"\n=== Validating {preset.value} generator ===")
    try:
        datasets = build_datasets(GenConfig.for_preset(preset, seed=42, scale=GEN_SCALE))
    except Exception as e:
        return [f"{preset.value}: failed to generate: {e}"]

    for split in ("train", "test"):
        if split not in datasets:
            errors.append(f'{preset.value}: missing split "{split}"')
            continue
        data = datasets[split]
        print(f"  {split}: {len(data)} records, censoring {data.censoring_rate:.2f}, source {data.source}")
        if data.images is None:
            errors.append(f"{preset.value}/{split}: no inputs generated")
        elif not np.all((data.images >= 0) & (data.images <= 1)) and preset != GenPreset.CROP_FEATURES:
            errors.append(f"{preset.value}/{split}: pixels outside [0, 1]")
        if data.gen.censor_mode == CensorMode.NODULE and np.any(data.events > data.labels):
            errors.append(f"{preset.value}/{split}: event without disease label")
        if data.gen.censor_mode == CensorMode.NONE and not data.events.all():
            errors.append(f"{preset.value}/{split}: censored record without censoring")
    return errors


def main():
    """Main validation entry point."""
    print("=" * 60)
    print("PRESET VALIDATION")
    print("=" * 60)

    all_errors = []
    for preset in (ModelPreset.TABLE1, ModelPreset.SIMC, ModelPreset.INTEGRATE_HEAD):
        all_errors.extend(validate_model(preset))
    for preset in GenPreset:
        all_errors.extend(validate_generator(preset))

    print("\n" + "=" * 60)

    if all_errors:
        print("VALIDATION FAILED")
        print("=" * 60)
        for err in all_errors:
            print(f"  ✗ {err}")
        sys.exit(1)
    else:
        print("ALL PRESETS VALID")
        print("=" * 60)
        sys.exit(0)


if __name__ == "__main__":
    main()
