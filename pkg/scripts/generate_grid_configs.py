#!/usr/bin/env python3
"""Emit the 8-config schedule-comparison grid into configs/grid/.

Two losses (ce on majority targets, mae on distribution targets) crossed
with the four learning-rate schedules. Each config differs from the
shipped best configs only in the grid axes, so the resulting runs line
up as an 8-row schedule comparison.

Usage: python3 scripts/generate_grid_configs.py
"""

from __future__ import annotations

from pathlib import Path

GRID_DIR = Path(__file__).resolve().parent.parent / "configs" / "grid"

SCHEDULES = ("none", "linear", "cosine_annealing", "cosine_restarts")
LOSSES = {"ce": "5.0e-6", "mae": "1.0e-5"}

TEMPLATE = """\
# Grid cell: loss={loss} schedule={schedule}
corpus:
  path: data/discogem.csv
prepared_dir: runs/prepared
split:
  seed: 13
  ratios: [0.7, 0.1, 0.2]
model:
  encoder: hf:roberta-base
  max_tokens: 256
  pooling: first-token
  dropout: 0.1
training:
  loss: {loss}
  base_lr: {base_lr}
  schedule: {schedule}
  epochs: 10
  batch_size: 16
  seeds: [1, 2, 3]
"""


def main() -> None:
    GRID_DIR.mkdir(parents=True, exist_ok=True)
    for loss, base_lr in LOSSES.items():
        for schedule in SCHEDULES:
            path = GRID_DIR / f"{loss}_{schedule}.yaml"
            path.write_text(
                TEMPLATE.format(loss=loss, base_lr=base_lr, schedule=schedule),
                encoding="utf-8",
            )
            print(f"wrote {path.relative_to(GRID_DIR.parent.parent)}")


if __name__ == "__main__":
    main()
