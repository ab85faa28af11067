"""Learning-rate schedules, evaluated per optimizer step.

A schedule maps the fractional epoch t = completed_steps / steps_per_epoch
to the learning rate for the next step. Three kinds:

  none              constant base_lr
  linear            decays to base_lr/2 over the first half of the run,
                    then stays there
  cosine_annealing  base_lr * (0.75 + 0.25 * cos(2*pi*t / P)) with period
                    P = epochs/2, i.e. two full cosine periods per run,
                    oscillating between base_lr and base_lr/2

A restarted variant, cosine_restarts, decays from base_lr to base_lr/2
over each period and jumps back up at period boundaries.
"""

from __future__ import annotations

import math
from typing import Callable

from .errors import ConfigError

SCHEDULE_KINDS = ("none", "linear", "cosine_annealing", "cosine_restarts")

Schedule = Callable[[float], float]


def make_schedule(kind: str, base_lr: float, epochs: int) -> Schedule:
    if kind not in SCHEDULE_KINDS:
        raise ConfigError(
            f"unknown schedule kind: {kind!r}; choose from {SCHEDULE_KINDS}"
        )
    if base_lr <= 0:
        raise ConfigError(f"base learning rate must be positive, got {base_lr!r}")
    if epochs <= 0:
        raise ConfigError(f"epochs must be positive, got {epochs!r}")
    half = epochs / 2.0

    if kind == "none":
        return lambda t: base_lr
    if kind == "linear":
        return lambda t: base_lr * (1.0 - 0.5 * min(t, half) / half)
    if kind == "cosine_annealing":
        return lambda t: base_lr * (0.75 + 0.25 * math.cos(2.0 * math.pi * t / half))
    return lambda t: base_lr * (0.75 + 0.25 * math.cos(math.pi * (t % half) / half))
