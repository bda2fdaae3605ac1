"""Scalar PID with integrator clamping and backward-difference derivative."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PidGains:
    kp: float = 0.0
    ki: float = 0.0
    kd: float = 0.0
    integrator_limit: float = 1.0
    output_limit: float = 1.0

    def __post_init__(self):
        if min(self.kp, self.ki, self.kd) < 0:
            raise ValueError("PID gains must be non-negative")
        if self.integrator_limit <= 0 or self.output_limit <= 0:
            raise ValueError("PID limits must be positive")


@dataclass(frozen=True)
class PidState:
    """``previous_error is None`` marks a controller that has not run yet."""

    integrator: float = 0.0
    previous_error: float | None = None
    previous_time: float = 0.0

    @classmethod
    def fresh(cls, time: float = 0.0) -> PidState:
        return cls(0.0, None, time)


def _clamp(x: float, limit: float) -> float:
    return max(-limit, min(limit, x))


def pid_step(gains: PidGains, state: PidState, error: float, time: float) -> tuple[float, PidState]:
    """Advance the controller to ``time`` with the new ``error``.

    The integrator accumulates ``error * dt`` and is clamped to
    ``±integrator_limit`` (units of error x seconds). The derivative term is
    zero on the first call.
    """
    if not (math.isfinite(error) and math.isfinite(time)):
        raise ValueError("PID error and time must be finite")
    first = state.previous_error is None
    dt = time - state.previous_time
    if dt < 0 or (not first and dt == 0):
        raise ValueError(f"PID time must increase: {time} after {state.previous_time}")

    integrator = _clamp(state.integrator + error * dt, gains.integrator_limit)
    derivative = 0.0 if first else (error - state.previous_error) / dt
    out = gains.kp * error + gains.ki * integrator + gains.kd * derivative
    return _clamp(out, gains.output_limit), PidState(integrator, error, time)
