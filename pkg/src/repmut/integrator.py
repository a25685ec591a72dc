"""Adaptive trajectory integration on the simplex.

Dormand-Prince 5(4) embedded pair with FSAL, PI-free standard step control,
and per-step renormalization back onto x + y <= 1, x, y >= 0.  The hot loop
is plain floats: the fields are two-component cubics and array overhead
would dominate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import SimplexState

__all__ = [
    "Trajectory",
    "integrate",
    "find_attractor",
    "FixedPointAttractor",
    "CycleAttractor",
    "Undetermined",
    "SimplexEscapeError",
    "StepSizeUnderflowError",
]

# Dormand-Prince coefficients (7 stages, FSAL: stage 7 equals the next k1).
_C2, _C3, _C4, _C5, _C6 = 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (
    9017 / 3168,
    -355 / 33,
    46732 / 5247,
    49 / 176,
    -5103 / 18656,
)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# 5th-order minus 4th-order weights (error estimate), stages 1,3,4,5,6,7.
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

_ESCAPE_TOL = 1e-6


class SimplexEscapeError(RuntimeError):
    """Trajectory left the simplex by more than the renormalization tolerance."""


class StepSizeUnderflowError(RuntimeError):
    """Adaptive step fell below the minimum without meeting the error target."""


@dataclass
class Trajectory:
    """Integration record: times, (x, y, z) rows, and why integration stopped.

    ``terminal_event`` is one of "max_time", "converged_to_fixed_point", or a
    label set by a caller-supplied event.
    """

    times: np.ndarray
    states: np.ndarray
    terminal_event: str = "max_time"

    def __len__(self):
        return len(self.times)

    def state_at(self, i: int) -> SimplexState:
        x, y = self.states[i, 0], self.states[i, 1]
        return SimplexState(min(max(x, 0.0), 1.0), min(max(y, 0.0), 1.0))

    def final_state(self) -> SimplexState:
        return self.state_at(len(self.times) - 1)

    def to_csv(self, path) -> None:
        header = "t,x_alld,y_tft,z_allc"
        data = np.column_stack([self.times, self.states])
        rows = [header]
        for row in data:
            rows.append(",".join(f"{v:.17g}" for v in row))
        text = "\n".join(rows) + "\n"
        if hasattr(path, "write"):
            path.write(text)
        else:
            with open(path, "w") as fh:
                fh.write(text)


def _renormalize(x, y):
    excess = x + y - 1.0
    if excess > 0.0:
        if excess > _ESCAPE_TOL:
            raise SimplexEscapeError(f"x+y={x + y} left the simplex")
        x -= excess / 2.0
        y -= excess / 2.0
    if x < 0.0:
        if x < -_ESCAPE_TOL:
            raise SimplexEscapeError(f"x={x} left the simplex")
        x = 0.0
    if y < 0.0:
        if y < -_ESCAPE_TOL:
            raise SimplexEscapeError(f"y={y} left the simplex")
        y = 0.0
    return x, y


def integrate(
    field,
    state0: SimplexState,
    t_max: float = 5000.0,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-11,
    max_step: float = 1.0,
    detect_convergence: bool = True,
    convergence_window: int = 50,
    convergence_tol: float = 1e-10,
    step_callback=None,
) -> Trajectory:
    """Integrate ``field`` from ``state0`` for time ``t_max``.

    Every accepted step is recorded, so output density is controlled by
    ``max_step``.  With ``detect_convergence`` the run stops early once the
    field norm is below ``convergence_tol`` and the trajectory has moved less
    than ``convergence_tol`` over the trailing ``convergence_window`` steps.

    ``step_callback(t0, p0, d0, t1, p1, d1)`` is invoked per accepted step
    with the endpoint states and derivatives (for event detection with cubic
    Hermite interpolation); a non-None return value stops integration and is
    used as the terminal event label.
    """
    f = field
    t = 0.0
    x, y = state0.x, state0.y
    k1x, k1y = f(x, y)
    # initial step from the explicit-Euler scale heuristic
    scale = max(abs_tol, rel_tol * max(abs(x), abs(y), 1e-3))
    d0 = math.hypot(x, y)
    d1 = math.hypot(k1x, k1y)
    h = min(max_step, 0.01 * max(d0, 1e-4) / max(d1, 1e-8), t_max)
    h = max(h, 1e-10)
    min_step = 1e-13 * max(t_max, 1.0)

    times = [0.0]
    xs = [x]
    ys = [y]
    terminal = "max_time"
    window: list[tuple[float, float]] = [(x, y)]

    while t < t_max:
        if t_max - t <= min_step:
            break  # within rounding of the endpoint
        h = min(h, t_max - t, max_step)
        if h < min_step:
            raise StepSizeUnderflowError(f"step size {h} underflow at t={t}")

        k2x, k2y = f(x + h * _A21 * k1x, y + h * _A21 * k1y)
        k3x, k3y = f(
            x + h * (_A31 * k1x + _A32 * k2x), y + h * (_A31 * k1y + _A32 * k2y)
        )
        k4x, k4y = f(
            x + h * (_A41 * k1x + _A42 * k2x + _A43 * k3x),
            y + h * (_A41 * k1y + _A42 * k2y + _A43 * k3y),
        )
        k5x, k5y = f(
            x + h * (_A51 * k1x + _A52 * k2x + _A53 * k3x + _A54 * k4x),
            y + h * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y),
        )
        k6x, k6y = f(
            x + h * (_A61 * k1x + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x),
            y + h * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y),
        )
        xn = x + h * (_B1 * k1x + _B3 * k3x + _B4 * k4x + _B5 * k5x + _B6 * k6x)
        yn = y + h * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
        k7x, k7y = f(xn, yn)

        ex = h * (
            _E1 * k1x + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x
        )
        ey = h * (
            _E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y
        )
        sx = abs_tol + rel_tol * max(abs(x), abs(xn))
        sy = abs_tol + rel_tol * max(abs(y), abs(yn))
        err = math.sqrt(0.5 * ((ex / sx) ** 2 + (ey / sy) ** 2))

        if err > 1.0:
            h *= max(0.2, 0.9 * err ** -0.2)
            continue

        xr, yr = _renormalize(xn, yn)
        t_new = t + h
        if step_callback is not None:
            event = step_callback(t, (x, y), (k1x, k1y), t_new, (xr, yr), (k7x, k7y))
        else:
            event = None

        t = t_new
        x, y = xr, yr
        if (xr, yr) != (xn, yn):
            k1x, k1y = f(x, y)
        else:
            k1x, k1y = k7x, k7y
        times.append(t)
        xs.append(x)
        ys.append(y)

        if event is not None:
            terminal = str(event)
            break

        if detect_convergence:
            window.append((x, y))
            if len(window) > convergence_window:
                window.pop(0)
                if math.hypot(k1x, k1y) < convergence_tol:
                    moved = max(
                        math.hypot(x - px, y - py) for px, py in window
                    )
                    if moved < convergence_tol:
                        terminal = "converged_to_fixed_point"
                        break

        h *= min(5.0, max(0.2, 0.9 * err ** -0.2)) if err > 0.0 else 5.0

    xs_arr = np.array(xs)
    ys_arr = np.array(ys)
    states = np.column_stack([xs_arr, ys_arr, 1.0 - xs_arr - ys_arr])
    return Trajectory(np.array(times), states, terminal)


@dataclass(frozen=True)
class FixedPointAttractor:
    """Long-run behavior: convergence to a fixed point."""

    location: SimplexState
    time_to_converge: float


@dataclass(frozen=True)
class CycleAttractor:
    """Long-run behavior: convergence to a stable limit cycle."""

    cycle: object  # LimitCycleRecord


@dataclass(frozen=True)
class Undetermined:
    """Neither convergence nor a cycle was confirmed within the time budget."""

    trajectory: Trajectory


def find_attractor(field, state0: SimplexState, t_max: float = 5000.0):
    """Classify the omega-limit of the orbit through ``state0``.

    Returns FixedPointAttractor, CycleAttractor, or Undetermined.
    """
    from .cycles import detect_limit_cycle, CycleUndeterminedError

    traj = integrate(field, state0, t_max=t_max)
    if traj.terminal_event == "converged_to_fixed_point":
        return FixedPointAttractor(traj.final_state(), float(traj.times[-1]))
    try:
        record = detect_limit_cycle(field, seed=traj.final_state(), t_max=t_max)
    except CycleUndeterminedError:
        return Undetermined(traj)
    if record is not None:
        return CycleAttractor(record)
    return Undetermined(traj)
