"""Limit-cycle detection via a Poincare return map.

The section is the half-line through the interior spiral fixed point along
the real part of its complex eigenvector.  Section crossings of an orbit are
located inside accepted integrator steps by cubic Hermite interpolation
(endpoint states and derivatives are already available) and refined by
bisection.  A cycle is confirmed when successive return coordinates agree to
``return_tol`` on ``min_returns`` consecutive returns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibria import interior_spiral
from .integrator import integrate
from .model import SimplexState

__all__ = [
    "LimitCycleRecord",
    "detect_limit_cycle",
    "cycle_metrics",
    "rotation_order",
    "CycleUndeterminedError",
    "NoInteriorSpiralError",
]


class CycleUndeterminedError(RuntimeError):
    """Time budget exhausted before the orbit converged or closed up."""


class NoInteriorSpiralError(RuntimeError):
    """No interior spiral point exists to anchor the Poincare section."""


@dataclass(frozen=True)
class LimitCycleRecord:
    """One period of a detected limit cycle plus return-map diagnostics."""

    period: float
    times: np.ndarray
    states: np.ndarray  # (n, 3) rows of (x, y, z) over one period
    anchor: tuple[float, float]
    section_direction: tuple[float, float]
    returns: tuple[float, ...]  # section coordinates of successive crossings
    stable: bool

    @property
    def amplitude(self) -> float:
        """Largest distance of the orbit from the enclosed fixed point."""
        dx = self.states[:, 0] - self.anchor[0]
        dy = self.states[:, 1] - self.anchor[1]
        return float(np.max(np.hypot(dx, dy)))

    def time_average(self, column: int) -> float:
        return float(
            np.trapezoid(self.states[:, column], self.times) / (self.times[-1] - self.times[0])
        )


def _hermite(tau, h, p0, d0, p1, d1):
    t2 = tau * tau
    t3 = t2 * tau
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + tau
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return (
        h00 * p0[0] + h10 * h * d0[0] + h01 * p1[0] + h11 * h * d1[0],
        h00 * p0[1] + h10 * h * d0[1] + h01 * p1[1] + h11 * h * d1[1],
    )


def _section_direction(field, x, y):
    j = field.jacobian(x, y)
    e1, _ = j.eigenvalues()
    # eigenvector of the 2x2 Jacobian for eigenvalue e1: (dxy, e1 - dxx)
    vx, vy = complex(j.dxy), e1 - j.dxx
    dx, dy = vx.real, vy.real
    if math.hypot(dx, dy) < 1e-12:
        dx, dy = vx.imag, vy.imag
    n = math.hypot(dx, dy)
    if n < 1e-12:
        dx, dy = 1.0, 0.0
        n = 1.0
    return dx / n, dy / n


def detect_limit_cycle(
    field,
    seed: SimplexState | None = None,
    t_max: float = 2500.0,
    return_tol: float = 1e-8,
    min_returns: int = 3,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-11,
) -> LimitCycleRecord | None:
    """Detect a stable limit cycle of ``field``.

    Returns None when no cycle exists (no interior spiral to enclose, or the
    probe orbit converges to a fixed point).  Raises CycleUndeterminedError
    if the budget ``t_max`` runs out before either outcome is confirmed.
    """
    sp = interior_spiral(field)
    if sp is None:
        return None
    ax, ay = sp.x, sp.y
    dx, dy = _section_direction(field, ax, ay)

    if seed is None:
        step = 0.02
        sx, sy = ax + step * dx, ay + step * dy
        if sx < 0.0 or sy < 0.0 or sx + sy > 1.0:
            sx, sy = ax - step * dx, ay - step * dy
        seed = SimplexState(min(max(sx, 0.0), 1.0), min(max(sy, 0.0), 1.0))

    def g(px, py):
        return dx * (py - ay) - dy * (px - ax)

    def r(px, py):
        return dx * (px - ax) + dy * (py - ay)

    crossings: list[tuple[float, float, float, float]] = []  # (t, x, y, r)

    def callback(t0, p0, d0, t1, p1, d1):
        g0, g1 = g(*p0), g(*p1)
        if not (g0 < 0.0 <= g1):
            return None
        h = t1 - t0
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if g(*_hermite(mid, h, p0, d0, p1, d1)) < 0.0:
                lo = mid
            else:
                hi = mid
        tau = 0.5 * (lo + hi)
        px, py = _hermite(tau, h, p0, d0, p1, d1)
        rc = r(px, py)
        if rc <= 1e-10:
            return None  # crossed the opposite half-line
        crossings.append((t0 + tau * h, px, py, rc))
        if len(crossings) > min_returns + 1:
            recent = [c[3] for c in crossings[-(min_returns + 1):]]
            # an orbit spiraling into the fixed point also has tiny return
            # gaps; a genuine cycle keeps a macroscopic section radius
            floor = max(1e-5, 10.0 * return_tol)
            if recent[-1] <= floor and all(
                recent[i + 1] < recent[i] for i in range(min_returns)
            ):
                return "converged_to_fixed_point"
            if recent[-1] > floor and all(
                abs(recent[i + 1] - recent[i]) < return_tol
                for i in range(min_returns)
            ):
                # a closed orbit also has settled inter-crossing times; a slow
                # creep toward a boundary contour does not
                ts = [c[0] for c in crossings[-(min_returns + 2):]]
                periods = [b - a for a, b in zip(ts, ts[1:])]
                if max(periods) - min(periods) < 1e-3 * max(periods):
                    return "cycle_detected"
        return None

    traj = integrate(
        field,
        seed,
        t_max=t_max,
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        step_callback=callback,
    )
    if traj.terminal_event == "converged_to_fixed_point":
        return None
    if traj.terminal_event != "cycle_detected":
        raise CycleUndeterminedError(
            f"no convergence and no closed orbit within t_max={t_max} "
            f"(system={getattr(field, 'system_id', '?')}, mu={getattr(field, 'mu', '?')}, "
            f"cost={getattr(field, 'cost', '?')})"
        )

    period = crossings[-1][0] - crossings[-2][0]
    start = SimplexState(
        min(max(crossings[-1][1], 0.0), 1.0), min(max(crossings[-1][2], 0.0), 1.0)
    )
    orbit = integrate(
        field,
        start,
        t_max=period,
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        max_step=period / 400.0,
        detect_convergence=False,
    )
    rs = [c[3] for c in crossings]
    # return-map contraction toward the converged section coordinate
    r_star = rs[-1]
    devs = [d for d in (abs(r - r_star) for r in rs[:-1]) if d > 100.0 * return_tol]
    stable = all(b < a for a, b in zip(devs, devs[1:]))
    return LimitCycleRecord(
        period=period,
        times=orbit.times,
        states=orbit.states,
        anchor=(ax, ay),
        section_direction=(dx, dy),
        returns=tuple(rs),
        stable=stable,
    )


def rotation_order(record: LimitCycleRecord) -> tuple[str, str, str]:
    """Temporal order, starting from ALLD, in which the orbit peaks each strategy."""
    period = record.times[-1] - record.times[0]
    peaks = [float(record.times[np.argmax(record.states[:, k])]) for k in range(3)]
    names = ("ALLD", "TFT", "ALLC")
    rel = [(peaks[k] - peaks[0]) % period for k in range(3)]
    order = sorted(range(3), key=lambda k: rel[k])
    return tuple(names[k] for k in order)


def cycle_metrics(record: LimitCycleRecord) -> dict:
    """Summary statistics of one period: extrema, time averages, rotation."""
    names = ("alld", "tft", "allc")
    out = {
        "period": record.period,
        "amplitude": record.amplitude,
        "stable": record.stable,
        "rotation": rotation_order(record),
    }
    for k, name in enumerate(names):
        col = record.states[:, k]
        out[f"{name}_min"] = float(np.min(col))
        out[f"{name}_max"] = float(np.max(col))
        out[f"{name}_mean"] = record.time_average(k)
    out["cooperation_mean"] = out["tft_mean"] + out["allc_mean"]
    return out
