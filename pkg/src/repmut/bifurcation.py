"""Bifurcation analysis in the (mu, cost) parameter plane.

Closed-form saddle-node and Hopf curves exist for the two pairwise
mutation systems; everything else (uniform mutation, arbitrary M) is
handled numerically: trace-zero bisection for Hopf points, cycle-existence
bisection for the homoclinic curve, pseudo-arclength continuation of the
fold condition det J = 0 for the uniform saddle-node branch, and Newton
refinement for the codimension-two Bogdanov-Takens and cusp points.

The Hopf condition for the TFT->ALLC system is a quartic in the cost; its
roots are assembled from nested-radical building blocks via the standard
quartic-root layout, and every returned value is validated against the
trace-zero condition at the interior spiral point, which is treated as
ground truth.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import VectorField, general_field, named_field
from .equilibria import (
    closed_form_candidates,
    fixed_points,
    fixed_points_numeric,
    newton_refine,
)
from .cycles import CycleUndeterminedError, LimitCycleRecord, detect_limit_cycle
from .model import ModelParams, MutationSpec, ParamError

_SQRT6 = math.sqrt(6.0)
_CBRT2 = 2.0 ** (1.0 / 3.0)

__all__ = [
    "BifurcationCurve",
    "RegionLabel",
    "HomoclinicResult",
    "CodimTwoPoint",
    "StabilityDiagram",
    "sn_curve_tft_allc",
    "sn_curve_alld_allc",
    "hopf_curve_tft_allc",
    "hopf_curve_alld_allc",
    "hopf_detect_numeric",
    "homoclinic_trace",
    "bt_point",
    "cusp_point",
    "fold_curve_uniform",
    "classify_region",
    "stability_diagram",
    "conjecture_harness",
]


def _thread_count() -> int:
    raw = os.environ.get("REPMUT_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(8, os.cpu_count() or 1)
    return n


def _parallel_map(fn, items):
    items = list(items)
    n = _thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# saddle-node curves (closed form)


def sn_curve_tft_allc(mu: float) -> float:
    """Cost at which the TFT->ALLC interior fixed-point pair coalesces."""
    if mu < 0.0:
        raise ParamError(f"mu must be >= 0, got {mu}")
    rad = mu * (3.0 * mu + 1.0)
    return ((mu - 11.0) * mu - 4.0 * _SQRT6 * math.sqrt(rad) + 6.0) / (mu + 3.0) ** 2


def sn_curve_alld_allc(mu: float) -> float:
    """Cost at which the ALLD->ALLC interior fixed-point pair coalesces."""
    if mu < 0.0:
        raise ParamError(f"mu must be >= 0, got {mu}")
    rad = (1.0 - mu) * mu * (3.0 * mu - 2.0) * (4.0 * mu - 1.0)
    if rad < -1e-13:
        raise ParamError(f"mu={mu} outside the curve's domain (negative radicand)")
    return (mu * (28.0 * mu - 25.0) + 6.0 - 4.0 * _SQRT6 * math.sqrt(max(rad, 0.0))) / (
        3.0 - 4.0 * mu
    ) ** 2


# --------------------------------------------------------------------------
# Hopf curves (closed form, oracle-validated root selection)


def _spiral_check(system_id: str, mu: float, c: float):
    """(trace, det) at the interior spiral-candidate fixed point, or None."""
    field = named_field(system_id, mu, c)
    best = None
    for xr, yr in closed_form_candidates(system_id, mu, c):
        if abs(xr.imag) > 1e-7 or abs(yr.imag) > 1e-7:
            continue
        x, y = xr.real, yr.real
        if not (1e-9 < x < 1.0 and 1e-9 < y < 1.0 and x + y < 1.0 - 1e-9):
            continue
        j = field.jacobian(x, y)
        if j.det <= 0.0:
            continue
        if best is None or abs(j.trace) < abs(best[0]):
            best = (j.trace, j.det, x, y)
    return best


def _validated_real_root(system_id: str, mu: float, candidates, trace_tol: float = 1e-7):
    best = None
    for c in candidates:
        if abs(c.imag) > 1e-7 or not (0.0 < c.real < 3.0):
            continue
        chk = _spiral_check(system_id, mu, c.real)
        if chk is None:
            continue
        tr, det, _, _ = chk
        if abs(tr) < trace_tol and det > 0.0:
            if best is None or abs(tr) < abs(best[1]):
                best = (c.real, tr)
    if best is None:
        raise ParamError(
            f"no Hopf root validates against the trace-zero condition at mu={mu} "
            f"(mu outside the curve's domain)"
        )
    return best[0]


def _hopf_quartic_roots_tft_allc(mu: float) -> list[complex]:
    m = mu
    d = m - 1.0
    b3 = (3.0 - 13.0 * m) / d
    b2 = (35.0 * m * m - 34.0 * m - 8.0) / d**2
    b1 = (49.0 * m * m - 4.0 * m + 4.0) / d**2
    a2 = b3 * b3 / 4.0 - 2.0 * b2 / 3.0
    a3 = cmath.sqrt(
        -5240604096.0 * m**12
        - 40578465024.0 * m**11
        + 200756188800.0 * m**10
        - 265354820640.0 * m**9
        + 60401533248.0 * m**8
        + 110419920576.0 * m**7
        - 55059298560.0 * m**6
        - 12327872544.0 * m**5
        + 4987630080.0 * m**4
        + 1779338880.0 * m**3
        + 218439936.0 * m**2
        - 110592.0 * m
        - 1880064.0
    )
    a4 = (
        204136.0 * m**6
        - 578832.0 * m**5
        + 416952.0 * m**4
        + 51238.0 * m**3
        - 79740.0 * m**2
        - 12984.0 * m
        + a3
        - 1456.0
    ) ** (1.0 / 3.0)
    a5 = _CBRT2 * (2272.0 * m**4 - 3160.0 * m**3 + 521.0 * m**2 + 316.0 * m + 100.0)
    a6 = -(b3**3) + 4.0 * b2 * b3 - 8.0 * b1
    t1 = a4 / (3.0 * _CBRT2 * d**2)
    t2 = a5 / (3.0 * d**2 * a4)
    w = cmath.sqrt(a2 + t1 + t2)
    base = -b3 / 4.0
    roots = []
    for s1 in (-1.0, 1.0):
        inner = 2.0 * a2 - t1 - t2 + s1 * a6 / (4.0 * w)
        u = cmath.sqrt(inner)
        for s2 in (-1.0, 1.0):
            roots.append(base + s1 * w / 2.0 + s2 * u / 2.0)
    return roots


def hopf_curve_tft_allc(mu: float) -> float:
    """Hopf cost for the TFT->ALLC system (quartic nested-radical form).

    All four quartic roots are formed in complex arithmetic; the returned
    root is the one at which the interior spiral point really has zero
    trace and positive determinant.
    """
    if not (0.0 < mu < 1.0):
        raise ParamError(f"mu={mu} outside (0, 1)")
    return _validated_real_root("tft_to_allc", mu, _hopf_quartic_roots_tft_allc(mu))


def hopf_curve_alld_allc(mu: float) -> float:
    """Hopf cost for the ALLD->ALLC system (Cardano form).

    The cube root admits three branches; the branch is selected by the same
    trace-zero validation, and the imaginary residue of the winner must be
    below 1e-9.
    """
    if not (0.0 < mu < 1.0):
        raise ParamError(f"mu={mu} outside (0, 1)")
    m = mu
    p3 = 48.0 * m**3 - 201.0 * m**2 + 114.0 * m - 33.0
    q4 = -2592.0 * m**4 + 5670.0 * m**3 - 5022.0 * m**2 + 810.0 * m + 162.0
    a9 = cmath.sqrt(4.0 * p3**3 + q4 * q4)
    body = q4 + a9
    r, th = abs(body), cmath.phase(body)
    candidates = []
    for k in range(3):
        a10 = r ** (1.0 / 3.0) * cmath.exp(1j * (th + 2.0 * math.pi * k) / 3.0)
        candidates.append(
            -(1.0 - 1j * math.sqrt(3.0)) * a10 / (6.0 * _CBRT2)
            + (1.0 + 1j * math.sqrt(3.0)) * p3 / (3.0 * 2.0 ** (2.0 / 3.0) * a10)
            + 2.0 * m
            + 1.0
        )
    c = _validated_real_root("alld_to_allc", mu, candidates)
    winner = min(candidates, key=lambda z: abs(z.real - c) + abs(z.imag))
    if abs(winner.imag) > 1e-9:
        raise ParamError(
            f"imaginary residue {winner.imag} of the Hopf root exceeds 1e-9 at mu={mu}"
        )
    return c


# --------------------------------------------------------------------------
# numerical Hopf detection


def _interior_spiral_guess(field: VectorField, grid_density: int = 12):
    cands = [
        r
        for r in fixed_points_numeric(field, grid_density)
        if r.is_interior(1e-6) and r.classification != "saddle"
    ]
    if not cands:
        return None
    spirals = [r for r in cands if abs(r.eigenvalues[0].imag) > 1e-9]
    pick = spirals[0] if spirals else cands[0]
    return pick.x, pick.y


def hopf_detect_numeric(
    system_id: str,
    mu: float,
    c_range: tuple[float, float],
    xtol: float = 1e-10,
    samples: int = 33,
) -> float:
    """Hopf cost by bisection on trace(J) at the tracked interior fixed point.

    The fixed point is continued in c by warm-started Newton; the bisection
    bracket is located by sampling ``c_range``.  det > 0 is verified at the
    root.  Raises if no trace sign change exists in the range.
    """

    def make_field(c):
        if system_id == "general":
            raise ParamError("pass a named system id")
        return named_field(system_id, mu, c)

    cs = np.linspace(c_range[0], c_range[1], samples)
    guess = None
    traces = {}

    def trace_at(c, g):
        f = make_field(c)
        if g is None:
            g = _interior_spiral_guess(f)
            if g is None:
                return None, None
        sol = newton_refine(f, g[0], g[1], tol=1e-13)
        if sol is None:
            return None, None
        x, y, _ = sol
        if not (1e-8 < x < 1.0 and 1e-8 < y < 1.0 and x + y < 1.0 - 1e-8):
            return None, None
        j = f.jacobian(x, y)
        return (j.trace, j.det), (x, y)

    prev_c = prev_tr = None
    bracket = None
    for c in cs:
        td, g = trace_at(float(c), guess)
        if td is None:
            prev_c = prev_tr = None
            guess = None
            continue
        guess = g
        tr, det = td
        traces[float(c)] = (tr, det)
        if abs(tr) < 1e-13:
            if det <= 0.0:
                raise ParamError(
                    f"determinant not positive at the detected Hopf point c={c}"
                )
            return float(c)
        if prev_tr is not None and tr * prev_tr < 0.0:
            bracket = (prev_c, float(c))
            break
        prev_c, prev_tr = float(c), tr
    if bracket is None:
        raise ParamError(
            f"no trace sign change for {system_id} at mu={mu} in c range {c_range}"
        )
    lo, hi = bracket
    tr_lo = traces[lo][0]
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        td, g = trace_at(mid, guess)
        if td is None:
            raise ParamError(f"lost the fixed point during bisection at c={mid}")
        guess = g
        if td[0] * tr_lo > 0.0:
            lo, tr_lo = mid, td[0]
        else:
            hi = mid
    c_star = 0.5 * (lo + hi)
    td, _ = trace_at(c_star, guess)
    if td is None or td[1] <= 0.0:
        raise ParamError(f"determinant not positive at the detected Hopf point c={c_star}")
    return c_star


# --------------------------------------------------------------------------
# homoclinic tracing


@dataclass(frozen=True)
class HomoclinicResult:
    """Homoclinic cost located by cycle-existence bisection at fixed mu."""

    system_id: str
    mu: float
    c: float
    bracket: tuple[float, float]
    cycle_side: str  # "below" or "above": which side of c the cycle lives on
    max_period_observed: float


def _cycle_probe(field: VectorField, t_max: float):
    """(exists, period) with the period-blowup convention: an orbit that
    neither converges nor closes within t_max counts as cycle-side."""
    try:
        rec = detect_limit_cycle(
            field, t_max=t_max, return_tol=1e-7, rel_tol=1e-8, abs_tol=1e-10
        )
    except CycleUndeterminedError:
        return True, float("inf")
    if rec is None:
        return False, 0.0
    return True, rec.period


def homoclinic_trace(
    system_id: str,
    mu: float,
    c_bracket: tuple[float, float],
    tol: float = 1e-4,
    t_max: float = 2500.0,
) -> HomoclinicResult:
    """Bisect the cycle-existence boundary in c at fixed mu.

    Both bracket ends are probed first and must disagree about cycle
    existence.  Near the boundary the period grows without bound, so an
    undetermined probe (no convergence, no closure) is counted as
    cycle-side.
    """
    lo, hi = float(c_bracket[0]), float(c_bracket[1])
    if not lo < hi:
        raise ParamError(f"invalid bracket {c_bracket}")
    max_period = 0.0

    def probe(c):
        nonlocal max_period
        exists, period = _cycle_probe(named_field(system_id, mu, c), t_max)
        if exists and math.isfinite(period):
            max_period = max(max_period, period)
        return exists

    lo_cycle = probe(lo)
    hi_cycle = probe(hi)
    if lo_cycle == hi_cycle:
        raise ParamError(
            f"bracket {c_bracket} does not straddle the cycle boundary at mu={mu} "
            f"(cycle at both ends: {lo_cycle})"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if probe(mid) == lo_cycle:
            lo = mid
        else:
            hi = mid
    return HomoclinicResult(
        system_id=system_id,
        mu=mu,
        c=0.5 * (lo + hi),
        bracket=(lo, hi),
        cycle_side="below" if lo_cycle else "above",
        max_period_observed=max_period,
    )


# --------------------------------------------------------------------------
# codimension-two points


@dataclass(frozen=True)
class CodimTwoPoint:
    """Bogdanov-Takens or cusp point with its fixed-point location."""

    kind: str  # "bogdanov_takens" or "cusp"
    system_id: str
    mu: float
    c: float
    x: float
    y: float
    residual: float


def _fd_jacobian(fun, u, h=1e-7):
    u = np.asarray(u, dtype=float)
    f0 = np.asarray(fun(u))
    jac = np.empty((len(f0), len(u)))
    for k in range(len(u)):
        up = u.copy()
        um = u.copy()
        up[k] += h
        um[k] -= h
        jac[:, k] = (np.asarray(fun(up)) - np.asarray(fun(um))) / (2.0 * h)
    return jac


def _damped_newton_nd(fun, u0, tol=1e-11, max_iter=60):
    u = np.asarray(u0, dtype=float)
    f = np.asarray(fun(u))
    res = float(np.max(np.abs(f)))
    for _ in range(max_iter):
        if res < tol:
            return u, res
        jac = _fd_jacobian(fun, u)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        for _ in range(40):
            ut = u + lam * step
            ft = np.asarray(fun(ut))
            rt = float(np.max(np.abs(ft)))
            if rt < res:
                u, f, res = ut, ft, rt
                break
            lam *= 0.5
        else:
            return None
    return (u, res) if res < tol else None


def _bt_residual(system_id):
    def fun(u):
        x, y, mu, c = u
        field = named_field(system_id, min(max(mu, 0.0), 1.0), c)
        fx, fy = field(x, y)
        j = field.jacobian(x, y)
        return (fx, fy, j.det, j.trace)

    return fun


def _sn_coalesced_point(system_id, mu):
    """Fixed-point coordinates on the closed-form saddle-node curve."""
    if system_id == "tft_to_allc":
        c = sn_curve_tft_allc(mu)
        x = (-5.0 * c * mu + c + 17.0 * mu + 2.0) / (12.0 * mu + 4.0)
        y = (-c * mu * mu + 8.0 * c * mu + c + mu * mu - mu + 2.0) / (24.0 * mu + 8.0)
    elif system_id == "alld_to_allc":
        c = sn_curve_alld_allc(mu)
        x = (-4.0 * c * mu - c + 11.0 * mu - 2.0) / (16.0 * mu - 4.0)
        y = (
            8.0 * c * mu * mu - 10.0 * c * mu + c + 18.0 * mu * mu - 11.0 * mu + 2.0
        ) / (8.0 * (mu - 1.0) * (4.0 * mu - 1.0))
    else:
        raise ParamError(f"no closed-form saddle-node curve for {system_id!r}")
    return x, y, c


def bt_point(system_id: str) -> CodimTwoPoint:
    """Bogdanov-Takens point: fixed point with trace = det = 0.

    For the pairwise systems the seed comes from a trace sign change along
    the closed-form saddle-node curve; for the uniform system from the
    numerically continued fold branch.  Newton on (field, det, trace) over
    (x, y, mu, c) then polishes to residual < 1e-10.
    """
    if system_id in ("tft_to_allc", "alld_to_allc"):
        mu_lo, mu_hi = (0.02, 0.24) if system_id == "tft_to_allc" else (0.02, 0.2499)

        def tr(mu):
            x, y, c = _sn_coalesced_point(system_id, mu)
            return named_field(system_id, mu, c).jacobian(x, y).trace

        lo, hi = mu_lo, mu_hi
        f_lo = tr(lo)
        if f_lo * tr(hi) > 0.0:
            raise ParamError(f"no trace sign change along the fold curve of {system_id}")
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if tr(mid) * f_lo > 0.0:
                lo = mid
            else:
                hi = mid
        mu0 = 0.5 * (lo + hi)
        x0, y0, c0 = _sn_coalesced_point(system_id, mu0)
        seed = (x0, y0, mu0, c0)
    elif system_id == "uniform":
        branch = fold_curve_uniform()
        seed = None
        for a, b in zip(branch, branch[1:]):
            if a.trace * b.trace < 0.0:
                seed = (
                    0.5 * (a.x + b.x),
                    0.5 * (a.y + b.y),
                    0.5 * (a.mu + b.mu),
                    0.5 * (a.c + b.c),
                )
                break
        if seed is None:
            raise ParamError("no trace sign change along the uniform fold branch")
    else:
        raise ParamError(f"no Bogdanov-Takens search for system {system_id!r}")

    sol = _damped_newton_nd(_bt_residual(system_id), seed, tol=1e-11)
    if sol is None:
        raise ParamError(f"Bogdanov-Takens Newton did not converge for {system_id}")
    (x, y, mu, c), res = sol
    return CodimTwoPoint("bogdanov_takens", system_id, mu, c, x, y, res)


# --------------------------------------------------------------------------
# uniform-system fold branch (pseudo-arclength continuation) and cusp


@dataclass(frozen=True)
class FoldPoint:
    """A point on the det J = 0 fixed-point branch of the uniform system."""

    x: float
    y: float
    mu: float
    c: float
    trace: float
    quad_coeff: float  # fold normal-form coefficient; zero at the cusp


def _fold_residual_uniform(u):
    x, y, mu, c = u
    field = named_field("uniform", min(max(mu, 0.0), 1.0), c)
    fx, fy = field(x, y)
    return (fx, fy, field.jacobian(x, y).det)


def _null_vectors(j):
    # right and left null vectors of a (near-)singular 2x2 matrix
    if math.hypot(j.dxx, j.dxy) >= math.hypot(j.dyx, j.dyy):
        v = (j.dxy, -j.dxx)
    else:
        v = (j.dyy, -j.dyx)
    nv = math.hypot(*v)
    v = (v[0] / nv, v[1] / nv)
    if math.hypot(j.dxx, j.dyx) >= math.hypot(j.dxy, j.dyy):
        w = (j.dyx, -j.dxx)
    else:
        w = (j.dyy, -j.dxy)
    nw = math.hypot(*w)
    return v, (w[0] / nw, w[1] / nw)


def _fold_quad_coeff(field: VectorField, x, y):
    """w . D2f(v, v) along the fold null direction (exact for cubic fields)."""
    j = field.jacobian(x, y)
    v, w = _null_vectors(j)
    h = 1e-3
    fp = field(x + h * v[0], y + h * v[1])
    f0 = field(x, y)
    fm = field(x - h * v[0], y - h * v[1])
    d2 = (
        (fp[0] - 2.0 * f0[0] + fm[0]) / (h * h),
        (fp[1] - 2.0 * f0[1] + fm[1]) / (h * h),
    )
    return w[0] * d2[0] + w[1] * d2[1]


def _fold_point_record(u) -> FoldPoint:
    x, y, mu, c = u
    field = named_field("uniform", mu, c)
    j = field.jacobian(x, y)
    return FoldPoint(x, y, mu, c, j.trace, _fold_quad_coeff(field, x, y))


def _start_fold_uniform(mu0=0.004):
    """Locate one fold point at fixed mu by scanning the fixed-point count."""
    def n_fps(c):
        return len(fixed_points_numeric(named_field("uniform", mu0, c), 10, 1e-11))

    cs = np.linspace(0.02, 0.64, 32)
    counts = [n_fps(float(c)) for c in cs]
    bracket = None
    for k in range(len(cs) - 1):
        if counts[k] < counts[k + 1]:
            bracket = (float(cs[k]), float(cs[k + 1]))
            break
    if bracket is None:
        raise ParamError(f"no fold bracket found at mu={mu0}")
    lo, hi = bracket  # fewer fixed points at lo
    for _ in range(25):
        mid = 0.5 * (lo + hi)
        if n_fps(mid) == counts[k]:
            lo = mid
        else:
            hi = mid
    # just on the many-fixed-points side the newborn pair is nearly merged
    fps = fixed_points_numeric(named_field("uniform", mu0, hi), 12, 1e-11)
    pair = min(
        (
            (math.hypot(a.x - b.x, a.y - b.y), a, b)
            for i, a in enumerate(fps)
            for b in fps[i + 1:]
        ),
        key=lambda t: t[0],
    )
    x0, y0 = 0.5 * (pair[1].x + pair[2].x), 0.5 * (pair[1].y + pair[2].y)

    def fixed_mu(u3):
        return _fold_residual_uniform((u3[0], u3[1], mu0, u3[2]))

    sol = _damped_newton_nd(fixed_mu, (x0, y0, 0.5 * (lo + hi)), tol=1e-11)
    if sol is None:
        raise ParamError(f"fold Newton did not converge at mu={mu0}")
    (x, y, c), _ = sol
    return np.array([x, y, mu0, c])


_FOLD_CACHE: dict[str, list] = {}


def fold_curve_uniform(step: float = 0.004, max_points: int = 400) -> list[FoldPoint]:
    """The uniform system's saddle-node branch, traced by pseudo-arclength
    continuation of (field, det J) = 0 in (x, y, mu, c).

    The branch is a single smooth curve in 4-space; its (mu, c) projection
    folds back at the cusp.  Results are cached per process.
    """
    key = f"{step}:{max_points}"
    if key in _FOLD_CACHE:
        return _FOLD_CACHE[key]
    u0 = _start_fold_uniform()
    points = [u0]

    def tangent(u, prefer=None):
        jac = _fd_jacobian(_fold_residual_uniform, u)
        _, _, vt = np.linalg.svd(jac)
        t = vt[-1]
        if prefer is not None and float(t @ prefer) < 0.0:
            t = -t
        return t / np.linalg.norm(t)

    for direction in (1.0, -1.0):
        u = u0.copy()
        t = tangent(u) * direction
        chain = []
        h = step
        for _ in range(max_points):
            pred = u + h * t

            def corr(v):
                r = _fold_residual_uniform(v)
                return (r[0], r[1], r[2], float(t @ (np.asarray(v) - pred)))

            sol = _damped_newton_nd(corr, pred, tol=1e-10)
            if sol is None:
                if h > step / 16.0:
                    h /= 2.0
                    continue
                break
            u_new = sol[0]
            x, y, mu, c = u_new
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0 and x + y <= 1.0):
                break
            if not (1e-5 <= mu <= 0.12 and 0.0 < c < 1.0):
                break
            chain.append(u_new)
            t = tangent(u_new, prefer=t)
            u = u_new
            h = min(step, h * 2.0)
        if direction > 0:
            forward = chain
        else:
            backward = chain
    ordered = list(reversed(backward)) + [u0] + forward
    records = [_fold_point_record(u) for u in ordered]
    _FOLD_CACHE[key] = records
    return records


def cusp_point() -> CodimTwoPoint:
    """Cusp of the uniform saddle-node branch: fold point whose quadratic
    normal-form coefficient vanishes."""
    branch = fold_curve_uniform()
    seed = None
    for a, b in zip(branch, branch[1:]):
        if a.quad_coeff * b.quad_coeff < 0.0:
            seed = (0.5 * (a.x + b.x), 0.5 * (a.y + b.y), 0.5 * (a.mu + b.mu), 0.5 * (a.c + b.c))
            break
    if seed is None:
        raise ParamError("no sign change of the fold quadratic coefficient found")

    def fun(u):
        r = _fold_residual_uniform(u)
        field = named_field("uniform", u[2], u[3])
        return (r[0], r[1], r[2], _fold_quad_coeff(field, u[0], u[1]))

    sol = _damped_newton_nd(fun, seed, tol=1e-9)
    if sol is None:
        raise ParamError("cusp Newton did not converge")
    (x, y, mu, c), res = sol
    return CodimTwoPoint("cusp", "uniform", mu, c, x, y, res)


# --------------------------------------------------------------------------
# region classification


@dataclass(frozen=True)
class RegionLabel:
    """Region id and attractor inventory at one (mu, c) point."""

    system_id: str
    mu: float
    c: float
    region_id: int | None
    inventory: frozenset[str]
    fixed_point_count: int
    cycle: LimitCycleRecord | None = None


def _region_id_from_inventory(system_id, inventory, n_fps, n_interior):
    inv = set(inventory)
    if system_id in ("tft_to_allc", "alld_to_allc"):
        if inv == {"almost_ALLD_point"}:
            return 1 if n_interior == 0 else 2
        if inv == {"almost_ALLD_point", "stable_cycle"}:
            return 3
        if inv == {"almost_ALLD_point", "stable_spiral"}:
            return 4
        return None
    if system_id == "uniform":
        if inv == {"almost_ALLD_point"}:
            return 1 if n_fps == 1 else 2
        if inv == {"almost_ALLD_point", "stable_cycle"}:
            return 3
        if inv == {"stable_cycle"}:
            return 4
        if inv == {"stable_spiral"}:
            return 5
        return None
    return None


def classify_region(
    system_id: str, mu: float, c: float, t_max: float = 3000.0
) -> RegionLabel:
    """Attractor inventory and region id at one parameter point.

    The inventory is built from the stable fixed points plus limit-cycle
    detection seeded near any interior unstable spiral; region ids follow
    the inventory signatures of the four- and five-region diagrams.
    """
    field = named_field(system_id, mu, c)
    fps = fixed_points(field)
    inventory = set()
    for r in fps:
        if r.classification.startswith("stable"):
            inventory.add("almost_ALLD_point" if r.x >= 0.6 else "stable_spiral")
    n_interior = sum(1 for r in fps if r.is_interior(1e-6))
    cycle = None
    has_unstable_spiral = any(
        r.is_interior(1e-6)
        and r.classification in ("unstable_spiral", "unstable_node")
        for r in fps
    )
    if has_unstable_spiral:
        cycle = detect_limit_cycle(
            field, t_max=t_max, return_tol=1e-7, rel_tol=1e-8, abs_tol=1e-10
        )
        if cycle is not None:
            inventory.add("stable_cycle")
    region = _region_id_from_inventory(system_id, inventory, len(fps), n_interior)
    return RegionLabel(
        system_id, mu, c, region, frozenset(inventory), len(fps), cycle
    )


# --------------------------------------------------------------------------
# stability diagram


@dataclass(frozen=True)
class BifurcationCurve:
    """One bifurcation curve sampled in the (mu, c) plane."""

    kind: str  # saddle_node | hopf | homoclinic
    system_id: str
    samples: tuple[tuple[float, float], ...]
    method: str  # closed_form | numeric_continuation | bisection


@dataclass(frozen=True)
class StabilityDiagram:
    system_id: str
    mu_window: tuple[float, float]
    c_window: tuple[float, float]
    curves: tuple[BifurcationCurve, ...]
    bt: CodimTwoPoint | None
    cusp: CodimTwoPoint | None
    labels: tuple[RegionLabel, ...]


def _hom_bracket(system_id, mu, bt_mu):
    margin = 2e-3
    if system_id == "tft_to_allc":
        return (hopf_curve_tft_allc(mu) + margin, sn_curve_tft_allc(mu) - margin)
    if system_id == "alld_to_allc":
        hi = sn_curve_alld_allc(mu) - margin
        if mu > bt_mu:
            hi = hopf_curve_alld_allc(mu) - margin
        return (5e-3, hi)
    raise ParamError(system_id)


def stability_diagram(
    system_id: str,
    mu_window: tuple[float, float] = (0.001, 0.4),
    c_window: tuple[float, float] = (0.001, 1.0),
    resolution: int = 200,
    grid_shape: tuple[int, int] = (0, 0),
    homoclinic_samples: int = 6,
    probe_points: list[tuple[float, float]] | None = None,
) -> StabilityDiagram:
    """Bifurcation curves, codimension-two points, and region labels.

    ``grid_shape`` classifies a regular grid (expensive); ``probe_points``
    classifies specific points.  Curves are clipped to the windows.
    """
    mu_lo, mu_hi = mu_window
    c_lo, c_hi = c_window
    curves: list[BifurcationCurve] = []
    bt = cp = None

    def clip(samples):
        return tuple(
            (m, c)
            for m, c in samples
            if mu_lo <= m <= mu_hi and c_lo <= c <= c_hi and math.isfinite(c)
        )

    if system_id in ("tft_to_allc", "alld_to_allc"):
        sn = sn_curve_tft_allc if system_id == "tft_to_allc" else sn_curve_alld_allc
        hopf = (
            hopf_curve_tft_allc if system_id == "tft_to_allc" else hopf_curve_alld_allc
        )
        mus = np.linspace(mu_lo, mu_hi, resolution)
        sn_samples = []
        for m in mus:
            try:
                sn_samples.append((float(m), sn(float(m))))
            except ParamError:
                continue
        curves.append(
            BifurcationCurve("saddle_node", system_id, clip(sn_samples), "closed_form")
        )
        hopf_samples = []
        for m in mus:
            try:
                hopf_samples.append((float(m), hopf(float(m))))
            except ParamError:
                continue
        curves.append(
            BifurcationCurve("hopf", system_id, clip(hopf_samples), "closed_form")
        )
        bt = bt_point(system_id)
        if homoclinic_samples > 0:
            hom_mus = np.linspace(max(mu_lo, 0.006), bt.mu * 0.9, homoclinic_samples)

            def hom_at(m):
                try:
                    res = homoclinic_trace(
                        system_id, float(m), _hom_bracket(system_id, float(m), bt.mu)
                    )
                    return (float(m), res.c)
                except ParamError:
                    return None

            hom_samples = [s for s in _parallel_map(hom_at, hom_mus) if s is not None]
            curves.append(
                BifurcationCurve("homoclinic", system_id, clip(hom_samples), "bisection")
            )
    elif system_id == "uniform":
        branch = fold_curve_uniform()
        sn_samples = [(p.mu, p.c) for p in branch]
        curves.append(
            BifurcationCurve(
                "saddle_node", system_id, clip(sn_samples), "numeric_continuation"
            )
        )
        hopf_samples = []
        for m in np.linspace(max(mu_lo, 5e-4), 0.0209, max(resolution // 8, 12)):
            try:
                hopf_samples.append(
                    (float(m), hopf_detect_numeric("uniform", float(m), (0.005, 0.45)))
                )
            except ParamError:
                continue
        curves.append(
            BifurcationCurve("hopf", system_id, clip(hopf_samples), "numeric_continuation")
        )
        bt = bt_point("uniform")
        cp = cusp_point()
        if homoclinic_samples > 0:
            lower = {round(p.mu, 6): p.c for p in branch if p.c < 0.3}

            def hom_at(m):
                m = float(m)
                sn_lo = min(
                    (p.c for p in branch if abs(p.mu - m) < 2e-3 and p.c < 0.3),
                    default=None,
                )
                sn_hi = max(
                    (p.c for p in branch if abs(p.mu - m) < 2e-3 and p.c > 0.3),
                    default=None,
                )
                if sn_lo is None or sn_hi is None:
                    return None
                try:
                    res = homoclinic_trace(
                        "uniform", m, (sn_lo + 5e-3, sn_hi - 5e-3)
                    )
                    return (m, res.c)
                except ParamError:
                    return None

            hom_mus = np.linspace(0.002, min(bt.mu * 0.9, 0.014), homoclinic_samples)
            hom_samples = [s for s in _parallel_map(hom_at, hom_mus) if s is not None]
            curves.append(
                BifurcationCurve("homoclinic", system_id, clip(hom_samples), "bisection")
            )
    else:
        raise ParamError(f"no stability diagram for system {system_id!r}")

    points = []
    if grid_shape[0] > 0 and grid_shape[1] > 0:
        for m in np.linspace(mu_lo, mu_hi, grid_shape[0]):
            for c in np.linspace(c_lo, c_hi, grid_shape[1]):
                points.append((float(m), float(c)))
    if probe_points:
        points.extend(probe_points)
    labels = tuple(
        _parallel_map(lambda p: classify_region(system_id, p[0], p[1]), points)
    )
    return StabilityDiagram(
        system_id, mu_window, c_window, tuple(curves), bt, cp, labels
    )


# --------------------------------------------------------------------------
# conjecture harness: random admissible mutation structures


def random_admissible_m(rng: np.random.Generator) -> np.ndarray:
    """Random M with non-positive off-diagonal entries and zero row sums,
    so Q = I - mu*M is row-stochastic and non-negative for small mu."""
    m = np.zeros((3, 3))
    off = rng.uniform(0.0, 1.0, size=6)
    k = 0
    for i in range(3):
        for j in range(3):
            if i != j:
                m[i, j] = -off[k]
                k += 1
        m[i, i] = -m[i].sum()
    return m


def conjecture_harness(
    n_matrices: int = 5,
    seed: int = 0,
    mu_values=(0.0002, 0.0005, 0.001, 0.002, 0.005, 0.01),
    c_values=(0.005, 0.01, 0.02, 0.03, 0.045),
    t_max: float = 1500.0,
) -> list[dict]:
    """Search for stable cycles under random admissible mutation structures.

    For each random M, scan small (mu, c) pairs and record whether a stable
    cycle was found.  Findings are reported, never asserted: the underlying
    question (does every admissible mutation structure spark cycles
    somewhere at small mu and c?) is open.
    """
    rng = np.random.default_rng(seed)
    reports = []
    for _ in range(n_matrices):
        m = random_admissible_m(rng)
        spec = MutationSpec(matrix=tuple(tuple(row) for row in m))
        finding = None
        for mu in mu_values:
            for c in c_values:
                params = ModelParams(cost=c, mu=mu)
                field = general_field(params, spec)
                fps = fixed_points_numeric(field, 10, 1e-11)
                if not any(
                    r.is_interior(1e-6)
                    and r.classification in ("unstable_spiral", "unstable_node")
                    for r in fps
                ):
                    continue
                try:
                    rec = detect_limit_cycle(
                        field, t_max=t_max, return_tol=1e-7, rel_tol=1e-8, abs_tol=1e-10
                    )
                except CycleUndeterminedError:
                    continue
                if rec is not None and rec.stable:
                    finding = {"mu": mu, "c": c, "period": rec.period}
                    break
            if finding:
                break
        reports.append(
            {
                "matrix": [[float(v) for v in row] for row in m],
                "cycle_found": finding is not None,
                "cycle": finding,
            }
        )
    return reports
