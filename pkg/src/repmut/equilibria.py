"""Fixed points of the reduced fields: closed forms, Newton search, stability.

The pairwise-mutation systems and the pure replicator admit closed-form
fixed points (quadratic in the radicals below); the uniform system and
arbitrary mutation matrices are handled by a damped-Newton multistart over
a simplex lattice.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .dynamics import VectorField, named_field
from .model import ParamError

_RESIDUAL_TOL = 1e-12
_DEDUP_TOL = 1e-7
_SIMPLEX_TOL = 1e-9
_IMAG_TOL = 1e-9

CLASSIFICATIONS = (
    "stable_node",
    "unstable_node",
    "stable_spiral",
    "unstable_spiral",
    "saddle",
    "nonhyperbolic",
)


@dataclass(frozen=True)
class EquilibriumReport:
    """A fixed point with its linearization data.

    ``provenance`` is "closed_form" or "numeric".  ``continuum`` marks points
    that sit on a curve of equilibria (zero eigenvalue and the field also
    vanishes a short distance along the null direction), e.g. the x=0 edge
    at mu = 0, cost = 0.
    """

    x: float
    y: float
    eigenvalues: tuple[complex, complex]
    classification: str
    residual: float
    provenance: str
    continuum: bool = False

    @property
    def z(self) -> float:
        return 1.0 - self.x - self.y

    def is_interior(self, tol: float = 1e-7) -> bool:
        return self.x > tol and self.y > tol and self.z > tol


def classify(eigenvalues: tuple[complex, complex]) -> str:
    """Map a 2x2 spectrum to its phase-portrait type.

    Nonhyperbolic means the leading real part is within 1e-9 of zero.
    """
    e1, e2 = eigenvalues
    max_re = max(e1.real, e2.real)
    if abs(max_re) < 1e-9:
        return "nonhyperbolic"
    if e1.real * e2.real < 0.0 and abs(e1.imag) < _IMAG_TOL:
        return "saddle"
    kind = "spiral" if abs(e1.imag) > _IMAG_TOL else "node"
    stability = "unstable" if max_re > 0.0 else "stable"
    return f"{stability}_{kind}"


def _in_simplex(x: float, y: float, tol: float = _SIMPLEX_TOL) -> bool:
    return x >= -tol and y >= -tol and x + y <= 1.0 + tol


def _report(field: VectorField, x: float, y: float, provenance: str) -> EquilibriumReport:
    fx, fy = field(x, y)
    jac = field.jacobian(x, y)
    eigs = jac.eigenvalues()
    cls = classify(eigs)
    continuum = False
    if min(abs(eigs[0]), abs(eigs[1])) < 1e-9:
        # a genuine continuum keeps the field zero along the null eigenvector
        e1, e2 = eigs
        lam = e1 if abs(e1) < abs(e2) else e2
        a, b = jac.dxx - lam.real, jac.dxy
        c_, d = jac.dyx, jac.dyy - lam.real
        if math.hypot(a, b) >= math.hypot(c_, d):
            v = (-b, a)
        else:
            v = (-d, c_)
        nv = math.hypot(*v)
        if nv > 1e-12:
            eps = 1e-4
            px, py = x + eps * v[0] / nv, y + eps * v[1] / nv
            if _in_simplex(px, py, 1e-3):
                gx, gy = field(px, py)
                continuum = math.hypot(gx, gy) < 1e-10
    return EquilibriumReport(
        x, y, eigs, cls, math.hypot(fx, fy), provenance, continuum
    )


def newton_refine(field, x0: float, y0: float, tol: float = _RESIDUAL_TOL,
                  max_iter: int = 80):
    """Damped Newton on the field; returns (x, y, residual) or None."""
    x, y = float(x0), float(y0)
    fx, fy = field(x, y)
    res = math.hypot(fx, fy)
    for _ in range(max_iter):
        if res < tol:
            return x, y, res
        j = field.jacobian(x, y)
        det = j.det
        if abs(det) < 1e-15:
            return None
        dx = (-fx * j.dyy + fy * j.dxy) / det
        dy = (-j.dxx * fy + j.dyx * fx) / det
        lam = 1.0
        improved = False
        for _ in range(40):
            xt, yt = x + lam * dx, y + lam * dy
            gx, gy = field(xt, yt)
            rt = math.hypot(gx, gy)
            if rt < res:
                x, y, fx, fy, res = xt, yt, gx, gy, rt
                improved = True
                break
            lam *= 0.5
        if not improved:
            return None
    return (x, y, res) if res < tol else None


def fixed_points_numeric(
    field, grid_density: int = 15, residual_tol: float = _RESIDUAL_TOL
) -> list[EquilibriumReport]:
    """Newton multistart from a triangular lattice over the closed simplex."""
    n = max(2, int(grid_density))
    found: list[tuple[float, float]] = []
    for i in range(n + 1):
        for j in range(n + 1 - i):
            sol = newton_refine(field, i / n, j / n, residual_tol)
            if sol is None:
                continue
            x, y, _ = sol
            if not _in_simplex(x, y):
                continue
            x = min(max(x, 0.0), 1.0)
            y = min(max(y, 0.0), 1.0)
            if all(math.hypot(x - px, y - py) > _DEDUP_TOL for px, py in found):
                found.append((x, y))
    found.sort()
    return [_report(field, x, y, "numeric") for x, y in found]


def _closed_form_tft_to_allc(mu: float, c: float) -> list[tuple[float, float]]:
    pts = [(0.0, 0.0), (1.0, 0.0)]
    a1 = cmath.sqrt(
        c * c * (mu + 3.0) ** 2 - 2.0 * c * ((mu - 11.0) * mu + 6.0) + (mu - 28.0) * mu + 4.0
    )
    for sgn in (1.0, -1.0):
        x = (sgn * a1 - 5.0 * c * mu + c + 17.0 * mu + 2.0) / (12.0 * mu + 4.0)
        y = (
            -sgn * (mu + 1.0) * a1
            - c * mu * mu
            + 8.0 * c * mu
            + c
            + mu * mu
            - mu
            + 2.0
        ) / (24.0 * mu + 8.0)
        pts.append((x, y))
    return pts


def _closed_form_alld_to_allc(mu: float, c: float) -> list[tuple[float, float]]:
    pts = [(0.0, 0.0), (0.0, 1.0)]
    x3 = (-4.0 * mu - math.sqrt(4.0 * mu * (4.0 * mu - 1.0) + 1.0) + 3.0) / 2.0
    pts.append((x3, 0.0))
    if abs(mu - 0.25) < 1e-9 or abs(mu - 1.0) < 1e-9:
        return pts  # denominators vanish; interior pair needs the numeric path
    a8 = cmath.sqrt(
        (4.0 * c * mu + c - 11.0 * mu + 2.0) ** 2
        + 8.0 * c * (4.0 * mu - 1.0) * (-c + mu + 2.0)
    )
    for sgn in (1.0, -1.0):
        x = (-4.0 * c * mu + sgn * a8 - c + 11.0 * mu - 2.0) / (16.0 * mu - 4.0)
        y = (
            8.0 * c * mu * mu
            - 10.0 * c * mu
            - sgn * (2.0 * mu - 1.0) * a8
            + c
            + 18.0 * mu * mu
            - 11.0 * mu
            + 2.0
        ) / (8.0 * (mu - 1.0) * (4.0 * mu - 1.0))
        pts.append((x, y))
    return pts


def _closed_form_replicator(c: float) -> list[tuple[float, float]]:
    pts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
    if c > 0.0:
        # in the simplex only for c <= 2 resp. c <= 2/3; filtered downstream
        pts.append(((2.0 - c) / 2.0, c / 2.0))  # ALLD-TFT edge point
        pts.append((c, (2.0 - c) / 4.0))  # interior point
    return pts


def fixed_points_closed_form(
    system_id: str, mu: float = 0.0, cost: float = 0.0
) -> list[EquilibriumReport]:
    """Closed-form fixed points for the systems that admit them.

    Complex or out-of-simplex roots are dropped; stability is recomputed
    from the analytic Jacobian rather than taken on faith.
    """
    c = cost
    if system_id == "replicator":
        candidates = [(complex(x), complex(y)) for x, y in _closed_form_replicator(c)]
    elif system_id == "tft_to_allc":
        candidates = [(complex(x), complex(y)) for x, y in _closed_form_tft_to_allc(mu, c)]
    elif system_id == "alld_to_allc":
        candidates = [(complex(x), complex(y)) for x, y in _closed_form_alld_to_allc(mu, c)]
    else:
        raise ParamError(
            f"no closed-form fixed points for system {system_id!r}; "
            "use fixed_points_numeric"
        )
    provenance = {
        "replicator": "closed_form",
        "tft_to_allc": "closed_form_A",
        "alld_to_allc": "closed_form_B",
    }[system_id]
    field = named_field(system_id, mu, c)
    out: list[EquilibriumReport] = []
    kept: list[tuple[float, float]] = []
    for xr, yr in candidates:
        if abs(xr.imag) > _IMAG_TOL or abs(yr.imag) > _IMAG_TOL:
            continue
        x, y = xr.real, yr.real
        if not _in_simplex(x, y):
            continue
        x = min(max(x, 0.0), 1.0)
        y = min(max(y, 0.0), 1.0)
        if any(math.hypot(x - px, y - py) < _DEDUP_TOL for px, py in kept):
            continue
        kept.append((x, y))
        out.append(_report(field, x, y, provenance))
    out.sort(key=lambda r: (r.x, r.y))
    return out


def fixed_points(field: VectorField, grid_density: int = 15) -> list[EquilibriumReport]:
    """Closed form when the system admits one, Newton multistart otherwise."""
    if field.system_id in ("replicator", "tft_to_allc", "alld_to_allc"):
        return fixed_points_closed_form(field.system_id, field.mu, field.cost)
    return fixed_points_numeric(field, grid_density)


def interior_spiral(field: VectorField, grid_density: int = 15):
    """The interior fixed point with complex eigenvalues, or None.

    This is the point a limit cycle must enclose; used to anchor the
    Poincare section.
    """
    for rep in fixed_points(field, grid_density):
        if rep.is_interior() and abs(rep.eigenvalues[0].imag) > _IMAG_TOL:
            return rep
    return None


@dataclass(frozen=True)
class ClosedFormScratch:
    """Intermediate radicals of the closed-form fixed-point formulas.

    Only the entries meaningful for the requested system are populated
    (a1 for tft_to_allc, a8 for alld_to_allc); the Hopf-curve scratch
    values a2..a7, a9, a10 live in the bifurcation module.
    """

    a1: complex | None = None
    a8: complex | None = None


def closed_form_scratch(system_id: str, mu: float, cost: float) -> ClosedFormScratch:
    c = cost
    if system_id == "tft_to_allc":
        rad = (
            c * c * (mu + 3.0) ** 2
            - 2.0 * c * ((mu - 11.0) * mu + 6.0)
            + (mu - 28.0) * mu
            + 4.0
        )
        return ClosedFormScratch(a1=cmath.sqrt(rad))
    if system_id == "alld_to_allc":
        rad = (4.0 * c * mu + c - 11.0 * mu + 2.0) ** 2 + 8.0 * c * (
            4.0 * mu - 1.0
        ) * (-c + mu + 2.0)
        return ClosedFormScratch(a8=cmath.sqrt(rad))
    raise ParamError(f"no closed-form scratch for system {system_id!r}")


def closed_form_candidates(
    system_id: str, mu: float = 0.0, cost: float = 0.0
) -> list[tuple[complex, complex]]:
    """Raw closed-form roots as complex pairs, before any filtering."""
    if system_id == "replicator":
        pts = _closed_form_replicator(cost)
    elif system_id == "tft_to_allc":
        pts = _closed_form_tft_to_allc(mu, cost)
    elif system_id == "alld_to_allc":
        pts = _closed_form_alld_to_allc(mu, cost)
    else:
        raise ParamError(f"no closed-form fixed points for system {system_id!r}")
    return [(complex(x), complex(y)) for x, y in pts]
