"""Simplex projection, CSV/JSON/SVG emission, and the command-line surface.

The simplex is drawn in planar coordinates X = x + y/2, Y = (sqrt(3)/2) y,
mapping the three pure strategies to the corners of an equilateral triangle
(ALLD bottom-right at (1,0), TFT top at (1/2, sqrt(3)/2), ALLC bottom-left
at (0,0)).  All SVG output is self-contained with a fixed 800x700 viewport;
CSV uses 17 significant digits so doubles round-trip exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .bifurcation import (
    classify_region,
    conjecture_harness,
    homoclinic_trace,
    stability_diagram,
)
from .cycles import CycleUndeterminedError, cycle_metrics, detect_limit_cycle
from .dynamics import NAMED_SYSTEMS, field_from_config, named_field
from .equilibria import fixed_points
from .integrator import SimplexEscapeError, StepSizeUnderflowError, integrate
from .model import InadmissibleMutationError, ParamError, SimplexState, load_config

_SQRT3 = math.sqrt(3.0)

__all__ = [
    "ProjectedPoint",
    "simplex_project",
    "render_phase_portrait",
    "diagram_to_json",
    "diagram_to_svg",
    "cli_main",
    "main",
]


@dataclass(frozen=True)
class ProjectedPoint:
    """Planar plot coordinates of a simplex point."""

    X: float
    Y: float


def simplex_project(x: float, y: float) -> ProjectedPoint:
    """Affine projection of simplex coordinates onto the plot triangle."""
    return ProjectedPoint(x + y / 2.0, _SQRT3 / 2.0 * y)


# --------------------------------------------------------------------------
# SVG primitives

_W, _H = 800, 700


def _svg_doc(body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">\n'
        f'<rect width="{_W}" height="{_H}" fill="white"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def _fmt(v: float) -> str:
    return f"{v:.3f}"


class _TriangleMap:
    """Maps projected (X, Y) into the SVG viewport with margins."""

    def __init__(self, margin=70.0):
        self.margin = margin
        span_x, span_y = 1.0, _SQRT3 / 2.0
        self.scale = min((_W - 2 * margin) / span_x, (_H - 2 * margin) / span_y)
        self.x0 = (_W - self.scale * span_x) / 2.0
        self.y0 = (_H + self.scale * span_y) / 2.0

    def pt(self, x, y):
        p = simplex_project(x, y)
        return self.x0 + self.scale * p.X, self.y0 - self.scale * p.Y


_CLASS_STYLE = {
    "stable_node": ("#000000", "filled"),
    "stable_spiral": ("#000000", "filled"),
    "unstable_node": ("#000000", "open"),
    "unstable_spiral": ("#000000", "open"),
    "saddle": ("#555555", "half"),
    "nonhyperbolic": ("#888888", "open"),
}


def _fp_marker(cx, cy, classification):
    color, style = _CLASS_STYLE.get(classification, ("#888888", "open"))
    if style == "filled":
        return f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="6" fill="{color}"/>'
    if style == "open":
        return (
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="6" fill="white" '
            f'stroke="{color}" stroke-width="2"/>'
        )
    return (
        f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="6" fill="white" '
        f'stroke="{color}" stroke-width="2"/>'
        f'<path d="M {_fmt(cx - 6)} {_fmt(cy)} A 6 6 0 0 1 {_fmt(cx + 6)} {_fmt(cy)} Z" '
        f'fill="{color}"/>'
    )


def _polyline(points, color, width, dash=None, close=False):
    d = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in points)
    tag = "polygon" if close else "polyline"
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (
        f'<{tag} points="{d}" fill="none" stroke="{color}" '
        f'stroke-width="{width}"{dash_attr}/>'
    )


def render_phase_portrait(
    field,
    starts,
    t_max: float = 2000.0,
    with_cycle: bool = True,
    title: str | None = None,
) -> str:
    """Self-contained SVG phase portrait in projected simplex coordinates.

    Trajectories from ``starts`` are drawn in grey, a detected stable limit
    cycle in red, and fixed points as markers keyed to their classification
    (filled = stable, open = unstable, half-filled = saddle).  Stretches of
    boundary equilibria (continua) show up through edge sampling.
    """
    tm = _TriangleMap()
    body = []
    corners = [tm.pt(1.0, 0.0), tm.pt(0.0, 1.0), tm.pt(0.0, 0.0)]
    body.append(_polyline(corners, "#333333", 1.5, close=True))
    for (cx, cy), name, (dx, dy) in zip(
        corners, ("ALLD", "TFT", "ALLC"), ((18, 6), (0, -14), (-18, 6))
    ):
        anchor = {"ALLD": "start", "TFT": "middle", "ALLC": "end"}[name]
        body.append(
            f'<text x="{_fmt(cx + dx)}" y="{_fmt(cy + dy)}" text-anchor="{anchor}" '
            f'font-family="sans-serif" font-size="18">{name}</text>'
        )
    if title:
        body.append(
            f'<text x="{_W / 2}" y="30" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{title}</text>'
        )

    for s in starts:
        traj = integrate(field, s, t_max=t_max)
        pts = [tm.pt(row[0], row[1]) for row in traj.states[:: max(1, len(traj) // 1500)]]
        if len(pts) >= 2:
            body.append(_polyline(pts, "#8899aa", 1.0))

    cycle = None
    if with_cycle:
        try:
            cycle = detect_limit_cycle(field, t_max=max(t_max, 2500.0))
        except CycleUndeterminedError:
            cycle = None
    if cycle is not None:
        pts = [tm.pt(row[0], row[1]) for row in cycle.states]
        body.append(_polyline(pts, "#cc0000", 2.5, close=True))

    for rep in fixed_points(field):
        cx, cy = tm.pt(rep.x, rep.y)
        body.append(_fp_marker(cx, cy, rep.classification))
    # boundary continua: sample each edge for additional equilibria
    edge_param = np.linspace(0.02, 0.98, 41)
    for edge in range(3):
        for s in edge_param:
            if edge == 0:
                x, y = float(s), 0.0
            elif edge == 1:
                x, y = 0.0, float(s)
            else:
                x, y = float(s), 1.0 - float(s)
            fx, fy = field(x, y)
            if math.hypot(fx, fy) < 1e-12:
                cx, cy = tm.pt(x, y)
                body.append(
                    f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="2.2" fill="#888888"/>'
                )
    return _svg_doc(body)


# --------------------------------------------------------------------------
# diagram emission

_CURVE_STYLE = {
    "saddle_node": ("#1155cc", None),
    "hopf": ("#cc0000", None),
    "homoclinic": ("#11aa44", "7,5"),
}

_REGION_FILL = {
    1: "#d8e6f4",
    2: "#f4e3d0",
    3: "#f7d3d3",
    4: "#dcf0d8",
    5: "#ece0f4",
    None: "#f0f0f0",
}


def diagram_to_json(diagram) -> str:
    """Deterministic JSON serialization of a stability diagram."""
    payload = {
        "system": diagram.system_id,
        "mu_window": list(diagram.mu_window),
        "c_window": list(diagram.c_window),
        "curves": [
            {
                "kind": cv.kind,
                "method": cv.method,
                "samples": [[m, c] for m, c in cv.samples],
            }
            for cv in diagram.curves
        ],
        "bogdanov_takens": (
            {"mu": diagram.bt.mu, "c": diagram.bt.c, "x": diagram.bt.x, "y": diagram.bt.y}
            if diagram.bt
            else None
        ),
        "cusp": (
            {"mu": diagram.cusp.mu, "c": diagram.cusp.c, "x": diagram.cusp.x, "y": diagram.cusp.y}
            if diagram.cusp
            else None
        ),
        "labels": [
            {
                "mu": lb.mu,
                "c": lb.c,
                "region": lb.region_id,
                "inventory": sorted(lb.inventory),
            }
            for lb in diagram.labels
        ],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def diagram_to_svg(diagram) -> str:
    """Self-contained SVG of the (mu, c) stability diagram."""
    mu_lo, mu_hi = diagram.mu_window
    c_lo, c_hi = diagram.c_window
    margin = 80.0
    sx = (_W - 2 * margin) / (mu_hi - mu_lo)
    sy = (_H - 2 * margin) / (c_hi - c_lo)

    def pt(m, c):
        return margin + sx * (m - mu_lo), _H - margin - sy * (c - c_lo)

    body = []
    # region label grid as colored cells (if a grid was classified)
    labels = list(diagram.labels)
    if labels:
        mus = sorted({lb.mu for lb in labels})
        cs = sorted({lb.c for lb in labels})
        if len(mus) > 1 and len(cs) > 1:
            dm = (mus[-1] - mus[0]) / max(len(mus) - 1, 1)
            dc = (cs[-1] - cs[0]) / max(len(cs) - 1, 1)
            for lb in labels:
                x0, y0 = pt(lb.mu - dm / 2, lb.c + dc / 2)
                x1, y1 = pt(lb.mu + dm / 2, lb.c - dc / 2)
                fill = _REGION_FILL.get(lb.region_id, "#f0f0f0")
                body.append(
                    f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" '
                    f'height="{_fmt(y1 - y0)}" fill="{fill}"/>'
                )
    # axes
    body.append(
        _polyline([pt(mu_lo, c_hi), pt(mu_lo, c_lo), pt(mu_hi, c_lo)], "#333333", 1.5)
    )
    body.append(
        f'<text x="{_W / 2}" y="{_H - 25}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">mutation rate mu</text>'
    )
    body.append(
        f'<text x="25" y="{_H / 2}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="16" transform="rotate(-90 25 {_H / 2})">TFT complexity cost c</text>'
    )
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        m = mu_lo + frac * (mu_hi - mu_lo)
        c = c_lo + frac * (c_hi - c_lo)
        xm, ym = pt(m, c_lo)
        body.append(
            f'<text x="{_fmt(xm)}" y="{_fmt(ym + 20)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{m:.3g}</text>'
        )
        xc, yc = pt(mu_lo, c)
        body.append(
            f'<text x="{_fmt(xc - 8)}" y="{_fmt(yc + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12">{c:.3g}</text>'
        )
    for cv in diagram.curves:
        if len(cv.samples) < 2:
            continue
        color, dash = _CURVE_STYLE.get(cv.kind, ("#333333", None))
        body.append(_polyline([pt(m, c) for m, c in cv.samples], color, 2.0, dash=dash))
    for point, label in ((diagram.bt, "BT"), (diagram.cusp, "CP")):
        if point is None:
            continue
        cx, cy = pt(point.mu, point.c)
        body.append(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="5" fill="#000000"/>'
            f'<text x="{_fmt(cx + 9)}" y="{_fmt(cy - 9)}" font-family="sans-serif" '
            f'font-size="14" font-weight="bold">{label}</text>'
        )
    # legend
    ly = 40
    for kind, (color, dash) in _CURVE_STYLE.items():
        body.append(
            _polyline([(margin + 10, ly), (margin + 50, ly)], color, 2.0, dash=dash)
        )
        body.append(
            f'<text x="{margin + 58}" y="{ly + 5}" font-family="sans-serif" '
            f'font-size="13">{kind}</text>'
        )
        ly += 20
    return _svg_doc(body)


# --------------------------------------------------------------------------
# CSV / JSON helpers


def _write_text(path: str, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _csv_rows(header: str, rows) -> str:
    out = [header]
    for row in rows:
        out.append(",".join(f"{float(v):.17g}" for v in row))
    return "\n".join(out) + "\n"


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# --------------------------------------------------------------------------
# command-line interface


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="repmut",
        description=(
            "Replicator-mutator dynamics of the repeated Prisoner's Dilemma: "
            "simulation, equilibria, limit cycles, and bifurcation diagrams."
        ),
    )
    p.add_argument("--config", help="JSON config file (payoffs, cost, mu, mutation)")
    p.add_argument("--system", choices=NAMED_SYSTEMS, help="named system id")
    p.add_argument("--mu", type=float, default=None, help="mutation rate")
    p.add_argument("--cost", type=float, default=None, help="TFT complexity cost")
    p.add_argument("--seed", type=int, default=0, help="seed for random starts")
    p.add_argument("--out", default=".", help="output directory")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="integrate one trajectory to CSV")
    sp.add_argument("--start", default="0.3,0.3", help="initial x,y")
    sp.add_argument("--t-max", type=float, default=5000.0)

    pp = sub.add_parser("portrait", help="phase portrait SVG")
    pp.add_argument("--starts", type=int, default=8, help="number of random starts")
    pp.add_argument("--t-max", type=float, default=2000.0)

    sub.add_parser("equilibria", help="fixed points and classification to JSON")

    dp = sub.add_parser("diagram", help="stability diagram JSON + SVG")
    dp.add_argument("--mu-max", type=float, default=0.4)
    dp.add_argument("--c-max", type=float, default=1.0)
    dp.add_argument("--resolution", type=int, default=200)
    dp.add_argument("--grid", type=int, default=0, help="region-label grid size")

    hp = sub.add_parser("homoclinic", help="trace the homoclinic curve to CSV")
    hp.add_argument("--bracket", default=None, help="c bracket as lo,hi")
    hp.add_argument("--mu-values", default=None, help="comma-separated mu values")

    sub.add_parser("cycle", help="limit-cycle metrics JSON + orbit CSV")

    cp = sub.add_parser("conjecture", help="random mutation-structure cycle search")
    cp.add_argument("--matrices", type=int, default=5)
    return p


def _resolve_field(args):
    if args.config:
        params, spec = load_config(args.config)
        if args.mu is not None or args.cost is not None:
            raise ParamError("--mu/--cost conflict with --config; pick one source")
        return field_from_config(params, spec), params.mu, params.cost
    system = args.system or "replicator"
    mu = args.mu if args.mu is not None else 0.0
    cost = args.cost if args.cost is not None else 0.0
    return named_field(system, mu, cost), mu, cost


def _parse_pair(text, what):
    parts = text.split(",")
    if len(parts) != 2:
        raise ParamError(f"{what} must be two comma-separated numbers, got {text!r}")
    return float(parts[0]), float(parts[1])


def _random_starts(n, seed):
    rng = np.random.default_rng(seed)
    starts = []
    while len(starts) < n:
        x, y = rng.uniform(0.02, 0.95, size=2)
        if x + y < 0.97:
            starts.append(SimplexState(float(x), float(y)))
    return starts


def _cmd_simulate(args, out_dir):
    field, _, _ = _resolve_field(args)
    x, y = _parse_pair(args.start, "--start")
    traj = integrate(field, SimplexState(x, y), t_max=args.t_max)
    path = os.path.join(out_dir, "trajectory.csv")
    with open(path, "w", newline="") as fh:
        traj.to_csv(fh)
    final = traj.final_state()
    print(
        f"wrote {path}: {len(traj)} steps, terminal={traj.terminal_event}, "
        f"final=({final.x:.6g}, {final.y:.6g}, {final.z:.6g})"
    )
    return 0


def _cmd_portrait(args, out_dir):
    field, _, _ = _resolve_field(args)
    starts = _random_starts(args.starts, args.seed)
    svg = render_phase_portrait(
        field,
        starts,
        t_max=args.t_max,
        title=f"{field.system_id}  mu={field.mu:g}  c={field.cost:g}",
    )
    path = os.path.join(out_dir, "portrait.svg")
    _write_text(path, svg)
    print(f"wrote {path}")
    return 0


def _cmd_equilibria(args, out_dir):
    field, _, _ = _resolve_field(args)
    reports = fixed_points(field)
    payload = [
        {
            "x": r.x,
            "y": r.y,
            "z": r.z,
            "classification": r.classification,
            "eigenvalues": [[e.real, e.imag] for e in r.eigenvalues],
            "residual": r.residual,
            "provenance": r.provenance,
            "continuum": r.continuum,
        }
        for r in reports
    ]
    path = os.path.join(out_dir, "equilibria.json")
    _write_text(path, _json_text(payload))
    print(f"wrote {path}: {len(reports)} fixed points")
    return 0


def _cmd_diagram(args, out_dir):
    system = args.system or "uniform"
    grid = (args.grid, args.grid) if args.grid > 0 else (0, 0)
    diagram = stability_diagram(
        system,
        mu_window=(0.001, args.mu_max),
        c_window=(0.001, args.c_max),
        resolution=args.resolution,
        grid_shape=grid,
    )
    jpath = os.path.join(out_dir, f"diagram_{system}.json")
    spath = os.path.join(out_dir, f"diagram_{system}.svg")
    _write_text(jpath, diagram_to_json(diagram))
    _write_text(spath, diagram_to_svg(diagram))
    print(f"wrote {jpath} and {spath}")
    return 0


def _cmd_homoclinic(args, out_dir):
    system = args.system or "tft_to_allc"
    if args.mu_values:
        mus = [float(v) for v in args.mu_values.split(",")]
    else:
        mus = [0.01, 0.02, 0.03, 0.04, 0.05]
    rows = []
    for mu in mus:
        if args.bracket:
            bracket = _parse_pair(args.bracket, "--bracket")
        else:
            from .bifurcation import bt_point, _hom_bracket

            bracket = _hom_bracket(system, mu, bt_point(system).mu)
        res = homoclinic_trace(system, mu, bracket)
        rows.append((mu, res.c))
    path = os.path.join(out_dir, f"homoclinic_{system}.csv")
    _write_text(path, _csv_rows("mu,c", rows))
    print(f"wrote {path}: {len(rows)} points")
    return 0


def _cmd_cycle(args, out_dir):
    field, _, _ = _resolve_field(args)
    record = detect_limit_cycle(field)
    if record is None:
        print("no limit cycle: the probe orbit converges to a fixed point")
        _write_text(
            os.path.join(out_dir, "cycle.json"), _json_text({"cycle": None})
        )
        return 0
    metrics = cycle_metrics(record)
    metrics["rotation"] = list(metrics["rotation"])
    _write_text(os.path.join(out_dir, "cycle.json"), _json_text({"cycle": metrics}))
    orbit_rows = np.column_stack([record.times, record.states])
    _write_text(os.path.join(out_dir, "cycle_orbit.csv"), _csv_rows("t,x,y,z", orbit_rows))
    print(
        f"stable cycle: period={metrics['period']:.6g}, "
        f"cooperation mean={metrics['cooperation_mean']:.4f}"
    )
    return 0


def _cmd_conjecture(args, out_dir):
    reports = conjecture_harness(n_matrices=args.matrices, seed=args.seed)
    path = os.path.join(out_dir, "conjecture.json")
    _write_text(path, _json_text(reports))
    found = sum(1 for r in reports if r["cycle_found"])
    print(
        f"wrote {path}: stable cycles found for {found} of {len(reports)} random "
        "mutation structures (reported, not asserted)"
    )
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "portrait": _cmd_portrait,
    "equilibria": _cmd_equilibria,
    "diagram": _cmd_diagram,
    "homoclinic": _cmd_homoclinic,
    "cycle": _cmd_cycle,
    "conjecture": _cmd_conjecture,
}


def cli_main(argv=None) -> int:
    """Entry point: 0 on success, 1 on usage error, 2 on numerical failure."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    out_dir = args.out
    try:
        os.makedirs(out_dir, exist_ok=True)
        return _COMMANDS[args.command](args, out_dir)
    except (ParamError, InadmissibleMutationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (
        CycleUndeterminedError,
        SimplexEscapeError,
        StepSizeUnderflowError,
        np.linalg.LinAlgError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())
