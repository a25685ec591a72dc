"""Reduced planar vector fields on the simplex interior.

With z = 1 - x - y eliminated, the replicator-mutator equation
xdot_i = sum_j x_j f_j Q_ji - x_i phi becomes a planar cubic field in
(x, y).  The general form works for any row-stochastic Q; the named
systems (pure replicator, one-way TFT->ALLC and ALLD->ALLC mutation,
and uniform mutation) are hard-coded expansions of the same equation
for the default payoffs T,R,P,S = 5,3,1,0, kept as straight-line
polynomial code for speed in the integrator hot loop.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, MutationSpec, ParamError, payoff_matrix, mutation_q

NAMED_SYSTEMS = ("replicator", "tft_to_allc", "alld_to_allc", "uniform")

_SYSTEM_PATTERNS = {
    "replicator": "none",
    "tft_to_allc": "tft_to_allc",
    "alld_to_allc": "alld_to_allc",
    "uniform": "uniform",
}


@dataclass(frozen=True)
class JacobianMatrix:
    """2x2 Jacobian of the reduced field at a point."""

    dxx: float
    dxy: float
    dyx: float
    dyy: float

    @property
    def trace(self) -> float:
        return self.dxx + self.dyy

    @property
    def det(self) -> float:
        return self.dxx * self.dyy - self.dxy * self.dyx

    def eigenvalues(self) -> tuple[complex, complex]:
        disc = cmath.sqrt(complex(self.trace * self.trace - 4.0 * self.det))
        return ((self.trace + disc) / 2.0, (self.trace - disc) / 2.0)

    def as_array(self) -> np.ndarray:
        return np.array([[self.dxx, self.dxy], [self.dyx, self.dyy]])


class VectorField:
    """Planar field: call with (x, y) for (xdot, ydot); ``jacobian`` is analytic."""

    def __init__(self, system_id, mu, cost, rhs, jac):
        self.system_id = system_id
        self.mu = mu
        self.cost = cost
        self._rhs = rhs
        self._jac = jac

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        return self._rhs(x, y)

    def jacobian(self, x: float, y: float) -> JacobianMatrix:
        return JacobianMatrix(*self._jac(x, y))

    def __repr__(self):
        return (
            f"VectorField(system_id={self.system_id!r}, mu={self.mu}, "
            f"cost={self.cost})"
        )


def _make_replicator(mu, c):
    def rhs(x, y):
        return (
            x * ((c - 4.0) * y + x * (x + 3.0 * y - 3.0) + 2.0),
            y * (c * (y - 1.0) + x * (x + 3.0 * y - 1.0)),
        )

    def jac(x, y):
        return (
            (c - 4.0) * y + x * (x + 3.0 * y - 3.0) + 2.0 + x * (2.0 * x + 3.0 * y - 3.0),
            x * (c - 4.0 + 3.0 * x),
            y * (2.0 * x + 3.0 * y - 1.0),
            c * (2.0 * y - 1.0) + x * (x + 3.0 * y - 1.0) + 3.0 * x * y,
        )

    return rhs, jac


def _make_tft_to_allc(mu, c):
    def rhs(x, y):
        return (
            x * ((c - 4.0) * y + x * (x + 3.0 * y - 3.0) + 2.0),
            y * (c * (mu + y - 1.0) - 3.0 * mu + x * (2.0 * mu + x + 3.0 * y - 1.0)),
        )

    def jac(x, y):
        return (
            (c - 4.0) * y + x * (x + 3.0 * y - 3.0) + 2.0 + x * (2.0 * x + 3.0 * y - 3.0),
            x * (c - 4.0 + 3.0 * x),
            y * (2.0 * mu + 2.0 * x + 3.0 * y - 1.0),
            c * (mu + 2.0 * y - 1.0)
            - 3.0 * mu
            + x * (2.0 * mu + x + 3.0 * y - 1.0)
            + 3.0 * x * y,
        )

    return rhs, jac


def _make_alld_to_allc(mu, c):
    def rhs(x, y):
        return (
            x
            * (
                (c - 4.0) * y
                - 5.0 * mu
                + 4.0 * mu * (x + y)
                + x * (x + 3.0 * y - 3.0)
                + 2.0
            ),
            y * (c * (y - 1.0) + x * (x + 3.0 * y - 1.0)),
        )

    def jac(x, y):
        bracket = (
            (c - 4.0) * y
            - 5.0 * mu
            + 4.0 * mu * (x + y)
            + x * (x + 3.0 * y - 3.0)
            + 2.0
        )
        return (
            bracket + x * (4.0 * mu + 2.0 * x + 3.0 * y - 3.0),
            x * (c - 4.0 + 4.0 * mu + 3.0 * x),
            y * (2.0 * x + 3.0 * y - 1.0),
            c * (2.0 * y - 1.0) + x * (x + 3.0 * y - 1.0) + 3.0 * x * y,
        )

    return rhs, jac


def _make_uniform(mu, c):
    def rhs(x, y):
        return (
            mu * (x * (11.0 * x + 9.0 * y - 16.0) - c * y)
            + x * ((c - 4.0) * y + x * (x + 3.0 * y - 3.0) + 2.0)
            + 3.0 * mu,
            c * y * (2.0 * mu + y - 1.0)
            + 3.0 * mu
            + x * x * (y - mu)
            + x * (3.0 * y - 1.0) * (mu + y)
            - 9.0 * mu * y,
        )

    def jac(x, y):
        return (
            mu * (22.0 * x + 9.0 * y - 16.0)
            + (c - 4.0) * y
            + x * (x + 3.0 * y - 3.0)
            + 2.0
            + x * (2.0 * x + 3.0 * y - 3.0),
            mu * (9.0 * x - c) + x * (c - 4.0 + 3.0 * x),
            2.0 * x * (y - mu) + (3.0 * y - 1.0) * (mu + y),
            c * (2.0 * mu + 2.0 * y - 1.0)
            + x * x
            + 3.0 * x * (mu + y)
            + x * (3.0 * y - 1.0)
            - 9.0 * mu,
        )

    return rhs, jac


_MAKERS = {
    "replicator": _make_replicator,
    "tft_to_allc": _make_tft_to_allc,
    "alld_to_allc": _make_alld_to_allc,
    "uniform": _make_uniform,
}


def named_field(system_id: str, mu: float = 0.0, cost: float = 0.0) -> VectorField:
    """Hard-coded reduced field for one of the named systems (default payoffs)."""
    if system_id not in _MAKERS:
        raise ParamError(
            f"unknown system {system_id!r}; expected one of {NAMED_SYSTEMS}"
        )
    if system_id == "replicator" and mu != 0.0:
        raise ParamError("the replicator system has no mutation; mu must be 0")
    if not (0.0 <= mu <= 1.0):
        raise ParamError(f"mu must lie in [0, 1], got {mu}")
    rhs, jac = _MAKERS[system_id](float(mu), float(cost))
    return VectorField(system_id, float(mu), float(cost), rhs, jac)


def general_field(params: ModelParams, spec: MutationSpec) -> VectorField:
    """General replicator-mutator field for arbitrary payoffs and Q = I - mu*M."""
    a = payoff_matrix(params)
    q = mutation_q(spec, params.mu)

    def full(x, y):
        freqs = np.array([x, y, 1.0 - x - y])
        f = a @ freqs
        phi = float(freqs @ f)
        g = (freqs * f) @ q - freqs * phi
        return freqs, f, phi, g

    def rhs(x, y):
        _, _, _, g = full(x, y)
        return float(g[0]), float(g[1])

    dxdu = np.array([[1.0, 0.0, -1.0], [0.0, 1.0, -1.0]])  # d(freqs)/d(x, y)

    def jac(x, y):
        freqs = np.array([x, y, 1.0 - x - y])
        f = a @ freqs
        out = np.empty((2, 2))
        for col, dfreqs in enumerate(dxdu):
            df = a @ dfreqs
            dphi = float(dfreqs @ f + freqs @ df)
            dg = (dfreqs * f + freqs * df) @ q - dfreqs * (freqs @ f) - freqs * dphi
            out[:, col] = dg[:2]
        return out[0, 0], out[0, 1], out[1, 0], out[1, 1]

    return VectorField("general", params.mu, params.cost, rhs, jac)


def field_from_config(params: ModelParams, spec: MutationSpec) -> VectorField:
    """Pick the fast named field when the config matches one, else the general form."""
    default_payoffs = (params.T, params.R, params.P, params.S) == (5.0, 3.0, 1.0, 0.0)
    if default_payoffs and spec.pattern is not None:
        if spec.pattern == "none" or params.mu == 0.0:
            return named_field("replicator", 0.0, params.cost)
        if spec.pattern in _SYSTEM_PATTERNS.values():
            for sys_id, pat in _SYSTEM_PATTERNS.items():
                if pat == spec.pattern and sys_id != "replicator":
                    return named_field(sys_id, params.mu, params.cost)
    return general_field(params, spec)


def replicator_field(state, cost: float = 0.0) -> tuple[float, float]:
    """Pure replicator derivative (xdot, ydot) at a state, default payoffs."""
    f = named_field("replicator", 0.0, cost)
    return f(state.x, state.y)


def repmut_field(state, mu: float = 0.0, cost: float = 0.0, q=None, m=None):
    """General replicator-mutator derivative at a state, default payoffs.

    Supply either the row-stochastic ``q`` directly or the pattern matrix
    ``m`` (then q = I - mu*m).
    """
    if q is None:
        if m is None:
            raise ParamError("supply q or m")
        q = np.eye(3) - mu * np.asarray(m, dtype=float)
    q = np.asarray(q, dtype=float)
    a = payoff_matrix(ModelParams(cost=cost, mu=mu))
    freqs = np.array([state.x, state.y, 1.0 - state.x - state.y])
    fvals = a @ freqs
    phi = float(freqs @ fvals)
    g = (freqs * fvals) @ q - freqs * phi
    return float(g[0]), float(g[1])


def jacobian(field: VectorField, state) -> JacobianMatrix:
    """Analytic Jacobian of ``field`` at a state."""
    return field.jacobian(state.x, state.y)
