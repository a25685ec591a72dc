"""Game model: payoffs, simplex states, fitness, and mutation structure.

Strategies are indexed 0=ALLD, 1=TFT, 2=ALLC throughout.  TFT pays a
complexity cost ``cost`` per round, subtracted from its row of the repeated
Prisoner's Dilemma payoff matrix.  Mutation is encoded as a row-stochastic
matrix Q = I - mu*M where M has zero row sums.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

STRATEGIES = ("ALLD", "TFT", "ALLC")
_STRATEGY_INDEX = {"alld": 0, "tft": 1, "allc": 2}


class ParamError(ValueError):
    """Raised for parameters outside the model's admissible ranges."""


class InadmissibleMutationError(ValueError):
    """Raised when Q = I - mu*M is not row-stochastic with entries in [0, 1]."""


def strategy_index(name: str) -> int:
    try:
        return _STRATEGY_INDEX[name.lower()]
    except KeyError:
        raise ParamError(f"unknown strategy {name!r}; expected one of {STRATEGIES}")


@dataclass(frozen=True)
class ModelParams:
    """Payoff and rate parameters.

    T, R, P, S are the one-shot Prisoner's Dilemma payoffs and must satisfy
    T > R > P > S and R > (T + S)/2.  ``cost`` is the per-round complexity
    cost of TFT, ``mu`` the mutation rate in [0, 1].
    """

    T: float = 5.0
    R: float = 3.0
    P: float = 1.0
    S: float = 0.0
    cost: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        if not (self.T > self.R > self.P > self.S):
            raise ParamError(
                f"payoffs must satisfy T > R > P > S, got "
                f"T={self.T}, R={self.R}, P={self.P}, S={self.S}"
            )
        if not (self.R > (self.T + self.S) / 2.0):
            raise ParamError(
                f"payoffs must satisfy R > (T+S)/2, got R={self.R}, "
                f"(T+S)/2={(self.T + self.S) / 2.0}"
            )
        if not (0.0 <= self.mu <= 1.0):
            raise ParamError(f"mu must lie in [0, 1], got {self.mu}")
        if not math.isfinite(self.cost):
            raise ParamError(f"cost must be finite, got {self.cost}")


_CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class SimplexState:
    """Point on the 2-simplex: frequencies (x, y, z) of (ALLD, TFT, ALLC).

    Stored in reduced coordinates (x, y) with z = 1 - x - y.  Coordinates may
    carry roundoff as large as 1e-12 below zero; they are clamped to 0 on
    read.  Larger violations are rejected at construction.
    """

    x: float
    y: float

    def __post_init__(self):
        x, y = float(self.x), float(self.y)
        z = 1.0 - x - y
        for name, v in (("x", x), ("y", y), ("z", z)):
            if not math.isfinite(v) or v < -_CLAMP_TOL or v > 1.0 + _CLAMP_TOL:
                raise ParamError(f"{name}={v} is not a simplex coordinate")
        object.__setattr__(self, "x", max(x, 0.0))
        object.__setattr__(self, "y", max(y, 0.0))

    @property
    def z(self) -> float:
        return max(1.0 - self.x - self.y, 0.0)

    @classmethod
    def from_xyz(cls, x: float, y: float, z: float) -> "SimplexState":
        total = x + y + z
        if not math.isclose(total, 1.0, rel_tol=0.0, abs_tol=1e-9):
            raise ParamError(f"frequencies must sum to 1, got {total}")
        return cls(x / total, y / total)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class FitnessVector:
    """Per-strategy expected payoffs (ALLD, TFT, ALLC) and the population mean."""

    f_x: float
    f_y: float
    f_z: float
    phi: float

    def as_array(self) -> np.ndarray:
        return np.array([self.f_x, self.f_y, self.f_z])


def payoff_matrix(params: ModelParams | None = None, cost: float | None = None) -> np.ndarray:
    """Per-round payoff matrix A[i][j] of strategy i against strategy j.

    ALLD earns P against itself and against TFT (TFT retaliates after the
    first round; per-round averages over a long repeated game), T against
    ALLC.  TFT earns P against ALLD, R against TFT/ALLC, minus its cost.
    ALLC earns S against ALLD and R otherwise.
    """
    if params is None:
        params = ModelParams()
    c = params.cost if cost is None else cost
    T, R, P, S = params.T, params.R, params.P, params.S
    return np.array(
        [
            [P, P, T],
            [P - c, R - c, R - c],
            [S, R, R],
        ]
    )


def fitness(
    state: SimplexState, cost: float = 0.0, params: ModelParams | None = None
) -> FitnessVector:
    """Fitness of each strategy at ``state`` and the population mean phi."""
    if params is None:
        params = ModelParams(cost=cost)
    a = payoff_matrix(params)
    freqs = state.as_array()
    f = a @ freqs
    return FitnessVector(f[0], f[1], f[2], float(f @ freqs))


_PATTERNS = {}


def _pattern_none() -> np.ndarray:
    return np.zeros((3, 3))


def _pattern_one_way(src: int, dst: int) -> np.ndarray:
    m = np.zeros((3, 3))
    m[src, src] = 1.0
    m[src, dst] = -1.0
    return m


def _pattern_uniform() -> np.ndarray:
    # Q = I - mu*M with diag 1-2mu, off-diagonals mu.
    return 3.0 * np.eye(3) - np.ones((3, 3))


_PATTERNS["none"] = _pattern_none()
_PATTERNS["uniform"] = _pattern_uniform()
for _s in STRATEGIES:
    for _d in STRATEGIES:
        if _s != _d:
            _PATTERNS[f"{_s.lower()}_to_{_d.lower()}"] = _pattern_one_way(
                strategy_index(_s), strategy_index(_d)
            )


@dataclass(frozen=True)
class MutationSpec:
    """Mutation structure M (zero row sums); Q(mu) = I - mu*M.

    Either a named ``pattern`` ("none", "uniform", "<src>_to_<dst>") or an
    explicit 3x3 ``matrix``.
    """

    pattern: str | None = None
    matrix: tuple[tuple[float, ...], ...] | None = field(default=None)

    def __post_init__(self):
        if (self.pattern is None) == (self.matrix is None):
            raise ParamError("specify exactly one of pattern or matrix")
        if self.pattern is not None and self.pattern not in _PATTERNS:
            raise ParamError(
                f"unknown mutation pattern {self.pattern!r}; "
                f"known: {sorted(_PATTERNS)}"
            )
        if self.matrix is not None:
            m = np.asarray(self.matrix, dtype=float)
            if m.shape != (3, 3):
                raise ParamError(f"mutation matrix must be 3x3, got shape {m.shape}")
            row_sums = m.sum(axis=1)
            if np.max(np.abs(row_sums)) > 1e-12:
                raise InadmissibleMutationError(
                    f"mutation matrix rows must sum to 0, got sums {row_sums}"
                )
            object.__setattr__(self, "matrix", tuple(tuple(row) for row in m))

    def m_matrix(self) -> np.ndarray:
        if self.pattern is not None:
            return _PATTERNS[self.pattern].copy()
        return np.asarray(self.matrix, dtype=float)


def mutation_q(spec: MutationSpec, mu: float) -> np.ndarray:
    """Row-stochastic transition matrix Q = I - mu*M.

    Raises InadmissibleMutationError if any entry falls outside [0, 1]
    (beyond 1e-12 roundoff, which is clamped) or a row sum drifts from 1.
    """
    m = spec.m_matrix()
    q = np.eye(3) - mu * m
    if np.any(q < -1e-12) or np.any(q > 1.0 + 1e-12):
        raise InadmissibleMutationError(
            f"Q = I - mu*M has entries outside [0, 1] at mu={mu}:\n{q}"
        )
    q = np.clip(q, 0.0, 1.0)
    row_sums = q.sum(axis=1)
    if np.max(np.abs(row_sums - 1.0)) > 1e-12:
        raise InadmissibleMutationError(
            f"Q rows must sum to 1, got sums {row_sums}"
        )
    return q


def load_config(source) -> tuple[ModelParams, MutationSpec]:
    """Build (ModelParams, MutationSpec) from a JSON config file or dict.

    Schema::

        {"payoffs": {"T":5,"R":3,"P":1,"S":0}, "cost": 0.2, "mu": 0.05,
         "mutation": {"pattern": "uniform"}}   # or {"matrix": [[...],...]}

    All keys optional; defaults are the standard payoffs, cost=0, mu=0,
    pattern="none".
    """
    if isinstance(source, dict):
        cfg = source
    else:
        with open(source) as fh:
            cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ParamError("config must be a JSON object")
    payoffs = cfg.get("payoffs", {})
    if not isinstance(payoffs, dict):
        raise ParamError("'payoffs' must be an object with keys T, R, P, S")
    unknown = set(payoffs) - {"T", "R", "P", "S"}
    if unknown:
        raise ParamError(f"unknown payoff keys: {sorted(unknown)}")
    params = ModelParams(
        T=float(payoffs.get("T", 5.0)),
        R=float(payoffs.get("R", 3.0)),
        P=float(payoffs.get("P", 1.0)),
        S=float(payoffs.get("S", 0.0)),
        cost=float(cfg.get("cost", 0.0)),
        mu=float(cfg.get("mu", 0.0)),
    )
    mut = cfg.get("mutation", {"pattern": "none"})
    if not isinstance(mut, dict):
        raise ParamError("'mutation' must be an object with 'pattern' or 'matrix'")
    if "matrix" in mut:
        spec = MutationSpec(matrix=tuple(tuple(float(v) for v in row) for row in mut["matrix"]))
    else:
        spec = MutationSpec(pattern=str(mut.get("pattern", "none")))
    mutation_q(spec, params.mu)  # fail fast on inadmissible (mu, M) pairs
    return params, spec
