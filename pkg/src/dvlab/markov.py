"""Finite-state Markov jump processes: rate models, generators, stationary laws.

Transition rates k(x, y) are stored densely with a zero diagonal (a state
never jumps to itself).  The backward generator L acts on observables,

    L f(x) = sum_y k(x, y) [f(y) - f(x)],

its transpose drives the Master equation on probability vectors, and L*
denotes the generator of the time-reversed process with respect to the
stationary law rho.  Inner products between observables are weighted by
rho unless stated otherwise.  All values are immutable after construction
and every operation is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import config
from .errors import (
    DimensionMismatch,
    InvalidParameter,
    NotIrreducible,
    SolverFailure,
)


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(np.asarray(a, dtype=float))
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class RateModel:
    """Off-diagonal transition rates k(x, y) >= 0 on states 0..n-1.

    Optional bookkeeping travels with the model: human-readable state
    labels, a name, free-form metadata, and (for models built as
    detailed-balance dynamics) the declared equilibrium potential U with
    stationary law proportional to exp(-U).  None of the bookkeeping
    fields affect the dynamics.
    """

    rates: np.ndarray
    name: str = ""
    labels: tuple[str, ...] | None = None
    equilibrium_potential: np.ndarray | None = None
    metadata: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        k = np.array(self.rates, dtype=float)
        if k.ndim != 2 or k.shape[0] != k.shape[1]:
            raise InvalidParameter("rate matrix must be square")
        n = k.shape[0]
        if n < 2:
            raise InvalidParameter("a jump process needs at least two states")
        if not np.all(np.isfinite(k)):
            raise InvalidParameter("rates must be finite")
        np.fill_diagonal(k, 0.0)
        if np.any(k < 0):
            raise InvalidParameter("rates must be nonnegative")
        object.__setattr__(self, "rates", _readonly(k))
        if self.labels is not None:
            if len(self.labels) != n:
                raise InvalidParameter("label count does not match state count")
            if len(set(self.labels)) != n:
                raise InvalidParameter("state labels must be unique")
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        if self.equilibrium_potential is not None:
            u = np.asarray(self.equilibrium_potential, dtype=float)
            if u.shape != (n,):
                raise InvalidParameter("equilibrium potential length mismatch")
            if not np.all(np.isfinite(u)):
                raise InvalidParameter("equilibrium potential must be finite")
            object.__setattr__(self, "equilibrium_potential", _readonly(u))

    @property
    def n(self) -> int:
        return self.rates.shape[0]

    def state_labels(self) -> tuple[str, ...]:
        return self.labels if self.labels is not None else tuple(
            str(i + 1) for i in range(self.n)
        )

    @cached_property
    def escape_rates(self) -> np.ndarray:
        """Total rate of leaving each state, sum_y k(x, y)."""
        return _readonly(self.rates.sum(axis=1))

    @cached_property
    def irreducible(self) -> bool:
        """Strong connectivity of the digraph of strictly positive rates."""
        graph = csr_matrix((self.rates > 0).astype(np.int8))
        ncomp, _ = connected_components(graph, directed=True, connection="strong")
        return bool(ncomp == 1)

    @cached_property
    def backward_matrix(self) -> np.ndarray:
        m = self.rates.copy()
        np.fill_diagonal(m, -self.escape_rates)
        return _readonly(m)

    @cached_property
    def forward_matrix(self) -> np.ndarray:
        """Transpose of the backward generator; drives d(mu)/dt = A mu."""
        return _readonly(self.backward_matrix.T)

    @cached_property
    def stationary(self) -> "Distribution":
        return stationary_distribution(self)


@dataclass(frozen=True)
class Distribution:
    """Probability vector on the state set; normalized to machine tolerance."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1:
            raise InvalidParameter("weights must be a vector")
        if not np.all(np.isfinite(w)):
            raise InvalidParameter("weights must be finite")
        if np.any(w < 0):
            raise InvalidParameter("weights must be nonnegative")
        if abs(w.sum() - 1.0) > config.DEFAULT.structural:
            raise InvalidParameter(f"weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "weights", _readonly(w))

    @classmethod
    def normalized(cls, weights) -> "Distribution":
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if not np.isfinite(total) or total <= 0 or np.any(w < 0):
            raise InvalidParameter("cannot normalize nonpositive weight vector")
        return cls(w / total)

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def delta(cls, n: int, x: int) -> "Distribution":
        w = np.zeros(n)
        w[x] = 1.0
        return cls(w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def strictly_positive(self, floor: float = None) -> bool:
        if floor is None:
            floor = config.DEFAULT.positivity_floor
        return bool(np.all(self.weights >= floor))


@dataclass(frozen=True)
class Observable:
    """Real-valued function on states."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise InvalidParameter("observable values must be a vector")
        if not np.all(np.isfinite(v)):
            raise InvalidParameter("observable values must be finite")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def variation(self) -> float:
        """max_{x,y} |f(x) - f(y)|; zero exactly when f is constant."""
        return float(self.values.max() - self.values.min())


@dataclass(frozen=True)
class Generator:
    """Dense matrix realization of a generator acting on observables."""

    matrix: np.ndarray
    kind: str  # "backward" | "reversed" | "symmetric" | "forward-transpose"

    def __post_init__(self):
        object.__setattr__(self, "matrix", _readonly(self.matrix))

    def apply(self, f) -> np.ndarray:
        v = as_values(f)
        if v.shape[0] != self.matrix.shape[0]:
            raise DimensionMismatch(
                f"generator is {self.matrix.shape[0]}-dimensional, got {v.shape[0]}"
            )
        return self.matrix @ v


def as_values(f) -> np.ndarray:
    """Coerce an Observable, Distribution or array-like to a float vector."""
    if isinstance(f, Observable):
        return f.values
    if isinstance(f, Distribution):
        return f.weights
    return np.asarray(f, dtype=float)


def as_distribution(mu, n: int | None = None) -> Distribution:
    d = mu if isinstance(mu, Distribution) else Distribution(np.asarray(mu, float))
    if n is not None and d.n != n:
        raise DimensionMismatch(f"distribution has {d.n} states, model has {n}")
    return d


def stationary_distribution(model: RateModel, tol: config.Tolerances = config.DEFAULT) -> Distribution:
    """Unique stationary law of an irreducible model.

    Dense LU solve of the forward generator with one row replaced by the
    normalization constraint; deterministic and independent of any
    iteration order.
    """
    if not model.irreducible:
        raise NotIrreducible("positive-rate digraph is not strongly connected")
    a = model.forward_matrix
    # Null space must be one-dimensional for the solve to mean anything.
    svals = np.linalg.svd(a, compute_uv=False)
    scale = svals[0] if svals[0] > 0 else 1.0
    if svals[-2] <= 1e-12 * scale:
        raise SolverFailure("forward generator null space is not one-dimensional")
    m = a.copy()
    m[0, :] = 1.0
    b = np.zeros(model.n)
    b[0] = 1.0
    try:
        rho = np.linalg.solve(m, b)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure(f"stationary solve failed: {exc}") from exc
    if np.any(rho <= 0):
        raise SolverFailure("stationary solve produced nonpositive weights")
    rho = rho / rho.sum()
    residual = np.abs(a @ rho).max()
    if residual > tol.structural:
        raise SolverFailure(f"stationarity residual {residual:.3e} too large")
    return Distribution(rho)


def backward_generator(model: RateModel) -> Generator:
    return Generator(model.backward_matrix, "backward")


def forward_generator(model: RateModel) -> Generator:
    return Generator(model.forward_matrix, "forward-transpose")


def time_reversed_generator(model: RateModel, rho: Distribution | None = None) -> Generator:
    """Generator of the time-reversed process, L* f(x) = sum_y rho(y) k(y,x) / rho(x) [f(y) - f(x)]."""
    r = (rho or model.stationary).weights
    if r.shape[0] != model.n:
        raise DimensionMismatch("stationary law has wrong length")
    m = (model.rates.T * r[None, :]) / r[:, None]
    np.fill_diagonal(m, 0.0)
    np.fill_diagonal(m, -m.sum(axis=1))
    return Generator(m, "reversed")


def symmetric_part(model: RateModel, rho: Distribution | None = None) -> Generator:
    """L_s = (L + L*)/2, self-adjoint in the rho-weighted inner product."""
    rho = rho or model.stationary
    ls = 0.5 * (model.backward_matrix + time_reversed_generator(model, rho).matrix)
    return Generator(ls, "symmetric")


def rho_inner(f, g, rho) -> float:
    """Stationary-weighted scalar product sum_x f(x) g(x) rho(x)."""
    fv, gv, rv = as_values(f), as_values(g), as_values(rho)
    if not (fv.shape == gv.shape == rv.shape):
        raise DimensionMismatch(
            f"shapes {fv.shape}, {gv.shape}, {rv.shape} do not agree"
        )
    return float(np.sum(fv * gv * rv))


def rho_norm(f, rho) -> float:
    return float(np.sqrt(max(rho_inner(f, f, rho), 0.0)))


def project_zero_mean(f, rho) -> np.ndarray:
    """Remove the rho-mean component: f - (sum_x rho(x) f(x))."""
    fv, rv = as_values(f), as_values(rho)
    return fv - float(np.dot(rv, fv))


def current(mu, model: RateModel) -> np.ndarray:
    """Probability current matrix j_mu(x, y) = k(x, y) mu(x) - k(y, x) mu(y).

    Antisymmetric by construction; its row sums are the negative of the
    Master-equation right-hand side, and vanish at the stationary law.
    """
    w = as_values(mu)
    if w.shape[0] != model.n:
        raise DimensionMismatch("distribution length does not match model")
    flow = model.rates * w[:, None]
    return flow - flow.T
