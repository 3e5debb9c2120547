"""Inverse stationarity: the potential that makes a given law stationary.

Tilting a rate model by a potential W multiplies each rate by
exp([W(y) - W(x)]/2).  For every strictly positive distribution mu on an
irreducible model there is a unique (modulo additive constants) potential
V_mu whose tilted dynamics leaves mu invariant.  It is found here as the
minimizer of the strictly convex escape-rate functional

    Y_mu(W) = sum_{x,y} mu(x) k(x, y) exp([W(y) - W(x)]/2),

whose gradient is (minus one half of) the stationarity residual of mu
under the tilted rates.  The solver is a damped Newton iteration on the
gauge-reduced coordinates W(1..n-1), with W at the root state pinned to
zero; the Hessian is one quarter of the graph Laplacian of the
symmetrized tilted flows, hence positive definite on the reduced space.

Gauge convention: potentials are reported with V(root) = 0, root = state 0.
The zero-stationary-mean representative is V - sum_x rho(x) V(x).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import config
from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NonPositiveDistribution,
    NonZeroMean,
    NotIrreducible,
    SolverFailure,
)
from .markov import (
    Distribution,
    Observable,
    RateModel,
    as_distribution,
    as_values,
    symmetric_part,
    time_reversed_generator,
)


@dataclass(frozen=True)
class Potential:
    """Function on states identified modulo an additive constant.

    Stored gauge-fixed: the value at the root state (index 0) is zero.
    """

    values: np.ndarray
    gauge: str = "root-zero"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise DimensionMismatch("potential must be a finite vector")
        v = v - v[0]
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def variation(self) -> float:
        return float(self.values.max() - self.values.min())

    def differences(self) -> np.ndarray:
        """Matrix of V(y) - V(x), the gauge-invariant content."""
        v = self.values
        return v[None, :] - v[:, None]

    def zero_mean_values(self, rho) -> np.ndarray:
        r = as_values(rho)
        return self.values - float(np.dot(r, self.values))


def tilted_rates(model: RateModel, potential) -> np.ndarray:
    v = as_values(potential) if not isinstance(potential, Potential) else potential.values
    if v.shape[0] != model.n:
        raise DimensionMismatch("potential length does not match model")
    return model.rates * np.exp(0.5 * (v[None, :] - v[:, None]))


@dataclass(frozen=True)
class TiltedModel:
    """A base model together with a tilting potential."""

    base: RateModel
    potential: Potential

    @cached_property
    def rates(self) -> np.ndarray:
        return tilted_rates(self.base, self.potential)

    def as_model(self) -> RateModel:
        name = f"{self.base.name}+tilt" if self.base.name else "tilted"
        return RateModel(self.rates, name=name, labels=self.base.labels)


def y_functional(mu, potential, model: RateModel) -> float:
    """Expected escape rate of mu under the tilted rates.

    Convex in the potential and invariant under adding a constant to it;
    at zero potential it reduces to the dynamical activity of mu.
    """
    d = as_distribution(mu, model.n)
    if not d.strictly_positive():
        raise NonPositiveDistribution("expected a strictly positive distribution")
    kw = tilted_rates(model, potential)
    return float(np.sum(d.weights[:, None] * kw))


def stationarity_residual(mu, potential, model: RateModel) -> np.ndarray:
    """Componentwise net outflow of mu under the tilted rates."""
    w = as_values(mu)
    kw = tilted_rates(model, potential)
    return w * kw.sum(axis=1) - kw.T @ w


def _newton(w0: np.ndarray, mu: np.ndarray, model: RateModel, tol: config.Tolerances,
            max_iter: int) -> tuple[np.ndarray, bool]:
    """Damped Newton descent of Y_mu starting from w0 (root coordinate fixed)."""
    w = w0 - w0[0]
    for _ in range(max_iter):
        diff = 0.5 * (w[None, :] - w[:, None])
        kw = model.rates * np.exp(diff)
        out = mu * kw.sum(axis=1)
        inflow = kw.T @ mu
        residual = out - inflow
        if np.abs(residual).max() < tol.newton_residual:
            return w, True
        y0 = out.sum()
        grad = -0.5 * residual
        flow = mu[:, None] * kw
        sym = flow + flow.T
        hess = 0.25 * (np.diag(sym.sum(axis=1)) - sym)
        hred = hess[1:, 1:]
        gred = grad[1:]
        try:
            step = np.linalg.solve(hred, -gred)
        except np.linalg.LinAlgError:
            hred = hred + (1e-14 * np.trace(hred) + 1e-300) * np.eye(hred.shape[0])
            step = np.linalg.solve(hred, -gred)
        slope = float(gred @ step)
        t = 1.0
        trial = w.copy()
        while True:
            trial[1:] = w[1:] + t * step
            d2 = 0.5 * (trial[None, :] - trial[:, None])
            y_trial = float(np.sum(mu[:, None] * model.rates * np.exp(d2)))
            if y_trial <= y0 + 1e-4 * t * slope:
                break
            t *= 0.5
            if t < 1e-14:
                return w, False  # stalled; caller may restart elsewhere
        w = trial
    return w, False


def solve_potential(mu, model: RateModel, tol: config.Tolerances = config.DEFAULT,
                    initial: np.ndarray | None = None) -> Potential:
    """Potential V_mu making mu stationary under the tilted rates.

    Unique modulo constants on irreducible models; returned gauge-fixed
    with V(0) = 0.  Convergence is declared on the physical criterion,
    the max-norm stationarity residual, not on the gradient of Y (the
    two coincide up to a factor one half).

    Starts from W = 0 (optionally from `initial`, e.g. a warm start from
    a nearby distribution); if the line search stalls the solve restarts
    once from log(mu/rho).
    """
    d = as_distribution(mu, model.n)
    if not d.strictly_positive(tol.positivity_floor):
        raise NonPositiveDistribution(
            f"solve_potential needs all components >= {tol.positivity_floor}"
        )
    if not model.irreducible:
        raise NotIrreducible("the inverse stationarity problem needs irreducibility")
    w = d.weights
    starts = []
    if initial is not None:
        init = np.asarray(initial, dtype=float)
        if init.shape != (model.n,):
            raise DimensionMismatch("initial potential length mismatch")
        starts.append(init)
    starts.append(np.zeros(model.n))
    starts.append(np.log(w / model.stationary.weights))
    max_iter = tol.newton_max_iter
    for w0 in starts:
        sol, ok = _newton(w0, w, model, tol, max_iter)
        if ok:
            return Potential(sol)
    raise ConvergenceFailure(
        f"stationarity residual did not reach {tol.newton_residual} in "
        f"{max_iter} iterations"
    )


def linearized_potential(h, model: RateModel, tol: config.Tolerances = config.DEFAULT) -> Observable:
    """First-order potential response v solving L_s v = L* h.

    For mu = rho (1 + eps h) with a zero-stationary-mean h, the exact
    potential is eps v + O(eps^2).  The solution is unique on the
    zero-mean subspace and is returned with zero stationary mean.
    """
    hv = as_values(h)
    if hv.shape[0] != model.n:
        raise DimensionMismatch("observable length does not match model")
    rho = model.stationary.weights
    mean = float(np.dot(rho, hv))
    if abs(mean) > tol.derived:
        raise NonZeroMean(f"stationary mean {mean:.3e} exceeds {tol.derived}")
    ls = symmetric_part(model).matrix
    rhs = time_reversed_generator(model).matrix @ hv
    v, _, _, _ = np.linalg.lstsq(ls, rhs, rcond=None)
    resid = np.abs(ls @ v - rhs).max()
    scale = max(1.0, np.abs(rhs).max())
    if resid > tol.derived * scale:
        raise SolverFailure(f"linearized solve residual {resid:.3e}")
    v = v - float(np.dot(rho, v))
    return Observable(v)


def potential_distance_bounds(mu, model: RateModel,
                              tol: config.Tolerances = config.DEFAULT) -> tuple[float, float]:
    """Variational distance d(mu, rho) and the variation norm of V_mu.

    The two stay within model-dependent constant factors of each other;
    sweeps of their ratio probe that equivalence empirically.
    """
    d = as_distribution(mu, model.n)
    rho = model.stationary.weights
    dist = 0.5 * float(np.abs(d.weights - rho).sum())
    v = solve_potential(d, model, tol)
    return dist, v.variation
