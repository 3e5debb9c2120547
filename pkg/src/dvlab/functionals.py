"""Scalar functionals of a distribution: activity, occupation rate, entropies.

The occupation-time rate functional I(mu) is evaluated on two routes:

  * excess route (production): I = xi(mu) - xi_V(mu), the drop in expected
    escape rate when the rates are tilted by the potential V_mu that makes
    mu stationary;
  * variational route (oracle): direct maximization of the underlying sup
    over positive test functions g = exp(W/2), by first-order ascent or,
    for two states, a dense grid on the single gauge-reduced coordinate.

On reversible models a third, independent expression is available, the
Dirichlet form of sqrt(mu/rho).  Route agreement is the main correctness
check for all of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import config
from .errors import (
    ConvergenceFailure,
    InvalidParameter,
    NotDetailedBalance,
    SolverFailure,
    SupportViolation,
)
from .markov import (
    Distribution,
    RateModel,
    as_distribution,
    as_values,
    backward_generator,
    rho_inner,
)
from .tilting import Potential, solve_potential, stationarity_residual, tilted_rates, y_functional


@dataclass(frozen=True)
class FunctionalReport:
    """Every scalar functional of (mu, model) in one record.

    free_energy is None unless the model declares an equilibrium
    potential; entropy_production may be math.inf when a one-way
    transition carries flow.
    """

    xi: float
    xi_tilted: float
    dv_rate: float
    entropy_production: float
    relative_entropy: float
    free_energy: float | None = None


def dynamical_activity(mu, model: RateModel, tol: config.Tolerances = config.DEFAULT) -> float:
    """Expected number of jumps per unit time under mu.

    Evaluated both as the mu-average of escape rates and as the
    symmetrized double sum; the two must agree to round-off.
    """
    w = as_values(mu)
    xi1 = float(np.dot(w, model.escape_rates))
    flow = w[:, None] * model.rates
    xi2 = 0.5 * float(np.sum(flow + flow.T))
    if abs(xi1 - xi2) > tol.structural * max(1.0, abs(xi1)):
        raise SolverFailure("activity double-sum consistency lost")  # pragma: no cover
    return xi1


def dv_rate_excess(mu, model: RateModel, tol: config.Tolerances = config.DEFAULT,
                   potential: Potential | None = None) -> float:
    """Occupation rate functional as an excess dynamical activity.

    Nonnegative, zero exactly at the stationary law.  A precomputed
    V_mu can be passed to avoid re-solving.
    """
    d = as_distribution(mu, model.n)
    v = potential if potential is not None else solve_potential(d, model, tol)
    xi = dynamical_activity(d, model, tol)
    return xi - y_functional(d, v, model)


def dv_rate_sup(mu, model: RateModel, method: str = "ascent",
                tol: config.Tolerances = config.DEFAULT, max_iter: int = 20000) -> float:
    """Variational evaluation of the rate functional (verification oracle).

    method="ascent": Barzilai-Borwein gradient ascent on the potential
    with the root-zero gauge, safeguarded by backtracking.
    method="grid": dense refined grid on the single reduced coordinate;
    only valid for two-state models.
    """
    d = as_distribution(mu, model.n)
    w = d.weights
    xi = dynamical_activity(d, model, tol)
    if method == "grid":
        if model.n != 2:
            raise InvalidParameter("grid search only covers two-state models")
        lo, hi = -60.0, 60.0
        best = math.inf
        for _ in range(6):
            grid = np.linspace(lo, hi, 4001)
            ys = (w[0] * model.rates[0, 1] * np.exp(0.5 * grid)
                  + w[1] * model.rates[1, 0] * np.exp(-0.5 * grid))
            i = int(np.argmin(ys))
            best = float(ys[i])
            span = grid[1] - grid[0]
            lo, hi = grid[i] - 2 * span, grid[i] + 2 * span
        return xi - best
    if method != "ascent":
        raise InvalidParameter(f"unknown method {method!r}")

    def objective(vec):
        return xi - y_functional(d, vec, model)

    v = np.zeros(model.n)
    g = 0.5 * stationarity_residual(w, v, model)
    scale = max(model.escape_rates.max(), 1.0)
    alpha = 1.0 / scale
    j = objective(v)
    v_prev, g_prev = None, None
    for _ in range(max_iter):
        if np.abs(g).max() < 0.5 * 1e-8:
            return objective(v)
        if v_prev is not None:
            s = v - v_prev
            y = g - g_prev
            sy = float(s @ y)
            if sy < 0:
                alpha = min(float(s @ s) / (-sy), 1e6 / scale)
            else:
                alpha = 1.0 / scale
        step = alpha
        while True:
            trial = v + step * g
            trial -= trial[0]
            j_trial = objective(trial)
            if j_trial >= j + 1e-4 * step * float(g @ g):
                break
            step *= 0.5
            if step < 1e-18:
                return objective(v)
        v_prev, g_prev = v, g
        v, j = trial, j_trial
        g = 0.5 * stationarity_residual(w, v, model)
    raise ConvergenceFailure("variational ascent did not converge")


def entropy_production(mu, model: RateModel, tol: config.Tolerances = config.DEFAULT) -> float:
    """Instantaneous entropy production rate; math.inf when irreversible.

    One-way transitions carrying flow make the exact value diverge; the
    sentinel keeps time traces emittable (the totally asymmetric ring is
    the canonical case).  Terms with zero forward flow contribute zero.
    """
    w = as_values(mu)
    flow = w[:, None] * model.rates
    rev = flow.T
    active = flow > 0
    if np.any(active & (rev == 0)):
        return math.inf
    ratio = np.ones_like(flow)
    ratio[active] = flow[active] / rev[active]
    logs = np.zeros_like(flow)
    logs[active] = np.log(ratio[active])
    e1 = float(np.sum(flow[active] * logs[active]))
    e2 = 0.5 * float(np.sum((flow - rev)[active] * logs[active]))
    if abs(e1 - e2) > tol.derived * max(1.0, abs(e1)):
        raise SolverFailure("entropy production flux-force consistency lost")  # pragma: no cover
    return e1


def relative_entropy(mu, rho) -> float:
    """S(mu | rho) = sum mu log(mu/rho), with 0 log 0 = 0."""
    m, r = as_values(mu), as_values(rho)
    if m.shape != r.shape:
        raise SupportViolation("distributions have different lengths")
    pos = m > 0
    if np.any(pos & (r <= 0)):
        raise SupportViolation("mu puts mass outside the support of rho")
    return float(np.sum(m[pos] * np.log(m[pos] / r[pos])))


def _check_detailed_balance_potential(model: RateModel, u: np.ndarray,
                                      tol: config.Tolerances) -> None:
    lhs = model.rates * np.exp(-u[:, None])
    if np.abs(lhs - lhs.T).max() > tol.derived * max(1.0, lhs.max()):
        raise NotDetailedBalance("rates do not balance against exp(-U)")


def free_energy(mu, model: RateModel, U=None, tol: config.Tolerances = config.DEFAULT) -> float:
    """F(mu) = sum mu U + sum mu log mu for declared-equilibrium models.

    U must be supplied by the caller or declared on the model; it is
    never inferred from the stationary law.
    """
    w = as_values(mu)
    u = as_values(U) if U is not None else model.equilibrium_potential
    if u is None:
        raise NotDetailedBalance("no equilibrium potential declared or passed")
    u = np.asarray(u, dtype=float)
    _check_detailed_balance_potential(model, u, tol)
    pos = w > 0
    return float(np.dot(w, u) + np.sum(w[pos] * np.log(w[pos])))


def is_reversible(model: RateModel, tol: config.Tolerances = config.DEFAULT) -> bool:
    rho = model.stationary.weights
    flow = rho[:, None] * model.rates
    return bool(np.abs(flow - flow.T).max() <= tol.derived)


def dirichlet_form(mu, model: RateModel, tol: config.Tolerances = config.DEFAULT) -> float:
    """-(sqrt(mu/rho), L sqrt(mu/rho))_rho on reversible models."""
    if not is_reversible(model, tol):
        raise NotDetailedBalance("Dirichlet form requires detailed balance")
    d = as_distribution(mu, model.n)
    rho = model.stationary.weights
    f = np.sqrt(d.weights / rho)
    lf = backward_generator(model).apply(f)
    return -rho_inner(f, lf, rho)


def functional_report(mu, model: RateModel, U=None,
                      tol: config.Tolerances = config.DEFAULT) -> FunctionalReport:
    d = as_distribution(mu, model.n)
    v = solve_potential(d, model, tol)
    xi = dynamical_activity(d, model, tol)
    xi_tilted = y_functional(d, v, model)
    u = as_values(U) if U is not None else model.equilibrium_potential
    fe = None
    if u is not None:
        fe = free_energy(d, model, u, tol)
    return FunctionalReport(
        xi=xi,
        xi_tilted=xi_tilted,
        dv_rate=xi - xi_tilted,
        entropy_production=entropy_production(d, model, tol),
        relative_entropy=relative_entropy(d, model.stationary),
        free_energy=fe,
    )
