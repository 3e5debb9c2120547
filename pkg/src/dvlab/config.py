"""Shared numeric tolerances, exposed as a single immutable record."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Every numeric threshold the package uses, in one place.

    structural: exact algebraic identities (normalization, row sums,
        antisymmetry).
    derived: identities that go through a solve or an adjoint
        (generator adjointness, internal route comparisons).
    route_sup: agreement between the variational-sup evaluation of the
        rate functional and the excess-activity evaluation.
    route_reversible: agreement between the excess-activity evaluation
        and the Dirichlet form on reversible models.
    newton_residual: stationarity residual below which the potential
        solver declares convergence.
    positivity_floor: smallest admissible component of a strictly
        positive distribution.
    clip_floor: round-off guard when propagating distributions in time.
    sign_factor: relative factor for the monotonicity sign tolerance,
        applied as sign_factor * I(mu_0) / relaxation_time.
    """

    structural: float = 1e-12
    derived: float = 1e-10
    route_sup: float = 1e-6
    route_reversible: float = 1e-8
    newton_residual: float = 1e-10
    newton_max_iter: int = 200
    positivity_floor: float = 1e-12
    clip_floor: float = 1e-15
    sign_factor: float = 1e-12

    def replace(self, **kwargs) -> "Tolerances":
        return dataclasses.replace(self, **kwargs)


DEFAULT = Tolerances()
