"""Diagnostics for velocity-homogeneous (Finslerian) systems.

A Lagrange structure is Finslerian when L is positively 2-homogeneous in
the fiber coordinates; Euler's relation (dL/dy_i) y^i = 2L is the
runtime test.  Homogeneity is checked, never declared: near-homogeneous
Lagrangians can be probed with the same tooling.

Consequences verified here: the energy coincides with L, the canonical
spray contracts out of the formal Christoffel symbols of g,

    2 G0^i = gamma^i_jk y^j y^k,

and for a zero-homogeneous force the evolution horizontal curves drop
the force term, so the energy is constant along them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FinslerModeError, SingularMetric
from .geometry import (
    _spray_from_jet,
    canonical_spray_at,
    metric_at,
)
from .jets import eval_jet, push_direction, sym_invert, tower_vector
from .mechanics import MechanicalSystem, force_jacobian_y, horizontal_dE
from .phase import PhasePoint

__all__ = [
    "HomogeneityReport",
    "FinslerIdentityReport",
    "homogeneity_report",
    "homogeneity_residual_at",
    "require_finsler_mode",
    "christoffel_at",
    "finsler_identities",
]

_GATE_TOL = 1e-8


@dataclass
class HomogeneityReport:
    """Euler-relation residuals over a sample sweep.

    ``lagrangian_residual``: max |(dL/dy_i) y^i - 2L| (degree-2 test for L)
    ``metric_residual``:     max |(dg_ij/dy_k) y^k|   (degree-0 test for g)
    ``force_residual``:      max |(dV^i/dy_j) y^j|    (degree-0 test for V)
    """

    lagrangian_residual: float
    metric_residual: float
    force_residual: float
    points_tested: int
    accepted: bool
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "lagrangian_residual": self.lagrangian_residual,
            "metric_residual": self.metric_residual,
            "force_residual": self.force_residual,
            "points_tested": self.points_tested,
            "accepted": self.accepted,
            "failures": list(self.failures),
        }


def homogeneity_residual_at(sys: MechanicalSystem, p: PhasePoint) -> float:
    """|Euler defect| of L at one point: |(dL/dy_i) y^i - 2L|."""
    j = eval_jet(sys.L, p, order=1)
    yv = tower_vector(p.y)
    return float(abs(yv.dot(j.d_y) - 2.0 * j.value))


def require_finsler_mode(sys: MechanicalSystem, p: PhasePoint, tol: float = _GATE_TOL):
    """Gate an operation on the homogeneity of L at a reference point."""
    j = eval_jet(sys.L, p, order=1)
    yv = tower_vector(p.y)
    res = abs(yv.dot(j.d_y) - 2.0 * j.value)
    if res > tol * (1.0 + abs(j.value)):
        raise FinslerModeError(
            f"Lagrangian is not 2-homogeneous at {p} (Euler defect {res:.3e})"
        )


def homogeneity_report(sys: MechanicalSystem, samples) -> HomogeneityReport:
    """Run the three Euler tests over a sample set.

    The system is accepted as Finsler-mode when the Lagrangian residual
    stays below 1e-8 (1 + |L|) at every sampled point.
    """
    lag_res = 0.0
    met_res = 0.0
    frc_res = 0.0
    tested = 0
    accepted = True
    failures = []
    for idx, p in enumerate(samples):
        try:
            j = eval_jet(sys.L, p, order=3)
            yv = tower_vector(p.y)
            dvy = push_direction(lambda q: sys.V(q.x, q.y), p,
                                 [float(v) for v in p.y], wrt="y")
        except (SingularMetric, DomainError) as err:
            failures.append({"index": idx, "error": type(err).__name__, "detail": str(err)})
            continue
        tested += 1
        lag = abs(yv.dot(j.d_y) - 2.0 * j.value)
        if lag > _GATE_TOL * (1.0 + abs(j.value)):
            accepted = False
        lag_res = max(lag_res, float(lag))
        met_res = max(met_res, float(np.abs(j.d_yyy.dot(yv) * 0.5).max()))
        frc_res = max(frc_res, float(np.abs(dvy).max()))
    return HomogeneityReport(
        lagrangian_residual=lag_res,
        metric_residual=met_res,
        force_residual=frc_res,
        points_tested=tested,
        accepted=accepted and tested > 0,
        failures=failures,
    )


def christoffel_at(sys: MechanicalSystem, p: PhasePoint) -> np.ndarray:
    """Formal Christoffel symbols of second kind of g(x, y).

    gamma^i_jk = (1/2) g^{ih} (dg_hj/dx_k + dg_hk/dx_j - dg_jk/dx_h),
    with position derivatives of g obtained by x-directional pushes of the
    metric pipeline.  For a homogeneous L these contract to the canonical
    spray: gamma^i_jk y^j y^k = 2 G0^i.
    """
    n = sys.n
    g = metric_at(sys.L, p)
    cols = []
    for k in range(n):
        d = [0.0] * n
        d[k] = 1.0
        cols.append(push_direction(lambda q: eval_jet(sys.L, q, order=2).d_yy * 0.5,
                                   p, d, wrt="x"))
    dgdx = np.stack(cols, axis=-1)  # dgdx[a, b, c] = dg_ab/dx_c
    a = dgdx + dgdx.transpose(0, 2, 1) - dgdx.transpose(2, 0, 1)
    return 0.5 * np.einsum("ih,hjk->ijk", g.inverse, a)


@dataclass
class FinslerIdentityReport:
    """Residuals of the homogeneity-forced identities over a sweep.

    ``energy_residual``            max |E - L| / (1 + |L|)
    ``spray_homogeneity_residual`` max |2 G0^i - N0^i_j y^j|
    ``energy_slope_residual``      max |dE_horiz - (1/2)(g y)^T dV/dy|
    ``christoffel_residual``       max |gamma^i_jk y^j y^k - 2 G0^i|
    """

    energy_residual: float
    spray_homogeneity_residual: float
    energy_slope_residual: float
    christoffel_residual: float
    points_tested: int
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "energy_residual": self.energy_residual,
            "spray_homogeneity_residual": self.spray_homogeneity_residual,
            "energy_slope_residual": self.energy_slope_residual,
            "christoffel_residual": self.christoffel_residual,
            "points_tested": self.points_tested,
            "failures": list(self.failures),
        }


def finsler_identities(sys: MechanicalSystem, samples) -> FinslerIdentityReport:
    """Verify the identities forced by 2-homogeneity over a sample set."""
    res_e = 0.0
    res_h = 0.0
    res_s = 0.0
    res_c = 0.0
    tested = 0
    failures = []
    for idx, p in enumerate(samples):
        try:
            require_finsler_mode(sys, p)
            j = eval_jet(sys.L, p, order=2)
            g = sym_invert(j.d_yy * 0.5)
            yv = tower_vector(p.y)
            spray0 = _spray_from_jet(j, g.inverse, yv)
            n = sys.n
            conn0 = np.stack(
                [push_direction(lambda q: canonical_spray_at(sys.L, q), p,
                                [1.0 if m == k else 0.0 for m in range(n)], wrt="y")
                 for k in range(n)],
                axis=-1,
            )
            hde = horizontal_dE(sys, p)
            dvdy = force_jacobian_y(sys, p)
            gamma = christoffel_at(sys, p)
        except (SingularMetric, DomainError, FinslerModeError) as err:
            failures.append({"index": idx, "error": type(err).__name__, "detail": str(err)})
            continue
        tested += 1
        e = yv.dot(j.d_y) - j.value
        res_e = max(res_e, float(abs(e - j.value)) / (1.0 + abs(float(j.value))))
        res_h = max(res_h, float(np.abs(2.0 * spray0 - conn0.dot(yv)).max()))
        rhs = 0.5 * g.entries.dot(yv).dot(dvdy)
        res_s = max(res_s, float(np.abs(hde - rhs).max()))
        res_c = max(res_c, float(np.abs(gamma.dot(yv).dot(yv) - 2.0 * spray0).max()))
    return FinslerIdentityReport(
        energy_residual=res_e,
        spray_homogeneity_residual=res_h,
        energy_slope_residual=res_s,
        christoffel_residual=res_c,
        points_tested=tested,
        failures=failures,
    )
