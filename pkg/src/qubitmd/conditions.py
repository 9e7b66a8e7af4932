"""Analytic no-null-operator conditions for 2-4 qubit states.

Given the displaced simplex geometry, these routines decide whether the
optimal measurement keeps every outcome (no null element) and, when it
does, produce the candidate point c_w: the unique point that is e_i
closer to the origin than to s_i for every i >= 1, lying inside the
simplex.  The guessing probability is then q_0 + |c_w|.

Indexing is 0-based throughout: internal index 0 is the largest-weight
member and I = {1, .., N-1} are the rest.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConditionPrerequisiteError,
    DegenerateAngleError,
    DegenerateBetaError,
    DegenerateDenominatorError,
    DivisionNearZeroError,
    NegativeDiscriminantError,
    NumericalInconsistencyError,
    WrongDimensionError,
)
from .geometry import DisplacedGeometry, SimplexAngles, simplex_angles

logger = logging.getLogger("qubitmd")

#: margin below which a strict inequality counts as a boundary case
EPS_STRICT = 1e-10

#: slack allowed on arccos arguments before declaring inconsistency
EPS_ARCCOS = 1e-12


def _arccos(arg: float, slack: float = EPS_ARCCOS) -> float:
    """arccos with clamping of rounding excursions just outside [-1, 1]."""
    if abs(arg) > 1.0 + slack:
        raise NumericalInconsistencyError(f"arccos argument {arg} outside [-1, 1]")
    return math.acos(min(1.0, max(-1.0, arg)))


@dataclass(frozen=True)
class HyperbolaCoefficients:
    """Pairwise coefficients of the equal-radius hyperbola equations.

    X[(x, y)], Y[(x, y)] are defined for ordered pairs of members of I;
    the barred maps combine the pairs sharing a dihedral edge and exist
    only for N = 4.
    """

    X: dict
    Y: dict
    Xbar: dict = field(default_factory=dict)
    Ybar: dict = field(default_factory=dict)
    Zbar: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ConeAngles:
    """Angles locating the candidate direction inside the simplex cone.

    ``cap[i]`` is the angle between the candidate direction and s_i:
    zero for N = 2, alpha for N = 3, beta for N = 4.  gamma[(z, x)] is
    the dihedral-frame angle along edge z towards s_x, and Gamma[z] the
    out-of-plane sine factor for the face opposite s_z.
    """

    cap: dict
    alpha: dict = field(default_factory=dict)
    beta: dict = field(default_factory=dict)
    gamma: dict = field(default_factory=dict)
    Gamma: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BetaGammaReport:
    """Either the N = 4 cone angles or the discriminant clause failure."""

    ok: bool
    discriminants: dict
    angles: ConeAngles | None


@dataclass(frozen=True)
class Clause:
    """One evaluated inequality: margin > 0 means satisfied."""

    name: str
    passed: bool
    margin: float


@dataclass(frozen=True)
class ConditionReport:
    """Full trace of the no-null-operator condition evaluation."""

    n: int
    holds: bool
    clauses: tuple
    boundary: bool = False
    cw_norm: float | None = None
    vg_norm: float | None = None
    tbar: np.ndarray | None = None
    cw: np.ndarray | None = None
    radius_spread: float = 0.0
    cone_angles: ConeAngles | None = None


def hyperbola_coeffs(
    geom: DisplacedGeometry, angles: SimplexAngles, tol: float = 1e-12
) -> HyperbolaCoefficients:
    """Pairwise X, Y coefficients; plus the edge-combined barred maps for N=4."""
    n = geom.n
    members = list(range(1, n))
    for i in members:
        if geom.l[i] <= geom.e[i]:
            raise ConditionPrerequisiteError(f"l[{i}] <= e[{i}]")
    X, Y = {}, {}
    for x in members:
        for y in members:
            if x == y:
                continue
            th = angles.theta[(x, y)]
            sth = math.sin(th)
            if sth <= tol:
                raise DegenerateAngleError(f"sin(theta[{x},{y}]) ~ 0")
            lx, ly = geom.l[x], geom.l[y]
            ex, ey = geom.e[x], geom.e[y]
            gx = lx * lx - ex * ex
            gy = ly * ly - ey * ey
            den = ly * gx * sth
            X[(x, y)] = (lx * gy - ly * gx * math.cos(th)) / den
            Y[(x, y)] = (ex * gy - ey * gx) / den
    if n < 4:
        return HyperbolaCoefficients(X=X, Y=Y)
    Xbar, Ybar, Zbar = {}, {}, {}
    for z in members:
        x, y = [i for i in members if i != z]
        ph = angles.phi[z]
        if math.sin(ph) <= tol:
            raise DegenerateAngleError(f"sin(phi[{z}]) ~ 0")
        cph = math.cos(ph)
        Xbar[z] = X[(z, x)] ** 2 + X[(z, y)] ** 2 - 2 * X[(z, x)] * X[(z, y)] * cph
        Ybar[z] = Y[(z, x)] ** 2 + Y[(z, y)] ** 2 - 2 * Y[(z, x)] * Y[(z, y)] * cph
        Zbar[z] = (
            X[(z, x)] * Y[(z, x)]
            + X[(z, y)] * Y[(z, y)]
            - (X[(z, x)] * Y[(z, y)] + Y[(z, x)] * X[(z, y)]) * cph
        )
    return HyperbolaCoefficients(X=X, Y=Y, Xbar=Xbar, Ybar=Ybar, Zbar=Zbar)


def alpha_angles(coeffs: HyperbolaCoefficients) -> ConeAngles:
    """Apex angles of the candidate direction for a triangle (N = 3)."""
    alpha = {}
    for (x, y) in coeffs.X:
        Xv, Yv = coeffs.X[(x, y)], coeffs.Y[(x, y)]
        disc = 1.0 + Xv * Xv - Yv * Yv
        if disc < -EPS_ARCCOS:
            raise NegativeDiscriminantError(f"1 + X^2 - Y^2 = {disc} < 0 at pair {(x, y)}")
        alpha[x] = _arccos((-Xv * Yv + math.sqrt(max(disc, 0.0))) / (1.0 + Xv * Xv))
    return ConeAngles(cap=dict(alpha), alpha=alpha)


def beta_gamma_angles(
    coeffs: HyperbolaCoefficients,
    angles: SimplexAngles,
    eps_strict: float = EPS_STRICT,
    tol: float = 1e-12,
) -> BetaGammaReport:
    """Apex and dihedral-frame angles for a tetrahedron (N = 4).

    Returns a failed report (no angles) when some edge discriminant is
    negative beyond eps_strict, meaning no candidate point exists.
    """
    members = sorted(coeffs.Xbar)
    discriminants = {}
    for z in members:
        sph2 = math.sin(angles.phi[z]) ** 2
        discriminants[z] = coeffs.Zbar[z] ** 2 - (coeffs.Xbar[z] + sph2) * (
            coeffs.Ybar[z] - sph2
        )
    if any(d < -eps_strict for d in discriminants.values()):
        return BetaGammaReport(ok=False, discriminants=discriminants, angles=None)
    beta = {}
    for z in members:
        sph2 = math.sin(angles.phi[z]) ** 2
        den = coeffs.Xbar[z] + sph2
        beta[z] = _arccos(
            (-coeffs.Zbar[z] + math.sqrt(max(discriminants[z], 0.0))) / den
        )
    gamma = {}
    for z in members:
        sb = math.sin(beta[z])
        if sb <= tol:
            raise DegenerateBetaError(f"sin(beta[{z}]) ~ 0")
        for x in members:
            if x != z:
                gamma[(z, x)] = _arccos(
                    (coeffs.X[(z, x)] * math.cos(beta[z]) + coeffs.Y[(z, x)]) / sb,
                    slack=1e-9,
                )
    Gamma = {}
    for z in members:
        x, y = [i for i in members if i != z]
        Gamma[z] = math.sin(beta[x]) * math.sin(gamma[(x, y)])
        other = math.sin(beta[y]) * math.sin(gamma[(y, x)])
        if abs(Gamma[z] - other) > 1e-7 * max(1.0, Gamma[z]):
            # near-degenerate cones disagree harmlessly; the certificate
            # rejects any solution this actually corrupts
            logger.debug(
                "out-of-plane factor disagrees between edge choices at z=%d: "
                "%.12g vs %.12g", z, Gamma[z], other,
            )
    return BetaGammaReport(
        ok=True,
        discriminants=discriminants,
        angles=ConeAngles(cap=dict(beta), beta=beta, gamma=gamma, Gamma=Gamma),
    )


def candidate_radius(
    geom: DisplacedGeometry, cap_angle: float, i: int, tol: float = 1e-12
) -> float:
    """Distance from the origin to the candidate point, seen from member i.

    Solves |c - s_i| - |c| = e_i along a ray at angle ``cap_angle`` from
    s_i.  Strictly increasing in the angle on [0, pi/2] for l_i > e_i.
    """
    li, ei = geom.l[i], geom.e[i]
    den = 2.0 * (li * math.cos(cap_angle) + ei)
    if abs(den) <= tol:
        raise DivisionNearZeroError(f"candidate radius denominator ~ 0 at i={i}")
    return (li * li - ei * ei) / den


def gauge_point(
    geom: DisplacedGeometry,
    cone: ConeAngles | None,
    angles: SimplexAngles | None,
    tol: float = 1e-12,
) -> tuple[float, np.ndarray]:
    """Norm of the gauge point and its barycentric weights over I.

    The gauge point is where the ray from the origin through the
    candidate direction pierces the opposite face conv{s_i : i in I};
    the candidate lies inside the simplex iff its norm stays below the
    gauge norm.
    """
    n = geom.n
    if n == 2:
        return float(geom.l[1]), np.array([1.0])
    if n == 3:
        x, y = 1, 2
        sx, sy = math.sin(cone.alpha[x]), math.sin(cone.alpha[y])
        den = geom.l[x] * sx + geom.l[y] * sy
        if den <= tol:
            raise DegenerateDenominatorError("sine sum ~ 0 in gauge point")
        tbar = np.array([geom.l[y] * sy / den, geom.l[x] * sx / den])
        vg = geom.l[x] * geom.l[y] * math.sin(angles.theta[(x, y)]) / den
        return float(vg), tbar
    weights = np.array([angles.areas[z] * cone.Gamma[z] for z in (1, 2, 3)])
    den = float(weights.sum())
    if den <= tol:
        raise DegenerateDenominatorError("area-weighted sine sum ~ 0 in gauge point")
    return 3.0 * angles.volume / den, weights / den


def check_condition(
    geom: DisplacedGeometry,
    angles: SimplexAngles | None = None,
    eps_strict: float = EPS_STRICT,
) -> ConditionReport:
    """Evaluate the no-null-operator condition for the given geometry.

    Clause groups, in order: (a) l_i > e_i for all i in I; (b) for N=4,
    the per-edge discriminants; (c) the cone-membership angle bounds;
    (d) interiority |c_w| < |v_g|.  Evaluation stops at the first failed
    group but keeps every margin computed so far.  Numerical degeneracy
    inside any group yields a failed, boundary-flagged report (the
    solver then falls back to subset recursion).
    """
    n = geom.n
    if geom.affine_dim != n - 1:
        raise WrongDimensionError(
            f"condition needs affine dimension {n - 1}, got {geom.affine_dim}"
        )
    clauses: list[Clause] = []
    boundary = False

    def strict(name: str, margin: float) -> bool:
        nonlocal boundary
        passed = bool(margin > eps_strict)
        if abs(margin) <= eps_strict:
            boundary = True
            passed = False
        clauses.append(Clause(name, passed, float(margin)))
        return passed

    def failed(**extra) -> ConditionReport:
        return ConditionReport(
            n=n, holds=False, clauses=tuple(clauses), boundary=boundary, **extra
        )

    members = list(range(1, n))
    group_a = [strict(f"l>e[{i}]", geom.l[i] - geom.e[i]) for i in members]
    if not all(group_a):
        return failed()

    try:
        if n == 2:
            cone = ConeAngles(cap={1: 0.0})
            vg, tbar = gauge_point(geom, cone, None)
            radii = [candidate_radius(geom, 0.0, 1)]
        else:
            if angles is None:
                angles = simplex_angles(geom)
            coeffs = hyperbola_coeffs(geom, angles)
            if n == 3:
                cone = alpha_angles(coeffs)
                ok = True
                for x, y in ((1, 2), (2, 1)):
                    ok &= strict(
                        f"cone[{x}]", angles.theta[(x, y)] - cone.alpha[x]
                    )
                ok &= strict(
                    "cone_sum", math.pi - cone.alpha[1] - cone.alpha[2]
                )
                if not ok:
                    return failed(cone_angles=cone)
            else:
                bg = beta_gamma_angles(coeffs, angles, eps_strict)
                disc_ok = True
                for z in sorted(bg.discriminants):
                    # non-strict clause: equality is acceptable here
                    passed = bg.discriminants[z] >= -eps_strict
                    clauses.append(
                        Clause(f"discriminant[{z}]", passed, float(bg.discriminants[z]))
                    )
                    disc_ok &= passed
                if not disc_ok or not bg.ok:
                    return failed()
                cone = bg.angles
                ok = True
                for z in members:
                    x, y = [i for i in members if i != z]
                    ok &= strict(f"cone[{z},{x}]", angles.phi[z] - cone.gamma[(z, x)])
                    ok &= strict(f"cone[{z},{y}]", angles.phi[z] - cone.gamma[(z, y)])
                    ok &= strict(
                        f"cone_sum[{z}]",
                        math.pi - cone.gamma[(z, x)] - cone.gamma[(z, y)],
                    )
                if not ok:
                    return failed(cone_angles=cone)
            vg, tbar = gauge_point(geom, cone, angles)
            radii = [candidate_radius(geom, cone.cap[i], i) for i in members]
    except (
        DegenerateAngleError,
        DegenerateBetaError,
        DegenerateDenominatorError,
        DivisionNearZeroError,
        NegativeDiscriminantError,
        NumericalInconsistencyError,
    ) as exc:
        logger.debug("condition evaluation degenerate, routing to recursion: %s", exc)
        boundary = True
        clauses.append(Clause(f"degenerate:{type(exc).__name__}", False, 0.0))
        return failed()

    radius = radii[0]
    spread = max(radii) - min(radii)
    if spread > 1e-6 * max(1.0, abs(radius)):
        # the candidate point should look identical from every member
        logger.warning("candidate radius inconsistent across members: %r", radii)
        boundary = True
        clauses.append(Clause("radius_consistency", False, -spread))
        return failed(radius_spread=spread)

    interior = strict("interior", vg - radius)
    cw = (radius / vg) * (tbar @ geom.s[1:]) if interior else None
    return ConditionReport(
        n=n,
        holds=interior,
        clauses=tuple(clauses),
        boundary=boundary,
        cw_norm=float(radius),
        vg_norm=float(vg),
        tbar=tbar,
        cw=cw,
        radius_spread=float(spread),
        cone_angles=cone,
    )
