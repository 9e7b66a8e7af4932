"""Top-level minimum-error discrimination solver for 1-4 qubit states.

When the displaced simplex is full-dimensional and the no-null-operator
condition holds, the optimal measurement follows in closed form from the
candidate point; otherwise the optimum is the best over all
(N-1)-member sub-ensembles.  Every returned solution carries a full KKT
certificate recomputed against the complete ensemble.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .bloch import (
    ComplementaryState,
    Ensemble,
    HermitianOperator2,
    PovmElement,
    success_probability,
    validate_povm,
)
from .conditions import ConditionReport, check_condition
from .errors import CertificateFailureError, InvalidEnsembleError
from .geometry import DisplacedGeometry, barycentric, displaced_geometry

logger = logging.getLogger("qubitmd")

TOL_CERT = 1e-8
TOL_CROSS = 1e-7


@dataclass(frozen=True)
class KktResiduals:
    """Primal/dual feasibility, slackness and gap residuals of a solution."""

    primal: float
    dual: float
    slackness: float
    duality_gap: float

    def valid(self, tol: float = TOL_CERT) -> bool:
        return max(self.primal, self.dual, self.slackness, self.duality_gap) <= tol

    @property
    def worst(self) -> float:
        return max(self.primal, self.dual, self.slackness, self.duality_gap)


@dataclass(frozen=True)
class Branch:
    """Which route produced the solution: direct or via a sub-ensemble."""

    kind: str                      # "interior" or "subset"
    n: int
    subset: tuple | None = None    # winning original indices ("subset" only)
    child: "Branch | None" = None
    warning: str | None = None

    def __str__(self) -> str:
        if self.kind == "interior":
            return f"Interior({self.n})"
        text = f"Subset({{{','.join(map(str, self.subset))}}})->{self.child}"
        if self.warning:
            text += f" [warning: {self.warning}]"
        return text


@dataclass(frozen=True)
class Solution:
    """Guessing probability, optimal POVM and its optimality certificate."""

    p_guess: float
    povm: tuple
    complementary: tuple
    active_subset: frozenset
    branch: Branch
    certificate: KktResiduals
    operator: HermitianOperator2
    condition_report: ConditionReport | None = None


def _dual_operator(ensemble: Ensemble, complementary) -> HermitianOperator2:
    """Reconstruct K from the averaged (q_i + r_i, q_i v_i + r_i w_i) pairs."""
    trace = 0.0
    mx = my = mz = 0.0
    for member, comp in zip(ensemble.members, complementary):
        trace += member.weight + comp.r
        vx, vy, vz = member.bloch
        wx, wy, wz = comp.w
        mx += member.weight * vx + comp.r * wx
        my += member.weight * vy + comp.r * wy
        mz += member.weight * vz + comp.r * wz
    n = len(complementary)
    trace /= n
    if trace <= 0:
        return HermitianOperator2(trace=trace, bloch=np.zeros(3))
    scale = 1.0 / (n * trace)
    return HermitianOperator2(
        trace=trace, bloch=np.array([mx * scale, my * scale, mz * scale])
    )


def kkt_certificate(ensemble: Ensemble, solution: Solution) -> KktResiduals:
    """Residuals of the KKT system for the given (ensemble, solution) pair.

    The dual residual combines the spread of the per-member operator
    reconstructions with any violation of K >= q_j rho_j, checked for
    every member including ones excluded from the active subset.
    """
    op = solution.operator
    kx, ky, kz = op.trace * op.bloch
    spread = 0.0
    psd = 0.0
    for member, comp in zip(ensemble.members, solution.complementary):
        q = member.weight
        vx, vy, vz = member.bloch
        wx, wy, wz = comp.w
        dx = q * vx + comp.r * wx - kx
        dy = q * vy + comp.r * wy - ky
        dz = q * vz + comp.r * wz - kz
        spread = max(
            spread,
            abs(q + comp.r - op.trace),
            math.sqrt(dx * dx + dy * dy + dz * dz),
        )
        gx, gy, gz = kx - q * vx, ky - q * vy, kz - q * vz
        psd = max(
            psd,
            math.sqrt(gx * gx + gy * gy + gz * gz) - (op.trace - q),
        )
    report = validate_povm(solution.povm)
    primal = max(report.residuals.values())
    slack = 0.0
    for el, comp in zip(solution.povm, solution.complementary):
        ux, uy, uz = el.u
        wx, wy, wz = comp.w
        slack = max(
            slack,
            abs(el.p * comp.r * (1.0 + ux * wx + uy * wy + uz * wz)),
        )
    gap = abs(success_probability(ensemble, solution.povm) - op.trace)
    return KktResiduals(
        primal=float(primal),
        dual=float(max(spread, psd, 0.0)),
        slackness=float(slack),
        duality_gap=float(gap),
    )


def _closed_form_four(geom: DisplacedGeometry, report: ConditionReport):
    """Explicit four-outcome measurement from the simplex data alone.

    Independent of the candidate-point construction; used purely as a
    cross-check of the interior branch at N = 4.
    """
    from .geometry import simplex_angles

    angles = simplex_angles(geom)
    cone = report.cone_angles
    members = (1, 2, 3)
    ag = {z: angles.areas[z] * cone.Gamma[z] for z in members}
    sum_ag = sum(ag.values())
    sum_eag = sum(geom.e[z] * ag[z] for z in members)
    vol3 = 3.0 * angles.volume
    ag_s = sum(ag[z] * geom.s[z] for z in members)
    l1, e1 = geom.l[1], geom.e[1]
    cb1 = math.cos(cone.beta[1])
    p = np.empty(4)
    u = np.empty((4, 3))
    p[0] = (2.0 * vol3 * (l1 * cb1 + e1) - (l1 * l1 - e1 * e1) * sum_ag) / (
        2.0 * (l1 * cb1 + e1) * (vol3 + sum_eag)
    )
    u[0] = -ag_s / vol3
    for i in members:
        li, ei = geom.l[i], geom.e[i]
        cbi = math.cos(cone.beta[i])
        quad = li * li + ei * ei + 2.0 * li * ei * cbi
        p[i] = ag[i] * quad / (2.0 * (li * cbi + ei) * (vol3 + sum_eag))
        u[i] = (2.0 * vol3 * (li * cbi + ei) * geom.s[i] - (li * li - ei * ei) * ag_s) / (
            vol3 * quad
        )
    return p, u


def interior_solution(
    ensemble: Ensemble,
    geom: DisplacedGeometry,
    report: ConditionReport,
    tol_cert: float = TOL_CERT,
    tol_cross: float = TOL_CROSS,
    certify: bool = True,
) -> Solution:
    """Closed-form all-outcome solution at the candidate point.

    Raises CertificateFailureError when the assembled solution fails its
    own KKT certificate; that signals an implementation or conditioning
    problem and is never returned silently.  With ``certify`` off (used
    for intermediate sub-ensemble solves whose winner is re-certified
    against the full ensemble anyway) the certificate is left zeroed.
    """
    n = geom.n
    cx, cy, cz = report.cw
    radius = report.cw_norm
    shrink = radius / report.vg_norm
    r = np.empty(n)
    u = np.empty((n, 3))
    t = np.empty(n)
    t[0] = 1.0 - shrink
    for i in range(n):
        dx = geom.s[i, 0] - cx
        dy = geom.s[i, 1] - cy
        dz = geom.s[i, 2] - cz
        ri = math.sqrt(dx * dx + dy * dy + dz * dz)
        r[i] = ri
        u[i, 0], u[i, 1], u[i, 2] = dx / ri, dy / ri, dz / ri
        if i >= 1:
            t[i] = shrink * report.tbar[i - 1]
    p = t * r
    p /= p.sum()
    p_guess = float(geom.weights[0]) + float(radius)

    if n == 4 and certify:
        p_alt, u_alt = _closed_form_four(geom, report)
        dev = max(
            float(np.abs(p_alt - p).max()), float(np.abs(u_alt - u).max())
        )
        if dev > tol_cross:
            logger.warning(
                "explicit four-outcome form deviates from candidate-point "
                "construction by %.3e (p=%r vs %r)", dev, p_alt, p,
            )

    povm = [None] * n
    complementary = [None] * n
    for internal, original in enumerate(geom.order):
        povm[original] = PovmElement(float(p[internal]), u[internal])
        complementary[original] = ComplementaryState(
            float(r[internal]), -u[internal]
        )
    solution = Solution(
        p_guess=p_guess,
        povm=tuple(povm),
        complementary=tuple(complementary),
        active_subset=frozenset(range(n)),
        branch=Branch(kind="interior", n=n),
        certificate=KktResiduals(0, 0, 0, 0),
        operator=_dual_operator(ensemble, complementary),
        condition_report=report,
    )
    if not certify:
        return solution
    certificate = kkt_certificate(ensemble, solution)
    if not certificate.valid(tol_cert):
        raise CertificateFailureError(
            f"interior solution failed its KKT certificate: {certificate}"
        )
    return Solution(**{**solution.__dict__, "certificate": certificate})


def _lift_subset(
    ensemble: Ensemble,
    subset: tuple,
    sub: Solution,
    tol_cert: float,
    certify: bool = True,
) -> Solution:
    """Pad a winning sub-ensemble solution back to the full ensemble."""
    n = ensemble.n
    povm = [PovmElement(0.0, np.zeros(3))] * n
    complementary: list = [None] * n
    for local, original in enumerate(subset):
        povm[original] = sub.povm[local]
        complementary[original] = sub.complementary[local]
    op = sub.operator
    m = op.trace * op.bloch
    for j in range(n):
        if complementary[j] is None:
            qj = ensemble.members[j].weight
            rj = max(op.trace - qj, 0.0)
            wj = m - qj * ensemble.members[j].bloch
            norm = float(np.linalg.norm(wj))
            if rj > 1e-12 and norm > 1e-12:
                wj = wj / rj
            else:
                wj = np.zeros(3)
            complementary[j] = ComplementaryState(rj, wj)
    branch = Branch(kind="subset", n=n, subset=subset, child=sub.branch)
    solution = Solution(
        p_guess=sub.p_guess,
        povm=tuple(povm),
        complementary=tuple(complementary),
        active_subset=frozenset(
            subset[local] for local in range(len(subset)) if sub.povm[local].p > 1e-12
        ),
        branch=branch,
        certificate=KktResiduals(0, 0, 0, 0),
        operator=op,
        condition_report=None,
    )
    if not certify:
        return solution
    certificate = kkt_certificate(ensemble, solution)
    if certificate.dual > tol_cert:
        # the sub-optimum's dual operator must dominate the excluded
        # members; if it does not, the recursion branch was wrong and we
        # defer to the numerical oracle rather than return a bad value
        from .oracle import dual_socp

        logger.warning(
            "subset solution failed excluded-member dominance (dual residual "
            "%.3e); falling back to the dual oracle", certificate.dual,
        )
        point = dual_socp(ensemble)
        branch = Branch(
            kind="subset",
            n=n,
            subset=subset,
            child=sub.branch,
            warning="excluded-member dominance failed; value from dual oracle",
        )
        solution = Solution(**{**solution.__dict__,
                               "p_guess": point.value, "branch": branch})
        certificate = kkt_certificate(ensemble, solution)
    return Solution(**{**solution.__dict__, "certificate": certificate})


def solve(
    ensemble: Ensemble,
    *,
    tol_cert: float = TOL_CERT,
    tol_cross: float = TOL_CROSS,
    tol_rank: float = 1e-8,
    _certify: bool = True,
) -> Solution:
    """Minimum-error discrimination of the ensemble.

    Returns the guessing probability, the optimal POVM (padded with zero
    elements for inactive members), the complementary states and a KKT
    certificate against the full ensemble.  Intermediate sub-ensemble
    solves run with ``_certify`` off; only the returned top-level
    solution carries (and is gated by) a recomputed certificate.
    """
    n = ensemble.n
    if n == 1:
        member = ensemble.members[0]
        povm = (PovmElement(1.0, np.zeros(3)),)
        complementary = (ComplementaryState(0.0, np.zeros(3)),)
        solution = Solution(
            p_guess=member.weight,
            povm=povm,
            complementary=complementary,
            active_subset=frozenset({0}),
            branch=Branch(kind="interior", n=1),
            certificate=KktResiduals(0, 0, 0, 0),
            operator=HermitianOperator2(member.weight, member.bloch),
            condition_report=None,
        )
        if not _certify:
            return solution
        certificate = kkt_certificate(ensemble, solution)
        return Solution(**{**solution.__dict__, "certificate": certificate})

    geom = displaced_geometry(ensemble, tol_rank=tol_rank)
    if geom.affine_dim == n - 1:
        report = check_condition(geom)
        if report.holds:
            return interior_solution(
                ensemble, geom, report, tol_cert=tol_cert,
                tol_cross=tol_cross, certify=_certify,
            )

    best: Solution | None = None
    best_subset: tuple | None = None
    for subset in combinations(range(n), n - 1):
        sub = solve(
            ensemble.restrict(subset),
            tol_cert=tol_cert,
            tol_cross=tol_cross,
            tol_rank=tol_rank,
            _certify=False,
        )
        if best is None or sub.p_guess > best.p_guess:
            best, best_subset = sub, subset
    return _lift_subset(ensemble, best_subset, best, tol_cert, certify=_certify)
