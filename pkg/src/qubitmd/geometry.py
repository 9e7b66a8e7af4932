"""Displaced simplex geometry of a qubit ensemble.

Relabels the ensemble so the largest-weight member sits at internal
index 0, then works with the displaced vectors s_i = q_i v_i - q_0 v_0
and prior gaps e_i = q_0 - q_i.  All angles, areas and volumes that the
analytic optimality conditions need are computed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bloch import Ensemble
from .errors import DegenerateSimplexError

#: default relative singular-value threshold for the affine dimension
TOL_RANK = 1e-8


@dataclass(frozen=True)
class DisplacedGeometry:
    """Displaced vectors and scalar gaps of a (re-ordered) ensemble.

    Internal index 0 carries the largest weight (ties broken by lowest
    original index); ``order[k]`` is the original index of internal k.
    By construction e[0] = l[0] = 0 and s[0] = 0.
    """

    weights: np.ndarray          # re-ordered q_i
    blochs: np.ndarray           # re-ordered v_i, shape (N, 3)
    e: np.ndarray                # prior gaps q_0 - q_i
    s: np.ndarray                # displaced vectors, shape (N, 3)
    l: np.ndarray                # |s_i|
    affine_dim: int              # rank of {s_1 .. s_{N-1}}
    order: tuple                 # internal index -> original index

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def inverse_order(self) -> tuple:
        inv = [0] * len(self.order)
        for internal, original in enumerate(self.order):
            inv[original] = internal
        return tuple(inv)


def displaced_geometry(ensemble: Ensemble, tol_rank: float = TOL_RANK) -> DisplacedGeometry:
    """Build the displaced geometry, placing a maximal-weight member first."""
    n = ensemble.n
    members = ensemble.members
    lead = 0
    for i in range(1, n):  # lowest index wins ties
        if members[i].weight > members[lead].weight:
            lead = i
    order = (lead,) + tuple(i for i in range(n) if i != lead)
    q = np.array([members[i].weight for i in order])
    v = np.array([members[i].bloch for i in order])
    q0 = q[0]
    c0 = q0 * v[0]
    s = q[:, None] * v - c0
    e = q0 - q
    l = np.sqrt((s * s).sum(axis=1))
    if n == 1:
        dim = 0
    else:
        sv = np.linalg.svd(s[1:], compute_uv=False)
        dim = 0 if sv.size == 0 or sv[0] == 0.0 else int((sv >= tol_rank * sv[0]).sum())
    return DisplacedGeometry(
        weights=q, blochs=v, e=e, s=s, l=l, affine_dim=dim, order=order
    )


@dataclass(frozen=True)
class SimplexAngles:
    """Vertex angles, dihedral angles, face areas and volume at s_0 = 0.

    theta[(x, y)] is the angle at the origin between s_x and s_y.
    For N = 4, phi[z] is the dihedral angle along the edge (0, s_z)
    between the faces (0, s_z, s_x) and (0, s_z, s_y), areas[z] is the
    area of the face (0, s_x, s_y) opposite to s_z within the base, and
    volume is the tetrahedron volume.
    """

    theta: dict
    phi: dict
    areas: dict
    volume: float


def _angle(a, b, tol: float = 1e-12) -> float:
    ax, ay, az = a
    bx, by, bz = b
    na = math.sqrt(ax * ax + ay * ay + az * az)
    nb = math.sqrt(bx * bx + by * by + bz * bz)
    if na <= tol or nb <= tol:
        raise DegenerateSimplexError("angle between near-zero vectors")
    c = (ax * bx + ay * by + az * bz) / (na * nb)
    return math.acos(min(1.0, max(-1.0, c)))


def simplex_angles(geom: DisplacedGeometry, tol: float = 1e-12) -> SimplexAngles:
    """Angles/areas/volume of the displaced simplex; needs dim = N - 1."""
    n = geom.n
    if n not in (3, 4) or geom.affine_dim != n - 1:
        raise DegenerateSimplexError(
            f"simplex angles need N in (3, 4) with affine dimension N - 1, "
            f"got N={n}, dim={geom.affine_dim}"
        )
    members = list(range(1, n))
    if any(geom.l[i] <= tol for i in members):
        raise DegenerateSimplexError("zero-length displaced vector")
    theta = {}
    for x in members:
        for y in members:
            if x != y:
                theta[(x, y)] = _angle(geom.s[x], geom.s[y])
    phi: dict = {}
    areas: dict = {}
    volume = 0.0
    if n == 4:
        sv = {i: tuple(geom.s[i]) for i in members}
        for z in members:
            x, y = [i for i in members if i != z]
            zx, zy, zz = sv[z]
            inv = 1.0 / geom.l[z]
            ax_x, ax_y, ax_z = zx * inv, zy * inv, zz * inv
            # project the other two edges off the shared edge, then measure
            px, py, pz = sv[x]
            d = px * ax_x + py * ax_y + pz * ax_z
            a = (px - d * ax_x, py - d * ax_y, pz - d * ax_z)
            px, py, pz = sv[y]
            d = px * ax_x + py * ax_y + pz * ax_z
            b = (px - d * ax_x, py - d * ax_y, pz - d * ax_z)
            phi[z] = _angle(a, b)
            x1, x2, x3 = sv[x]
            y1, y2, y3 = sv[y]
            c1 = x2 * y3 - x3 * y2
            c2 = x3 * y1 - x1 * y3
            c3 = x1 * y2 - x2 * y1
            areas[z] = 0.5 * math.sqrt(c1 * c1 + c2 * c2 + c3 * c3)
        a1, a2, a3 = sv[2]
        b1, b2, b3 = sv[3]
        c1 = a2 * b3 - a3 * b2
        c2 = a3 * b1 - a1 * b3
        c3 = a1 * b2 - a2 * b1
        s1, s2, s3 = sv[1]
        volume = abs(s1 * c1 + s2 * c2 + s3 * c3) / 6.0
    return SimplexAngles(theta=theta, phi=phi, areas=areas, volume=volume)


def barycentric(simplex_vertices, c, tol: float = 1e-9) -> np.ndarray:
    """Affine coordinates t with sum t = 1 and sum t_i s_i = c.

    Components may be negative when c lies outside the simplex; the
    relative-interior test is t_i > tol for all i.  Raises
    DegenerateSimplexError when the vertices are affinely dependent or c
    is off their affine hull.
    """
    verts = np.asarray(simplex_vertices, dtype=float)
    c = np.asarray(c, dtype=float).reshape(3)
    m = verts.shape[0]
    a = np.vstack([np.ones(m), verts.T])          # (4, m)
    b = np.concatenate([[1.0], c])
    t, *_ = np.linalg.lstsq(a, b, rcond=None)
    scale = max(1.0, float(np.abs(verts).max()))
    if np.linalg.norm(a @ t - b) > 1e-8 * scale:
        raise DegenerateSimplexError("point is not uniquely expressible over these vertices")
    # affine independence check: solution must be unique
    if np.linalg.matrix_rank(a, tol=1e-10 * scale) < m:
        raise DegenerateSimplexError("vertices are affinely dependent")
    return t
