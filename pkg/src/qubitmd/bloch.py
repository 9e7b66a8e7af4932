"""Core Bloch-parameterized types for qubit ensembles and measurements.

Every 2x2 Hermitian operator A is stored as the pair (tr A, r) with
A = (tr A / 2)(I + r . sigma).  Complex matrices only appear at this
module's boundary; everything downstream is real 3-vector arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidEnsembleError,
    LengthMismatchError,
    NonHermitianError,
    NonPositiveTraceError,
)

#: default tolerance for PSD / completeness / normalization checks
TOL = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_bloch(v) -> np.ndarray:
    """Coerce a sequence into a read-only float 3-vector."""
    a = np.asarray(v, dtype=float).reshape(3).copy()
    a.flags.writeable = False
    return a


def clamped_bloch(v, tol: float = TOL) -> np.ndarray:
    """Coerce to a Bloch vector, clamping a norm in (1, 1 + tol] back to 1.

    Norms beyond 1 + tol are rejected: they indicate an unphysical state
    rather than accumulated rounding.
    """
    a = np.asarray(v, dtype=float).reshape(3)
    n = float(np.linalg.norm(a))
    if n > 1.0 + tol:
        raise InvalidEnsembleError(f"Bloch vector norm {n} exceeds 1 + tol")
    if n > 1.0:
        a = a / n
    return as_bloch(a)


@dataclass(frozen=True)
class WeightedState:
    """One ensemble member: prior weight q >= 0 and Bloch vector v."""

    weight: float
    bloch: np.ndarray

    def __post_init__(self):
        if self.weight < 0:
            raise InvalidEnsembleError(f"negative weight {self.weight}")
        object.__setattr__(self, "bloch", clamped_bloch(self.bloch))


@dataclass(frozen=True)
class Ensemble:
    """Ordered list of 1-4 weighted states.  Weights need not sum to 1."""

    members: tuple[WeightedState, ...]

    def __post_init__(self):
        members = tuple(self.members)
        if not 1 <= len(members) <= 4:
            raise InvalidEnsembleError(f"need 1-4 members, got {len(members)}")
        object.__setattr__(self, "members", members)
        object.__setattr__(
            self, "_weights", np.array([m.weight for m in members])
        )
        object.__setattr__(self, "_blochs", np.array([m.bloch for m in members]))

    @classmethod
    def from_lists(cls, weights, blochs) -> "Ensemble":
        if len(weights) != len(blochs):
            raise InvalidEnsembleError("weights and Bloch vectors differ in length")
        return cls(tuple(WeightedState(float(q), v) for q, v in zip(weights, blochs)))

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def blochs(self) -> np.ndarray:
        return self._blochs

    @property
    def weight_sum(self) -> float:
        return float(self.weights.sum())

    def restrict(self, indices) -> "Ensemble":
        """Sub-ensemble on the given original indices, order preserved."""
        return Ensemble(tuple(self.members[i] for i in indices))


@dataclass(frozen=True)
class PovmElement:
    """Measurement element M = p (I + u . sigma) with p >= 0, |u| <= 1."""

    p: float
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", as_bloch(self.u))

    def matrix(self) -> np.ndarray:
        x, y, z = self.u
        return self.p * (np.eye(2, dtype=complex) + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z)


@dataclass(frozen=True)
class ComplementaryState:
    """Dual pair (r, w): r >= 0 times the state (I + w . sigma)/2."""

    r: float
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", as_bloch(self.w))


@dataclass(frozen=True)
class HermitianOperator2:
    """A 2x2 Hermitian operator stored as (trace, Bloch direction)."""

    trace: float
    bloch: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bloch", as_bloch(self.bloch))

    def matrix(self) -> np.ndarray:
        x, y, z = self.bloch
        return (self.trace / 2.0) * (
            np.eye(2, dtype=complex) + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z
        )

    def is_psd(self, tol: float = TOL) -> bool:
        """PSD iff trace >= 0 and the Bloch norm is <= 1 (up to tol)."""
        return self.trace >= -tol and float(np.linalg.norm(self.bloch)) <= 1.0 + tol


def from_density_matrix(m, tol: float = TOL) -> tuple[float, np.ndarray]:
    """Decompose a 2x2 PSD matrix as m = (t/2)(I + v . sigma).

    Returns (t, v) with t = tr m.  Raises NonHermitianError if the matrix
    is asymmetric beyond tol, NonPositiveTraceError if tr m <= 0.
    """
    a = np.asarray(m, dtype=complex).reshape(2, 2)
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.conj().T).max() > tol * scale:
        raise NonHermitianError("matrix is not Hermitian within tolerance")
    t = float(np.real(np.trace(a)))
    if t <= 0:
        raise NonPositiveTraceError(f"trace {t} is not positive")
    v = np.array(
        [
            float(np.real(a[0, 1] + a[1, 0])),
            float(np.real(1j * (a[0, 1] - a[1, 0]))),
            float(np.real(a[0, 0] - a[1, 1])),
        ]
    ) / t
    return t, as_bloch(v)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a POVM validity check with per-constraint residuals."""

    ok: bool
    residuals: dict = field(default_factory=dict)


def validate_povm(elements, tol: float = TOL) -> ValidationReport:
    """Check p_i >= 0, sum p_i = 1, sum p_i u_i = 0, |u_i| <= 1."""
    if not len(elements):
        return ValidationReport(ok=False, residuals={
            "negativity": 0.0, "normalization": 1.0,
            "completeness": 1.0, "direction_norm": 0.0,
        })
    p_min = p_sum = 0.0
    cx = cy = cz = 0.0
    u_max = 0.0
    first = True
    for e in elements:
        p = e.p
        ux, uy, uz = e.u
        p_min = p if first else min(p_min, p)
        first = False
        p_sum += p
        cx += p * ux
        cy += p * uy
        cz += p * uz
        u_max = max(u_max, ux * ux + uy * uy + uz * uz)
    residuals = {
        "negativity": max(0.0, -p_min),
        "normalization": abs(p_sum - 1.0),
        "completeness": math.sqrt(cx * cx + cy * cy + cz * cz),
        "direction_norm": max(0.0, math.sqrt(u_max) - 1.0),
    }
    ok = all(r <= tol for r in residuals.values())
    return ValidationReport(ok=ok, residuals=residuals)


def success_probability(ensemble: Ensemble, povm, tol: float = TOL) -> float:
    """Average probability sum_i q_i tr[rho_i M_i] = sum_i q_i p_i (1 + u_i . v_i)."""
    if len(povm) != ensemble.n:
        raise LengthMismatchError(f"POVM length {len(povm)} != ensemble size {ensemble.n}")
    total = 0.0
    for member, element in zip(ensemble.members, povm):
        ux, uy, uz = element.u
        vx, vy, vz = member.bloch
        total += member.weight * element.p * (
            1.0 + ux * vx + uy * vy + uz * vz
        )
    return total
