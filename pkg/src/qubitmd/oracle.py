"""Independent numerical verification of the geometric solver.

The dual of the discrimination problem reduces, for qubits, to an
unconstrained 3-variable convex min-max:

    p_guess = min_m max_i ( q_i + |m - q_i v_i| )

because K = a I + k.sigma dominates q_i rho_i exactly when
2a >= q_i + |2k - q_i v_i|, with m = 2k.  This module minimizes that
objective directly, provides the two-state closed form, and stress-tests
primal feasibility with random POVM sampling.  It shares no geometry
code with the solver.

The minimizer layers three stages: exact single- and two-cone
candidates, adaptive-level subgradient descent with golden-section
polish, and Newton refinement of every possible tied cone set.  Inner
loops run on plain floats; at three variables, numpy overhead dominates
the arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .bloch import Ensemble, PovmElement, success_probability
from .errors import WrongNError

TOL_OPT = 1e-9
MAX_ITER = 100_000

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DualPoint:
    """Result of the dual minimization: m = 2k and the objective value."""

    m: np.ndarray
    value: float
    iterations: int
    gap_estimate: float


def _make_objective(centers, weights):
    cs = [tuple(map(float, c)) for c in centers]
    qs = [float(q) for q in weights]

    def f(m):
        mx, my, mz = m
        best = -math.inf
        for (cx, cy, cz), q in zip(cs, qs):
            dx, dy, dz = mx - cx, my - cy, mz - cz
            val = q + math.sqrt(dx * dx + dy * dy + dz * dz)
            if val > best:
                best = val
        return best

    def worst_term(m):
        mx, my, mz = m
        best = -math.inf
        arg = (0, 0.0, (0.0, 0.0, 0.0))
        for i, ((cx, cy, cz), q) in enumerate(zip(cs, qs)):
            dx, dy, dz = mx - cx, my - cy, mz - cz
            n = math.sqrt(dx * dx + dy * dy + dz * dz)
            if q + n > best:
                best = q + n
                arg = (i, n, (dx, dy, dz))
        return best, arg

    return f, worst_term


def _line_minimize(f, m, d, step, max_evals: int = 200):
    """Golden-section minimization of the convex objective along a line."""
    nd = math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
    d = (d[0] / nd, d[1] / nd, d[2] / nd)

    def at(x):
        return (m[0] + x * d[0], m[1] + x * d[1], m[2] + x * d[2])

    f0 = f(m)
    lo, hi = -step, step
    for _ in range(60):
        if f(at(lo)) > f0:
            break
        lo *= 2.0
    for _ in range(60):
        if f(at(hi)) > f0:
            break
        hi *= 2.0
    a, b = lo, hi
    c1 = b - _INVPHI * (b - a)
    c2 = a + _INVPHI * (b - a)
    f1, f2 = f(at(c1)), f(at(c2))
    evals = 4
    while evals < max_evals and b - a > 1e-13 * (abs(a) + abs(b) + 1e-3):
        if f1 <= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - _INVPHI * (b - a)
            f1 = f(at(c1))
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + _INVPHI * (b - a)
            f2 = f(at(c2))
        evals += 1
    return at(c1) if f1 < f2 else at(c2)


def _pair_candidates(centers: np.ndarray, weights: np.ndarray):
    """Exact minimizers over single terms and term pairs.

    The optimum of the full min-max is attained either at a center, on
    the segment between two centers (the two-cone case, solvable in
    closed form), or with three or more tied cones; the first two
    families give excellent starting points and are often already exact.
    """
    n = len(weights)
    points = [tuple(map(float, centers[i])) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            gap = centers[j] - centers[i]
            dist = float(np.linalg.norm(gap))
            if dist < 1e-15:
                continue
            t = (weights[i] + weights[j] + dist) / 2.0
            ri = t - weights[i]
            if 0.0 <= ri <= dist:
                points.append(tuple(map(float, centers[i] + (ri / dist) * gap)))
    return points


def _active_set_newton(m, centers, weights, active, iters: int = 40):
    """Newton solve of the equal-value stationarity system on a guessed
    active set: q_i + |m - c_i| all equal to t and the unit directions
    admitting a vanishing affine combination of weight one.

    Returns (m, value, multipliers) or None when the iteration fails.
    """
    k = len(active)
    c = centers[active]
    q = weights[active]
    lam = np.full(k, 1.0 / k)
    t = float(q[0] + np.linalg.norm(np.asarray(m) - c[0]))
    x = np.concatenate([np.asarray(m, dtype=float), lam, [t]])
    for _ in range(iters):
        m_cur, lam, t = x[:3], x[3:3 + k], x[3 + k]
        d = m_cur - c
        n = np.sqrt((d * d).sum(axis=1))
        if n.min() < 1e-14:
            return None
        g = d / n[:, None]
        F = np.concatenate([q + n - t, lam @ g, [lam.sum() - 1.0]])
        J = np.zeros((k + 4, k + 4))
        J[:k, :3] = g
        J[:k, 3 + k] = -1.0
        for i in range(k):
            J[k:k + 3, :3] += lam[i] * (np.eye(3) - np.outer(g[i], g[i])) / n[i]
            J[k:k + 3, 3 + i] = g[i]
        J[k + 3, 3:3 + k] = 1.0
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return None
        x = x + step
        if np.linalg.norm(step) < 1e-14 * max(1.0, np.linalg.norm(x)):
            break
    m_cur, lam, t = x[:3], x[3:3 + k], x[3 + k]
    n = np.sqrt(((m_cur - c) ** 2).sum(axis=1))
    if np.abs(q + n - t).max() > 1e-10 or abs(lam.sum() - 1.0) > 1e-10:
        return None
    return m_cur, float(t), lam


def dual_socp(
    ensemble: Ensemble,
    tol_opt: float = TOL_OPT,
    max_iter: int = MAX_ITER,
) -> DualPoint:
    """Minimize max_i (q_i + |m - q_i v_i|) over m in R^3.

    Adaptive-level subgradient descent (Polyak-style steps towards a
    level just below the incumbent), golden-section polish along a fixed
    direction set, then Newton refinement of candidate tied-cone sets.
    The reported gap estimate is the final level width, shrunk to the
    Newton tolerance when a stationary refined point was accepted.
    """
    weights = ensemble.weights
    centers = weights[:, None] * ensemble.blochs
    scale = max(1.0, float(np.abs(centers).max()), float(weights.max()))
    f, worst_term = _make_objective(centers, weights)

    total = weights.sum()
    m_best = tuple((centers.T @ weights / total) if total > 0 else np.zeros(3))
    f_best = f(m_best)
    for cand in _pair_candidates(centers, weights):
        fc = f(cand)
        if fc < f_best:
            f_best, m_best = fc, cand

    iterations = 0
    delta = 0.01 * scale
    m = m_best
    path = 0.0
    while iterations < max_iter and delta > 1e-6 * scale:
        fi, (j, nj, dj) = worst_term(m)
        iterations += 1
        if fi < f_best:
            f_best, m_best = fi, m
        if nj < 1e-15:
            break  # sitting exactly on the worst center: subgradient 0
        step = (fi - (f_best - delta)) / nj  # unit subgradient dj / nj
        m = (m[0] - step * dj[0], m[1] - step * dj[1], m[2] - step * dj[2])
        path += step * nj
        if path > 20.0 * delta:
            delta *= 0.5
            path = 0.0
            m = m_best

    directions = [
        (1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (0.0, 0.0, 1.0),
        (1.0, 1.0, 1.0),
        (1.0, -1.0, 0.0),
        (0.0, 1.0, -1.0),
        (1.0, 0.0, -1.0),
    ]
    m = m_best
    for sweep in range(2):
        step = max(10.0 * delta, 1e-7 * scale) / (4.0 ** sweep)
        for d in directions:
            m = _line_minimize(f, m, d, step, max_evals=80)
        fm = f(m)
        if fm < f_best:
            f_best, m_best = fm, m

    # nonsmooth optima sit where several cones tie; refine every possible
    # tied set with Newton and keep the best point found.  f is an upper
    # bound everywhere, so taking the minimum over candidates is safe.
    gap = delta
    n = len(weights)
    subsets = [tuple(range(n))] if n >= 3 else []
    if n == 4:
        subsets += list(combinations(range(n), 3))
    for active in subsets:
        refined = _active_set_newton(m_best, centers, weights, list(active))
        if refined is None:
            continue
        m_ref, t_ref, lam = refined
        f_ref = f(tuple(m_ref))
        if f_ref < f_best:
            f_best, m_best = f_ref, tuple(m_ref)
            if lam.min() > -1e-9 and f_ref - t_ref <= 1e-10:
                gap = 1e-12  # stationary tied point: certified optimal
    return DualPoint(
        m=np.array(m_best), value=f_best, iterations=iterations,
        gap_estimate=float(min(gap, delta)),
    )


def helstrom_two(ensemble: Ensemble) -> float:
    """Closed-form two-state optimum q_max + max(0, l - e)/2."""
    if ensemble.n != 2:
        raise WrongNError(f"two-state formula called with N={ensemble.n}")
    q = ensemble.weights
    v = ensemble.blochs
    hi, lo = (0, 1) if q[0] >= q[1] else (1, 0)
    l = float(np.linalg.norm(q[lo] * v[lo] - q[hi] * v[hi]))
    e = float(q[hi] - q[lo])
    return float(q[hi]) + max(0.0, l - e) / 2.0


@dataclass(frozen=True)
class SampleReport:
    """Best success probability found by random POVM sampling."""

    best_value: float
    violation: bool
    trials: int


def random_povm(rng: np.random.Generator, n: int):
    """A random valid n-outcome qubit POVM.

    Draws extremal directions and Dirichlet weights, recenters the
    directions to meet the completeness constraint, then shrinks them
    uniformly back into the unit ball (which preserves completeness).
    """
    p = rng.dirichlet(np.ones(n))
    u = rng.normal(size=(n, 3))
    u /= np.linalg.norm(u, axis=1)[:, None]
    u -= p @ u
    shrink = max(1.0, float(np.linalg.norm(u, axis=1).max()))
    u /= shrink
    return [PovmElement(float(p[i]), u[i]) for i in range(n)]


def primal_sampler(
    ensemble: Ensemble,
    solution_p_guess: float,
    trials: int = 1000,
    seed: int = 0,
) -> SampleReport:
    """Search random valid POVMs for any that beats the claimed optimum."""
    rng = np.random.default_rng(seed)
    best = -math.inf
    for _ in range(trials):
        povm = random_povm(rng, ensemble.n)
        best = max(best, success_probability(ensemble, povm))
    return SampleReport(
        best_value=float(best),
        violation=bool(best > solution_p_guess + 1e-9),
        trials=trials,
    )
