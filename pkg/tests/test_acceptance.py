"""Acceptance gate: one test per criterion, one pass/fail line each.

Criterion-4 instances are solved once in a module fixture and reused by
the certificate and uniqueness criteria.
"""

import csv
import math
import time

import numpy as np
import pytest

from qubitmd import (
    Ensemble,
    dual_socp,
    helstrom_two,
    solve,
    success_probability,
)
from qubitmd.cli import main
from qubitmd.family import skewed_tetrahedron_ensemble
from qubitmd.oracle import random_povm

from conftest import random_ensemble, random_rotation, rotate_ensemble


def _report(num: int, name: str, ok: bool) -> None:
    print(f"acceptance criterion {num} ({name}): {'PASS' if ok else 'FAIL'}")
    assert ok


@pytest.fixture(scope="module")
def oracle_corpus():
    """1000 seeded random ensembles per N with solve and dual values."""
    instances = []
    elapsed = 0.0
    for n in (2, 3, 4):
        rng = np.random.default_rng(1000 + n)
        for _ in range(1000):
            ens = random_ensemble(rng, n)
            start = time.perf_counter()
            sol = solve(ens)
            dual = dual_socp(ens).value
            elapsed += time.perf_counter() - start
            instances.append((ens, sol, dual))
    return instances, elapsed


def test_criterion_1_symmetric_example():
    ens = skewed_tetrahedron_ensemble(0.0)
    solve(ens)  # warm-up outside the timed call
    start = time.perf_counter()
    sol = solve(ens)
    runtime = time.perf_counter() - start
    expected = 0.25 + 1.0 / (4.0 * math.sqrt(2.0))
    ok = (
        abs(sol.p_guess - expected) < 1e-9
        and sum(1 for el in sol.povm if el.p > 1e-9) == 4
        and all(abs(el.p - 0.25) < 1e-9 for el in sol.povm)
        and runtime < 0.010
    )
    _report(1, "symmetric example", ok)


def test_criterion_2_sweep_reproduction(tmp_path):
    out_path = tmp_path / "sweep.csv"
    start = time.perf_counter()
    code = main(["sweep", str(out_path), "--steps", "1000"])
    runtime = time.perf_counter() - start
    with open(out_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    errors_ok = all(float(r["abs_error"]) <= 1e-8 for r in rows)
    transition = next(
        (float(r["h"]) for r in rows if int(r["nonzero_count"]) < 4), None
    )
    ok = (
        code == 0
        and len(rows) == 1000
        and errors_ok
        and transition is not None
        and 0.143 <= transition <= 0.145
        and runtime < 2.0
    )
    _report(2, "parameter-sweep reproduction", ok)


def test_criterion_3_equal_prior_tetrahedron():
    directions = np.array(
        [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float
    ) / math.sqrt(3.0)
    ok = True
    for f in (0.2, 0.5, 1.0):
        ens = Ensemble.from_lists([0.25] * 4, f * directions)
        ok &= abs(solve(ens).p_guess - (0.25 + f / 4.0)) < 1e-9
    _report(3, "equal-prior tetrahedron", ok)


def test_criterion_4_oracle_equivalence(oracle_corpus):
    instances, elapsed = oracle_corpus
    ok = elapsed < 30.0
    for ens, sol, dual in instances:
        ok &= abs(sol.p_guess - dual) <= 1e-6
        if ens.n == 2:
            ok &= abs(sol.p_guess - helstrom_two(ens)) <= 1e-9
    _report(4, "oracle equivalence", ok)


def test_criterion_5_certificates(oracle_corpus):
    instances, _ = oracle_corpus
    ok = True
    for ens, sol, _ in instances:
        if sol.branch.kind != "interior":
            continue
        ok &= sol.certificate.valid(1e-8)
        trace = sol.operator.trace
        m = trace * sol.operator.bloch
        for member in ens.members:
            min_eig = 0.5 * (
                (trace - member.weight)
                - np.linalg.norm(m - member.weight * member.bloch)
            )
            ok &= min_eig >= -1e-9
    _report(5, "KKT certificates", ok)


def test_criterion_6_invariances():
    ok = True
    for seed in range(100):
        rng = np.random.default_rng(6000 + seed)
        n = int(rng.integers(2, 5))
        ens = random_ensemble(rng, n)
        sol = solve(ens)

        rotated = rotate_ensemble(ens, random_rotation(rng))
        ok &= abs(solve(rotated).p_guess - sol.p_guess) <= 1e-8

        perm = rng.permutation(n)
        permuted = Ensemble(tuple(ens.members[i] for i in perm))
        sol_p = solve(permuted)
        ok &= abs(sol_p.p_guess - sol.p_guess) <= 1e-12
        for local, original in enumerate(perm):
            ok &= abs(sol_p.povm[local].p - sol.povm[original].p) <= 1e-9

        lam = float(rng.uniform(0.2, 5.0))
        scaled = Ensemble.from_lists(lam * ens.weights, ens.blochs)
        sol_s = solve(scaled)
        ok &= abs(sol_s.p_guess - lam * sol.p_guess) <= 1e-9
        for a, b in zip(sol.povm, sol_s.povm):
            ok &= abs(a.p - b.p) <= 1e-9
    _report(6, "invariance suite", ok)


def test_criterion_7_degeneracies():
    rng = np.random.default_rng(7)
    cases = []
    # identical-state pairs inside larger ensembles
    for _ in range(20):
        v = rng.normal(size=3) * 0.3
        extra = rng.normal(size=3) * 0.3
        q = rng.dirichlet([1, 1, 1])
        cases.append(Ensemble.from_lists(q, [v, v, extra]))
    # collinear displaced vectors: affine dimension below N - 1
    cases.append(
        Ensemble.from_lists(
            [0.4, 0.3, 0.3], [[0, 0, 0], [0.3, 0, 0], [-0.2, 0, 0]]
        )
    )
    cases.append(
        Ensemble.from_lists(
            [0.25, 0.25, 0.25, 0.25],
            [[0.1, 0, 0], [0.3, 0, 0], [-0.2, 0, 0], [0.5, 0, 0]],
        )
    )
    # exact boundary l_i = e_i
    cases.append(
        Ensemble.from_lists([0.6, 0.4], [[0, 0, 0.5], [0, 0, 0.25]])
    )
    cases.append(
        Ensemble.from_lists(
            [0.5, 0.3, 0.2], [[0, 0, 0.4], [0, 0, 0.0], [0.3, 0, 0.2]]
        )
    )
    ok = True
    for ens in cases:
        sol = solve(ens)  # must terminate without an unhandled error
        ok &= abs(sol.p_guess - dual_socp(ens).value) <= 1e-6
    _report(7, "degeneracy suite", ok)


def test_criterion_8_uniqueness_probe(oracle_corpus):
    instances, _ = oracle_corpus
    interior = [
        (ens, sol) for ens, sol, _ in instances if sol.branch.kind == "interior"
    ][:50]
    ok = len(interior) == 50
    rng = np.random.default_rng(8)
    for ens, sol in interior:
        for _ in range(1000):
            povm = random_povm(rng, ens.n)
            distance = max(
                max(abs(a.p - b.p), np.abs(a.u - b.u).max())
                for a, b in zip(povm, sol.povm)
            )
            if distance < 1e-2:
                continue
            ok &= success_probability(ens, povm) < sol.p_guess
    _report(8, "uniqueness probe", ok)
