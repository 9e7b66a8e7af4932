"""Command-line interface: solve and verify ensemble files, sweep the
benchmark family to CSV.

Ensemble files are JSON documents::

    {
      "members": [
        {"weight": 0.3, "bloch": [0.1, 0.2, -0.5]},
        {"weight": 0.7, "rho": [[[0.5, 0.0], [0.0, -0.5]],
                                [[0.0, 0.5], [0.5, 0.0]]]}
      ],
      "tolerances": {"tol_cert": 1e-8}
    }

Weights are taken exactly as written and never normalized.  A member
given as a density matrix must either omit ``weight`` (the matrix trace
then supplies it) or carry a unit-trace matrix; anything else would
silently rescale the prior and is rejected.

Exit codes: 0 success, 2 parse/usage error, 3 certificate failure,
4 oracle discrepancy.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from .bloch import Ensemble, WeightedState, from_density_matrix, success_probability
from .errors import CertificateFailureError, QubitMDError
from .family import H_MAX, closed_form_value, skewed_tetrahedron_ensemble
from .oracle import dual_socp, primal_sampler
from .solver import solve

#: POVM weights below this count as zero outcomes in sweep reports
P_NONZERO = 1e-9


class ParseFailure(Exception):
    """Ensemble file rejected; message carries a position diagnostic."""


def _parse_member(index: int, entry) -> WeightedState:
    where = f"member {index}"
    if not isinstance(entry, dict):
        raise ParseFailure(f"{where}: expected an object, got {type(entry).__name__}")
    has_bloch = "bloch" in entry
    has_rho = "rho" in entry
    if has_bloch == has_rho:
        raise ParseFailure(f"{where}: provide exactly one of 'bloch' or 'rho'")
    unknown = set(entry) - {"weight", "bloch", "rho"}
    if unknown:
        raise ParseFailure(f"{where}: unknown keys {sorted(unknown)}")
    try:
        if has_bloch:
            if "weight" not in entry:
                raise ParseFailure(f"{where}: 'bloch' members need an explicit 'weight'")
            return WeightedState(float(entry["weight"]), np.asarray(entry["bloch"], dtype=float))
        raw = np.asarray(entry["rho"], dtype=float)
        if raw.shape != (2, 2, 2):
            raise ParseFailure(
                f"{where}: 'rho' must be a 2x2 matrix of [re, im] pairs, got shape {raw.shape}"
            )
        trace, bloch = from_density_matrix(raw[..., 0] + 1j * raw[..., 1])
        if "weight" in entry:
            if abs(trace - 1.0) > 1e-9:
                raise ParseFailure(
                    f"{where}: explicit weight with rho of trace {trace:.6g}; "
                    "normalize the matrix or drop the weight"
                )
            return WeightedState(float(entry["weight"]), bloch)
        return WeightedState(trace, bloch)
    except ParseFailure:
        raise
    except (QubitMDError, TypeError, ValueError) as exc:
        raise ParseFailure(f"{where}: {exc}") from exc


def load_ensemble_file(path: str) -> tuple[Ensemble, dict]:
    """Parse an ensemble file; returns (ensemble, tolerances)."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseFailure(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseFailure(
            f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict) or "members" not in doc:
        raise ParseFailure(f"{path}: top level must be an object with a 'members' list")
    members = doc["members"]
    if not isinstance(members, list) or not 1 <= len(members) <= 4:
        raise ParseFailure(f"{path}: 'members' must list 1-4 entries")
    tolerances = doc.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ParseFailure(f"{path}: 'tolerances' must be an object")
    allowed = {"tol_cert", "tol_cross", "tol_rank"}
    unknown = set(tolerances) - allowed
    if unknown:
        raise ParseFailure(f"{path}: unknown tolerance keys {sorted(unknown)}")
    try:
        ensemble = Ensemble(tuple(_parse_member(i, m) for i, m in enumerate(members)))
    except QubitMDError as exc:
        raise ParseFailure(f"{path}: {exc}") from exc
    return ensemble, {k: float(v) for k, v in tolerances.items()}


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _vec(v) -> str:
    return "[" + ", ".join(_fmt(float(c)) for c in v) + "]"


def _solution_payload(ensemble: Ensemble, solution) -> dict:
    payload = {
        "p_guess": float(solution.p_guess),
        "branch": str(solution.branch),
        "active_subset": sorted(int(i) for i in solution.active_subset),
        "povm": [
            {"p": float(el.p), "u": [float(c) for c in el.u]}
            for el in solution.povm
        ],
        "complementary": [
            {"r": float(comp.r), "w": [float(c) for c in comp.w]}
            for comp in solution.complementary
        ],
        "operator": {
            "trace": float(solution.operator.trace),
            "bloch": [float(c) for c in solution.operator.bloch],
        },
        "certificate": {
            "primal": float(solution.certificate.primal),
            "dual": float(solution.certificate.dual),
            "slackness": float(solution.certificate.slackness),
            "duality_gap": float(solution.certificate.duality_gap),
        },
    }
    if solution.condition_report is not None:
        payload["clauses"] = [
            {"name": cl.name, "passed": bool(cl.passed), "margin": float(cl.margin)}
            for cl in solution.condition_report.clauses
        ]
    return payload


def _print_solution(ensemble: Ensemble, solution, out) -> None:
    print(f"p_guess = {_fmt(solution.p_guess)}", file=out)
    print(f"branch  = {solution.branch}", file=out)
    print(f"active  = {sorted(solution.active_subset)}", file=out)
    print("povm elements (p, u):", file=out)
    for i, el in enumerate(solution.povm):
        print(f"  {i}: p = {_fmt(el.p):<18} u = {_vec(el.u)}", file=out)
    print("complementary states (r, w):", file=out)
    for i, comp in enumerate(solution.complementary):
        print(f"  {i}: r = {_fmt(comp.r):<18} w = {_vec(comp.w)}", file=out)
    if solution.condition_report is not None:
        print("condition clauses:", file=out)
        for cl in solution.condition_report.clauses:
            status = "pass" if cl.passed else "FAIL"
            print(f"  {cl.name:<20} {status}  margin = {_fmt(cl.margin)}", file=out)
    cert = solution.certificate
    print(
        "certificate residuals: "
        f"primal = {cert.primal:.3e}, dual = {cert.dual:.3e}, "
        f"slackness = {cert.slackness:.3e}, duality_gap = {cert.duality_gap:.3e}",
        file=out,
    )


def cmd_solve(args, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        ensemble, tolerances = load_ensemble_file(args.path)
    except ParseFailure as exc:
        print(f"error: {exc}", file=err)
        return 2
    if args.tol is not None:
        tolerances["tol_cert"] = args.tol
    try:
        solution = solve(ensemble, **tolerances)
    except CertificateFailureError as exc:
        print(f"error: {exc}", file=err)
        return 3
    if args.json:
        json.dump(_solution_payload(ensemble, solution), out, indent=2)
        out.write("\n")
    else:
        _print_solution(ensemble, solution, out)
    return 0


def cmd_verify(args, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        ensemble, tolerances = load_ensemble_file(args.path)
    except ParseFailure as exc:
        print(f"error: {exc}", file=err)
        return 2
    threshold = args.tol if args.tol is not None else 1e-6
    try:
        solution = solve(ensemble, **tolerances)
    except CertificateFailureError as exc:
        print(f"error: {exc}", file=err)
        return 3
    point = dual_socp(ensemble)
    sample = primal_sampler(
        ensemble, solution.p_guess, trials=args.trials, seed=args.seed
    )
    discrepancy = abs(solution.p_guess - point.value)
    report = {
        "solve": solution.p_guess,
        "dual": point.value,
        "sampler_best": sample.best_value,
        "discrepancy": discrepancy,
        "sampler_violation": sample.violation,
        "ok": discrepancy <= threshold and not sample.violation,
    }
    if args.json:
        json.dump(report, out, indent=2)
        out.write("\n")
    else:
        print(f"solve        = {_fmt(solution.p_guess)}", file=out)
        print(f"dual         = {_fmt(point.value)}", file=out)
        print(f"sampler best = {_fmt(sample.best_value)}  ({sample.trials} trials)", file=out)
        print(f"discrepancy  = {discrepancy:.3e}", file=out)
        if sample.violation:
            print("sampler found a POVM beating the claimed optimum", file=out)
    return 0 if report["ok"] else 4


def cmd_sweep(args, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    h_min, h_max, steps = args.h_min, args.h_max, args.steps
    if not (0.0 <= h_min <= h_max <= H_MAX + 1e-12) or steps < 1:
        print(
            f"error: need 0 <= h_min <= h_max <= {H_MAX:.6f} and steps >= 1",
            file=err,
        )
        return 2
    hs = np.linspace(h_min, h_max, steps)
    rows = []
    for h in hs:
        solution = solve(skewed_tetrahedron_ensemble(float(h)))
        nonzero = sum(1 for el in solution.povm if el.p > P_NONZERO)
        rows.append((float(h), solution.p_guess, nonzero, str(solution.branch)))
    # the closed form switches branches where the optimal measurement
    # first drops an outcome; locate that transition from the data
    transition = next((h for h, _, nz, _ in rows if nz < 4), math.inf)
    with open(args.out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["h", "p_guess", "nonzero_count", "branch", "closed_form_value", "abs_error"]
        )
        for h, p_guess, nonzero, branch in rows:
            expected = closed_form_value(h, four_outcomes=h < transition)
            writer.writerow(
                [_fmt(h), _fmt(p_guess), nonzero, branch,
                 _fmt(expected), _fmt(abs(p_guess - expected))]
            )
    print(f"wrote {len(rows)} rows to {args.out_path}", file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qubitmd",
        description="Minimum-error discrimination of up to four qubit states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve an ensemble file")
    p_solve.add_argument("path", help="JSON ensemble file")
    p_solve.add_argument("--tol", type=float, default=None, help="certificate tolerance")
    p_solve.add_argument("--json", action="store_true", help="machine-readable output")
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser(
        "verify", help="cross-check solve against the dual oracle and sampler"
    )
    p_verify.add_argument("path", help="JSON ensemble file")
    p_verify.add_argument("--tol", type=float, default=None, help="discrepancy threshold (default 1e-6)")
    p_verify.add_argument("--seed", type=int, default=0, help="sampler seed")
    p_verify.add_argument("--trials", type=int, default=1000, help="sampler trials")
    p_verify.add_argument("--json", action="store_true", help="machine-readable output")
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser(
        "sweep", help="sweep the benchmark family and write a CSV"
    )
    p_sweep.add_argument("out_path", help="output CSV path")
    p_sweep.add_argument("--h-min", type=float, default=0.0)
    p_sweep.add_argument("--h-max", type=float, default=H_MAX)
    p_sweep.add_argument("--steps", type=int, default=1000)
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
