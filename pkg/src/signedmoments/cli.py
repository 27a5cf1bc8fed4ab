"""Command-line entry point.

Exit codes: 0 success, 1 input/parse error, 2 solver failure, 3 a check or
verification that ran but did not pass.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import linalg
from .core import (
    MomentSequence,
    PartialMomentSequence,
    SignedMeasure,
    as_point,
    dumps,
    format_rational,
    measure_from_json,
    monomial_name,
    parse_rational,
    sequence_from_json,
)
from .errors import (
    ComplexRootsError,
    MomentError,
    NoLinearRelationError,
    SamplingExhaustedError,
    SingularAfterRetriesError,
    SingularLeadingHankelError,
)
from .hankel1d import hankel, legendre_moments, product_measure, quadrature_from_moments
from .momat import build_moment_matrix
from .solver import SolveConfig, complete_sequence, solve, verify

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_FAILED = 0, 1, 2, 3

MODES = {"direct": "direct", "perturb": "perturbation", "minimal": "minimal-linear"}


class InputError(Exception):
    pass


# --- file ingestion ---------------------------------------------------------


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _csv_rows(text: str) -> list[list[str]]:
    rows = []
    for row in csv.reader(io.StringIO(text)):
        cells = [c.strip() for c in row]
        if not cells or not cells[0] or cells[0].startswith("#"):
            continue
        try:
            parse_rational(cells[0])
        except MomentError:
            continue  # header line
        rows.append(cells)
    return rows


def load_sequence(path: str):
    text = _read_text(path)
    try:
        if path.endswith(".csv"):
            rows = _csv_rows(text)
            if not rows:
                raise InputError(f"{path}: no moment rows")
            d = len(rows[0]) - 1
            entries = {}
            for r in rows:
                if len(r) != d + 1:
                    raise InputError(f"{path}: inconsistent row width in {r}")
                entries[tuple(int(x) for x in r[:d])] = parse_rational(r[d])
            return sequence_from_json(
                {"dimension": d, "entries": [{"index": list(i), "value": v} for i, v in entries.items()]}
            )
        return sequence_from_json(json.loads(text))
    except (json.JSONDecodeError, MomentError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_measure(path: str) -> SignedMeasure:
    text = _read_text(path)
    try:
        if path.endswith(".csv"):
            rows = _csv_rows(text)
            if not rows:
                return SignedMeasure(1)
            d = len(rows[0]) - 1
            return SignedMeasure(d, tuple((as_point(r[:d]), parse_rational(r[d])) for r in rows))
        data = json.loads(text)
        if isinstance(data, dict) and "measure" in data and "atoms" not in data:
            data = data["measure"]  # a solve report
        return measure_from_json(data)
    except (json.JSONDecodeError, MomentError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


# --- rendering --------------------------------------------------------------


def _num(x, scalar: str):
    return format_rational(x) if scalar == "rational" else float(x)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _measure_csv(mu: SignedMeasure, scalar: str) -> str:
    header = [f"x{k}" for k in range(1, mu.dimension + 1)] + ["density"]
    return _csv_text(header, [[_num(c, scalar) for c in p] + [_num(a, scalar)] for p, a in mu.atoms])


def _sequence_csv(beta: MomentSequence, scalar: str) -> str:
    header = [f"i{k}" for k in range(1, beta.dimension + 1)] + ["value"]
    return _csv_text(header, [list(i) + [_num(beta[i], scalar)] for i in beta.labels()])


def _sequence_json(beta: MomentSequence, scalar: str) -> dict:
    data = beta.to_json()
    if scalar == "float":
        for item in data["entries"]:
            item["value"] = float(parse_rational(item["value"]))
    return data


def _measure_table(mu: SignedMeasure) -> str:
    if not mu.atoms:
        return "(empty measure)"
    lines = [f"{'density':>24}  point"]
    for p, a in mu.atoms:
        lines.append(f"{str(a):>24}  ({', '.join(str(c) for c in p)})    ~ {float(a):.6g}")
    return "\n".join(lines)


def _emit(args, payload: str, table: str = "") -> None:
    if args.output:
        Path(args.output).write_text(payload)
        if table and not args.quiet:
            print(table)
    else:
        sys.stdout.write(payload)
        if table and not args.quiet:
            print(table, file=sys.stderr)


def _note(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


# --- commands ---------------------------------------------------------------


def _config(args, strategy: str = "direct") -> SolveConfig:
    return SolveConfig(strategy=strategy, seed=args.seed, node_box=parse_rational(args.box), max_retries=args.max_retries)


def _ensure_even(beta, cfg: SolveConfig, notes: list[str]) -> MomentSequence:
    if isinstance(beta, PartialMomentSequence) or beta.degree % 2:
        done = complete_sequence(beta, cfg)
        notes.append(
            f"input completed to degree {done.sequence.degree}: filled {len(done.filled)} entries "
            f"({'invertible' if done.invertible else 'not invertible'} moment matrix)"
        )
        return done.sequence
    return beta


def cmd_solve(args) -> int:
    beta = load_sequence(args.input)
    strategy = MODES[args.mode]
    cfg = _config(args, strategy)
    notes: list[str] = []
    full = _ensure_even(beta, cfg, notes)
    try:
        report = solve(full, cfg)
    except (SingularAfterRetriesError, NoLinearRelationError, SamplingExhaustedError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if report is None:
        print("solver failure: deflation stalled before reaching rank 0", file=sys.stderr)
        return EXIT_SOLVER
    check = verify(full, report.measure)
    report = dataclasses.replace(report, oracle_verified=check.passed, notes=tuple(notes) + report.notes)
    for n in notes:
        _note(args, n)
    if args.format == "csv":
        payload = _measure_csv(report.measure, args.scalar)
    else:
        data = report.to_json(args.scalar)
        if notes:
            data["completed_sequence"] = _sequence_json(full, args.scalar)
        payload = dumps(data)
    table = f"strategy {report.strategy}, {len(report.measure)} atoms, verified={check.passed}\n" + _measure_table(report.measure)
    _emit(args, payload, table)
    return EXIT_OK if check.passed else EXIT_SOLVER


def cmd_verify(args) -> int:
    beta = load_sequence(args.sequence)
    if isinstance(beta, PartialMomentSequence):
        raise InputError(f"{args.sequence}: sequence is missing entries {beta.missing()[:5]}")
    mu = load_measure(args.measure)
    if mu.dimension != beta.dimension:
        raise InputError(f"dimension mismatch: sequence d={beta.dimension}, measure d={mu.dimension}")
    result = verify(beta, mu, args.scalar)
    if args.format == "csv":
        header = [f"i{k}" for k in range(1, beta.dimension + 1)] + ["delta"]
        payload = _csv_text(header, [list(i) + [_num(v, args.scalar)] for i, v in result.deltas.items()])
    else:
        payload = dumps(result.to_json())
    lines = [f"{'index':>14}  delta"]
    for i, v in result.deltas.items():
        lines.append(f"{str(i):>14}  {v if args.scalar == 'rational' else float(v)}")
    lines.append("PASS" if result.passed else f"FAIL: {len(result.nonzero())} nonzero deltas, max |delta| = {result.max_abs_delta:.3g}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if result.passed else EXIT_FAILED


def cmd_quadrature(args) -> int:
    if args.n < 1:
        raise InputError("--n must be >= 1")
    if args.weight == "legendre":
        moments = legendre_moments(2 * args.n - 1).values()
    elif args.weight.startswith("file:"):
        beta = load_sequence(args.weight[len("file:"):])
        if isinstance(beta, PartialMomentSequence) or beta.dimension != 1:
            raise InputError("quadrature moments must be a complete one-dimensional sequence")
        moments = beta.values()
        if len(moments) < 2 * args.n:
            raise InputError(f"a size-{args.n} rule needs {2 * args.n} moments, got {len(moments)}")
    else:
        raise InputError(f"unknown weight {args.weight!r}; use 'legendre' or 'file:PATH'")
    try:
        rule = quadrature_from_moments(moments, args.n)
    except (SingularLeadingHankelError, ComplexRootsError, MomentError) as exc:
        print(f"quadrature failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if args.format == "csv":
        payload = _csv_text(["node", "weight"], [[repr(t), repr(w)] for t, w in zip(rule.nodes, rule.weights)])
    else:
        payload = dumps(rule.to_json())
    lines = [f"size {rule.size}, precision {rule.precision}, flat extension value {rule.flat_extension_value}",
             f"{'node':>22}  {'weight':>22}"]
    lines += [f"{t:>22.16g}  {w:>22.16g}" for t, w in zip(rule.nodes, rule.weights)]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_check(args) -> int:
    beta = load_sequence(args.input)
    if isinstance(beta, PartialMomentSequence):
        raise InputError(f"{args.input}: sequence is missing entries")
    results = []
    if args.type == "psd":
        if beta.degree % 2:
            raise InputError("psd check needs an even-degree sequence")
        M = build_moment_matrix(beta)
        res = linalg.psd_decompose(M.matrix)
        names = [monomial_name(lab, "X") for lab in M.labels]
        results.append(("moment matrix", res, names))
    else:
        if beta.dimension != 1:
            raise InputError(f"{args.type} check needs a one-dimensional sequence")
        m = beta.degree
        if args.type == "hamburger":
            k = m // 2 if args.level is None else args.level
            shifts = [0]
        else:
            if m < 1 and args.level is None:
                raise InputError("stieltjes check needs at least two moments")
            k = (m - 1) // 2 if args.level is None else args.level
            shifts = [0, 1]
        try:
            for s in shifts:
                H = hankel(beta, s, k + 1)
                names = [f"T^{j}" for j in range(k + 1)]
                results.append((f"shift-{s} Hankel of size {k + 1}", linalg.psd_decompose(H), names))
        except MomentError as exc:
            raise InputError(str(exc)) from exc
    ok = all(r.psd for _, r, _ in results)
    lines = []
    for title, res, names in results:
        if res.psd:
            lines.append(f"{title}: positive semidefinite")
        else:
            labels = ", ".join(names[i] for i in res.witness)
            lines.append(f"{title}: NOT positive semidefinite ({res.reason}; principal block on {labels})")
    payload = dumps({
        "type": args.type,
        "passed": ok,
        "checks": [
            {"matrix": t, "psd": r.psd, "witness": [names[i] for i in r.witness], "reason": r.reason}
            for t, r, names in results
        ],
    })
    if args.format == "csv":
        payload = _csv_text(["matrix", "psd"], [[t, r.psd] for t, r, _ in results])
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAILED


def cmd_complete(args) -> int:
    beta = load_sequence(args.input)
    cfg = _config(args)
    done = complete_sequence(beta, cfg)
    det = linalg.determinant(build_moment_matrix(done.sequence).matrix)
    if args.format == "csv":
        payload = _sequence_csv(done.sequence, args.scalar)
    else:
        payload = dumps(_sequence_json(done.sequence, args.scalar))
    table = (f"filled {len(done.filled)} entries; moment matrix determinant {det} "
             f"({'invertible' if done.invertible else 'singular'})")
    _emit(args, payload, table)
    return EXIT_OK


def cmd_product(args) -> int:
    mu, nu = load_measure(args.mu), load_measure(args.nu)
    if mu.dimension != 1 or nu.dimension != 1:
        raise InputError("product needs two one-dimensional measures")
    tau = product_measure(mu, nu)
    payload = _measure_csv(tau, args.scalar) if args.format == "csv" else dumps(tau.to_json(args.scalar))
    _emit(args, payload, _measure_table(tau))
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def _default_seed() -> int:
    raw = os.environ.get("MOMENT_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scalar", choices=["rational", "float"], default="rational")
    common.add_argument("--seed", type=int, default=_default_seed(), help="RNG seed (fallback: $MOMENT_SEED, then 0)")
    common.add_argument("--output", "-o", help="write the result file here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--quiet", "-q", action="store_true")

    parser = argparse.ArgumentParser(prog="signedmoments", description="Signed atomic measures for moment sequences.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="find an interpolating measure")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", choices=sorted(MODES), default="direct")
    p.add_argument("--box", default="10", help="coordinate bound B for sampled nodes")
    p.add_argument("--max-retries", type=int, default=32)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", parents=[common], help="check a measure against a sequence")
    p.add_argument("--sequence", required=True)
    p.add_argument("--measure", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("quadrature", parents=[common], help="quadrature rule from moments")
    p.add_argument("--weight", default="legendre", help="'legendre' or 'file:moments.json'")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_quadrature)

    p = sub.add_parser("check", parents=[common], help="positivity checks")
    p.add_argument("--type", choices=["hamburger", "stieltjes", "psd"], required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--level", type=int)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("complete", parents=[common], help="fill missing moments")
    p.add_argument("--input", required=True)
    p.add_argument("--box", default="10")
    p.add_argument("--max-retries", type=int, default=32)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("product", parents=[common], help="product of two 1-D measures")
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.set_defaults(func=cmd_product)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; map onto the input-error code
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, MomentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
