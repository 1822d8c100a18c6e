"""Batch command-line front end.

Every engine operation is reachable from a subcommand, all structured input
and output is JSON (CSV for the wide Satake table), and a run is reproducible
byte for byte: identical configuration and seed produce identical artifacts.
Exit status is 0 exactly when all checks in scope pass; malformed input exits
nonzero with a diagnostic naming the offending record.

The environment variable MQL_THREADS caps internal parallelism.  The current
engine is sequential (the cap is honored trivially); the variable is still
validated so configurations stay portable.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import hecke as hecke_mod
from . import lift as lift_mod
from . import spectral as spectral_mod
from .formal import UnassignedSymbolError, formal_to_json_obj
from .lift import (
    CoefficientTable,
    SourceForm,
    build_lift_table,
    check_maass,
    random_maass_table,
    source_coefficient,
    table_from_json_dict,
    table_to_json_dict,
)
from .hecke import (
    HeckeOperator,
    adjoint_matrix_identities,
    apply as hecke_apply,
    extract_lambda,
    stability_check,
    verify_eigen_relations,
)
from .quaternion import decompose, parse_quaternion
from .spectral import (
    ramanujan_violation_check,
    satake_csv_rows,
    satake_from_lambda,
    sigma_descriptor,
    synth_eigenform,
    verify_cn_relations,
)

__all__ = ["COMMAND_OPERATIONS", "main"]

#: Engine operations each subcommand exercises; the test suite checks that
#: every public operation appears at least once.
COMMAND_OPERATIONS = {
    "decompose": (
        "quaternion.parse_quaternion",
        "quaternion.decompose",
        "quaternion.is_valid_index",
    ),
    "cp-enum": (
        "quaternion.unit_class_reps",
        "quaternion.elements_of_norm",
        "quaternion.units",
        "quaternion.divisibility_counts",
        "quaternion.exact_divide",
    ),
    "lift": (
        "lift.build_lift_table",
        "lift.lift_coefficient",
        "lift.valid_indices",
        "formal.evaluate",
        "formal.combine",
        "lift.table_to_json_dict",
    ),
    "invert": (
        "lift.source_coefficient",
        "lift.dyadic_depth",
        "lift.table_from_json_dict",
        "formal.formal_to_json_obj",
        "formal.formal_from_json_obj",
    ),
    "check-maass": ("lift.check_maass", "formal.reduce_eigen2"),
    "hecke": (
        "hecke.apply",
        "hecke.extract_lambda",
        "hecke.verify_eigen_relations",
        "quaternion.representative",
        "quaternion.three_squares",
    ),
    "synth": ("spectral.synth_eigenform",),
    "satake": (
        "spectral.satake_from_lambda",
        "spectral.ramanujan_violation_check",
        "spectral.sigma_descriptor",
        "spectral.verify_cn_relations",
        "spectral.satake_csv_rows",
    ),
    "stability": (
        "lift.random_maass_table",
        "lift.maass_table_from_generators",
        "hecke.stability_check",
        "hecke.hecke_image_table",
        "hecke.h3_sum_identity_residual",
    ),
    "adjoint": ("hecke.adjoint_matrix_identities",),
}


class CliError(Exception):
    """Input problem; the message names the offending record."""


def _dump_json(obj, path):
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_json(path, what):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise CliError(f"{what} file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed JSON in {what} file {path}: {exc}") from None


def _load_config(args) -> dict:
    cfg = _load_json(args.config, "config") if getattr(args, "config", None) else {}
    if not isinstance(cfg, dict):
        raise CliError(f"config file {args.config} must hold a JSON object")
    for flag in ("backend", "tolerance", "seed", "kmax", "epsilon"):
        v = getattr(args, flag, None)
        if v is not None:
            cfg["k_max" if flag == "kmax" else flag] = v
    tol = cfg.get("tolerance")
    if tol is not None and tol <= 0:
        raise CliError("tolerance must be positive")
    if cfg.get("k_max") is not None and cfg["k_max"] < 2:
        raise CliError("k_max must be at least 2")
    eps = cfg.get("epsilon")
    if eps is not None and eps not in (1, -1):
        raise CliError("epsilon must be 1 or -1")
    return cfg


def _load_table(path) -> CoefficientTable:
    obj = _load_json(path, "table")
    try:
        return table_from_json_dict(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"bad table file {path}: {exc}") from None


def _lambdas_from_config(cfg, n_max) -> dict:
    lams = {int(p): float(v) for p, v in cfg.get("lambdas", {}).items()}
    rand = cfg.get("random_lambdas")
    if rand:
        import random as _random

        rng = _random.Random(int(rand.get("seed", cfg.get("seed", 0))))
        lo, hi = rand.get("range", [-2.0, 2.0])
        p = 3
        while p <= n_max:
            if all(p % q for q in range(3, int(p ** 0.5) + 1, 2)):
                lams.setdefault(p, rng.uniform(lo, hi))
            p += 2
    return lams


def _cmd_decompose(args) -> int:
    lines = []
    if args.infile:
        try:
            with open(args.infile, encoding="utf-8") as fh:
                raw = [ln.strip() for ln in fh]
        except FileNotFoundError:
            raise CliError(f"input file not found: {args.infile}") from None
        lines = [(f"{args.infile}:{i + 1}", ln) for i, ln in enumerate(raw) if ln and not ln.startswith("#")]
    lines += [(f"argument {i + 1}", el) for i, el in enumerate(args.elements)]
    if not lines:
        raise CliError("no elements given (pass them as arguments or via --in)")
    out_lines = []
    for where, text in lines:
        try:
            q = parse_quaternion(text)
            idx, _ = decompose(q)
        except ValueError as exc:
            raise CliError(f"{where}: {exc}") from None
        out_lines.append(json.dumps({"K": idx.K, "u": idx.u, "n": idx.n}, sort_keys=True))
    payload = "\n".join(out_lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return 0


def _cmd_cp_enum(args) -> int:
    from .quaternion import divisibility_counts, unit_class_reps

    try:
        reps = unit_class_reps(args.p)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    payload = {"prime": args.p, "classes": [str(r) for r in reps]}
    if args.divisibility:
        try:
            beta = parse_quaternion(args.divisibility)
            counts = divisibility_counts(beta, args.p)
        except ValueError as exc:
            raise CliError(f"--divisibility {args.divisibility!r}: {exc}") from None
        payload["divisibility"] = {
            "beta": str(beta),
            "left": counts.left,
            "right": counts.right,
        }
    _dump_json(payload, args.out)
    return 0


def _read_source(path) -> SourceForm:
    obj = _load_json(path, "source form")
    try:
        values = {int(k): float(v) for k, v in obj["values"].items()}
        return SourceForm(int(obj["epsilon"]), values)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"bad source form file {path}: {exc}") from None


def _cmd_lift(args) -> int:
    cfg = _load_config(args)
    k_max = int(cfg.get("k_max", 256))
    backend = cfg.get("backend", "formal")
    if backend == "formal":
        source = SourceForm(int(cfg.get("epsilon", 1)))
    elif backend == "numeric":
        if not args.source:
            raise CliError("numeric lift needs --source FILE (see the synth command)")
        source = _read_source(args.source)
    else:
        raise CliError(f"unknown backend {backend!r}")
    try:
        table = build_lift_table(source, k_max)
    except UnassignedSymbolError as exc:
        raise CliError(
            f"source form {args.source} is too short for k_max={k_max}: {exc.args[0]}"
        ) from None
    _dump_json(table_to_json_dict(table), args.out)
    return 0


def _cmd_invert(args) -> int:
    table = _load_table(args.table)
    n_max = args.nmax or table.k_max // 2
    if 2 * n_max > table.k_max:
        raise CliError(f"--nmax {n_max} exceeds the table bound {table.k_max}")
    values = {}
    for N in range(1, n_max + 1):
        v = source_coefficient(table, N)
        values[str(N)] = formal_to_json_obj(v) if table.backend == "formal" else float(v)
    _dump_json({"epsilon": table.epsilon, "values": values}, args.out)
    return 0


def _cmd_check_maass(args) -> int:
    cfg = _load_config(args)
    table = _load_table(args.table)
    report = check_maass(table, float(cfg.get("tolerance", 1e-8)))
    _dump_json(report.to_json_dict(), args.out)
    return 0 if report.passed else 1


def _parse_index(text):
    try:
        k, u, n = (int(v) for v in text.split(","))
        return (k, u, n)
    except ValueError:
        raise CliError(f"bad index {text!r}: expected K,u,n") from None


def _cmd_hecke(args) -> int:
    cfg = _load_config(args)
    tol = float(cfg.get("tolerance", 1e-8))
    table = _load_table(args.table)
    if table.backend == "formal":
        raise CliError(
            f"{args.table} is a formal table; hecke needs a numeric one "
            "(lift with --backend numeric)"
        )
    if args.mode == "apply":
        if not args.kind or not args.index:
            raise CliError("apply mode needs --kind and at least one --index")
        op = HeckeOperator(args.kind, args.prime)
        rows = []
        for text in args.index:
            idx = _parse_index(text)
            try:
                value = hecke_apply(op, table, idx)
            except (ValueError, lift_mod.TableBoundsError) as exc:
                raise CliError(f"--index {text}: {exc}") from None
            rows.append({"index": list(idx), "value": value})
        _dump_json({"kind": args.kind, "prime": args.prime, "images": rows}, args.out)
        return 0
    primes = [int(p) for p in (args.primes or "3").split(",")]
    if args.mode == "lambda":
        rows = []
        for p in primes:
            try:
                rows.append({"prime": p, "lambda": extract_lambda(table, p)})
            except (hecke_mod.NoUsableIndexError, hecke_mod.InconsistentRatiosError) as exc:
                raise CliError(f"prime {p}: {exc}") from None
        _dump_json({"lambdas": rows}, args.out)
        return 0
    try:
        reports = verify_eigen_relations(table, primes, tolerance=tol)
    except hecke_mod.NoUsableIndexError as exc:
        raise CliError(str(exc)) from None
    _dump_json({"reports": [r.to_json_dict() for r in reports]}, args.out)
    return 0 if all(r.passed for r in reports) else 1


def _cmd_synth(args) -> int:
    cfg = _load_config(args)
    n_max = int(cfg.get("n_max", cfg.get("k_max", 256) // 2))
    epsilon = int(cfg.get("epsilon", 1))
    lams = _lambdas_from_config(cfg, n_max)
    try:
        form = synth_eigenform(epsilon, lams, n_max)
    except spectral_mod.MissingLambdaError as exc:
        raise CliError(str(exc)) from None
    payload = {
        "epsilon": epsilon,
        "n_max": n_max,
        "lambdas": {str(p): lams[p] for p in sorted(lams)},
        "values": {str(n): v for n, v in sorted(form.coefficients.items())},
    }
    _dump_json(payload, args.out)
    return 0


def _cmd_satake(args) -> int:
    cfg = _load_config(args)
    tol = float(cfg.get("tolerance", 1e-8))
    lams = {int(p): float(v) for p, v in cfg.get("lambdas", {}).items()}
    if not lams:
        raise CliError("config needs a nonempty 'lambdas' map")
    pairs = []
    for p in sorted(lams):
        params = satake_from_lambda(p, lams[p])
        pairs.append((ramanujan_violation_check(params), params))
    if args.out_csv:
        with open(args.out_csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerows(satake_csv_rows(pairs))
    payload = {"note": spectral_mod.MODULUS_READING_NOTE, "reports": [rep for rep, _ in pairs]}
    descriptors = [
        sigma_descriptor(p, lambda_p=lams[p]).to_json_dict() for p in sorted(lams)
    ]
    if cfg.get("epsilon") in (1, -1):
        descriptors.append(sigma_descriptor(2, epsilon=cfg["epsilon"]).to_json_dict())
    if cfg.get("r") is not None:
        descriptors.append(sigma_descriptor("inf", r=float(cfg["r"])).to_json_dict())
    payload["descriptors"] = descriptors
    ok = all(abs(rep["alpha_sum"]) <= 1e-10 for rep, _ in pairs)
    if args.table:
        table = _load_table(args.table)
        cn = verify_cn_relations(table, lams, tolerance=tol)
        payload["cn_relations"] = cn
        ok = ok and cn["pass"]
    _dump_json(payload, args.out)
    return 0 if ok else 1


def _cmd_stability(args) -> int:
    cfg = _load_config(args)
    tol = float(cfg.get("tolerance", 1e-8))
    k_max = int(cfg.get("k_max", 512))
    epsilon = int(cfg.get("epsilon", 1))
    seed = int(cfg.get("seed", 0))
    prime = int(cfg.get("prime", 3))
    kinds = cfg.get("kinds", ["T2", "H2", "H3", "H4"])
    table = random_maass_table(epsilon, seed, k_max)
    reports = []
    for kind in kinds:
        op = HeckeOperator(kind, 2 if kind == "T2" else prime)
        reports.append(stability_check(op, table, tol).to_json_dict())
    _dump_json({"seed": seed, "epsilon": epsilon, "k_max": k_max, "reports": reports}, args.out)
    return 0 if all(r["pass"] for r in reports) else 1


def _cmd_adjoint(args) -> int:
    primes = tuple(int(p) for p in (args.primes or "3,5").split(","))
    report = adjoint_matrix_identities(primes)
    _dump_json(report.to_json_dict(), args.out)
    return 0 if report.passed else 1


def _add_common(parser, *, out=True):
    if out:
        parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--tolerance", type=float, help="relative tolerance override")
    parser.add_argument("--seed", type=int, help="random seed override")
    parser.add_argument("--kmax", type=int, help="table bound override")
    parser.add_argument("--epsilon", type=int, choices=(1, -1), help="even-place sign")
    parser.add_argument(
        "--backend", choices=("formal", "numeric"), help="coefficient backend"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mql",
        description="Quaternionic Maass lift engine: lifts, recurrences, "
        "Hecke operators and Satake parameters over the Hurwitz order.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="canonical indices of lattice elements")
    p.add_argument("elements", nargs="*", help='elements like "2ij" or "1/2+1/2i+1/2j+1/2k"')
    p.add_argument("--in", dest="infile", help="file with one element per line")
    _add_common(p)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("cp-enum", help="norm-p unit class representatives")
    p.add_argument("p", type=int)
    p.add_argument("--divisibility", help="primitive element for divisibility counts")
    _add_common(p)
    p.set_defaults(func=_cmd_cp_enum)

    p = sub.add_parser("lift", help="lift a source form to a coefficient table")
    p.add_argument("--source", help="numeric source form file (from synth)")
    _add_common(p)
    p.set_defaults(func=_cmd_lift)

    p = sub.add_parser("invert", help="extract source coefficients from a table")
    p.add_argument("--table", required=True)
    p.add_argument("--nmax", type=int)
    _add_common(p)
    p.set_defaults(func=_cmd_invert)

    p = sub.add_parser("check-maass", help="verify both Maass-space recurrences")
    p.add_argument("--table", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_check_maass)

    p = sub.add_parser("hecke", help="apply operators / verify eigenvalue relations")
    p.add_argument("--table", required=True)
    p.add_argument("--mode", choices=("eigen", "apply", "lambda"), default="eigen")
    p.add_argument("--primes", help="comma-separated odd primes (eigen/lambda modes)")
    p.add_argument("--kind", choices=hecke_mod.KINDS)
    p.add_argument("--prime", type=int, default=3)
    p.add_argument("--index", action="append", help="index K,u,n (apply mode)")
    _add_common(p)
    p.set_defaults(func=_cmd_hecke)

    p = sub.add_parser("synth", help="generate a synthetic eigenform")
    _add_common(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("satake", help="Satake parameters and temperedness report")
    p.add_argument("--out-csv", help="CSV output path for the parameter table")
    p.add_argument("--table", help="optional table for source-coefficient checks")
    _add_common(p)
    p.set_defaults(func=_cmd_satake)

    p = sub.add_parser("stability", help="Hecke images of a random Maass-space table")
    _add_common(p)
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("adjoint", help="exact adjoint identities of the generators")
    p.add_argument("--primes", help="comma-separated odd primes (default 3,5)")
    _add_common(p)
    p.set_defaults(func=_cmd_adjoint)

    return parser


def _check_thread_cap() -> None:
    raw = os.environ.get("MQL_THREADS")
    if raw is None:
        return
    try:
        cap = int(raw)
    except ValueError:
        raise CliError(f"MQL_THREADS must be an integer, got {raw!r}") from None
    if cap < 1:
        raise CliError(f"MQL_THREADS must be >= 1, got {cap}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _check_thread_cap()
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
