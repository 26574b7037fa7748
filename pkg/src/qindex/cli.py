"""Command-line surface: file-driven index computation, fixture generation,
fusion analysis, and lattice classification.

Every command prints one RunReport as canonical JSON on stdout.  Exit
codes: 0 success, 1 parse error, 2 validation failure, 3 infinite or
unsolvable result.  Reports are deterministic for a fixed seed except for
the wall_ms field.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import io as qio
from .expectation import (ConditionalExpectation, canonical_expectation,
                          compute_index_report, validate_expectation)
from .fusion import (action_functor, check_locally_constant, d_function,
                     equivalence_classes, jones_membership, module_trace_solve,
                     pf_dimensions, validate_fusion, validate_module)
from .generators import gen_pointed, gen_regular_module, gen_tlj
from .lattice import (IrrepLabel, cartan_data, classify_subgroups,
                      irrep_membership)

SCHEMA = "qindex.report/1"

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_VALIDATION = 2
EXIT_INFINITE = 3

log = logging.getLogger("qindex")


class CliFailure(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise CliFailure(EXIT_PARSE, f"cannot open {path}")
    except json.JSONDecodeError as err:
        raise CliFailure(EXIT_PARSE,
                         f"{path}: malformed JSON at line {err.lineno} "
                         f"column {err.colno}: {err.msg}")


def _digest(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _digest_files(paths: list[str]) -> str:
    h = hashlib.sha256()
    for path in sorted(paths):
        with open(path, "rb") as fh:
            h.update(fh.read())
    return h.hexdigest()


def _jsonable(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return value
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return _jsonable(float(value))
    return value


def _emit(args, results: dict, input_digest: str, tolerances: dict,
          seed: int, t0: float) -> None:
    report = {
        "schema": SCHEMA,
        "command": args._command_echo,
        "input_digest": input_digest,
        "tolerances": _jsonable(tolerances),
        "seed": seed,
        "wall_ms": round(1000.0 * (time.perf_counter() - t0), 3),
        "results": _jsonable(results),
    }
    print(json.dumps(report, sort_keys=True, separators=(",", ":")))


def _write_artifact(path: str | None, payload) -> None:
    if path is None:
        return
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- index -------------------------------------------------------------------

def cmd_index_compute(args) -> int:
    t0 = time.perf_counter()
    data = _load_json(args.spec)
    try:
        inclusion, mat, tau = qio.expectation_spec_from_json(data)
    except qio.SchemaError as err:
        raise CliFailure(EXIT_VALIDATION, str(err))

    if mat is None:
        try:
            expectation = canonical_expectation(inclusion, tau, tol=args.tol)
        except ValueError as err:
            raise CliFailure(EXIT_VALIDATION, str(err))
    else:
        expectation = ConditionalExpectation(inclusion, mat)
        report = validate_expectation(expectation, tol=args.tol)
        if not report.ok:
            raise CliFailure(EXIT_VALIDATION,
                             "not a conditional expectation; failed axioms: "
                             + ", ".join(report.failures))

    index = compute_index_report(expectation, tau, tol=args.tol,
                                 budget=args.budget, seed=args.seed)
    results = {
        "index_norm": index.index_norm,
        "scalar_index": index.scalar_index,
        "prob_lower": index.prob_lower,
        "prob_upper": index.prob_upper,
        "quasi_basis_size": index.quasi_basis_size,
        "seed": index.seed,
        "index_in_subalgebra": index.index_in_subalgebra,
    }
    _write_artifact(args.output, _jsonable(results))
    _emit(args, results, _digest_files([args.spec]),
          {"tol": args.tol, "budget": args.budget}, args.seed, t0)
    if math.isinf(index.scalar_index) or index.index_element is None:
        log.warning("infinite scalar index")
        return EXIT_INFINITE
    return EXIT_OK


# -- fusion ------------------------------------------------------------------

def cmd_fusion_generate(args) -> int:
    t0 = time.perf_counter()
    if args.kind == "tlj":
        ring, dims = gen_tlj(args.n)
        payload = qio.ring_to_json(ring)
        results = {"ring": payload, "dims": dims.as_dict()}
        params = {"kind": "tlj", "n": args.n}
    else:
        factors = _parse_int_list(args.factors, "factors")
        ring = gen_pointed(factors)
        payload = qio.ring_to_json(ring)
        results = {"ring": payload}
        params = {"kind": "pointed", "factors": factors}
    _write_artifact(args.output, payload)
    _emit(args, results, _digest(params), {}, args.seed, t0)
    return EXIT_OK


def cmd_fusion_trace(args) -> int:
    t0 = time.perf_counter()
    ring = _ring_from_arg(args.ring)
    module, module_paths = _module_from_arg(args.module, ring)
    problems = validate_module(module)
    if problems:
        raise CliFailure(EXIT_VALIDATION, "; ".join(problems))
    dims = pf_dimensions(ring)
    result = module_trace_solve(module, dims)
    results = {
        "status": result.status,
        "solution_dim": result.solution_dim,
        "ring_dims": dims.as_dict(),
        "trace": result.trace.as_dict() if result.trace else None,
    }
    _write_artifact(args.output, _jsonable(results))
    _emit(args, results, _digest_files([args.ring] + module_paths),
          {}, args.seed, t0)
    return EXIT_OK if result.status == "ok" else EXIT_INFINITE


def cmd_fusion_jones(args) -> int:
    t0 = time.perf_counter()
    member, witness = jones_membership(args.value, args.tol)
    results = {"value": args.value, "member": member, "witness": witness}
    _emit(args, results, _digest({"value": args.value}), {"tol": args.tol},
          args.seed, t0)
    return EXIT_OK


def cmd_fusion_descent(args) -> int:
    t0 = time.perf_counter()
    ring = _ring_from_arg(args.ring)
    module, module_paths = _module_from_arg(args.module, ring)
    problems = validate_module(module)
    if problems:
        raise CliFailure(EXIT_VALIDATION, "; ".join(problems))
    subring = [x for x in args.subring.split(",") if x]
    dims = pf_dimensions(ring)
    solved = module_trace_solve(module, dims)
    if solved.trace is None:
        raise CliFailure(EXIT_INFINITE, f"no module trace: {solved.status}")
    try:
        classes = equivalence_classes(module, subring)
    except ValueError as err:
        raise CliFailure(EXIT_VALIDATION, str(err))
    action_labels = ([args.action_by] if args.action_by else list(ring.labels))
    functors = {}
    for u in action_labels:
        if u not in ring.labels:
            raise CliFailure(EXIT_VALIDATION, f"unknown ring label {u!r}")
        functor = action_functor(module, solved.trace, u)
        d_f = d_function(functor, solved.trace)
        constant, violations = check_locally_constant(d_f, classes, args.tol)
        functors[u] = {"d_F": d_f, "locally_constant": constant,
                       "violations": violations}
    results = {"classes": [list(c) for c in classes],
               "trace": solved.trace.as_dict(),
               "functors": functors}
    _emit(args, results, _digest_files([args.ring] + module_paths),
          {"tol": args.tol}, args.seed, t0)
    return EXIT_OK


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise CliFailure(EXIT_PARSE, f"cannot parse {what} {text!r}")


def _ring_from_arg(path: str):
    data = _load_json(path)
    try:
        ring = qio.ring_from_json(data)
    except qio.SchemaError as err:
        raise CliFailure(EXIT_VALIDATION, str(err))
    problems = validate_fusion(ring)
    if problems:
        raise CliFailure(EXIT_VALIDATION, "; ".join(problems))
    return ring


def _module_from_arg(arg: str, ring):
    if arg == "regular":
        return gen_regular_module(ring), []
    data = _load_json(arg)
    try:
        module = qio.module_from_json(data)
    except qio.SchemaError as err:
        raise CliFailure(EXIT_VALIDATION, str(err))
    if module.ring.labels != ring.labels or \
            not np.array_equal(module.ring.tensor, ring.tensor):
        raise CliFailure(EXIT_VALIDATION,
                         "module file carries a different ring than --ring")
    return module, [arg]


# -- classify ----------------------------------------------------------------

def cmd_classify_table(args) -> int:
    t0 = time.perf_counter()
    try:
        cartan = cartan_data(args.lie_type)
        specs = classify_subgroups(cartan)
    except ValueError as err:
        raise CliFailure(EXIT_VALIDATION, str(err))
    rows = [{
        "subgroup": [list(g) for g in spec.subgroup],
        "subgroup_order": spec.subgroup_order,
        "lattice_generators": [list(r) for r in spec.generators],
        "index": spec.index_in_p,
    } for spec in specs]
    results = {"lie_type": cartan.lie_type, "entries": rows}
    _write_artifact(args.output, _jsonable(results))
    _emit(args, results, _digest({"lie_type": cartan.lie_type}), {}, args.seed, t0)
    return EXIT_OK


def cmd_classify_irrep(args) -> int:
    t0 = time.perf_counter()
    try:
        cartan = cartan_data(args.lie_type)
        specs = classify_subgroups(cartan)
        weight = tuple(_parse_int_list(args.weight, "weight"))
        if len(weight) != cartan.rank:
            raise ValueError(f"weight must have {cartan.rank} coordinates")
        label = IrrepLabel(weight)
        spec = _select_subgroup(specs, args.subgroup)
        member = irrep_membership(label, spec)
    except ValueError as err:
        raise CliFailure(EXIT_VALIDATION, str(err))
    results = {"lie_type": cartan.lie_type, "weight": list(weight),
               "subgroup": args.subgroup, "index": spec.index_in_p,
               "member": member}
    _emit(args, results,
          _digest({"lie_type": cartan.lie_type, "weight": list(weight),
                   "subgroup": args.subgroup}), {}, args.seed, t0)
    return EXIT_OK


def _select_subgroup(specs, name: str):
    if name.upper() == "P":
        return min(specs, key=lambda s: s.index_in_p)
    if name.upper() == "Q":
        return max(specs, key=lambda s: s.index_in_p)
    try:
        pos = int(name)
    except ValueError:
        raise ValueError(f"--subgroup must be P, Q, or a table position, got {name!r}")
    if not 0 <= pos < len(specs):
        raise ValueError(f"table position {pos} out of range (0..{len(specs) - 1})")
    return specs[pos]


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9,
                        help="numerical tolerance (default 1e-9)")
    common.add_argument("--budget", type=int, default=2000,
                        help="iteration budget for index search (default 2000)")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for randomized searches (default 0)")

    parser = argparse.ArgumentParser(
        prog="qindex",
        description="Index theory of conditional expectations, fusion-module "
                    "traces, and root/weight lattice classification.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_index = sub.add_parser("index", help="conditional-expectation indices")
    index_sub = p_index.add_subparsers(dest="index_cmd", required=True)
    p_compute = index_sub.add_parser("compute", parents=[common],
                                     help="index report from a JSON spec")
    p_compute.add_argument("--spec", required=True, help="expectation spec file")
    p_compute.add_argument("-o", "--output", default=None)
    p_compute.set_defaults(func=cmd_index_compute)

    p_fusion = sub.add_parser("fusion", help="fusion rings and module traces")
    fusion_sub = p_fusion.add_subparsers(dest="fusion_cmd", required=True)

    p_gen = fusion_sub.add_parser("generate", help="write fixture rings")
    gen_sub = p_gen.add_subparsers(dest="kind", required=True)
    p_tlj = gen_sub.add_parser("tlj", parents=[common],
                               help="Temperley-Lieb-Jones ring")
    p_tlj.add_argument("--n", type=int, required=True)
    p_tlj.add_argument("-o", "--output", default=None)
    p_tlj.set_defaults(func=cmd_fusion_generate, kind="tlj")
    p_pointed = gen_sub.add_parser("pointed", parents=[common],
                                   help="group ring of an abelian group")
    p_pointed.add_argument("--factors", required=True,
                           help="comma-separated invariant factors, e.g. 2,2")
    p_pointed.add_argument("-o", "--output", default=None)
    p_pointed.set_defaults(func=cmd_fusion_generate, kind="pointed")

    p_trace = fusion_sub.add_parser("trace", parents=[common],
                                    help="solve for the module trace")
    p_trace.add_argument("--ring", required=True)
    p_trace.add_argument("--module", required=True,
                         help="module file, or 'regular'")
    p_trace.add_argument("-o", "--output", default=None)
    p_trace.set_defaults(func=cmd_fusion_trace)

    p_jones = fusion_sub.add_parser("jones", parents=[common],
                                    help="Jones spectrum membership")
    p_jones.add_argument("--value", type=float, required=True)
    p_jones.set_defaults(func=cmd_fusion_jones)

    p_descent = fusion_sub.add_parser(
        "descent", parents=[common],
        help="equivalence classes and d_F constancy in one pass")
    p_descent.add_argument("--ring", required=True)
    p_descent.add_argument("--module", required=True)
    p_descent.add_argument("--subring", required=True,
                           help="comma-separated ring labels")
    p_descent.add_argument("--action-by", default=None,
                           help="single ring label (default: all)")
    p_descent.set_defaults(func=cmd_fusion_descent)

    p_classify = sub.add_parser("classify", parents=[common],
                                help="finite-index subgroup tables")
    p_classify.add_argument("--lie-type", default=None)
    p_classify.add_argument("-o", "--output", default=None)
    p_classify.set_defaults(func=cmd_classify_table)
    classify_sub = p_classify.add_subparsers(dest="classify_cmd")
    p_irrep = classify_sub.add_parser("irrep", parents=[common],
                                      help="irrep membership in a subgroup")
    p_irrep.add_argument("--lie-type", required=True)
    p_irrep.add_argument("--weight", required=True,
                         help="comma-separated dominant weight")
    p_irrep.add_argument("--subgroup", required=True,
                         help="P, Q, or a position in the classification table")
    p_irrep.set_defaults(func=cmd_classify_irrep)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    level = os.environ.get("QINDEX_LOG", "warning").upper()
    logging.basicConfig(stream=sys.stderr,
                        level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    args._command_echo = argv
    if getattr(args, "func", None) is cmd_classify_table and args.lie_type is None:
        parser.error("classify requires --lie-type")
    try:
        return args.func(args)
    except CliFailure as err:
        print(f"error: {err}", file=sys.stderr)
        return err.code
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
