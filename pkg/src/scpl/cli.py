"""Command-line front end.

Thin wrappers over the library: every subcommand parses files, calls one
library entry point, and formats the result.  Exit codes: 0 success,
1 validation failure, 2 syntax error, 3 rewrite error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .binding import nsc, validate_imp
from .errors import FormatSyntaxError, InvalidInputError, RewriteError, ScplError
from .features import kernel, nsf, validate_configuration, validate_feature_model
from .formats import (export_dot, parse_configuration, parse_product_line,
                      serialize_product_line)
from .model import ImpMapping, check_well_formed
from .strategy import (check_confluence, generate_random_product_line,
                       instantiate, validate_inputs)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_SYNTAX = 2
EXIT_REWRITE = 3


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    elif human:
        print(human)


def _load_line(path: str):
    return parse_product_line(Path(path).read_text(encoding="utf-8"))


def _load_conf(path: str):
    return parse_configuration(Path(path).read_text(encoding="utf-8"))


def _violation_payload(violations) -> list[dict]:
    return [{"element": v.element, "message": v.message} for v in violations]


def cmd_validate(args) -> int:
    fm, sc, imp = _load_line(args.product_line)
    violations = list(validate_feature_model(fm)) + check_well_formed(sc)
    if not violations:
        violations += validate_imp(fm, sc, imp)
    _emit(args, {"violations": _violation_payload(violations)},
          "\n".join(str(v) for v in violations) or "ok")
    return EXIT_OK if not violations else EXIT_INVALID


def cmd_kernel(args) -> int:
    fm, sc, imp = _load_line(args.product_line)
    violations = validate_feature_model(fm)
    if violations:
        _emit(args, {"violations": _violation_payload(violations)},
              "\n".join(str(v) for v in violations))
        return EXIT_INVALID
    features = sorted(kernel(fm))
    _emit(args, {"kernel": features}, "\n".join(features))
    return EXIT_OK


def cmd_config_check(args) -> int:
    fm, sc, imp = _load_line(args.product_line)
    conf = _load_conf(args.configuration)
    violations = list(validate_feature_model(fm))
    if not violations:
        violations = validate_configuration(fm, conf)
    _emit(args, {"violations": _violation_payload(violations)},
          "\n".join(str(v) for v in violations) or "ok")
    return EXIT_OK if not violations else EXIT_INVALID


def cmd_nsc(args) -> int:
    fm, sc, imp = _load_line(args.product_line)
    conf = _load_conf(args.configuration)
    violations = validate_inputs(fm, conf, sc, imp)
    if violations:
        _emit(args, {"violations": _violation_payload(violations)},
              "\n".join(str(v) for v in violations))
        return EXIT_INVALID
    missing = sorted(nsf(fm, conf))
    doomed = sorted(nsc(fm, conf, sc, imp))
    human = "NSF:\n" + "".join(f"  {f}\n" for f in missing) \
            + "NSC:\n" + "".join(f"  {e}\n" for e in doomed)
    _emit(args, {"nsf": missing, "nsc": doomed}, human.rstrip("\n"))
    return EXIT_OK


def cmd_instantiate(args) -> int:
    fm, sc, imp = _load_line(args.product_line)
    conf = _load_conf(args.configuration)
    result = instantiate(fm, conf, sc, imp)
    out_text = serialize_product_line(fm, result.statechart, ImpMapping())
    Path(args.output).write_text(out_text, encoding="utf-8")
    if args.dot:
        Path(args.dot).write_text(export_dot(result.statechart),
                                  encoding="utf-8")
    trace_payload = [
        {"rule": s.rule, "subject": s.subject,
         "removed_states": list(s.removed_states),
         "removed_transitions": list(s.removed_transitions),
         "added_transitions": list(s.added_transitions),
         "detail": s.detail}
        for s in result.trace]
    if args.trace:
        Path(args.trace).write_text(
            json.dumps(trace_payload, indent=2) + "\n", encoding="utf-8")
    _emit(args, {"output": args.output, "steps": len(result.trace)},
          f"wrote {args.output} ({len(result.trace)} rule applications)")
    return EXIT_OK


def cmd_confluence(args) -> int:
    fm, sc, imp = _load_line(args.product_line)
    conf = _load_conf(args.configuration)
    report = check_confluence(fm, conf, sc, imp, trials=args.trials,
                              seed=args.seed,
                              include_pending=args.paper_literal)
    payload = {
        "confluent": report.confluent,
        "trials": report.trials,
        "nsc_size": report.nsc_size,
    }
    if report.divergent_orders:
        payload["divergent_orders"] = [list(o) for o in report.divergent_orders]
        payload["divergent_outcomes"] = list(report.divergent_outcomes)
    verdict = "confluent" if report.confluent else "NOT confluent"
    _emit(args, payload, f"{verdict} over {report.trials} trials "
                         f"(|NSC| = {report.nsc_size})")
    return EXIT_OK if report.confluent else EXIT_INVALID


def cmd_fuzz(args) -> int:
    failures = []
    for i in range(args.count):
        seed = args.seed + i
        line = generate_random_product_line(seed)
        violations = validate_inputs(line.fm, line.conf, line.sc, line.imp)
        if violations:
            failures.append({"seed": seed, "stage": "validate",
                             "detail": [str(v) for v in violations]})
            continue
        try:
            report = check_confluence(line.fm, line.conf, line.sc, line.imp,
                                      trials=20, seed=seed)
        except ScplError as exc:
            failures.append({"seed": seed, "stage": "instantiate",
                             "detail": [exc.message]})
            continue
        if not report.confluent:
            failures.append({"seed": seed, "stage": "confluence",
                             "detail": list(report.divergent_outcomes or ())})
    _emit(args, {"count": args.count, "failures": failures},
          f"{args.count - len(failures)}/{args.count} seeds passed"
          + "".join(f"\n  seed {f['seed']}: {f['stage']}" for f in failures))
    return EXIT_OK if not failures else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scpl",
        description="Instantiate concrete statecharts from a statechart "
                    "product line.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--json", action="store_true",
                       help="emit one JSON object on stdout")
        p.set_defaults(fn=fn)
        return p

    p = add("validate", cmd_validate,
            "check a product-line file against all validators")
    p.add_argument("product_line")

    p = add("kernel", cmd_kernel, "print the kernel features, sorted")
    p.add_argument("product_line")

    p = add("config-check", cmd_config_check,
            "check a configuration against the feature model")
    p.add_argument("product_line")
    p.add_argument("configuration")

    p = add("nsc", cmd_nsc,
            "print non-selected features and the elements to delete")
    p.add_argument("product_line")
    p.add_argument("configuration")

    p = add("instantiate", cmd_instantiate,
            "build the concrete statechart for a configuration")
    p.add_argument("product_line")
    p.add_argument("configuration")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--dot", help="also write a DOT rendering")
    p.add_argument("--trace", help="also write the rule-application trace")

    p = add("confluence", cmd_confluence,
            "check order-independence of the instantiation")
    p.add_argument("product_line")
    p.add_argument("configuration")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--paper-literal", action="store_true",
                   help="let pending transitions grant reachability")

    p = add("fuzz", cmd_fuzz,
            "generate random product lines and run the property pipeline")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=20)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except FormatSyntaxError as exc:
        print(f"syntax error: {exc.message}", file=sys.stderr)
        return EXIT_SYNTAX
    except InvalidInputError as exc:
        print(f"invalid input: {exc.message}", file=sys.stderr)
        return EXIT_INVALID
    except RewriteError as exc:
        print(f"rewrite error: {exc.message}", file=sys.stderr)
        return EXIT_REWRITE
    except ScplError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SYNTAX


if __name__ == "__main__":
    sys.exit(main())
