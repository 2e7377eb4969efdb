"""Command-line front door for the toolchain.

Subcommands: ``check`` (parse + static diagnostics), ``verify`` (behavioral
property verification), ``export-csp`` (FDR2 script generation), ``gen-ada``
(concurrent Ada generation), ``check-assembly`` (assembly contract suites).

Exit codes: 0 all checks pass; 1 violations found; 2 input error (syntax or
format); 3 resource bound exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import assembly as asm_mod
from .ada import (
    StyleNotTranslatable,
    UnattachedInterface,
    UntranslatableProcess,
    generate_ada_text,
    output_filename,
)
from .checks import check_static, has_errors
from .fdr_export import emit_fdr_script
from .model import Diagnostic
from .parser import WrightSyntaxError, parse_wright
from .refinement import DEFAULT_MAX_STATES, verify_configuration

REPORT_SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INPUT_ERROR = 2
EXIT_RESOURCE = 3


def _default_max_states() -> int:
    raw = os.environ.get("WRIGHT_VERIFY_MAX_STATES")
    if raw:
        try:
            return int(raw)
        except ValueError:
            pass
    return DEFAULT_MAX_STATES


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _emit_json(payload: dict) -> None:
    payload = {"schemaVersion": REPORT_SCHEMA_VERSION, **payload}
    json.dump(payload, sys.stdout, indent=2, sort_keys=False)
    sys.stdout.write("\n")


def _print_diagnostics_text(diags: list[Diagnostic]) -> None:
    for d in diags:
        print(f"{d.severity}: [{d.rule_id}] {d.location}: {d.message}",
              file=sys.stderr)


def _input_error(args, path: str, message: str) -> int:
    if args.format == "json":
        _emit_json({"command": args.command, "file": path,
                    "error": message})
    else:
        print(f"error: {message}", file=sys.stderr)
    return EXIT_INPUT_ERROR


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _load_unit(args, path: str):
    try:
        text = _read_text(path)
    except OSError as exc:
        return None, _input_error(args, path, f"cannot read {path}: {exc}")
    try:
        return parse_wright(text), None
    except WrightSyntaxError as exc:
        return None, _input_error(args, path, f"{path}: {exc}")


def cmd_check(args) -> int:
    unit, failure = _load_unit(args, args.file)
    if unit is None:
        return failure
    diags = check_static(unit)
    if args.format == "json":
        _emit_json({"command": "check", "file": args.file,
                    "unit": unit.name,
                    "diagnostics": [d.to_json() for d in diags]})
    else:
        _print_diagnostics_text(diags)
        errors = sum(1 for d in diags if d.severity == "error")
        warnings = len(diags) - errors
        print(f"{unit.name}: {errors} error(s), {warnings} warning(s)")
    return EXIT_VIOLATIONS if has_errors(diags) else EXIT_OK


def cmd_verify(args) -> int:
    unit, failure = _load_unit(args, args.file)
    if unit is None:
        return failure
    reports = verify_configuration(unit, max_states=args.max_states)
    resource = any(r.verdict.counterexample is not None
                   and r.verdict.counterexample.kind == "resource"
                   for r in reports)
    failed = [r for r in reports if not r.verdict.holds]
    if args.format == "json":
        _emit_json({"command": "verify", "file": args.file,
                    "unit": unit.name, "maxStates": args.max_states,
                    "reports": [r.to_json() for r in reports]})
    else:
        for r in reports:
            mark = "holds" if r.verdict.holds else "FAILS"
            line = (f"property {r.property_id:>2}  {mark:<6} {r.subject}"
                    f"  ({r.spec_name} [FD= {r.impl_name})")
            print(line)
            ce = r.verdict.counterexample
            if ce is not None and not r.verdict.holds:
                print(f"    counterexample ({ce.kind}): "
                      f"<{', '.join(ce.trace)}>", file=sys.stderr)
        print(f"{unit.name}: {len(reports) - len(failed)}/{len(reports)} "
              "properties hold")
    if resource:
        return EXIT_RESOURCE
    return EXIT_VIOLATIONS if failed else EXIT_OK


def cmd_export_csp(args) -> int:
    unit, failure = _load_unit(args, args.file)
    if unit is None:
        return failure
    script = emit_fdr_script(unit, max_states=args.max_states)
    out = args.output or (unit.name.lower() + ".fdr2")
    with open(out, "w", encoding="utf-8") as handle:
        handle.write(script)
    if args.format == "json":
        _emit_json({"command": "export-csp", "file": args.file,
                    "unit": unit.name, "output": out})
    else:
        print(f"wrote {out}")
    return EXIT_OK


def cmd_gen_ada(args) -> int:
    unit, failure = _load_unit(args, args.file)
    if unit is None:
        return failure
    try:
        text = generate_ada_text(unit)
    except StyleNotTranslatable as exc:
        return _input_error(args, args.file, str(exc))
    except (UnattachedInterface, UntranslatableProcess) as exc:
        if args.format == "json":
            _emit_json({"command": "gen-ada", "file": args.file,
                        "unit": unit.name, "violation": str(exc)})
        else:
            print(f"violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATIONS
    out = args.output or output_filename(unit)
    with open(out, "w", encoding="utf-8") as handle:
        handle.write(text)
    if args.format == "json":
        _emit_json({"command": "gen-ada", "file": args.file,
                    "unit": unit.name, "output": out})
    else:
        print(f"wrote {out}")
    return EXIT_OK


_SUITES = {"uml": asm_mod.check_uml,
           "ugatze": asm_mod.check_ugatze,
           "qos": asm_mod.check_qos}


def cmd_check_assembly(args) -> int:
    try:
        text = _read_text(args.file)
    except OSError as exc:
        return _input_error(args, args.file,
                            f"cannot read {args.file}: {exc}")
    try:
        assembly = asm_mod.parse_assembly(text)
    except asm_mod.FormatError as exc:
        return _input_error(args, args.file, f"{args.file}: {exc}")

    if args.suite == "all":
        suites = ["uml" if assembly.dialect == "UML" else "ugatze", "qos"]
    else:
        suites = [args.suite]
    diags: list[Diagnostic] = []
    try:
        for suite in suites:
            diags.extend(_SUITES[suite](assembly))
    except asm_mod.WrongDialect as exc:
        return _input_error(args, args.file, str(exc))

    if args.format == "json":
        _emit_json({"command": "check-assembly", "file": args.file,
                    "dialect": assembly.dialect, "suites": suites,
                    "diagnostics": [d.to_json() for d in diags]})
    else:
        _print_diagnostics_text(diags)
        errors = sum(1 for d in diags if d.severity == "error")
        warnings = len(diags) - errors
        print(f"{args.file}: {errors} finding(s), {warnings} warning(s)")
    return EXIT_VIOLATIONS if any(d.severity == "error" for d in diags) \
        else EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wright",
        description="Check, verify, and translate software architecture "
                    "descriptions.")
    parser.add_argument("--format", choices=("text", "json"), default="text",
                        help="report format (default: text)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse and run static checks")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", help="verify behavioral properties")
    p.add_argument("file")
    p.add_argument("--max-states", type=int, default=_default_max_states(),
                   help="state budget per property check")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker count (results are identical for any value)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export-csp", help="emit an FDR2 verification script")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.add_argument("--max-states", type=int, default=_default_max_states())
    p.set_defaults(func=cmd_export_csp)

    p = sub.add_parser("gen-ada", help="generate concurrent Ada code")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_ada)

    p = sub.add_parser("check-assembly",
                       help="run assembly contract suites on a JSON assembly")
    p.add_argument("file")
    p.add_argument("--suite", choices=("uml", "ugatze", "qos", "all"),
                   default="all")
    p.set_defaults(func=cmd_check_assembly)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
