"""Command-line entry point: ``eclnl {check,run,oracle,emit} FILE``.

Exit codes: 0 success, 1 static error (syntax or type), 2 runtime error or a
failed oracle verdict, 3 fuel exhausted, 4 usage error.  With ``--format
json`` stdout carries exactly one JSON document and nothing else.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import diagrams as dg
from .diagrams import DiagramError, LabelledDiagram, Signature, SignatureError
from .domains import CarrierTooLarge
from .evaluator import Error, FuelExhausted, RunResult, Value, default_fuel, run_program
from .parser import ParseError, SourceProgram, parse_program, print_type
from .typechecker import TypeCheckError, check

EXIT_OK, EXIT_STATIC, EXIT_RUNTIME, EXIT_FUEL, EXIT_USAGE = 0, 1, 2, 3, 4

FORMATS = {
    "check": ("text", "json"),
    "run": ("text", "json", "dot"),
    "oracle": ("text", "json"),
    "emit": ("dot", "json"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("file", help="program (.eclnl) or, for emit, a diagram JSON file")
    common.add_argument("--signature", metavar="PATH", help="signature JSON; overrides the file's signature line")
    common.add_argument("--fuel", metavar="N", type=int, help="evaluation step budget (default: $ECLNL_FUEL or 100000)")
    common.add_argument("--format", choices=["text", "json", "dot"], help="output format")
    common.add_argument("--out", metavar="PATH", help="write the main output here instead of stdout")

    parser = _Parser(prog="eclnl", description="Typecheck, run and inspect circuit-description programs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("check", parents=[common], help="typecheck and print the program's type")
    sub.add_parser("run", parents=[common], help="typecheck, evaluate, print the value and its diagrams")
    sub.add_parser("oracle", parents=[common], help="soundness and adequacy verdicts for diagram-free programs")
    sub.add_parser("emit", parents=[common], help="re-serialize a diagram JSON file (default: as DOT)")
    return parser


class _Output:
    def __init__(self, path: str | None):
        self.path = path

    def write(self, text: str):
        if not text.endswith("\n"):
            text += "\n"
        if self.path is None:
            sys.stdout.write(text)
        else:
            Path(self.path).write_text(text, encoding="utf-8")


def _diag(message: str):
    print(f"eclnl: {message}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        fmt = args.format or FORMATS[args.command][0]
        if fmt not in FORMATS[args.command]:
            raise UsageError(f"--format {fmt} is not available for {args.command}")
        if args.fuel is not None and args.fuel < 1:
            raise UsageError("--fuel must be a positive integer")
        try:
            fuel = args.fuel if args.fuel is not None else default_fuel()
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        signature = Signature.load(args.signature) if args.signature else None
        path = Path(args.file)
        if not path.is_file():
            raise UsageError(f"no such file: {args.file}")
        text = path.read_text(encoding="utf-8")
    except UsageError as exc:
        _diag(str(exc))
        return EXIT_USAGE
    except (OSError, SignatureError, ValueError) as exc:
        _diag(f"cannot load signature: {exc}")
        return EXIT_USAGE

    out = _Output(args.out)
    if args.command == "emit":
        return _emit(text, signature or dg.demo_signature(), fmt, out)

    try:
        program = parse_program(text, signature, base_dir=path.parent)
        derivation = check({}, {}, program.term, None, program.signature.constants)
    except (ParseError, TypeCheckError) as exc:
        return _static_error(exc, fmt, out)
    except (OSError, SignatureError) as exc:
        _diag(f"cannot load signature: {exc}")
        return EXIT_USAGE

    if args.command == "check":
        type_text = print_type(derivation.type)
        out.write(json.dumps({"type": type_text}) if fmt == "json" else type_text)
        return EXIT_OK
    if args.command == "run":
        return _run(program, fuel, fmt, out)
    return _oracle(program, fuel, fmt, out)


def _static_error(exc: ParseError | TypeCheckError, fmt: str, out: _Output) -> int:
    if isinstance(exc, TypeCheckError):
        doc = exc.as_dict()
    else:
        doc = {"kind": exc.kind, "span": exc.span.as_dict(), "detail": str(exc)}
    if fmt == "json":
        out.write(json.dumps(doc))
    else:
        _diag(str(exc))
    return EXIT_STATIC


# ---------------------------------------------------------------- run


def run_document(result: RunResult) -> dict:
    """Everything `run --format json` prints, as a dict."""
    doc: dict = {"type": print_type(result.type)}
    match result.outcome:
        case Value(diagram, _, steps, _):
            doc.update(
                outcome="value",
                value=result.pretty,
                steps=steps,
                diagram=dg.to_json(diagram),
                boxed=[
                    {"inputs": str(b.inputs), "outputs": str(b.outputs), "diagram": dg.to_json(b.diagram)}
                    for b in result.boxed
                ],
            )
        case Error(rule, detail, steps):
            doc.update(outcome="error", rule=rule, detail=detail, steps=steps)
        case FuelExhausted(steps):
            doc.update(outcome="fuel-exhausted", steps=steps)
    return doc


def _exit_for(outcome) -> int:
    match outcome:
        case Value():
            return EXIT_OK
        case Error():
            return EXIT_RUNTIME
        case FuelExhausted():
            return EXIT_FUEL
    raise AssertionError(outcome)


def _dot_diagrams(result: RunResult) -> str:
    parts = []
    if result.diagram is not None and (result.diagram.nodes or result.diagram.dom or result.diagram.cod):
        parts.append(dg.to_dot(result.diagram, "configuration"))
    for i, b in enumerate(result.boxed):
        parts.append(dg.to_dot(b.diagram, f"boxed{i}"))
    return "\n".join(parts)


def _summary(s: LabelledDiagram) -> str:
    gens = ", ".join(n.gen for n in s.nodes) or "no gates"
    return f"{len(s.dom)} in, {len(s.cod)} out, {len(s.nodes)} nodes ({gens})"


def _run(program: SourceProgram, fuel: int, fmt: str, out: _Output) -> int:
    result = run_program(program, fuel=fuel)
    code = _exit_for(result.outcome)
    if fmt == "json":
        out.write(json.dumps(run_document(result), separators=(", ", ": ")))
        return code
    match result.outcome:
        case Error(rule, detail, _):
            _diag(f"runtime error in ({rule}): {detail}")
            return code
        case FuelExhausted(steps):
            _diag(f"fuel exhausted after {steps} steps")
            return code
    if fmt == "dot":
        print(f"{result.pretty} : {print_type(result.type)}", file=sys.stderr)
        out.write(_dot_diagrams(result) or "digraph configuration {\n}")
        return code
    lines = [f"{result.pretty} : {print_type(result.type)}"]
    if result.diagram is not None and result.diagram.nodes:
        lines.append(f"configuration: {_summary(result.diagram)}")
    lines += [f"boxed {i}: {_summary(b.diagram)}" for i, b in enumerate(result.boxed)]
    out.write("\n".join(lines))
    return code


# ---------------------------------------------------------------- oracle


def _oracle(program: SourceProgram, fuel: int, fmt: str, out: _Output) -> int:
    from . import oracle
    from .syntax import is_intuitionistic

    m = program.term
    if not oracle.is_diagram_free(m):
        _diag("the oracle only covers diagram-free programs")
        return EXIT_USAGE
    try:
        d = check({}, {}, m, None, {})
        element = oracle.denote(d)("*")
        soundness = oracle.check_soundness(m, d.type, fuel)
        adequacy = oracle.check_adequacy(m, fuel) if is_intuitionistic(d.type) else None
    except TypeCheckError as exc:
        return _static_error(exc, fmt, out)
    except (oracle.Unsupported, CarrierTooLarge) as exc:
        _diag(str(exc))
        return EXIT_USAGE

    failed = soundness.status == "fail" or (adequacy is not None and adequacy.status == "fail")
    if fmt == "json":
        doc = {
            "type": print_type(d.type),
            "denotation": oracle.show_element(element),
            "soundness": {"status": soundness.status, "detail": soundness.detail},
            "adequacy": None if adequacy is None else {"status": adequacy.status, "detail": adequacy.detail},
        }
        out.write(json.dumps(doc))
    else:
        lines = [
            f"type:       {print_type(d.type)}",
            f"denotation: {oracle.show_element(element)}",
            f"soundness:  {soundness.status} ({soundness.detail})",
            "adequacy:   "
            + ("n/a (linear type)" if adequacy is None else f"{adequacy.status} ({adequacy.detail})"),
        ]
        out.write("\n".join(lines))
    return EXIT_RUNTIME if failed else EXIT_OK


# ---------------------------------------------------------------- emit


def _emit(text: str, signature: Signature, fmt: str, out: _Output) -> int:
    try:
        s = dg.load(text, signature)
    except (DiagramError, json.JSONDecodeError) as exc:
        _diag(f"not a diagram: {exc}")
        return EXIT_USAGE
    out.write(dg.emit(s, fmt))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
