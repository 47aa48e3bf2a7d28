"""Command line interface: ``regshacl validate | gap | inspect``."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .gaps import diagnose
from .rdf import display
from .report import AmbiguousPrefix, Loaded, load, merged_prefixes, render_gap, render_validation
from .shapes import ShapeError, ShapesGraph, TargetClass, discover
from .turtle import ParseError
from .validate import Validator

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INPUT = 2
EXIT_USAGE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="regshacl", description="SHACL validation and gap analysis for regulatory shapes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="validate data graphs against shapes")
    v.add_argument("--shapes", nargs="+", required=True, metavar="FILE")
    v.add_argument("--data", nargs="+", required=True, metavar="FILE")
    v.add_argument("--ontology", nargs="+", default=[], metavar="FILE",
                   help="extra triples (e.g. rdfs:subClassOf) merged into the data graph")
    v.add_argument("--format", choices=("turtle", "json", "text"), default="turtle")
    v.add_argument("--out", metavar="FILE")

    g = sub.add_parser("gap", help="diagnose unmet requirements for one focus node")
    g.add_argument("--shapes", nargs="+", required=True, metavar="FILE")
    g.add_argument("--data", nargs="+", required=True, metavar="FILE")
    g.add_argument("--ontology", nargs="+", default=[], metavar="FILE")
    g.add_argument("--focus", required=True, help="IRI or prefixed name of the node to diagnose")
    g.add_argument("--shape", required=True, help="IRI or prefixed name of the node shape")
    g.add_argument("--format", choices=("json", "text"), default="text")
    g.add_argument("--out", metavar="FILE")

    i = sub.add_parser("inspect", help="list the compiled shapes")
    i.add_argument("--shapes", nargs="+", required=True, metavar="FILE")
    return parser


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run_validate(shapes_paths, data_paths, fmt="turtle", ontology_paths=()) -> tuple[int, str]:
    shapes = load(shapes_paths)
    data = load(list(data_paths) + list(ontology_paths))
    sg = discover(shapes.graph, shapes.prefixes)
    prefixes = merged_prefixes(shapes.prefixes, data.prefixes)
    report = Validator(sg, data.graph, prefixes).validate()
    return (EXIT_OK if report.conforms else EXIT_VIOLATIONS), render_validation(report, fmt, prefixes)


def run_gap(shapes_paths, data_paths, focus, shape, fmt="text", ontology_paths=()) -> tuple[int, str]:
    shapes = load(shapes_paths)
    data = load(list(data_paths) + list(ontology_paths))
    sg = discover(shapes.graph, shapes.prefixes)
    prefixes = merged_prefixes(shapes.prefixes, data.prefixes)
    names = _NameResolver(shapes, data)
    report = diagnose(sg, names.shape(shape, sg), names.focus(focus), data.graph, prefixes)
    return (EXIT_OK if report.conforms else EXIT_VIOLATIONS), render_gap(report, fmt, prefixes)


def cmd_validate(args) -> int:
    code, text = run_validate(args.shapes, args.data, args.format, args.ontology)
    _emit(text, args.out)
    return code


def cmd_gap(args) -> int:
    code, text = run_gap(args.shapes, args.data, args.focus, args.shape, args.format, args.ontology)
    _emit(text, args.out)
    return code


class _NameResolver:
    """Expands command-line names against every input's prefix declarations."""

    def __init__(self, shapes: Loaded, data: Loaded):
        self.names = Loaded(shapes.docs + data.docs)

    def shape(self, name: str, sg: ShapesGraph) -> str:
        if name.startswith("_:") and name in sg:
            return name
        iri = self.names.expand(name)
        if iri.value not in sg:
            raise ShapeError(f"unknown shape {name}")
        return iri.value

    def focus(self, name: str):
        return self.names.expand(name)


def render_shapes(sg: ShapesGraph) -> str:
    lines = [f"{len(sg)} shape(s)"]
    show = lambda t: display(t, sg.prefixes)  # noqa: E731
    for shape in sg:
        lines.append(f"{sg.label(shape.id)} ({shape.kind.value})")
        for t in shape.targets:
            lines.append(f"  target: {'class ' + show(t.cls) if isinstance(t, TargetClass) else 'node ' + show(t.node)}")
        if shape.path is not None:
            lines.append(f"  path: {show(shape.path)}")
        if shape.order is not None:
            lines.append(f"  order: {shape.order}")
        for c in shape.constraints:
            members = getattr(c, "members", None) or ((c.member,) if hasattr(c, "member") else ())
            text = c.describe(sg.prefixes)
            if members:
                text = f"{c.component[:-len('ConstraintComponent')].lower()} [{', '.join(sg.label(m) for m in members)}]"
                if len(members) > 1:
                    text += f" ({len(members)} alternatives)" if c.component == "OrConstraintComponent" else ""
            lines.append(f"  - {text}")
    return "\n".join(lines) + "\n"


def cmd_inspect(args) -> int:
    shapes = load(args.shapes)
    sg = discover(shapes.graph, shapes.prefixes)
    sys.stdout.write(render_shapes(sg))
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "gap": cmd_gap, "inspect": cmd_inspect}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"regshacl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except AmbiguousPrefix as exc:
        print(f"regshacl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        where = f"{exc.path}:" if getattr(exc, "path", None) else ""
        print(f"regshacl: parse error: {where}{exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ShapeError, OSError, KeyError, ValueError) as exc:
        print(f"regshacl: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
