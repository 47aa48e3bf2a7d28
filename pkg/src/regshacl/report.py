"""Loading inputs and rendering validation and gap reports."""

from __future__ import annotations

import json
from decimal import Decimal
from typing import Iterable, Optional

from .gaps import AlternativeDiagnosis, Gap, GapReport, explain
from .rdf import SH_NS, Graph, Iri, PrefixMap, Term, display
from .turtle import Document, ParseError, parse_file, serialize
from .validate import ValidationReport, report_to_graph


class AmbiguousPrefix(ValueError):
    pass


class Loaded:
    """Union of several Turtle documents plus their prefix declarations."""

    def __init__(self, docs: Iterable[Document]):
        self.docs = list(docs)
        self.graph = Graph()
        self.prefixes = PrefixMap()
        self._bindings: dict[str, set[str]] = {}
        for doc in self.docs:
            self.graph.update(doc.graph)
            for prefix, ns in doc.prefixes.items():
                self._bindings.setdefault(prefix, set()).add(ns)
                if prefix not in self.prefixes:
                    self.prefixes.bind(prefix, ns)
        self.graph.freeze()

    def expand(self, name: str) -> Iri:
        """Turn ``<iri>``, an absolute IRI or ``prefix:local`` into an IRI."""
        if name.startswith("<") and name.endswith(">"):
            return Iri(name[1:-1])
        prefix, sep, local = name.partition(":")
        if sep and prefix in self._bindings:
            if len(self._bindings[prefix]) > 1:
                raise AmbiguousPrefix(f"prefix {prefix!r} is bound to several namespaces")
            return Iri(self.prefixes.get(prefix) + local)
        if "://" in name or name.startswith("urn:"):
            return Iri(name)
        if sep:
            raise KeyError(f"prefix {prefix!r} is not declared in any input")
        raise KeyError(f"{name!r} is neither an IRI nor a prefixed name")


def load(paths: Iterable[str]) -> Loaded:
    docs = []
    for path in paths:
        try:
            docs.append(parse_file(path))
        except ParseError as exc:
            exc.path = str(path)
            raise
    return Loaded(docs)


def merged_prefixes(*maps: PrefixMap) -> PrefixMap:
    out = PrefixMap()
    for m in maps:
        for prefix, ns in m.items():
            if prefix not in out:
                out.bind(prefix, ns)
    return out


# -- JSON ------------------------------------------------------------------


def term_json(term: Optional[Term]) -> Optional[str]:
    """N-Triples rendering of a term (None stays None)."""
    if term is None:
        return None
    return term.n3()


def _number(d: Optional[Decimal]):
    if d is None:
        return None
    return int(d) if d == d.to_integral_value() else float(d)


def validation_json(report: ValidationReport) -> dict:
    return {
        "conforms": report.conforms,
        "results": [
            {
                "focus_node": term_json(r.focus_node),
                "result_path": term_json(r.result_path),
                "value": term_json(r.value),
                "source_shape": r.source_shape,
                "source_constraint_component": SH_NS + r.source_constraint_component,
                "severity": SH_NS + r.severity,
                "message": r.message,
            }
            for r in report.results
        ],
    }


def _gap_json(gap: Gap, prefixes: Optional[PrefixMap]) -> dict:
    out = {
        "source_shape": gap.source_shape,
        "path": term_json(gap.path),
        "component": SH_NS + gap.component,
        "requirement": gap.requirement,
        "observed": {"count": len(gap.observed), "values": [term_json(v) for v in gap.observed]},
        "explanation": explain(gap, prefixes),
    }
    if gap.alternatives:
        out["alternatives"] = [_alternative_json(a, prefixes) for a in gap.alternatives]
    return out


def _alternative_json(alt: AlternativeDiagnosis, prefixes) -> dict:
    return {
        "branch_index": alt.branch_index,
        "shape": alt.shape,
        "order": _number(alt.order_tag),
        "satisfied_count": alt.satisfied_count,
        "total_count": alt.total_count,
        "gaps": [_gap_json(g, prefixes) for g in alt.gaps],
    }


def gap_json(report: GapReport, prefixes: Optional[PrefixMap] = None) -> dict:
    return {
        "focus_node": term_json(report.focus_node),
        "shape": report.shape,
        "conforms": report.conforms,
        "common_gaps": [_gap_json(g, prefixes) for g in report.common_gaps],
        "alternatives": [_alternative_json(a, prefixes) for a in report.alternatives],
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


# -- text / turtle -----------------------------------------------------------


def render_validation(report: ValidationReport, fmt: str, prefixes: Optional[PrefixMap] = None) -> str:
    if fmt == "turtle":
        return serialize(report_to_graph(report, prefixes))
    if fmt == "json":
        return dumps(validation_json(report))
    lines = [f"Conforms: {'true' if report.conforms else 'false'}", f"Results: {len(report.results)}"]
    for r in report.results:
        lines.append(f"- [{r.source_constraint_component}] {display(r.focus_node, prefixes)} {r.message}")
    return "\n".join(lines) + "\n"


def _plural(n: int, word: str) -> str:
    return f"{n} {word}" + ("" if n == 1 else "s")


def render_gap(report: GapReport, fmt: str, prefixes: Optional[PrefixMap] = None) -> str:
    if fmt == "json":
        return dumps(gap_json(report, prefixes))
    shape = report.shape if report.shape.startswith("_:") else display(Iri(report.shape), prefixes)
    lines = [f"{display(report.focus_node, prefixes)} against {shape}: "
             + ("no gaps" if report.conforms else "requirements not met")]
    if report.common_gaps:
        lines.append(f"Common requirements: {_plural(len(report.common_gaps), 'gap')}")
        lines.extend(f"  - {explain(g, prefixes)}" for g in report.common_gaps)
    for alt in report.alternatives:
        tag = f" (order {_number(alt.order_tag)})" if alt.order_tag is not None else ""
        lines.append(
            f"Alternative {alt.branch_index + 1}{tag}: {_plural(len(alt.gaps), 'gap')}, "
            f"{alt.satisfied_count} of {alt.total_count} requirements met"
        )
        lines.extend(f"  - {explain(g, prefixes)}" for g in alt.gaps)
    return "\n".join(lines) + "\n"
