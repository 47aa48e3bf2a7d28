"""Worked example: deck officer class 1 certificate shapes and sailor CVs.

Goldens under ``goldens/`` are only rewritten by ``python -m regshacl.corpus
update``; tests compare fresh output against them byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..turtle import Document, parse_file

ROOT = Path(__file__).resolve().parent

PREAMBLE = """\
@prefix sh: <http://www.w3.org/ns/shacl#> .
@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
@prefix unit: <http://qudt.org/vocab/unit/> .
@prefix cert: <http://example.org/nma/certificate#> .
@prefix : <http://example.org/nma#> .
"""

EX = "http://example.org/nma#"
CERT = "http://example.org/nma/certificate#"
UNIT = "http://qudt.org/vocab/unit/"

SHAPES_FILES = [
    "shapes/vessel.ttl",
    "shapes/seagoing-service.ttl",
    "shapes/seagoing-service-reconstructed.ttl",
    "shapes/certificate-requirements.ttl",
    "shapes/deck-officer-class1.ttl",
]
ONTOLOGY_FILE = "ontology.ttl"

# Reference snippets the corpus must contain unchanged (modulo PREAMBLE).
# The service node shape names its target class with a prefixed name.
SNIPPETS = {
    "vessel": """\
:VesselShape
  a sh:NodeShape ;
  sh:targetClass :Vessel ;
  sh:property :GTShape .

:GTShape
  a sh:PropertyShape ;
  sh:path :grossTonnage .
""",
    "gross_tonnage": """\
:GT500
  a sh:PropertyShape ;
  sh:path :grossTonnage ;
  sh:minInclusive 500 ;
  sh:datatype unit:GT ;
  sh:minCount 1 ;
  sh:maxCount 1 .
""",
    "service_constraints": """\
:Duration1080
  a sh:PropertyShape ;
  sh:path :duration ;
  sh:minInclusive 1080 ;
  sh:datatype unit:DAY .

:PositionDO
  a sh:PropertyShape ;
  sh:path :inPosition ;
  sh:class :DeckOfficerPosition .

:TradeAreaBF
  a sh:PropertyShape ;
  sh:path :tradeArea ;
  sh:hasValue :BankFishing .
""",
    "service_node_shape": """\
:SeagoingServiceURI
  a sh:NodeShape ;
  sh:targetClass :SGS_500_1080_DO ;
  sh:property :Duration1080, :PositionDO, :TradeAreaBF, :GT500 .
""",
    "alternatives": """\
sh:or (
  [ sh:and ( # first alternative
    [ sh:or (cert:PS_D2A0 cert:PS_D2B0 cert:PS_D3A0
             cert:PS_D3B0 cert:PS_D4B0 cert:PS_D4F0) ]
    [ sh:path :hasSeagoingServiceRequirement ;
      sh:hasValue :SGS_500_1080_DO ;
      sh:order 1 ; ]
  )]

  [ sh:and ( # second alternative
    [ sh:or (cert:PS_D2A0 cert:PS_D2B0 cert:PS_D3A0 cert:PS_D3B0) ]
    [ sh:path :hasSeagoingServiceRequirement ;
      sh:hasValue :SGS_500_720_DO ;
      sh:order 2 ; ]
    [ sh:path :hasSeagoingServiceRequirement ;
      sh:hasValue :SGS_500_360_CO ;
      sh:order 2 ; ]
  )]
)""",
}


def snippet_document(name: str) -> Document:
    """Parse a snippet with the canonical prefixes.

    The alternatives block is a predicate-object fragment, so it is wrapped
    in an anonymous node shape first.
    """
    from ..turtle import parse

    body = SNIPPETS[name]
    if name == "alternatives":
        body = "[] a sh:NodeShape ;\n" + body + " .\n"
    return parse(PREAMBLE + body)


def path(relative: str) -> Path:
    return ROOT / relative


def shapes_paths() -> list[Path]:
    return [path(p) for p in SHAPES_FILES]


def build_certificate_shapes() -> list[Document]:
    return [parse_file(p) for p in shapes_paths()]


def ontology_document() -> Document:
    return parse_file(path(ONTOLOGY_FILE))


@dataclass
class Fixture:
    name: str
    shapes_files: list[Path]
    data_files: list[Path]
    ontology_files: list[Path]
    gap_focus: str
    gap_shape: str
    gap_exit: int
    validate_exit: int
    conforms: bool
    expected_results: list[tuple[str, str, Optional[str]]] = field(default_factory=list)
    golden_report: Optional[Path] = None
    golden_gap: Optional[Path] = None


def load_manifest() -> dict:
    with open(path("manifest.json"), encoding="utf-8") as fh:
        return json.load(fh)


def build_cv_fixtures() -> list[Fixture]:
    out = []
    for entry in load_manifest()["fixtures"]:
        out.append(Fixture(
            name=entry["name"],
            shapes_files=[path(p) for p in entry["shapes_files"]],
            data_files=[path(p) for p in entry["data_files"]],
            ontology_files=[path(p) for p in entry["ontology_files"]],
            gap_focus=entry["gap"]["focus"],
            gap_shape=entry["gap"]["shape"],
            gap_exit=entry["gap"]["expected_exit"],
            validate_exit=entry["validate"]["expected_exit"],
            conforms=entry["validate"]["conforms"],
            expected_results=[(r["focus"], r["component"], r["path"]) for r in entry["validate"]["results"]],
            golden_report=path(entry["golden_report"]),
            golden_gap=path(entry["golden_gap"]),
        ))
    return out


def fixture(name: str) -> Fixture:
    for f in build_cv_fixtures():
        if f.name == name:
            return f
    raise KeyError(name)


def run_fixture(fx: Fixture) -> tuple[int, str, int, str]:
    """(validate exit, turtle report, gap exit, JSON gap report) as the CLI produces them."""
    from ..cli import run_gap, run_validate

    shapes = [str(p) for p in fx.shapes_files]
    data = [str(p) for p in fx.data_files]
    ontology = [str(p) for p in fx.ontology_files]
    v_code, report = run_validate(shapes, data, "turtle", ontology)
    g_code, gap = run_gap(shapes, data, fx.gap_focus, fx.gap_shape, "json", ontology)
    return v_code, report, g_code, gap


def update_goldens() -> list[Path]:
    written = []
    for fx in build_cv_fixtures():
        _, report, _, gap = run_fixture(fx)
        fx.golden_report.write_text(report, encoding="utf-8")
        fx.golden_gap.write_text(gap, encoding="utf-8")
        written += [fx.golden_report, fx.golden_gap]
    return written
