import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from regshacl import corpus
from regshacl.cli import EXIT_INPUT, EXIT_OK, EXIT_USAGE, EXIT_VIOLATIONS, main
from regshacl.rdf import isomorphic
from regshacl.report import load
from regshacl.shapes import discover
from regshacl.turtle import parse
from regshacl.validate import report_to_graph, validate

SCHEMA = json.loads((Path(__file__).resolve().parents[1] / "docs" / "report.schema.json").read_text())
SHAPES = [str(p) for p in corpus.shapes_paths()]
ONTOLOGY = str(corpus.path(corpus.ONTOLOGY_FILE))


def data(name):
    return str(corpus.path(f"data/{name}.ttl"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def validate_args(name, fmt="turtle"):
    return ["validate", "--shapes", *SHAPES, "--data", data(name), "--ontology", ONTOLOGY, "--format", fmt]


def gap_args(name, focus, shape=":DeckOfficerClass1Certificate", fmt="text"):
    return ["gap", "--shapes", *SHAPES, "--data", data(name), "--ontology", ONTOLOGY,
            "--focus", focus, "--shape", shape, "--format", fmt]


class TestValidate:
    def test_complete(self, capsys):
        code, out, _ = run(capsys, *validate_args("complete-alt1"))
        assert code == EXIT_OK
        assert "sh:conforms true" in out

    def test_underweight(self, capsys):
        code, out, _ = run(capsys, *validate_args("underweight-vessel", "json"))
        report = json.loads(out)
        assert code == EXIT_VIOLATIONS and report["results"]
        assert any(r["result_path"] == "<http://example.org/nma#grossTonnage>" for r in report["results"])

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "validate", "--shapes", *SHAPES, "--data", "/nonexistent.ttl")
        assert code == EXIT_INPUT and "error" in err

    def test_parse_error_names_file_and_line(self, capsys, tmp_path):
        bad = tmp_path / "bad.ttl"
        bad.write_text("@prefix : <http://e/> .\n:a :b }\n")
        code, out, err = run(capsys, "validate", "--shapes", *SHAPES, "--data", str(bad))
        assert code == EXIT_INPUT and out == ""
        assert f"{bad}:2:7" in err

    def test_compile_error(self, capsys, tmp_path):
        bad = tmp_path / "shapes.ttl"
        bad.write_text("@prefix sh: <http://www.w3.org/ns/shacl#> .\n<http://e/S> sh:path <http://e/p> ; sh:minCount \"two\" .\n")
        code, _, err = run(capsys, "validate", "--shapes", str(bad), "--data", data("empty-cv"))
        assert code == EXIT_INPUT and "minCount" in err

    def test_text_format(self, capsys):
        code, out, _ = run(capsys, *validate_args("short-duration", "text"))
        assert code == EXIT_VIOLATIONS
        assert out.startswith("Conforms: false\nResults: 1\n")
        assert "[MinInclusiveConstraintComponent] :service5" in out

    def test_out_flag(self, capsys, tmp_path):
        target = tmp_path / "report.ttl"
        code, out, _ = run(capsys, *validate_args("no-certs"), "--out", str(target))
        assert code == EXIT_VIOLATIONS and out == ""
        assert "sh:ValidationResult" in target.read_text()

    def test_turtle_is_report_graph(self, capsys):
        _, out, _ = run(capsys, *validate_args("wrong-position"))
        shapes = load(SHAPES)
        report = validate(discover(shapes.graph, shapes.prefixes), load([data("wrong-position"), ONTOLOGY]).graph)
        assert isomorphic(parse(out).graph, report_to_graph(report).graph)

    def test_json_byte_stable(self, capsys):
        outputs = {run(capsys, *validate_args("no-certs", "json"))[1] for _ in range(3)}
        assert len(outputs) == 1

    @pytest.mark.parametrize("name", ["complete-alt1", "no-certs", "underweight-vessel", "wrong-position"])
    def test_json_schema(self, capsys, name):
        _, out, _ = run(capsys, *validate_args(name, "json"))
        jsonschema.validate(json.loads(out), SCHEMA)


class TestGap:
    def test_no_certificates(self, capsys):
        code, out, _ = run(capsys, *gap_args("no-certs", ":sailor3"))
        assert code == EXIT_VIOLATIONS
        lines = out.splitlines()
        assert lines[0] == ":sailor3 against :DeckOfficerClass1Certificate: requirements not met"
        alt_lines = [l for l in lines if l.startswith("Alternative")]
        assert alt_lines[0].startswith("Alternative 2 (order 2): 1 gap, 2 of 3")
        assert alt_lines[1].startswith("Alternative 1 (order 1): 2 gaps, 0 of 2")

    def test_complete(self, capsys):
        code, out, _ = run(capsys, *gap_args("complete-alt2", ":sailor2"))
        assert code == EXIT_OK and "no gaps" in out.splitlines()[0]

    def test_undefined_shape(self, capsys):
        code, _, err = run(capsys, *gap_args("no-certs", ":sailor3", shape=":NoSuchShape"))
        assert code == EXIT_INPUT and "NoSuchShape" in err

    def test_undeclared_prefix(self, capsys):
        code, _, _ = run(capsys, *gap_args("no-certs", "zz:sailor3"))
        assert code == EXIT_INPUT

    def test_full_iri_names(self, capsys):
        code, _, _ = run(capsys, *gap_args("complete-alt1", "<http://example.org/nma#sailor1>",
                                           shape="http://example.org/nma#DeckOfficerClass1Certificate"))
        assert code == EXIT_OK

    def test_missing_flags(self, capsys):
        code, _, err = run(capsys, "gap", "--shapes", *SHAPES, "--data", data("no-certs"))
        assert code == EXIT_USAGE and "--focus" in err

    def test_no_command(self, capsys):
        assert run(capsys)[0] == EXIT_USAGE

    def test_ambiguous_prefix(self, capsys, tmp_path):
        other = tmp_path / "other.ttl"
        other.write_text("@prefix : <http://other.org/> .\n:x :y :z .\n")
        code, _, err = run(capsys, "gap", "--shapes", *SHAPES, "--data", data("no-certs"), str(other),
                           "--focus", ":sailor3", "--shape", "cert:PS_D2A0")
        assert code == EXIT_USAGE and "several namespaces" in err

    @pytest.mark.parametrize("name, focus, shape", [
        ("no-certs", ":sailor3", ":DeckOfficerClass1Certificate"),
        ("complete-alt1", ":sailor1", ":DeckOfficerClass1Certificate"),
        ("short-duration", ":service5", ":SeagoingServiceURI"),
    ])
    def test_json_schema(self, capsys, name, focus, shape):
        _, out, _ = run(capsys, *gap_args(name, focus, shape, "json"))
        jsonschema.validate(json.loads(out), SCHEMA)

    def test_json_byte_stable(self, capsys):
        outputs = {run(capsys, *gap_args("empty-cv", ":sailor7", fmt="json"))[1] for _ in range(3)}
        assert len(outputs) == 1


class TestInspect:
    def test_vessel(self, capsys, tmp_path):
        f = tmp_path / "vessel.ttl"
        f.write_text(corpus.PREAMBLE + corpus.SNIPPETS["vessel"])
        code, out, _ = run(capsys, "inspect", "--shapes", str(f))
        assert code == EXIT_OK and out.splitlines()[0] == "2 shape(s)"

    def test_empty(self, capsys, tmp_path):
        f = tmp_path / "empty.ttl"
        f.write_text("")
        code, out, _ = run(capsys, "inspect", "--shapes", str(f))
        assert code == EXIT_OK and out == "0 shape(s)\n"

    def test_certificate(self, capsys):
        code, out, _ = run(capsys, "inspect", "--shapes", *SHAPES)
        assert code == EXIT_OK
        assert "(2 alternatives)" in out
        assert "order: 1" in out and "order: 2" in out

    def test_compile_failure(self, capsys):
        code, _, _ = run(capsys, "inspect", "--shapes", str(corpus.path("shapes/deck-officer-class1.ttl")))
        assert code == EXIT_INPUT

    def test_deterministic(self, capsys):
        assert run(capsys, "inspect", "--shapes", *SHAPES)[1] == run(capsys, "inspect", "--shapes", *SHAPES)[1]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "regshacl.cli", *validate_args("complete-alt2", "text")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("Conforms: true")
