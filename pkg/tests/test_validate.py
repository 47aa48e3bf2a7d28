from collections import Counter

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

import oracle
import properties
from conftest import compile_ttl, data_graph, ex, fixture_data, ttl
from regshacl import corpus
from regshacl.rdf import RDF, Graph, isomorphic
from regshacl.report import load
from regshacl.shapes import ATOMIC, SH, discover
from regshacl.turtle import parse, serialize
from regshacl.validate import Validator, conforms_logical, focus_nodes, report_to_graph, validate

PROPERTY = settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])

SERVICE = """
:service1 a :SGS_500_1080_DO ;
  :grossTonnage "520"^^unit:GT ;
  :duration "{duration}"^^unit:DAY ;
  :inPosition :pos1 ;
  :tradeArea :BankFishing .
:pos1 a :ChiefOfficer .
"""


@pytest.fixture(scope="module")
def service_shapes(corpus_shapes):
    return corpus_shapes


def gt_results(corpus_shapes, body):
    v = Validator(corpus_shapes, data_graph(body))
    return v.conforms_property(corpus_shapes[ex("GT500").value], ex("v"))


class TestFocusNodes:
    def test_vessel(self):
        sg = discover(corpus.snippet_document("vessel"))
        assert focus_nodes(sg[ex("VesselShape").value], ttl(":v1 a :Vessel .").graph) == [ex("v1")]

    def test_empty_data(self, corpus_shapes):
        assert all(focus_nodes(s, Graph()) == [] for s in corpus_shapes.entry_points() if not any(
            hasattr(t, "node") for t in s.targets))

    def test_subclass_target(self):
        sg = compile_ttl(":S a sh:NodeShape ; sh:targetClass :DeckOfficerPosition .")
        g = data_graph(":p1 a :ChiefOfficer .")
        assert focus_nodes(sg[ex("S").value], g) == [ex("p1")]

    def test_target_node_unconditional(self):
        sg = compile_ttl(":S a sh:NodeShape ; sh:targetNode :ghost, :ghost .")
        assert focus_nodes(sg[ex("S").value], Graph()) == [ex("ghost")]


class TestNodeShapes:
    def test_service_conforms(self, corpus_shapes):
        v = Validator(corpus_shapes, data_graph(SERVICE.format(duration=1100)))
        assert v.conforms_node(corpus_shapes[ex("SeagoingServiceURI").value], ex("service1")) == []

    def test_short_duration(self, corpus_shapes):
        v = Validator(corpus_shapes, data_graph(SERVICE.format(duration=900)))
        (r,) = v.conforms_node(corpus_shapes[ex("SeagoingServiceURI").value], ex("service1"))
        assert r.source_constraint_component == "MinInclusiveConstraintComponent"
        assert r.result_path == ex("duration")

    def test_no_constraints(self):
        sg = compile_ttl(":S a sh:NodeShape .")
        assert Validator(sg, Graph()).conforms_node(sg[ex("S").value], ex("anything")) == []

    @pytest.mark.parametrize("duration, ok", [(1080, True), (1079, False), ("1080.0", True)])
    def test_duration_boundary(self, corpus_shapes, duration, ok):
        v = Validator(corpus_shapes, data_graph(SERVICE.format(duration=duration)))
        assert (not v.conforms_node(corpus_shapes[ex("SeagoingServiceURI").value], ex("service1"))) is ok


class TestPropertyShapes:
    def test_inclusive_boundary(self, corpus_shapes):
        assert gt_results(corpus_shapes, ':v :grossTonnage "500"^^unit:GT .') == []

    def test_below(self, corpus_shapes):
        (r,) = gt_results(corpus_shapes, ':v :grossTonnage "499"^^unit:GT .')
        assert r.source_constraint_component == "MinInclusiveConstraintComponent"
        assert r.value.lexical == "499"

    def test_missing(self, corpus_shapes):
        (r,) = gt_results(corpus_shapes, ":v a :Vessel .")
        assert r.source_constraint_component == "MinCountConstraintComponent"
        assert r.value is None and r.result_path == ex("grossTonnage")

    def test_two_values(self, corpus_shapes):
        (r,) = gt_results(corpus_shapes, ':v :grossTonnage "600"^^unit:GT, "700"^^unit:GT .')
        assert r.source_constraint_component == "MaxCountConstraintComponent"

    def test_wrong_datatype(self, corpus_shapes):
        (r,) = gt_results(corpus_shapes, ":v :grossTonnage 600 .")
        assert r.source_constraint_component == "DatatypeConstraintComponent"

    def test_range_over_iri(self):
        sg = compile_ttl(":S a sh:NodeShape ; sh:targetNode :v ; sh:property [ sh:path :p ; sh:minInclusive 1 ] .")
        (r,) = validate(sg, ttl(":v :p :thing .").graph).results
        assert "not a literal" in r.message

    def test_range_incomparable(self):
        sg = compile_ttl(":S a sh:NodeShape ; sh:targetNode :v ; sh:property [ sh:path :p ; sh:minInclusive 1 ] .")
        (r,) = validate(sg, ttl(':v :p "many" .').graph).results
        assert "not comparable" in r.message

    def test_class_via_subclass(self, corpus_shapes):
        v = Validator(corpus_shapes, data_graph(":s :inPosition :x . :x a :ChiefOfficer ."))
        assert v.conforms_property(corpus_shapes[ex("PositionDO").value], ex("s")) == []

    def test_class_outside_closure(self, corpus_shapes):
        v = Validator(corpus_shapes, data_graph(":s :inPosition :x . :x a :ChiefEngineer ."))
        (r,) = v.conforms_property(corpus_shapes[ex("PositionDO").value], ex("s"))
        assert r.source_constraint_component == "ClassConstraintComponent" and r.value == ex("x")

    def test_datatype_exact(self):
        sg = compile_ttl(":S a sh:NodeShape ; sh:targetNode :v ; sh:property [ sh:path :p ; sh:datatype xsd:decimal ] .")
        assert not validate(sg, ttl(":v :p 1 .").graph).conforms
        assert validate(sg, ttl(":v :p 1.0 .").graph).conforms


@pytest.fixture(scope="module")
def cert_or(corpus_shapes):
    (c,) = corpus_shapes[ex("DeckOfficerClass1Certificate").value].constraints
    return c


class TestLogical:
    def test_first_alternative(self, corpus_shapes, cert_or):
        g = data_graph(":s :hasCertification cert:D3A0 ; :hasSeagoingServiceRequirement :SGS_500_1080_DO .")
        assert conforms_logical(cert_or, ex("s"), g, corpus_shapes)

    def test_nothing(self, corpus_shapes, cert_or):
        assert not conforms_logical(cert_or, ex("s"), Graph(), corpus_shapes)

    def test_not(self):
        sg = compile_ttl(":X sh:path :p ; sh:minCount 1 . :N a sh:NodeShape ; sh:not :X .")
        (c,) = sg[ex("N").value].constraints
        assert not conforms_logical(c, ex("s"), ttl(":s :p 1 .").graph, sg)
        assert conforms_logical(c, ex("s"), Graph(), sg)

    def test_inner_failures_not_reported(self, corpus_shapes):
        g = data_graph(":s a :DeckOfficerClass1Applicant .")
        (r,) = validate(corpus_shapes, g).results
        assert r.source_constraint_component == "OrConstraintComponent" and r.value == ex("s")


class TestValidate:
    def test_empty(self, corpus_shapes):
        report = validate(corpus_shapes, Graph())
        assert report.conforms and report.results == []

    @pytest.mark.parametrize("name", ["complete-alt1", "complete-alt2"])
    def test_complete(self, corpus_shapes, fixtures, name):
        assert validate(corpus_shapes, fixture_data(fixtures[name])).conforms

    def test_underweight(self, corpus_shapes, fixtures):
        report = validate(corpus_shapes, fixture_data(fixtures["underweight-vessel"]))
        assert not report.conforms
        assert any(r.result_path == ex("grossTonnage") for r in report.results)

    def test_ontology_argument(self, corpus_shapes, fixtures):
        fx = fixtures["complete-alt1"]
        data = load([str(p) for p in fx.data_files]).graph
        assert not validate(corpus_shapes, data).conforms
        assert validate(corpus_shapes, data, corpus.ontology_document().graph).conforms

    @pytest.mark.parametrize("path", corpus.shapes_paths(), ids=lambda p: p.name)
    def test_empty_data_law(self, path):
        # a single file may reference shapes defined in its siblings
        sg = discover(parse(path.read_text(encoding="utf-8")), allow_external=True)
        assert validate(sg, Graph()).conforms


class TestReportGraph:
    def test_conforming(self):
        from regshacl.validate import ValidationReport
        doc = report_to_graph(ValidationReport())
        assert len(doc.graph) == 2
        (t,) = doc.graph.match(None, SH.conforms, None)
        assert t.object.lexical == "true"

    def test_one_violation(self, corpus_shapes):
        g = data_graph(SERVICE.replace('"520"', '"499"').format(duration=1100))
        report = validate(corpus_shapes, g)
        doc = report_to_graph(report, corpus_shapes.prefixes)
        assert len(doc.graph.match(None, RDF.type, SH.ValidationResult)) == 1 == len(report.results)
        for p in (SH.focusNode, SH.resultPath, SH.value, SH.sourceShape, SH.sourceConstraintComponent,
                  SH.resultSeverity, SH.resultMessage):
            assert len(doc.graph.match(None, p, None)) == 1, p

    def test_round_trip(self, corpus_shapes, fixtures):
        for fx in fixtures.values():
            doc = report_to_graph(validate(corpus_shapes, fixture_data(fx)), corpus_shapes.prefixes)
            assert isomorphic(doc.graph, parse(serialize(doc)).graph), fx.name


class TestResultSemantics:
    """Soundness and completeness over the corpus fixtures."""

    def test_soundness(self, corpus_shapes, fixtures):
        for fx in fixtures.values():
            v = Validator(corpus_shapes, fixture_data(fx))
            for r in v.validate().results:
                shape = corpus_shapes[r.source_shape]
                assert v.evaluate(shape, r.constraint, r.focus_node), (fx.name, r)

    def test_completeness_on_atoms(self, corpus_shapes, fixtures):
        for fx in fixtures.values():
            v = Validator(corpus_shapes, fixture_data(fx))
            counts = Counter((r.source_shape, r.focus_node, id(r.constraint)) for r in v.validate().results)
            for shape in corpus_shapes.entry_points():
                for focus in focus_nodes(shape, v.data):
                    for c in shape.constraints:
                        if isinstance(c, ATOMIC):
                            failing = bool(v.evaluate(shape, c, focus))
                            assert counts[(shape.id, focus, id(c))] == int(failing)

    def test_result_path_iff_property_shape(self, corpus_shapes, fixtures):
        for fx in fixtures.values():
            for r in validate(corpus_shapes, fixture_data(fx)).results:
                assert (r.result_path is not None) == corpus_shapes[r.source_shape].is_property


# -- randomized properties --------------------------------------------------


class TestLogicalAlgebra:
    @PROPERTY
    @given(oracle.expressions, oracle.datasets)
    def test_matches_brute_force(self, expr, data):
        properties.check_against_oracle(expr, data)

    @PROPERTY
    @given(oracle.expressions, oracle.expressions, oracle.datasets, st.sampled_from(oracle.NODES))
    def test_truth_tables(self, x, y, data, node):
        properties.check_truth_tables(x, y, data, node)


class TestMonotoneRepair:
    @PROPERTY
    @given(properties.repair_cases, oracle.datasets)
    def test_repair(self, atoms, data):
        properties.check_monotone_repair(atoms, data)


class TestOrderNeutrality:
    @PROPERTY
    @given(*properties.order_cases)
    def test_random(self, exprs, data, tags):
        properties.check_order_neutrality(exprs, data, tags)

    def test_corpus(self, corpus_shapes, fixtures):
        loaded = load([str(p) for p in corpus.shapes_paths()])
        g = Graph().update(t for t in loaded.graph if t.predicate != SH.order)
        assert len(g) < len(loaded.graph)
        stripped = discover(g, loaded.prefixes)
        for fx in fixtures.values():
            data = fixture_data(fx)
            multiset = properties.result_multiset
            assert multiset(validate(corpus_shapes, data)) == multiset(validate(stripped, data))


class TestTargetEmptiness:
    @PROPERTY
    @given(st.lists(oracle.expressions, min_size=1, max_size=3))
    def test_class_targets(self, exprs):
        text = oracle.document_text(exprs).replace(
            "sh:targetNode :n0, :n1, :n2, :n3", "sh:targetClass :C0")
        assert validate(compile_ttl(text), Graph()).conforms
