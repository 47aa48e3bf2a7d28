import pytest

from regshacl import corpus
from regshacl.rdf import Graph, Iri
from regshacl.report import load
from regshacl.shapes import discover
from regshacl.turtle import parse

EX = corpus.EX
CERT = corpus.CERT
UNIT = corpus.UNIT


def ex(name: str) -> Iri:
    return Iri(EX + name)


def cert(name: str) -> Iri:
    return Iri(CERT + name)


def unit(name: str) -> Iri:
    return Iri(UNIT + name)


def ttl(body: str):
    """Parse ``body`` with the canonical corpus prefixes prepended."""
    return parse(corpus.PREAMBLE + body)


def compile_ttl(body: str):
    doc = ttl(body)
    return discover(doc)


def data_graph(body: str, with_ontology: bool = True) -> Graph:
    g = Graph()
    g.update(ttl(body).graph)
    if with_ontology:
        g.update(corpus.ontology_document().graph)
    return g.freeze()


@pytest.fixture(scope="session")
def corpus_shapes():
    loaded = load([str(p) for p in corpus.shapes_paths()])
    return discover(loaded.graph, loaded.prefixes)


@pytest.fixture(scope="session")
def fixtures():
    return {fx.name: fx for fx in corpus.build_cv_fixtures()}


def fixture_data(fx) -> Graph:
    return load([str(p) for p in fx.data_files + fx.ontology_files]).graph
