"""Turtle reader and writer for the subset used by regulation shapes.

Supported: ``@prefix``/``PREFIX``, ``@base``/``BASE``, the ``a`` keyword,
predicate and object lists, collections, ``[ ... ]`` blank node property
lists, ``_:`` labels, single-line strings with language tags or datatypes,
integers, decimals, booleans and comments. Exponent numbers and long
(triple-quoted) strings are rejected.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional
from urllib.parse import urljoin

from .rdf import (
    RDF,
    RDF_LANGSTRING,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_INTEGER,
    XSD_STRING,
    BNode,
    Graph,
    Iri,
    Literal,
    PrefixMap,
    Term,
    Triple,
    escape_string,
    is_local_name,
)

UNEXPECTED_TOKEN = "UnexpectedToken"
UNDECLARED_PREFIX = "UndeclaredPrefix"
BAD_IRI = "BadIri"
BAD_LITERAL = "BadLiteral"
UNTERMINATED_STATEMENT = "UnterminatedStatement"


class ParseError(Exception):
    def __init__(self, kind: str, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{line}:{column}: {kind}: {message}")
        self.kind = kind
        self.message = message
        self.line = line
        self.column = column


@dataclass
class Document:
    graph: Graph = field(default_factory=Graph)
    prefixes: PrefixMap = field(default_factory=PrefixMap)
    base: Optional[Iri] = None


_document_ids = itertools.count()

_ABSOLUTE = re.compile(r"[A-Za-z][A-Za-z0-9+.\-]*:")
_IRI_FORBIDDEN = set('<>"{}|^`\\ \t\r\n')
_PN_PREFIX = re.compile(r"[A-Za-z](?:[A-Za-z0-9_\-.]*[A-Za-z0-9_\-])?")
_LANG = re.compile(r"[A-Za-z]+(?:-[A-Za-z0-9]+)*")
_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-.:%")
_STRING_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


@dataclass
class Token:
    kind: str  # IRI PNAME BNODE STRING INTEGER DECIMAL BOOLEAN A PUNCT HATHAT LANG PREFIX BASE EOF
    value: object
    line: int
    column: int
    extra: object = None


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def _error(self, kind, message, line=None, col=None):
        raise ParseError(kind, message, line or self.line, col or self.col)

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def _peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.text[i] if i < len(self.text) else ""

    def tokens(self) -> Iterator[Token]:
        while True:
            self._skip_space()
            if self.pos >= len(self.text):
                yield Token("EOF", None, self.line, self.col)
                return
            yield self._next()

    def _skip_space(self) -> None:
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c in " \t\r\n﻿":
                self._advance()
            elif c == "#":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self._advance()
            else:
                break

    def _next(self) -> Token:
        c = self._peek()
        line, col = self.line, self.col
        if c in ".;,[]()" and not (c == "." and self._peek(1).isdigit()):
            self._advance()
            return Token("PUNCT", c, line, col)
        if c == "<":
            return self._iri()
        if c in "\"'":
            return self._string()
        if c == "^":
            if self._peek(1) != "^":
                self._error(UNEXPECTED_TOKEN, "expected '^^'")
            self._advance(2)
            return Token("HATHAT", None, line, col)
        if c == "@":
            self._advance()
            m = _LANG.match(self.text, self.pos)
            if not m:
                self._error(UNEXPECTED_TOKEN, "expected language tag or directive after '@'")
            word = m.group(0)
            self._advance(len(word))
            if word == "prefix":
                return Token("PREFIX", "@", line, col)
            if word == "base":
                return Token("BASE", "@", line, col)
            return Token("LANG", word, line, col)
        if c == "_" and self._peek(1) == ":":
            self._advance(2)
            start = self.pos
            while self._peek() and (self._peek().isalnum() or self._peek() in "_-."):
                self._advance()
            label = self.text[start:self.pos]
            while label.endswith("."):
                label = label[:-1]
                self.pos -= 1
                self.col -= 1
            if not label:
                self._error(UNEXPECTED_TOKEN, "empty blank node label", line, col)
            return Token("BNODE", label, line, col)
        if c.isdigit() or (c in "+-" and (self._peek(1).isdigit() or self._peek(1) == ".")) or (
            c == "." and self._peek(1).isdigit()
        ):
            return self._number()
        if c.isalpha() or c == ":" or c == "_":
            return self._name()
        self._error(UNEXPECTED_TOKEN, f"unexpected character {c!r}")

    def _iri(self) -> Token:
        line, col = self.line, self.col
        self._advance()
        chars = []
        while True:
            c = self._peek()
            if c == "":
                self._error(BAD_IRI, "unterminated IRI", line, col)
            if c == ">":
                self._advance()
                break
            if c == "\\":
                if self._peek(1) == "u" or self._peek(1) == "U":
                    chars.append(self._unicode_escape(BAD_IRI))
                    continue
                self._error(BAD_IRI, "invalid escape in IRI")
            if c in _IRI_FORBIDDEN or ord(c) <= 0x20:
                self._error(BAD_IRI, f"character {c!r} not allowed in IRI")
            chars.append(c)
            self._advance()
        return Token("IRI", "".join(chars), line, col)

    def _unicode_escape(self, kind: str) -> str:
        width = 4 if self._peek(1) == "u" else 8
        digits = self.text[self.pos + 2:self.pos + 2 + width]
        if len(digits) != width or not all(d in "0123456789abcdefABCDEF" for d in digits):
            self._error(kind, "invalid unicode escape")
        self._advance(2 + width)
        try:
            return chr(int(digits, 16))
        except ValueError:
            self._error(kind, "unicode escape out of range")

    def _string(self) -> Token:
        line, col = self.line, self.col
        quote = self._peek()
        if self._peek(1) == quote and self._peek(2) == quote:
            self._error(UNEXPECTED_TOKEN, "long string literals are not supported")
        self._advance()
        chars = []
        while True:
            c = self._peek()
            if c == "" or c in "\r\n":
                self._error(BAD_LITERAL, "unterminated string literal", line, col)
            if c == quote:
                self._advance()
                break
            if c == "\\":
                nxt = self._peek(1)
                if nxt in ("u", "U"):
                    chars.append(self._unicode_escape(BAD_LITERAL))
                    continue
                if nxt in _STRING_ESCAPES:
                    chars.append(_STRING_ESCAPES[nxt])
                    self._advance(2)
                    continue
                self._error(BAD_LITERAL, "invalid escape sequence")
            chars.append(c)
            self._advance()
        return Token("STRING", "".join(chars), line, col)

    def _number(self) -> Token:
        line, col = self.line, self.col
        m = re.compile(r"[+-]?(\d*\.\d+|\d+)").match(self.text, self.pos)
        if not m:
            self._error(UNEXPECTED_TOKEN, "malformed number")
        text = m.group(0)
        self._advance(len(text))
        if self._peek() in ("e", "E"):
            self._error(UNEXPECTED_TOKEN, "numbers with exponents are not supported")
        if self._peek().isalpha() or self._peek() == "_":
            self._error(UNEXPECTED_TOKEN, f"unexpected character {self._peek()!r} after number")
        return Token("DECIMAL" if "." in text else "INTEGER", text, line, col)

    def _name(self) -> Token:
        line, col = self.line, self.col
        start = self.pos
        while self._peek() and (self._peek() in _NAME_CHARS or (self._peek().isalnum())):
            self._advance()
        word = self.text[start:self.pos]
        while word.endswith("."):
            word = word[:-1]
            self.pos -= 1
            self.col -= 1
        if ":" not in word:
            if word == "a":
                return Token("A", None, line, col)
            if word in ("true", "false"):
                return Token("BOOLEAN", word, line, col)
            upper = word.upper()
            if upper == "PREFIX":
                return Token("PREFIX", "sparql", line, col)
            if upper == "BASE":
                return Token("BASE", "sparql", line, col)
            raise ParseError(UNEXPECTED_TOKEN, f"unexpected bare word {word!r}", line, col)
        prefix, local = word.split(":", 1)
        if prefix and not _PN_PREFIX.fullmatch(prefix):
            raise ParseError(UNEXPECTED_TOKEN, f"invalid prefix {prefix!r}", line, col)
        if not is_local_name(local.replace(":", "_")):
            raise ParseError(UNEXPECTED_TOKEN, f"invalid local name {local!r}", line, col)
        return Token("PNAME", (prefix, local), line, col)


def resolve(prefixed_name: str, prefixes: PrefixMap) -> Iri:
    """Expand ``prefix:local`` against ``prefixes``."""
    if ":" not in prefixed_name:
        raise ParseError(UNEXPECTED_TOKEN, f"{prefixed_name!r} is not a prefixed name")
    prefix, local = prefixed_name.split(":", 1)
    ns = prefixes.get(prefix)
    if ns is None:
        raise ParseError(UNDECLARED_PREFIX, f"prefix {prefix!r} is not declared")
    return Iri(ns + local)


class _Parser:
    def __init__(self, text: str, bnode_prefix: str):
        self.tokens = _Lexer(text).tokens()
        self.tok = next(self.tokens)
        self.doc = Document()
        self.bnode_prefix = bnode_prefix
        self.bnode_ids = itertools.count()
        self.labels: dict[str, BNode] = {}

    def fresh(self) -> BNode:
        return BNode(f"{self.bnode_prefix}{next(self.bnode_ids)}")

    def advance(self) -> Token:
        tok = self.tok
        self.tok = next(self.tokens)
        return tok

    def fail(self, tok: Token, message: str):
        if tok.kind == "EOF":
            raise ParseError(UNTERMINATED_STATEMENT, message, tok.line, tok.column)
        raise ParseError(UNEXPECTED_TOKEN, message, tok.line, tok.column)

    def is_punct(self, ch: str) -> bool:
        return self.tok.kind == "PUNCT" and self.tok.value == ch

    def expect(self, ch: str) -> None:
        if not self.is_punct(ch):
            self.fail(self.tok, f"expected {ch!r}")
        self.advance()

    def emit(self, s, p, o) -> None:
        self.doc.graph.add(Triple(s, p, o))

    def parse(self) -> Document:
        while self.tok.kind != "EOF":
            self.statement()
        return self.doc

    def statement(self) -> None:
        if self.tok.kind == "PREFIX":
            style = self.advance().value
            ptok = self.advance()
            if ptok.kind != "PNAME" or ptok.value[1] != "":
                self.fail(ptok, "expected prefix label ending in ':'")
            itok = self.advance()
            if itok.kind != "IRI":
                self.fail(itok, "expected namespace IRI")
            self.doc.prefixes.bind(ptok.value[0], self.absolute(itok).value)
            if style == "@":
                self.expect(".")
            return
        if self.tok.kind == "BASE":
            style = self.advance().value
            itok = self.advance()
            if itok.kind != "IRI":
                self.fail(itok, "expected base IRI")
            self.doc.base = self.absolute(itok)
            if style == "@":
                self.expect(".")
            return
        self.triples()
        self.expect(".")

    def triples(self) -> None:
        if self.is_punct("["):
            subject = self.blank_node_property_list()
            if self.is_punct("."):
                return
            self.predicate_object_list(subject)
            return
        subject = self.subject()
        self.predicate_object_list(subject)

    def subject(self) -> Term:
        tok = self.tok
        if tok.kind in ("IRI", "PNAME"):
            return self.iri()
        if tok.kind == "BNODE":
            return self.labelled_bnode()
        if self.is_punct("("):
            return self.collection()
        self.fail(tok, "expected subject")

    def predicate_object_list(self, subject: Term) -> None:
        self.verb_object_list(subject)
        while self.is_punct(";"):
            while self.is_punct(";"):
                self.advance()
            if self.is_punct(".") or self.is_punct("]") or self.tok.kind == "EOF":
                return
            self.verb_object_list(subject)

    def verb_object_list(self, subject: Term) -> None:
        if self.tok.kind == "A":
            self.advance()
            predicate = RDF.type
        elif self.tok.kind in ("IRI", "PNAME"):
            predicate = self.iri()
        else:
            self.fail(self.tok, "expected predicate")
        self.emit(subject, predicate, self.object())
        while self.is_punct(","):
            self.advance()
            self.emit(subject, predicate, self.object())

    def object(self) -> Term:
        tok = self.tok
        if tok.kind in ("IRI", "PNAME"):
            return self.iri()
        if tok.kind == "BNODE":
            return self.labelled_bnode()
        if self.is_punct("["):
            return self.blank_node_property_list()
        if self.is_punct("("):
            return self.collection()
        if tok.kind in ("STRING", "INTEGER", "DECIMAL", "BOOLEAN"):
            return self.literal()
        self.fail(tok, "expected object")

    def literal(self) -> Literal:
        tok = self.advance()
        if tok.kind == "INTEGER":
            return Literal(tok.value, XSD_INTEGER)
        if tok.kind == "DECIMAL":
            return Literal(tok.value, XSD_DECIMAL)
        if tok.kind == "BOOLEAN":
            return Literal(tok.value, XSD_BOOLEAN)
        if self.tok.kind == "LANG":
            return Literal(tok.value, RDF_LANGSTRING, self.advance().value)
        if self.tok.kind == "HATHAT":
            self.advance()
            if self.tok.kind not in ("IRI", "PNAME"):
                self.fail(self.tok, "expected datatype IRI after '^^'")
            return Literal(tok.value, self.iri())
        return Literal(tok.value, XSD_STRING)

    def iri(self) -> Iri:
        tok = self.advance()
        if tok.kind == "IRI":
            return self.absolute(tok)
        prefix, local = tok.value
        ns = self.doc.prefixes.get(prefix)
        if ns is None:
            raise ParseError(UNDECLARED_PREFIX, f"prefix {prefix!r} is not declared", tok.line, tok.column)
        return Iri(ns + local)

    def absolute(self, tok: Token) -> Iri:
        value = tok.value
        if not _ABSOLUTE.match(value):
            if self.doc.base is None:
                raise ParseError(BAD_IRI, f"relative IRI <{value}> without a base", tok.line, tok.column)
            value = urljoin(self.doc.base.value, value)
        return Iri(value)

    def labelled_bnode(self) -> BNode:
        label = self.advance().value
        if label not in self.labels:
            self.labels[label] = self.fresh()
        return self.labels[label]

    def blank_node_property_list(self) -> BNode:
        self.expect("[")
        node = self.fresh()
        if self.is_punct("]"):
            self.advance()
            return node
        self.predicate_object_list(node)
        self.expect("]")
        return node

    def collection(self) -> Term:
        self.expect("(")
        items = []
        while not self.is_punct(")"):
            if self.tok.kind == "EOF":
                self.fail(self.tok, "unterminated collection")
            items.append(self.object())
        self.advance()
        if not items:
            return RDF.nil
        nodes = [self.fresh() for _ in items]
        for i, (node, item) in enumerate(zip(nodes, items)):
            self.emit(node, RDF.first, item)
            self.emit(node, RDF.rest, nodes[i + 1] if i + 1 < len(nodes) else RDF.nil)
        return nodes[0]


def parse(text: str, bnode_prefix: Optional[str] = None) -> Document:
    """Parse Turtle text into a :class:`Document`.

    Blank node labels are replaced by fresh ones unique to this call, so
    documents can be merged without accidental node sharing.
    """
    if bnode_prefix is None:
        bnode_prefix = f"d{next(_document_ids)}b"
    return _Parser(text, bnode_prefix).parse()


def parse_file(path) -> Document:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


# -- serializer ------------------------------------------------------------

_BARE_INTEGER = re.compile(r"[+-]?\d+\Z")
_BARE_DECIMAL = re.compile(r"[+-]?\d*\.\d+\Z")


class _Writer:
    def __init__(self, doc: Document):
        self.graph = doc.graph
        self.prefixes = doc.prefixes
        self.labels: dict[BNode, str] = {}
        self.emitted: set[Term] = set()
        self.lists: dict[BNode, list[Term]] = {}
        self.chains: dict[BNode, list[BNode]] = {}
        self.list_nodes: set[BNode] = set()
        self.inline: set[BNode] = set()
        self._find_lists()
        for node in self.graph.subject_terms():
            if isinstance(node, BNode) and node not in self.list_nodes and self.graph.object_count(node) == 1:
                self.inline.add(node)
        # object-only blank nodes referenced once print as []
        for t in self.graph:
            o = t.object
            if isinstance(o, BNode) and not self.graph.predicates_of(o) and self.graph.object_count(o) == 1:
                self.inline.add(o)

    def _find_lists(self) -> None:
        g = self.graph
        for head in g.subject_terms():
            if not isinstance(head, BNode) or head in self.list_nodes:
                continue
            if g.object_count(head) != 1 or g.match(None, RDF.rest, head):
                continue
            chain = self._chain(head)
            if chain is not None:
                nodes, items = chain
                self.lists[head] = items
                self.chains[head] = nodes
                self.list_nodes.update(nodes)

    def _chain(self, head: BNode):
        g = self.graph
        nodes, items = [], []
        node = head
        while node != RDF.nil:
            if not isinstance(node, BNode) or node in nodes:
                return None
            if set(g.predicates_of(node)) != {RDF.first, RDF.rest}:
                return None
            firsts, rests = g.objects(node, RDF.first), g.objects(node, RDF.rest)
            if len(firsts) != 1 or len(rests) != 1:
                return None
            if node != head and g.object_count(node) != 1:
                return None
            nodes.append(node)
            items.append(firsts[0])
            node = rests[0]
        return nodes, items

    def label(self, node: BNode) -> str:
        if node not in self.labels:
            self.labels[node] = f"_:b{len(self.labels)}"
        return self.labels[node]

    def term(self, t: Term, indent: str) -> str:
        if isinstance(t, Iri):
            if t == RDF.nil:
                return "()"
            short = self.prefixes.compact(t)
            return short if short is not None else t.n3()
        if isinstance(t, Literal):
            return self.literal(t)
        if t in self.lists:
            self.emitted.update(self.chains[t])
            return "(" + " ".join(self.term(i, indent + "  ") for i in self.lists[t]) + ")"
        if t in self.inline and t not in self.emitted:
            self.emitted.add(t)
            body = self.predicates(t, indent + "  ")
            if not body:
                return "[]"
            return "[\n" + body + "\n" + indent + "]"
        return self.label(t)

    def literal(self, lit: Literal) -> str:
        dt = lit.datatype
        if dt == XSD_INTEGER and _BARE_INTEGER.match(lit.lexical):
            return lit.lexical
        if dt == XSD_DECIMAL and _BARE_DECIMAL.match(lit.lexical):
            return lit.lexical
        if dt == XSD_BOOLEAN and lit.lexical in ("true", "false"):
            return lit.lexical
        text = '"' + escape_string(lit.lexical) + '"'
        if lit.language:
            return f"{text}@{lit.language}"
        if dt == XSD_STRING:
            return text
        return f"{text}^^{self.term(dt, '')}"

    def predicates(self, subject: Term, indent: str) -> str:
        lines = []
        for p in self.graph.predicates_of(subject):
            verb = "a" if p == RDF.type else self.term(p, indent)
            objs = [self.term(o, indent) for o in self.graph.objects(subject, p)]
            lines.append(f"{indent}{verb} " + ", ".join(objs))
        return " ;\n".join(lines)

    def block(self, subject: Term) -> str:
        self.emitted.add(subject)
        head = self.term(subject, "") if not isinstance(subject, BNode) else self.label(subject)
        return f"{head}\n" + self.predicates(subject, "  ") + " ."

    def write(self) -> str:
        parts = [f"@prefix {p}: <{ns}> ." for p, ns in self.prefixes.items()]
        blocks = []
        pending = [s for s in self.graph.subject_terms() if s not in self.inline and s not in self.list_nodes]
        for s in pending:
            blocks.append(self.block(s))
        # blank nodes only reachable through a cycle of single references
        for s in self.graph.subject_terms():
            if s not in self.emitted and s in self.inline:
                self.inline.discard(s)
                blocks.append(self.block(s))
        # list nodes never reached (e.g. their head sat inside a cycle)
        for s in self.graph.subject_terms():
            if s not in self.emitted and s in self.list_nodes:
                self.lists.pop(s, None)
                self.list_nodes.discard(s)
                self.inline.discard(s)
                blocks.append(self.block(s))
        out = "\n".join(parts)
        if parts and blocks:
            out += "\n\n"
        out += "\n\n".join(blocks)
        return out + "\n" if out else ""


def serialize(doc: Document) -> str:
    """Render ``doc`` as Turtle: one block per subject, lists inline."""
    return _Writer(doc).write()
