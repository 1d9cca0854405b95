"""Logical forms and their execution.

The language is a small lambda-DCS subset. Every node denotes a set of
values when evaluated against a state, except the root ``Call`` node which
denotes a method call (and, once invoked, the resulting state):

    ``4`` / ``bedroom`` / ``ON``    value literal, denotes itself
    ``R[type].Room``                all entities of a type
    ``R[r].z``                      subjects s with (s, r, o) for some o in z
    ``F[r].z``                      objects o with (s, r, o) for some s in z
    ``Intersect(a, b)``             set intersection
    ``argmax(z, R[r])``             members of z maximizing the integer r
    ``argmin(z, R[r])``             members of z minimizing the integer r
    ``method(z1, ..., zn)``         a method call (root only)

Text literals match knowledge-base text case-insensitively inside joins.
Superlatives keep all tied extremes, so ties denote sets, not errors.

Each node caches its canonical printed form; structural identity is the
pair (node class, printed form), which the parser's chart relies on for
cheap deduplication.
"""

from __future__ import annotations

import re

from .domains.base import Domain, InterfaceMethod, MethodCall, invoke
from .errors import ExecutionError, LogicalFormSyntaxError
from .kb import TYPE_RELATION, Entity, IntVal, State, SymVal, TextVal, Value

REL = "relation"
METH = "method"
OP = "operator"

_BARE_TEXT = re.compile(r"[a-z][a-z0-9]*$")


def print_value(v: Value) -> str:
    if isinstance(v, IntVal):
        return str(v.value)
    if isinstance(v, SymVal):
        return v.name
    if isinstance(v, TextVal):
        if _BARE_TEXT.fullmatch(v.value):
            return v.value
        return '"' + v.value.replace('"', '\\"') + '"'
    return f"ent:{v.id}"


def _merge_preds(*parts):
    merged: dict[tuple[str, str], int] = {}
    for part in parts:
        for key, n in part.items():
            merged[key] = merged.get(key, 0) + n
    return merged


class LogicalForm:
    """Base node. ``printed`` is the canonical text, ``node_count`` the
    rule-application count of the canonical derivation, ``preds`` the
    multiset of (kind, name) predicates occurring in the tree."""

    __slots__ = ("printed", "node_count", "preds")

    def __eq__(self, other):
        return type(other) is type(self) and other.printed == self.printed

    def __hash__(self):
        return hash(self.printed)

    def __repr__(self):
        return self.printed


class ValueLit(LogicalForm):
    __slots__ = ("value",)

    def __init__(self, value: Value):
        self.value = value
        self.printed = print_value(value)
        self.node_count = 1
        self.preds = {}


class TypeSet(LogicalForm):
    """All entities of one type; shorthand for a reverse join on ``type``."""

    __slots__ = ("etype",)

    def __init__(self, etype: str):
        self.etype = etype
        self.printed = f"R[{TYPE_RELATION}].{etype}"
        self.node_count = 1
        self.preds = {(REL, TYPE_RELATION): 1}


class RelationRef(LogicalForm):
    """A bare relation; appears only inside partial derivations."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self.printed = f"R[{name}]"
        self.node_count = 1
        self.preds = {(REL, name): 1}


class MethodRef(LogicalForm):
    """A bare interface method; appears only inside partial derivations."""

    __slots__ = ("method",)

    def __init__(self, method: InterfaceMethod):
        self.method = method
        self.printed = method.name
        self.node_count = 1
        self.preds = {(METH, method.name): 1}


class ReverseJoin(LogicalForm):
    __slots__ = ("relation", "child")

    def __init__(self, relation: str, child: LogicalForm):
        self.relation = relation
        self.child = child
        self.printed = f"R[{relation}].{child.printed}"
        self.node_count = 2 + child.node_count
        self.preds = _merge_preds({(REL, relation): 1}, child.preds)


class ForwardJoin(LogicalForm):
    __slots__ = ("relation", "child")

    def __init__(self, relation: str, child: LogicalForm):
        self.relation = relation
        self.child = child
        self.printed = f"F[{relation}].{child.printed}"
        self.node_count = 2 + child.node_count
        self.preds = _merge_preds({(REL, relation): 1}, child.preds)


class Intersect(LogicalForm):
    """Intersection; children are kept in canonical (printed) order so that
    the two operand orders collapse to one form."""

    __slots__ = ("left", "right")

    def __init__(self, a: LogicalForm, b: LogicalForm):
        if b.printed < a.printed:
            a, b = b, a
        self.left = a
        self.right = b
        self.printed = f"Intersect({a.printed}, {b.printed})"
        self.node_count = 1 + a.node_count + b.node_count
        self.preds = _merge_preds(a.preds, b.preds)


ARGMAX = "argmax"
ARGMIN = "argmin"


class Superlative(LogicalForm):
    __slots__ = ("kind", "set_lf", "key")

    def __init__(self, kind: str, set_lf: LogicalForm, key: str):
        assert kind in (ARGMAX, ARGMIN)
        self.kind = kind
        self.set_lf = set_lf
        self.key = key
        self.printed = f"{kind}({set_lf.printed}, R[{key}])"
        self.node_count = 2 + set_lf.node_count
        self.preds = _merge_preds({(OP, kind): 1, (REL, key): 1}, set_lf.preds)


class Call(LogicalForm):
    """Root node denoting a method call."""

    __slots__ = ("method", "args")

    def __init__(self, method: InterfaceMethod, args: tuple[LogicalForm, ...]):
        if len(args) != len(method.params):
            raise ExecutionError(
                f"{method.name}: arity {len(method.params)}, got {len(args)} arguments"
            )
        self.method = method
        self.args = args
        self.printed = f"{method.name}({', '.join(a.printed for a in args)})"
        self.node_count = 2 + sum(a.node_count for a in args)
        self.preds = _merge_preds({(METH, method.name): 1}, *(a.preds for a in args))


def size(lf: LogicalForm) -> int:
    """Rule applications of the canonical derivation of a standalone form."""
    return lf.node_count


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


def evaluate(lf: LogicalForm, state: State) -> frozenset[Value]:
    """Denotation of a non-root form: a set of values."""
    if isinstance(lf, ValueLit):
        return frozenset((lf.value,))
    if isinstance(lf, TypeSet):
        return state.subjects(TYPE_RELATION, SymVal(lf.etype))
    if isinstance(lf, ReverseJoin):
        child = evaluate(lf.child, state)
        out: set[Value] = set()
        for obj in child:
            out.update(state.subjects_matching(lf.relation, obj))
        return frozenset(out)
    if isinstance(lf, ForwardJoin):
        child = evaluate(lf.child, state)
        out = set()
        for sub in child:
            if isinstance(sub, Entity):
                out.update(state.objects(sub, lf.relation))
        return frozenset(out)
    if isinstance(lf, Intersect):
        return evaluate(lf.left, state) & evaluate(lf.right, state)
    if isinstance(lf, Superlative):
        members = evaluate(lf.set_lf, state)
        best: int | None = None
        winners: list[Value] = []
        for m in members:
            if not isinstance(m, Entity):
                continue
            vals = [o.value for o in state.objects(m, lf.key) if isinstance(o, IntVal)]
            if not vals:
                continue
            score = max(vals) if lf.kind == ARGMAX else min(vals)
            if best is None or (score > best if lf.kind == ARGMAX else score < best):
                best = score
                winners = [m]
            elif score == best:
                winners.append(m)
        return frozenset(winners)
    raise ExecutionError(f"cannot evaluate {type(lf).__name__} as a set")


def execute_to_call(lf: LogicalForm, state: State) -> MethodCall:
    """Assemble the method call denoted by a root form, without invoking it."""
    if not isinstance(lf, Call):
        raise ExecutionError(f"not a root call: {lf.printed}")
    args = tuple(evaluate(a, state) for a in lf.args)
    return MethodCall(lf.method, args)  # conformance errors surface here


def execute(lf: LogicalForm, state: State, domain: Domain | None = None):
    """Full denotation: an entity set, or the post-invocation state for a
    root call (which requires the owning domain for its application logic)."""
    if isinstance(lf, Call):
        if domain is None:
            raise ExecutionError("executing a root call requires its domain")
        return invoke(domain, state, execute_to_call(lf, state))
    return evaluate(lf, state)


# ---------------------------------------------------------------------------
# Textual notation
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(R\[|F\[|[A-Za-z_][A-Za-z0-9_]*|-?\d+|\"(?:[^\"\\]|\\.)*\"|[][().,])")


def _lex(text: str) -> list[str]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise LogicalFormSyntaxError(f"bad character at {pos}: {text[pos:pos + 10]!r}")
            break
        out.append(m.group(1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens: list[str], domain: Domain | None):
        self.toks = tokens
        self.i = 0
        self.domain = domain

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise LogicalFormSyntaxError("unexpected end of input")
        if expected is not None and tok != expected:
            raise LogicalFormSyntaxError(f"expected {expected!r}, found {tok!r}")
        self.i += 1
        return tok

    def form(self) -> LogicalForm:
        tok = self.take()
        if tok in ("R[", "F["):
            rel = self.take()
            self.take("]")
            if self.peek() != ".":
                raise LogicalFormSyntaxError("a join needs a child: R[rel].child")
            self.take(".")
            child = self.form()
            if tok == "R[":
                if (
                    rel == TYPE_RELATION
                    and isinstance(child, ValueLit)
                    and isinstance(child.value, SymVal)
                    and not child.value.name.isupper()
                ):
                    return TypeSet(child.value.name)
                return ReverseJoin(rel, child)
            return ForwardJoin(rel, child)
        if tok == "Intersect":
            self.take("(")
            a = self.form()
            self.take(",")
            b = self.form()
            self.take(")")
            return Intersect(a, b)
        if tok in (ARGMAX, ARGMIN):
            self.take("(")
            inner = self.form()
            self.take(",")
            self.take("R[")
            key = self.take()
            self.take("]")
            self.take(")")
            return Superlative(tok, inner, key)
        if tok.lstrip("-").isdigit():
            return ValueLit(IntVal(int(tok)))
        if tok.startswith('"'):
            return ValueLit(TextVal(tok[1:-1].replace('\\"', '"')))
        if self.peek() == "(":
            if self.domain is None:
                raise LogicalFormSyntaxError(f"method call {tok!r} needs a domain to resolve")
            try:
                method = self.domain.method(tok)
            except KeyError as exc:
                raise LogicalFormSyntaxError(str(exc)) from None
            self.take("(")
            args = [self.form()]
            while self.peek() == ",":
                self.take(",")
                args.append(self.form())
            self.take(")")
            return Call(method, tuple(args))
        if self.peek() == ".":
            # bare join rel.child is shorthand for R[rel].child
            self.take(".")
            return ReverseJoin(tok, self.form())
        if tok.isupper():
            return ValueLit(SymVal(tok))
        if tok[0].isupper():
            # capitalized bare name: an entity-type symbol
            return ValueLit(SymVal(tok))
        return ValueLit(TextVal(tok))


def parse_lf(text: str, domain: Domain | None = None) -> LogicalForm:
    """Parse the canonical notation back into a logical form. Round-trips
    with ``lf.printed`` up to canonicalization of intersection order."""
    p = _Parser(_lex(text), domain)
    lf = p.form()
    if p.peek() is not None:
        raise LogicalFormSyntaxError(f"trailing input: {p.toks[p.i:]}")
    return lf
