"""Bottom-up beam-search parser over a (category, size) chart.

Rules either anchor to utterance tokens (numbers, ordinals, token spans
matching knowledge-base text values) or float freely (relations, entity
types, interface methods, enum symbols), so an utterance full of unseen
words still yields candidates. Composition is type-directed by the declared
relation signatures:

  R[r].v      for a value literal matching r's object kind
  R[r].z      additionally for entity sets when r is entity-valued
  F[r].z      entity-valued r only (objects of subjects in z)
  Intersect   two distinct entity sets with disjoint anchored spans
  argmax/min  non-superlative entity set plus an integer-valued relation
  call        method plus per-parameter arguments, at the root

Self-intersections and directly nested superlatives are excluded: they
only denote what a smaller form already denotes, or permutation twins
that no feature can separate.

Each cell keeps at most ``beam_size`` derivations, ranked by model score
with ties broken on the printed form, so runs are reproducible. Derivations
are deduplicated chart-wide on (category, printed form, anchored spans),
keeping the smallest size. Root derivations are scored with the full
feature set (including missing-predicate features); partial derivations
with the templates that are well defined on fragments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

from . import kernels
from .domains.base import COLLECTION, ENUM_ARG, INT_ARG, OBJ_ENTITY, OBJ_INT, OBJ_SYM, OBJ_TEXT, SINGLE, Domain, invoke
from .errors import DomainLogicError, ExecutionError, ParseFailure
from .features import Featurizer, tokenize
from .kb import IntVal, State, SymVal, TextVal
from .logic import (
    Call,
    ForwardJoin,
    Intersect,
    LogicalForm,
    MethodRef,
    RelationRef,
    ReverseJoin,
    Superlative,
    TypeSet,
    ValueLit,
    execute_to_call,
)

CAT_VALUE = "Value"
CAT_SET = "EntitySet"
CAT_REL = "Relation"
CAT_METHOD = "Method"
CAT_ROOT = "Root"

NUMBER_WORDS = {
    w: i + 1
    for i, w in enumerate(
        "one two three four five six seven eight nine ten eleven twelve thirteen "
        "fourteen fifteen sixteen seventeen eighteen nineteen twenty".split()
    )
}
ORDINAL_WORDS = {
    w: i + 1
    for i, w in enumerate(
        "first second third fourth fifth sixth seventh eighth ninth tenth eleventh "
        "twelfth thirteenth fourteenth fifteenth sixteenth seventeenth eighteenth "
        "nineteenth twentieth".split()
    )
}



@dataclass
class ParserConfig:
    """``beam_size=None`` disables pruning (exhaustive search)."""

    beam_size: int | None = 200
    max_rules: int = 15

    def __post_init__(self):
        if self.beam_size is not None and self.beam_size <= 0:
            raise ValueError("beam_size must be positive")
        if self.max_rules <= 0:
            raise ValueError("max_rules must be positive")


class Derivation:
    __slots__ = ("lf", "category", "size_used", "spans", "children", "rules", "feats", "score")

    def __init__(self, lf: LogicalForm, category: str, size_used: int,
                 spans: tuple, children: tuple, rules: dict):
        self.lf = lf
        self.category = category
        self.size_used = size_used
        self.spans = spans
        self.children = children
        self.rules = rules  # rule name -> application count; sums to size_used
        self.feats: dict | None = None
        self.score = 0.0

    def __repr__(self):
        return f"Derivation({self.category}, size={self.size_used}, {self.lf.printed})"


def merge_spans(a: tuple, b: tuple) -> tuple | None:
    """Union of two span sets, or None when any token is claimed twice."""
    if not a:
        return b
    if not b:
        return a
    for i1, j1 in a:
        for i2, j2 in b:
            if i1 < j2 and i2 < j1:
                return None
    return tuple(sorted(set(a) | set(b)))


def _merge_rules(rule: str, children: tuple) -> dict:
    merged = {rule: 1}
    for c in children:
        for name, n in c.rules.items():
            merged[name] = merged.get(name, 0) + n
    return merged


def generate_candidates(
    tokens,
    state: State,
    domain: Domain,
    config: ParserConfig | None = None,
    weights: dict | None = None,
    featurizer: Featurizer | None = None,
) -> list[Derivation]:
    """All root derivations that survive their beams, ordered by (size, rank).

    Returns an empty list when the grammar produces no root at all (reported
    upstream as a parse failure).
    """
    config = config or ParserConfig()
    weights = weights if weights is not None else {}
    featurizer = featurizer or Featurizer(domain)
    ctx = featurizer.context(tuple(tokens))
    beam = config.beam_size
    max_rules = config.max_rules

    cells: dict[tuple[str, int], list[Derivation]] = {}
    seen: set = set()
    dot = kernels.dot

    def add(category: str, lf: LogicalForm, size_used: int, spans: tuple,
            children: tuple, rule: str) -> None:
        key = (category, lf.printed, spans)
        if key in seen:
            return
        seen.add(key)
        d = Derivation(lf, category, size_used, spans, children, _merge_rules(rule, children))
        d.feats = ctx.features(d, category == CAT_ROOT)
        d.score = dot(weights, d.feats)
        cells.setdefault((category, size_used), []).append(d)

    def prune(category: str, size_used: int) -> None:
        cell = cells.get((category, size_used))
        if cell is None or beam is None or len(cell) <= beam:
            return
        cell.sort(key=lambda d: (-d.score, d.lf.printed, d.spans))
        del cell[beam:]

    # ---- size 1: anchored and floating leaves -----------------------------

    toks = list(tokens)
    has_index = "index" in domain.relations
    for i, tok in enumerate(toks):
        n = int(tok) if tok.isdigit() else NUMBER_WORDS.get(tok)
        span = ((i, i + 1),)
        if n is not None:
            add(CAT_VALUE, ValueLit(IntVal(n)), 1, span, (), "anchor-int")
        k = ORDINAL_WORDS.get(tok)
        if k is not None:
            add(CAT_VALUE, ValueLit(IntVal(k)), 1, span, (), "anchor-int")
            if has_index:
                add(CAT_SET, ReverseJoin("index", ValueLit(IntVal(k))), 1, span, (), "anchor-ordinal")

    text_values: dict[tuple, list[TextVal]] = {}
    for t in state.triples:
        if isinstance(t.object, TextVal):
            key = tuple(tokenize(t.object.value))
            if key and t.object not in text_values.setdefault(key, []):
                text_values[key].append(t.object)
    if text_values:
        longest = max(len(k) for k in text_values)
        for i in range(len(toks)):
            for j in range(i + 1, min(i + longest, len(toks)) + 1):
                for v in text_values.get(tuple(toks[i:j]), ()):
                    add(CAT_VALUE, ValueLit(v), 1, ((i, j),), (), "anchor-text")

    for rel in sorted(domain.relations):
        add(CAT_REL, RelationRef(rel), 1, (), (), "float-relation")
    for etype in sorted(domain.entity_types):
        add(CAT_SET, TypeSet(etype), 1, (), (), "float-type")
    for method in domain.methods:
        add(CAT_METHOD, MethodRef(method), 1, (), (), "float-method")
    for sym in sorted(domain.enum_symbols):
        add(CAT_VALUE, ValueLit(SymVal(sym)), 1, (), (), "float-sym")

    for cat in (CAT_VALUE, CAT_SET, CAT_REL, CAT_METHOD):
        prune(cat, 1)

    # ---- sizes 2..max: composition -----------------------------------------

    rel_specs = domain.relations
    rel_derivs = cells.get((CAT_REL, 1), [])
    int_rels = [d for d in rel_derivs if rel_specs[d.lf.name].object_kind == OBJ_INT]
    _VALUE_KIND = {OBJ_INT: IntVal, OBJ_TEXT: TextVal, OBJ_SYM: SymVal}

    def lit_pool(param, size_used):
        out = []
        for d in cells.get((CAT_VALUE, size_used), ()):
            v = d.lf.value
            if param.kind == INT_ARG and isinstance(v, IntVal):
                out.append(d)
            elif param.kind == ENUM_ARG and isinstance(v, SymVal) and v.name in param.symbols:
                out.append(d)
        return out

    for k in range(2, max_rules + 1):
        child_size = k - 2
        if child_size >= 1:
            for rd in rel_derivs:
                spec = rel_specs[rd.lf.name]
                want = _VALUE_KIND.get(spec.object_kind)
                if want is not None:
                    for c in cells.get((CAT_VALUE, child_size), ()):
                        if isinstance(c.lf.value, want):
                            add(CAT_SET, ReverseJoin(rd.lf.name, c.lf), k,
                                c.spans, (rd, c), "rjoin")
                elif spec.object_kind == OBJ_ENTITY:
                    for c in cells.get((CAT_SET, child_size), ()):
                        add(CAT_SET, ReverseJoin(rd.lf.name, c.lf), k,
                            c.spans, (rd, c), "rjoin")
                        add(CAT_SET, ForwardJoin(rd.lf.name, c.lf), k,
                            c.spans, (rd, c), "fjoin")
            for rd in int_rels:
                for c in cells.get((CAT_SET, child_size), ()):
                    # directly nested superlatives only breed permutation
                    # twins that no feature can tell apart
                    if isinstance(c.lf, Superlative):
                        continue
                    for kind in ("argmax", "argmin"):
                        add(CAT_SET, Superlative(kind, c.lf, rd.lf.name), k,
                            c.spans, (c, rd), kind)

        for i in range(1, (k - 1) // 2 + 1):
            j = k - 1 - i
            if j < i:
                continue
            left = cells.get((CAT_SET, i), ())
            right = cells.get((CAT_SET, j), ())
            if i == j:
                for x in range(len(left)):
                    for y in range(x, len(right)):
                        a, b = left[x], right[y]
                        if a.lf.printed == b.lf.printed:
                            continue  # x-with-x adds nothing
                        spans = merge_spans(a.spans, b.spans)
                        if spans is not None:
                            add(CAT_SET, Intersect(a.lf, b.lf), k, spans, (a, b),
                                "intersect")
            else:
                for a in left:
                    for b in right:
                        if a.lf.printed == b.lf.printed:
                            continue
                        spans = merge_spans(a.spans, b.spans)
                        if spans is not None:
                            add(CAT_SET, Intersect(a.lf, b.lf), k, spans, (a, b),
                                "intersect")

        for md in cells.get((CAT_METHOD, 1), ()):
            method = md.lf.method
            params = method.params
            budget = k - 2
            if len(params) == 1:
                param = params[0]
                pool = (cells.get((CAT_SET, budget), ())
                        if param.kind in (COLLECTION, SINGLE) else lit_pool(param, budget))
                for a in pool:
                    add(CAT_ROOT, Call(method, (a.lf,)), k, a.spans, (md, a), "call")
            elif len(params) == 2:
                p0, p1 = params
                for i in range(1, budget):
                    j = budget - i
                    pool0 = (cells.get((CAT_SET, i), ())
                             if p0.kind in (COLLECTION, SINGLE) else lit_pool(p0, i))
                    if not pool0:
                        continue
                    pool1 = (cells.get((CAT_SET, j), ())
                             if p1.kind in (COLLECTION, SINGLE) else lit_pool(p1, j))
                    for a in pool0:
                        for b in pool1:
                            spans = merge_spans(a.spans, b.spans)
                            if spans is not None:
                                add(CAT_ROOT, Call(method, (a.lf, b.lf)), k, spans,
                                    (md, a, b), "call")

        for cat in (CAT_VALUE, CAT_SET, CAT_ROOT):
            prune(cat, k)

    roots: list[Derivation] = []
    for k in range(1, max_rules + 1):
        cell = cells.get((CAT_ROOT, k))
        if cell:
            cell.sort(key=lambda d: (-d.score, d.lf.printed, d.spans))
            roots.extend(cell)
    return roots


def filter_by_application_logic(candidates: list[Derivation], state: State,
                                domain: Domain) -> list[Derivation]:
    """Drop candidates whose call fails to assemble, raises, or leaves the
    state unchanged. Invocation outcomes are memoized per distinct call."""
    survivors = []
    memo: dict = {}
    for d in candidates:
        if _denotation(d, state, domain, memo) is not None:
            survivors.append(d)
    return survivors


_REJECTED = object()


def _denotation(d: Derivation, state: State, domain: Domain, memo: dict) -> State | None:
    """Resulting state of a candidate, or None when the call is rejected
    (assembly error, domain exception, or no state change)."""
    try:
        call = execute_to_call(d.lf, state)
    except ExecutionError:
        return None
    out = memo.get(call, _REJECTED)
    if out is _REJECTED:
        try:
            result = invoke(domain, state, call)
        except DomainLogicError:
            result = None
        if result is not None and result == state:
            result = None
        memo[call] = result
        out = result
    return out


class Prediction(NamedTuple):
    best: list[Derivation]  # every maximal-score survivor (ties preserved)
    result: State | None  # denotation of the first best derivation
    candidates: list[Derivation]  # all scored survivors


def predict(
    utterance: str | list[str],
    state: State,
    domain: Domain,
    config: ParserConfig | None = None,
    weights: dict | None = None,
    featurizer: Featurizer | None = None,
    use_filter: bool = True,
) -> Prediction:
    """Full inference for one instruction. Raises :class:`ParseFailure`
    when the (filtered) candidate set is empty."""
    tokens = tokenize(utterance) if isinstance(utterance, str) else list(utterance)
    cands = generate_candidates(tokens, state, domain, config, weights, featurizer)
    if use_filter:
        cands = filter_by_application_logic(cands, state, domain)
    if not cands:
        raise ParseFailure("no surviving candidate logical form")
    top = max(d.score for d in cands)
    best = sorted((d for d in cands if d.score == top), key=lambda d: (d.lf.printed, d.spans))
    memo: dict = {}
    result = None
    for d in best:
        result = _denotation(d, state, domain, memo)
        if result is not None:
            break
    return Prediction(best, result, cands)


class Candidate(NamedTuple):
    deriv: Derivation
    features: dict
    denotation: State | None  # None: rejected call (only kept when unfiltered)


class Pipeline:
    """Inference bundle used by training and evaluation: domain lookup,
    parser configuration, feature templates, optional logic filtering.

    ``domain_source`` is any callable from domain id to Domain; experiment
    runners pass an instrumented registry so that every access is logged
    against the current protocol phase.
    """

    def __init__(
        self,
        domain_source: Callable[[str], Domain],
        config: ParserConfig | None = None,
        use_new_features: bool = True,
        use_filter: bool = True,
    ):
        self.domain_source = domain_source
        self.config = config or ParserConfig()
        self.use_new_features = use_new_features
        self.use_filter = use_filter
        self._featurizers: dict[str, Featurizer] = {}
        self._tokens: dict[str, list[str]] = {}

    def featurizer(self, domain: Domain) -> Featurizer:
        f = self._featurizers.get(domain.id)
        if f is None:
            f = Featurizer(domain, self.use_new_features)
            self._featurizers[domain.id] = f
        return f

    def tokens_of(self, utterance: str) -> list[str]:
        t = self._tokens.get(utterance)
        if t is None:
            if len(self._tokens) > 4096:
                self._tokens.clear()
            t = tokenize(utterance)
            self._tokens[utterance] = t
        return t

    def analyze(self, example, weights: dict) -> list[Candidate]:
        """Parse, filter per configuration, and execute every candidate.

        Denotations are computed for all kept candidates because both the
        training objective and scoring need them. Empty result = parse
        failure."""
        domain = self.domain_source(example.domain_id)
        state = example.initial
        cands = generate_candidates(
            self.tokens_of(example.utterance), state, domain,
            self.config, weights, self.featurizer(domain),
        )
        memo: dict = {}
        out = []
        for d in cands:
            denot = _denotation(d, state, domain, memo)
            if denot is None and self.use_filter:
                continue
            out.append(Candidate(d, d.feats, denot))
        return out
