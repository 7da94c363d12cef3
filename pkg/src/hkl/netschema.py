"""High-level Petri net schemata, their instances, and the token game."""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Mapping, Optional

from .errors import (BoundExceeded, Diagnostic, FusionConflict, InteriorMismatch,
                     InvalidSchema, InvalidStructure, NotEnabled, SignatureMismatch)
from .signatures import (BOOL, UNDEFINED, App, Compare, Const, Elm, Signature,
                         Structure, Var, atom_key, eval_term, expand_elm,
                         format_term, term_vars, validate_structure)

PLACE = "place"
TRANSITION = "transition"


@dataclass(frozen=True)
class Place:
    name: str
    sort: str
    init: Optional[object] = None


@dataclass(frozen=True)
class Transition:
    name: str
    guard: Optional[object] = None


@dataclass(frozen=True)
class Arc:
    source: str
    target: str
    inscription: object


@dataclass(frozen=True)
class NetSchema:
    signature: Signature
    places: tuple = ()
    transitions: tuple = ()
    arcs: tuple = ()

    def __post_init__(self):
        for f in ("places", "transitions", "arcs"):
            object.__setattr__(self, f, tuple(getattr(self, f)))

    @cached_property
    def _places(self) -> dict:
        return {p.name: p for p in self.places}

    @cached_property
    def _transitions(self) -> dict:
        return {t.name: t for t in self.transitions}

    def place(self, name: str) -> Place:
        return self._places[name]

    def transition(self, name: str) -> Transition:
        return self._transitions[name]

    def inputs(self, transition: str) -> list:
        return [a for a in self.arcs if a.target == transition]

    def outputs(self, transition: str) -> list:
        return [a for a in self.arcs if a.source == transition]

    def mode_variables(self, transition: str) -> list:
        """Variables bound by a mode of ``transition``: those on its input arcs."""
        out = []
        for arc in self.inputs(transition):
            for v in term_vars(arc.inscription):
                if v not in out:
                    out.append(v)
        return out

    # interior protocol used by the composition calculus

    def node_kinds(self) -> dict:
        kinds = {p.name: PLACE for p in self.places}
        kinds.update((t.name, TRANSITION) for t in self.transitions)
        return kinds

    def renamed(self, mapping: Mapping[str, str]) -> "NetSchema":
        r = lambda n: mapping.get(n, n)
        return NetSchema(
            self.signature,
            tuple(Place(r(p.name), p.sort, p.init) for p in self.places),
            tuple(Transition(r(t.name), t.guard) for t in self.transitions),
            tuple(Arc(r(a.source), r(a.target), a.inscription) for a in self.arcs))

    def union(self, other: "NetSchema", shared: set) -> "NetSchema":
        if self.signature != other.signature:
            raise InteriorMismatch("cannot compose nets over different signatures")
        places = list(self.places)
        for p in other.places:
            if p.name in shared:
                mine = self.place(p.name)
                if (mine.sort, mine.init) != (p.sort, p.init):
                    raise FusionConflict(f"fused place {p.name!r} differs in sort or "
                                         f"initial inscription")
            else:
                places.append(p)
        transitions = list(self.transitions)
        for t in other.transitions:
            if t.name in shared:
                mine = self.transition(t.name)
                if mine.guard is not None and t.guard is not None and mine.guard != t.guard:
                    raise FusionConflict(f"fused transition {t.name!r} has two guards")
                if mine.guard is None and t.guard is not None:
                    transitions[transitions.index(mine)] = t
            else:
                transitions.append(t)
        return NetSchema(self.signature, places, transitions, self.arcs + other.arcs)

    def sorted(self) -> "NetSchema":
        return NetSchema(
            self.signature,
            sorted(self.places, key=lambda p: p.name),
            sorted(self.transitions, key=lambda t: t.name),
            sorted(self.arcs, key=lambda a: (a.source, a.target,
                                             format_term(a.inscription))))

    def node_colors(self) -> dict:
        colors = {p.name: f"P|{p.sort}|{_fmt_opt(p.init)}" for p in self.places}
        colors.update((t.name, f"T|{_fmt_opt(t.guard)}") for t in self.transitions)
        return colors

    def edge_list(self) -> list:
        return [(a.source, a.target, repr(a.inscription)) for a in self.arcs]


def _fmt_opt(t) -> str:
    return "" if t is None else repr(t)


def validate_schema(schema: NetSchema) -> list:
    """Structural well-formedness of a schema against its signature."""
    sig = schema.signature
    out = []
    kinds = {}
    for node in (*schema.places, *schema.transitions):
        if node.name in kinds:
            out.append(Diagnostic("duplicate-name", f"node {node.name!r} declared twice",
                                  node.name))
        kinds[node.name] = PLACE if isinstance(node, Place) else TRANSITION

    for p in schema.places:
        if p.sort not in sig.sorts:
            out.append(Diagnostic("undeclared-sort", f"place {p.name!r} has undeclared "
                                                     f"sort {p.sort!r}", p.name))
        if p.init is not None:
            if term_vars(p.init):
                out.append(Diagnostic("bad-init", f"initial inscription of {p.name!r} "
                                                  f"must be closed", p.name))
            if p.init.sort != p.sort:
                out.append(Diagnostic("sort", f"initial inscription of {p.name!r} has "
                                              f"sort {p.init.sort!r}, place has "
                                              f"{p.sort!r}", p.name))

    for a in schema.arcs:
        ks, kt = kinds.get(a.source), kinds.get(a.target)
        if ks is None or kt is None:
            missing = a.source if ks is None else a.target
            out.append(Diagnostic("unknown-node", f"arc endpoint {missing!r} is not a "
                                                  f"node", missing))
            continue
        if ks == kt:
            out.append(Diagnostic("arc-kind", f"arc {a.source} -> {a.target} connects "
                                              f"two {ks}s", a.source))
            continue
        place = schema.place(a.source if ks == PLACE else a.target)
        if isinstance(a.inscription, (Elm, Compare)):
            out.append(Diagnostic("bad-inscription", f"arc {a.source} -> {a.target}: "
                                                     f"{format_term(a.inscription)} is "
                                                     f"not a token term", a.source))
        elif a.inscription.sort != place.sort:
            out.append(Diagnostic("sort", f"arc {a.source} -> {a.target}: inscription "
                                          f"sort {a.inscription.sort!r} differs from "
                                          f"place sort {place.sort!r}", a.source))

    for t in schema.transitions:
        bound = {v.name for v in schema.mode_variables(t.name)}
        sorts = {}
        for arc in (*schema.inputs(t.name), *schema.outputs(t.name)):
            for v in term_vars(arc.inscription):
                if sorts.setdefault(v.name, v.sort) != v.sort:
                    out.append(Diagnostic("sort", f"variable {v.name!r} of {t.name!r} "
                                                  f"used with two sorts", t.name))
        if t.guard is not None:
            if t.guard.sort != BOOL:
                out.append(Diagnostic("sort", f"guard of {t.name!r} is not boolean",
                                      t.name))
            for v in term_vars(t.guard):
                if v.name not in bound:
                    out.append(Diagnostic("free-variable", f"guard variable {v.name!r} "
                                                           f"of {t.name!r} is not on an "
                                                           f"input arc", t.name))
        for arc in schema.outputs(t.name):
            for v in term_vars(arc.inscription):
                if v.name not in bound:
                    out.append(Diagnostic("free-variable", f"output variable {v.name!r} "
                                                           f"of {t.name!r} is not on an "
                                                           f"input arc", t.name))
    return out


# -- markings and modes ------------------------------------------------------

class Marking:
    """Immutable assignment of a finite multiset of atoms to each place."""

    __slots__ = ("_items", "_hash")

    def __init__(self, data: Mapping[str, object] = ()):
        items = []
        for place, tokens in dict(data).items():
            counts = Counter(tokens) if not isinstance(tokens, Mapping) else Counter(tokens)
            for tok, n in counts.items():
                if n < 0:
                    raise ValueError(f"negative multiplicity for {tok!r} on {place!r}")
            bag = tuple(sorted(((t, n) for t, n in counts.items() if n),
                               key=lambda tn: atom_key(tn[0])))
            items.append((place, bag))
        items.sort()
        self._items = tuple(items)
        self._hash = hash(self._items)

    @classmethod
    def empty(cls, places: Iterable[str]) -> "Marking":
        return cls({p: () for p in places})

    @property
    def places(self) -> tuple:
        return tuple(p for p, _ in self._items)

    def __getitem__(self, place: str) -> Counter:
        for p, bag in self._items:
            if p == place:
                return Counter(dict(bag))
        raise KeyError(place)

    def tokens(self, place: str) -> list:
        """Tokens on ``place`` in atom order, repeated by multiplicity."""
        return [t for t, n in dict(self._items)[place] for _ in range(n)]

    def count(self, place: str, token) -> int:
        return dict(dict(self._items)[place]).get(token, 0)

    def items(self):
        return ((p, Counter(dict(bag))) for p, bag in self._items)

    def total(self) -> int:
        return sum(n for _, bag in self._items for _, n in bag)

    def to_dict(self) -> dict:
        return {p: self.tokens(p) for p in self.places}

    def with_changes(self, consume: Counter, produce: Counter) -> "Marking":
        """Apply ``(place, token) -> count`` deltas; the result must stay nonnegative."""
        data = {p: Counter(dict(bag)) for p, bag in self._items}
        for (p, tok), n in consume.items():
            data[p][tok] -= n
        for (p, tok), n in produce.items():
            data.setdefault(p, Counter())[tok] += n
        return Marking(data)

    def __eq__(self, other):
        return isinstance(other, Marking) and self._items == other._items

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Marking({self.to_dict()!r})"


def format_marking(m: Marking, order: Iterable[str] | None = None) -> str:
    places = list(order) if order is not None else list(m.places)
    return ", ".join(f"{p}: {{{', '.join(str(t) for t in m.tokens(p))}}}"
                     for p in places)


@dataclass(frozen=True)
class Mode:
    transition: str
    valuation: tuple = ()

    def __post_init__(self):
        items = self.valuation.items() if isinstance(self.valuation, Mapping) \
            else self.valuation
        object.__setattr__(self, "valuation", tuple(sorted(items)))

    @property
    def binding(self) -> dict:
        return dict(self.valuation)

    def sort_key(self):
        return (self.transition, tuple((k, atom_key(v)) for k, v in self.valuation))

    def __str__(self):
        vals = ", ".join(f"{k}={v}" for k, v in self.valuation)
        return f"{self.transition}({vals})"


@dataclass(frozen=True)
class NetInstance:
    schema: NetSchema
    structure: Structure
    marking: Marking

    __hash__ = None

    # interior protocol

    def node_kinds(self) -> dict:
        return self.schema.node_kinds()

    def renamed(self, mapping):
        r = lambda n: mapping.get(n, n)
        return NetInstance(self.schema.renamed(mapping), self.structure,
                           Marking({r(p): bag for p, bag in self.marking.items()}))

    def union(self, other: "NetInstance", shared: set) -> "NetInstance":
        if self.structure != other.structure:
            raise InteriorMismatch("cannot compose instances of different structures")
        data = dict(self.marking.items())
        for p, bag in other.marking.items():
            if p in shared and data.get(p) != bag:
                raise FusionConflict(f"fused place {p!r} carries different markings")
            data[p] = bag
        return NetInstance(self.schema.union(other.schema, shared), self.structure,
                           Marking(data))

    def sorted(self):
        return NetInstance(self.schema.sorted(), self.structure, self.marking)

    def node_colors(self) -> dict:
        colors = self.schema.node_colors()
        for p, bag in self.marking.items():
            colors[p] += "|" + repr(sorted(bag.items(), key=lambda tn: atom_key(tn[0])))
        return colors

    def edge_list(self):
        return self.schema.edge_list()

    def with_marking(self, marking: Marking) -> "NetInstance":
        return NetInstance(self.schema, self.structure, marking)


# -- operations --------------------------------------------------------------

def instantiate(schema: NetSchema, s: Structure) -> NetInstance:
    """Ground ``schema`` under ``s``; ``elm`` inscriptions yield one token per element."""
    if schema.signature != s.signature:
        raise SignatureMismatch("structure interprets a different signature")
    problems = validate_schema(schema)
    if problems:
        raise InvalidSchema(problems)
    problems = validate_structure(s)
    if problems:
        raise InvalidStructure(problems)
    data = {}
    for p in schema.places:
        if p.init is None:
            data[p.name] = ()
        elif isinstance(p.init, Elm):
            data[p.name] = expand_elm(p.init.symbol, s)
        else:
            value = eval_term(p.init, s, {})
            if value is UNDEFINED:
                raise InvalidStructure([Diagnostic(
                    "undefined-init", f"initial inscription of {p.name!r} is undefined",
                    p.name)])
            data[p.name] = (value,)
    return NetInstance(schema, s, Marking(data))


def _demand(schema, s, transition, binding, arcs):
    out = Counter()
    for arc in arcs:
        value = eval_term(arc.inscription, s, binding)
        if value is UNDEFINED:
            return None
        place = arc.source if arc.target == transition else arc.target
        out[(place, value)] += 1
    return out


def _bindings(inst: NetInstance, transition: str):
    """Candidate valuations from tokens on the input places."""
    schema, s, marking = inst.schema, inst.structure, inst.marking
    inputs = schema.inputs(transition)
    # bare-variable arcs first: they bind straight from tokens
    inputs.sort(key=lambda a: not isinstance(a.inscription, Var))

    def search(i, binding):
        if i == len(inputs):
            yield binding
            return
        arc = inputs[i]
        term = arc.inscription
        free = [v for v in term_vars(term) if v.name not in binding]
        if not free:
            yield from search(i + 1, binding)
            return
        present = sorted(marking[arc.source], key=atom_key)
        if isinstance(term, Var):
            for tok in present:
                if tok in s.carrier(term.sort):
                    yield from search(i + 1, {**binding, term.name: tok})
            return
        present = set(present)
        for combo in product(*(s.carrier(v.sort) for v in free)):
            candidate = {**binding, **{v.name: c for v, c in zip(free, combo)}}
            value = eval_term(term, s, candidate)
            if value is not UNDEFINED and value in present:
                yield from search(i + 1, candidate)

    yield from search(0, {})


def mode_effect(inst: NetInstance, mode: Mode):
    """Consumed and produced token counts of ``mode``, or ``None`` if it cannot occur."""
    schema, s = inst.schema, inst.structure
    t = mode.transition
    binding = mode.binding
    if set(binding) != {v.name for v in schema.mode_variables(t)}:
        return None
    for v in schema.mode_variables(t):
        if binding[v.name] not in s.carrier(v.sort):
            return None
    consume = _demand(schema, s, t, binding, schema.inputs(t))
    if consume is None:
        return None
    for (p, tok), n in consume.items():
        if inst.marking.count(p, tok) < n:
            return None
    guard = schema.transition(t).guard
    if guard is not None and eval_term(guard, s, binding) is not True:
        return None
    produce = _demand(schema, s, t, binding, schema.outputs(t))
    if produce is None:
        return None
    return consume, produce


def enabled_modes(inst: NetInstance) -> list:
    """All enabled modes, ordered by transition name then valuation."""
    modes = set()
    for t in inst.schema.transitions:
        for binding in _bindings(inst, t.name):
            mode = Mode(t.name, binding)
            if mode not in modes and mode_effect(inst, mode) is not None:
                modes.add(mode)
    return sorted(modes, key=Mode.sort_key)


def fire(inst: NetInstance, mode: Mode) -> NetInstance:
    if mode.transition not in inst.schema.node_kinds() or \
            inst.schema.node_kinds()[mode.transition] != TRANSITION:
        raise NotEnabled(f"{mode} names no transition")
    effect = mode_effect(inst, mode)
    if effect is None:
        raise NotEnabled(f"{mode} is not enabled")
    consume, produce = effect
    return inst.with_marking(inst.marking.with_changes(consume, produce))


def consumption(inst: NetInstance, mode: Mode) -> Counter:
    """``(place, token) -> count`` consumed by ``mode`` (evaluated input arcs)."""
    demand = _demand(inst.schema, inst.structure, mode.transition, mode.binding,
                     inst.schema.inputs(mode.transition))
    return demand if demand is not None else Counter()


def production(inst: NetInstance, mode: Mode) -> Counter:
    """``(place, token) -> count`` produced by ``mode`` (evaluated output arcs)."""
    made = _demand(inst.schema, inst.structure, mode.transition, mode.binding,
                   inst.schema.outputs(mode.transition))
    return made if made is not None else Counter()


@dataclass(frozen=True)
class ReachabilityGraph:
    markings: tuple
    edges: tuple  # (source index, Mode, target index)
    initial: int = 0

    def successors(self, i: int) -> list:
        return [(m, j) for s, m, j in self.edges if s == i]

    def terminal(self) -> list:
        sources = {s for s, _, _ in self.edges}
        return [i for i in range(len(self.markings)) if i not in sources]


def reachable_markings(inst: NetInstance, bound: int = 10_000) -> ReachabilityGraph:
    """Breadth-first state space; raises :class:`BoundExceeded` past ``bound`` markings."""
    if bound < 1:
        raise ValueError("bound must be positive")
    index = {inst.marking: 0}
    markings = [inst.marking]
    edges = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        here = inst.with_marking(markings[i])
        for mode in enabled_modes(here):
            nxt = fire(here, mode).marking
            j = index.get(nxt)
            if j is None:
                if len(markings) >= bound:
                    raise BoundExceeded(f"more than {bound} reachable markings")
                j = index[nxt] = len(markings)
                markings.append(nxt)
                queue.append(j)
            edges.append((i, mode, j))
    return ReachabilityGraph(tuple(markings), tuple(edges), 0)
