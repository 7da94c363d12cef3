"""Structural and behavioral analysis of instantiated nets.

Invariants are computed on the low-level expansion of an instance: one place
per ``(place, token)`` and one transition per ``(transition, mode)``.  All
linear algebra is exact over the rationals.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product
from math import gcd, lcm

from .errors import CapExceeded, DimensionMismatch
from .netschema import (Marking, Mode, NetInstance, ReachabilityGraph, mode_effect,
                        reachable_markings)


@dataclass(frozen=True)
class ExpandedNet:
    low_places: tuple       # (place, token)
    low_transitions: tuple  # (transition, Mode)
    incidence: tuple        # rows = low places, columns = low transitions

    @property
    def shape(self):
        return len(self.low_places), len(self.low_transitions)


@dataclass(frozen=True)
class InvariantVector:
    kind: str
    weights: tuple

    def __post_init__(self):
        if self.kind not in ("place", "transition"):
            raise ValueError(f"invariant kind must be place or transition")
        weights = tuple(int(w) for w in self.weights)
        if not any(weights):
            raise ValueError("an invariant vector cannot be all zero")
        g = reduce(gcd, (abs(w) for w in weights))
        object.__setattr__(self, "weights", tuple(w // g for w in weights))

    def support(self) -> list:
        return [i for i, w in enumerate(self.weights) if w]


def low_places(inst: NetInstance) -> tuple:
    """Every ``(place, token)`` over the carrier of each place's sort."""
    s = inst.structure
    return tuple((p.name, tok) for p in inst.schema.places
                 for tok in s.carrier(p.sort))


def expand(inst: NetInstance, cap: int = 10_000) -> ExpandedNet:
    schema, s = inst.schema, inst.structure
    places = low_places(inst)
    row = {lp: i for i, lp in enumerate(places)}
    # a saturated marking isolates each mode's own definedness and guard
    rich = inst.with_marking(Marking({p.name: {tok: 1 << 20 for tok in s.carrier(p.sort)}
                                      for p in schema.places}))
    columns = []
    effects = []
    for t in schema.transitions:
        variables = schema.mode_variables(t.name)
        for combo in product(*(s.carrier(v.sort) for v in variables)):
            mode = Mode(t.name, {v.name: c for v, c in zip(variables, combo)})
            effect = mode_effect(rich, mode)
            if effect is None:
                continue
            columns.append((t.name, mode))
            effects.append(effect)
            if len(columns) > cap:
                raise CapExceeded(f"more than {cap} low-level transitions")
    matrix = [[0] * len(columns) for _ in places]
    for j, (consume, produce) in enumerate(effects):
        for key, n in consume.items():
            matrix[row[key]][j] -= n
        for key, n in produce.items():
            matrix[row[key]][j] += n
    return ExpandedNet(places, tuple(columns), tuple(tuple(r) for r in matrix))


# -- exact linear algebra ----------------------------------------------------

def rref(rows: list, ncols: int):
    """Reduced row echelon form over the rationals; returns ``(matrix, pivots)``."""
    m = [[Fraction(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        lead = m[r][c]
        m[r] = [x / lead for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: list, ncols: int) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows: list, ncols: int) -> list:
    """Integer basis of ``{x : rows @ x = 0}``, one vector per free column."""
    m, pivots = rref(rows, ncols)
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        x = [Fraction(0)] * ncols
        x[free] = Fraction(1)
        for i, pc in enumerate(pivots):
            x[pc] = -m[i][free]
        scale = reduce(lcm, (v.denominator for v in x), 1)
        ints = [int(v * scale) for v in x]
        g = reduce(gcd, (abs(v) for v in ints))
        ints = [v // g for v in ints]
        if next(v for v in ints if v) < 0:
            ints = [-v for v in ints]
        basis.append(ints)
    return basis


def _transpose(matrix, nrows, ncols):
    return [[matrix[i][j] for i in range(nrows)] for j in range(ncols)]


def place_invariants(net: ExpandedNet) -> list:
    """Basis of the left kernel of the incidence matrix."""
    n_p, n_t = net.shape
    return [InvariantVector("place", v)
            for v in nullspace(_transpose(net.incidence, n_p, n_t), n_p)]


def transition_invariants(net: ExpandedNet) -> list:
    """Basis of the right kernel of the incidence matrix."""
    n_p, n_t = net.shape
    return [InvariantVector("transition", v)
            for v in nullspace([list(r) for r in net.incidence], n_t)]


def marking_vector(inst: NetInstance, marking) -> list:
    return [marking.count(p, tok) for p, tok in low_places(inst)]


def invariant_value(inst: NetInstance, iv: InvariantVector, marking) -> int:
    vec = marking_vector(inst, marking)
    if len(vec) != len(iv.weights):
        raise DimensionMismatch(f"invariant has {len(iv.weights)} weights, net has "
                                f"{len(vec)} low places")
    return sum(w * x for w, x in zip(iv.weights, vec))


def check_invariant(inst: NetInstance, iv: InvariantVector, markings) -> bool:
    """True iff the weighted token sum is the same in every given marking."""
    if iv.kind != "place":
        raise ValueError("only place invariants are checked against markings")
    values = {invariant_value(inst, iv, m) for m in markings}
    return len(values) <= 1


def format_invariant(net: ExpandedNet, iv: InvariantVector) -> str:
    labels = net.low_places if iv.kind == "place" else net.low_transitions
    terms = []
    for w, label in zip(iv.weights, labels):
        if not w:
            continue
        name = f"{label[0]}.{label[1]}" if iv.kind == "place" else str(label[1])
        coef = "" if abs(w) == 1 else f"{abs(w)}*"
        sign = "-" if w < 0 else "+"
        terms.append((sign, f"{coef}{name}"))
    text = " ".join(f"{s} {t}" for s, t in terms)
    return text[2:] if text.startswith("+ ") else text


# -- behavior ----------------------------------------------------------------

def deadlocks(inst: NetInstance, bound: int = 10_000, graph: ReachabilityGraph | None = None):
    """Reachable markings that enable no mode, in exploration order."""
    graph = graph or reachable_markings(inst, bound)
    return [graph.markings[i] for i in graph.terminal()]


def place_bounds(graph: ReachabilityGraph) -> dict:
    """Largest token count seen on each place across the reachable markings."""
    bounds = Counter()
    for m in graph.markings:
        for p, bag in m.items():
            bounds[p] = max(bounds[p], sum(bag.values()))
    return dict(sorted(bounds.items()))
