"""Modules with left and right interfaces, and their associative composition.

``compose(a, b)`` fuses every element of ``a``'s right interface with the
equally labeled element of ``b``'s left interface.  Unmatched interface
elements stay on the composite's interfaces, which is what makes the
operator associative.

An interior is any object implementing ``node_kinds``, ``renamed``,
``union``, ``sorted``, ``node_colors`` and ``edge_list`` (net schemata, net
instances and runs do).  ``None`` stands for an abstract module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import (Diagnostic, DuplicateLabel, InteriorMismatch, KindMismatch,
                     RenamingCollision)

LEFT = "left"
RIGHT = "right"
KINDS = ("place", "transition")


@dataclass(frozen=True)
class InterfaceElement:
    label: str
    kind: str
    sort: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"interface kind must be place or transition, "
                             f"not {self.kind!r}")


@dataclass(frozen=True)
class Module:
    name: str
    left: tuple = ()
    right: tuple = ()
    interior: object = None
    binding: Mapping = field(default_factory=dict)

    __hash__ = None

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))
        object.__setattr__(self, "binding", dict(self.binding))
        for side, elems in ((LEFT, self.left), (RIGHT, self.right)):
            labels = [e.label for e in elems]
            dupes = sorted({l for l in labels if labels.count(l) > 1})
            if dupes:
                raise DuplicateLabel(f"{self.name}: label(s) {dupes} occur twice on "
                                     f"the {side} interface", dupes)
        if self.interior is None:
            if self.binding:
                raise ValueError(f"abstract module {self.name!r} cannot bind its "
                                 f"interface")
            return
        kinds = self.interior.node_kinds()
        for side, elems in ((LEFT, self.left), (RIGHT, self.right)):
            targets = set()
            for e in elems:
                node = self.binding.get((side, e.label))
                if node is None:
                    raise ValueError(f"{self.name}: {side} element {e.label!r} is "
                                     f"not bound to an interior node")
                if kinds.get(node) != e.kind:
                    raise KindMismatch(f"{self.name}: {side} element {e.label!r} is a "
                                       f"{e.kind} but node {node!r} is "
                                       f"{kinds.get(node) or 'missing'}", [e.label])
                if node in targets:
                    raise ValueError(f"{self.name}: two {side} elements bind {node!r}")
                targets.add(node)
        extra = set(self.binding) - {(LEFT, e.label) for e in self.left} \
            - {(RIGHT, e.label) for e in self.right}
        if extra:
            raise ValueError(f"{self.name}: binding for unknown elements {sorted(extra)}")

    @property
    def is_abstract(self) -> bool:
        return self.interior is None

    def element(self, side: str, label: str) -> InterfaceElement:
        for e in (self.left if side == LEFT else self.right):
            if e.label == label:
                return e
        raise KeyError(label)

    def left_labels(self) -> list:
        return [e.label for e in self.left]

    def right_labels(self) -> list:
        return [e.label for e in self.right]


def bind_by_name(name, left, right, interior) -> Module:
    """Module whose interface labels equal the names of the nodes they denote."""
    binding = {(LEFT, e.label): e.label for e in left}
    binding.update({(RIGHT, e.label): e.label for e in right})
    return Module(name, left, right, interior, binding if interior is not None else {})


def neutral(like: Module | None = None) -> Module:
    """Module with empty interfaces and an empty interior."""
    if like is None or like.interior is None:
        return Module("")
    return Module("", (), (), _empty_interior(like.interior), {})


def _empty_interior(interior):
    from .netschema import NetInstance, NetSchema, Marking
    from .runs import Run
    if isinstance(interior, NetSchema):
        return NetSchema(interior.signature)
    if isinstance(interior, NetInstance):
        return NetInstance(NetSchema(interior.schema.signature), interior.structure,
                           Marking())
    if isinstance(interior, Run):
        return Run()
    raise TypeError(f"no empty interior for {type(interior).__name__}")


# -- composition -------------------------------------------------------------

def _blocking(a: Module, b: Module) -> list:
    out = []
    right = {e.label: e for e in a.right}
    for e in b.left:
        r = right.get(e.label)
        if r is not None and (r.kind, r.sort) != (e.kind, e.sort):
            out.append(Diagnostic("kind-mismatch",
                                  f"label {e.label!r}: {a.name} offers a {r.kind}"
                                  f"{_sorted_suffix(r)}, {b.name} expects a {e.kind}"
                                  f"{_sorted_suffix(e)}", e.label))
    matched = set(right) & {e.label for e in b.left}
    left_labels = set(a.left_labels())
    for e in b.left:
        if e.label not in matched and e.label in left_labels:
            out.append(Diagnostic("duplicate-label",
                                  f"left label {e.label!r} would occur twice", e.label))
    right_labels = set(b.right_labels())
    for e in a.right:
        if e.label not in matched and e.label in right_labels:
            out.append(Diagnostic("duplicate-label",
                                  f"right label {e.label!r} would occur twice", e.label))
    if _interior_kind(a) != _interior_kind(b) and not (_is_unit(a) or _is_unit(b)):
        out.append(Diagnostic("interior-mismatch",
                              f"cannot compose a {_interior_kind(a)} module with a "
                              f"{_interior_kind(b)} module"))
    return out


def _sorted_suffix(e):
    return f" of sort {e.sort}" if e.sort else ""


def _interior_kind(m: Module) -> str:
    return "abstract" if m.interior is None else type(m.interior).__name__


def _is_unit(m: Module) -> bool:
    return m.interior is None and not m.left and not m.right


def is_composable(a: Module, b: Module):
    """``(ok, diagnostics)``; diagnostics name each blocking pair."""
    diags = _blocking(a, b)
    return not diags, diags


def _fresh(name: str, taken: set) -> str:
    candidate = name + "'"
    while candidate in taken:
        candidate += "'"
    return candidate


def compose(a: Module, b: Module) -> Module:
    """Fuse ``a``'s right interface with ``b``'s left interface."""
    for d in _blocking(a, b):
        if d.code == "kind-mismatch":
            raise KindMismatch(d.message, [d.subject])
    for d in _blocking(a, b):
        if d.code == "duplicate-label":
            raise DuplicateLabel(d.message, [d.subject])
        if d.code == "interior-mismatch":
            raise InteriorMismatch(d.message)

    name = f"{a.name}.{b.name}" if a.name and b.name else a.name or b.name
    if _is_unit(b):
        return Module(name, a.left, a.right, a.interior, a.binding)
    if _is_unit(a):
        return Module(name, b.left, b.right, b.interior, b.binding)

    matched = [e.label for e in a.right if e.label in set(b.left_labels())]
    unmatched_b_left = [e for e in b.left if e.label not in matched]
    unmatched_a_right = [e for e in a.right if e.label not in matched]
    left = (*a.left, *unmatched_b_left)
    right = (*b.right, *unmatched_a_right)

    if a.interior is None:
        return Module(name, left, right)

    a_nodes = a.interior.node_kinds()
    fuse = {b.binding[(LEFT, l)]: a.binding[(RIGHT, l)] for l in matched}
    rename = {}
    taken = set(a_nodes)
    for node in b.interior.node_kinds():
        if node in fuse:
            rename[node] = fuse[node]
        elif node in taken:
            rename[node] = _fresh(node, taken | set(b.interior.node_kinds()))
            taken.add(rename[node])
        else:
            rename[node] = node
            taken.add(node)
    interior = a.interior.union(b.interior.renamed(rename), set(fuse.values()))

    binding = {(LEFT, e.label): a.binding[(LEFT, e.label)] for e in a.left}
    binding.update({(LEFT, e.label): rename[b.binding[(LEFT, e.label)]]
                    for e in unmatched_b_left})
    binding.update({(RIGHT, e.label): rename[b.binding[(RIGHT, e.label)]]
                    for e in b.right})
    binding.update({(RIGHT, e.label): a.binding[(RIGHT, e.label)]
                    for e in unmatched_a_right})
    return Module(name, left, right, interior, binding)


def compose_all(modules) -> Module:
    """Left-to-right composition of a non-empty sequence."""
    modules = list(modules)
    result = modules[0]
    for m in modules[1:]:
        result = compose(result, m)
    return result


def rename_labels(m: Module, renaming: Mapping[str, str]) -> Module:
    """Rename interface labels on both sides; the interior is untouched."""
    touched = [l for l in renaming if l in m.left_labels() or l in m.right_labels()]
    images = [renaming[l] for l in touched]
    if len(set(images)) != len(images):
        raise RenamingCollision(f"renaming maps several labels to one: {renaming}")

    def side(elems, side_name):
        out = [InterfaceElement(renaming.get(e.label, e.label), e.kind, e.sort)
               for e in elems]
        labels = [e.label for e in out]
        if len(set(labels)) != len(labels):
            raise RenamingCollision(f"renaming produces a duplicate {side_name} label")
        return out

    left, right = side(m.left, LEFT), side(m.right, RIGHT)
    binding = {(s, renaming.get(l, l)): node for (s, l), node in m.binding.items()}
    return Module(m.name, left, right, m.interior, binding)


# -- canonical form ----------------------------------------------------------

def _refine(colors, out_adj, in_adj):
    n_classes = len(set(colors))
    while True:
        sigs = [(colors[v],
                 tuple(sorted((lab, colors[u]) for u, lab in out_adj[v])),
                 tuple(sorted((lab, colors[u]) for u, lab in in_adj[v])))
                for v in range(len(colors))]
        rank = {s: i for i, s in enumerate(sorted(set(sigs)))}
        colors = [rank[s] for s in sigs]
        if len(rank) == n_classes:
            return colors
        n_classes = len(rank)


def _twins(u, v, out_adj, in_adj) -> bool:
    swap = {u: v, v: u}
    for adj in (out_adj, in_adj):
        mu = sorted((swap.get(w, w), lab) for w, lab in adj[u])
        mv = sorted((w, lab) for w, lab in adj[v])
        if mu != mv:
            return False
    return True


def canonical_order(base: list, edges: list) -> list:
    """Order vertices ``0..n-1`` canonically.

    ``base`` holds one comparable color per vertex; ``edges`` holds
    ``(source, target, label)`` triples.  Color refinement plus
    individualization, taking the lexicographically least encoding; vertices
    that are interchangeable twins are tried only once.
    """
    n = len(base)
    out_adj = [[] for _ in range(n)]
    in_adj = [[] for _ in range(n)]
    for s, t, lab in edges:
        out_adj[s].append((t, lab))
        in_adj[t].append((s, lab))
    palette = sorted(set(base))
    start = [palette.index(c) for c in base]

    def encode(colors):
        order = sorted(range(n), key=lambda v: colors[v])
        pos = {v: i for i, v in enumerate(order)}
        enc = (tuple(base[v] for v in order),
               tuple(sorted((pos[s], pos[t], lab) for s, t, lab in edges)))
        return enc, order

    def search(colors):
        colors = _refine(colors, out_adj, in_adj)
        if len(set(colors)) == n:
            return encode(colors)
        cells = {}
        for v, c in enumerate(colors):
            cells.setdefault(c, []).append(v)
        cell = min((c for c, vs in cells.items() if len(vs) > 1),
                   key=lambda c: (len(cells[c]), c))
        best = None
        tried = []
        for v in cells[cell]:
            if any(_twins(u, v, out_adj, in_adj) for u in tried):
                continue
            tried.append(v)
            split = [2 * c + 1 for c in colors]
            split[v] -= 1
            result = search(split)
            if best is None or result[0] < best[0]:
                best = result
        return best

    if n == 0:
        return []
    return search(start)[1]


def canonical_form(m: Module) -> Module:
    """Isomorphic copy with deterministically named interior nodes and sorted parts."""
    left = sorted(m.left, key=lambda e: e.label)
    right = sorted(m.right, key=lambda e: e.label)
    if m.interior is None:
        return Module(m.name, left, right)
    kinds = m.interior.node_kinds()
    colors = m.interior.node_colors()
    names = sorted(kinds)
    where = {n: i for i, n in enumerate(names)}
    tags = {n: [] for n in names}
    for (side, label), node in m.binding.items():
        tags[node].append(f"{side}:{label}")
    base = [f"{colors[n]}|{sorted(tags[n])}" for n in names]
    edges = [(where[s], where[t], lab) for s, t, lab in m.interior.edge_list()]
    order = canonical_order(base, edges)
    counters = {}
    mapping = {}
    for v in order:
        node = names[v]
        prefix = getattr(m.interior, "prefixes", {"place": "p", "transition": "t"})[
            kinds[node]]
        i = counters.get(prefix, 0)
        counters[prefix] = i + 1
        mapping[node] = f"{prefix}{i}"
    interior = m.interior.renamed(mapping).sorted()
    binding = {k: mapping[v] for k, v in m.binding.items()}
    return Module(m.name, left, right, interior, binding)
