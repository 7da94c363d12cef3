"""Graphviz DOT text for modules, nets, runs and reachability graphs.

Places and run conditions are ellipses, transitions and events are boxes.
Node ids are ``n0, n1, ...`` in a fixed order, so output is deterministic.
"""

from __future__ import annotations

from ..calculus import LEFT, RIGHT, Module
from ..netschema import NetInstance, NetSchema, ReachabilityGraph, format_marking
from ..runs import Run, _id_key
from ..signatures import format_term


def q(text) -> str:
    s = str(text).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{s}"'


class _Writer:
    def __init__(self, name):
        self.lines = [f"digraph {q(name)} {{", "  rankdir=LR;"]
        self.ids = {}

    def node(self, key, label, shape, **attrs) -> str:
        nid = self.ids[key] = f"n{len(self.ids)}"
        extra = "".join(f", {k}={q(v)}" for k, v in attrs.items())
        self.lines.append(f"  {nid} [label={q(label)}, shape={shape}{extra}];")
        return nid

    def edge(self, a, b, label=None, **attrs):
        parts = [] if label is None else [f"label={q(label)}"]
        parts += [f"{k}={q(v)}" for k, v in attrs.items()]
        tail = f" [{', '.join(parts)}]" if parts else ""
        self.lines.append(f"  {self.ids[a]} -> {self.ids[b]}{tail};")

    def rank(self, rank, keys):
        if keys:
            ids = "; ".join(self.ids[k] for k in keys)
            self.lines.append(f"  {{ rank={rank}; {ids}; }}")

    def text(self) -> str:
        return "\n".join(self.lines + ["}"]) + "\n"


def _net(w: _Writer, schema: NetSchema, marking=None):
    for p in schema.places:
        label = p.name
        if marking is not None:
            toks = marking.tokens(p.name) if p.name in marking.places else []
            label += "\n{" + ", ".join(str(t) for t in toks) + "}"
        elif p.init is not None:
            label += f"\n{format_term(p.init)}"
        w.node(("node", p.name), label, "ellipse")
    for t in schema.transitions:
        label = t.name if t.guard is None else f"{t.name}\n[{format_term(t.guard)}]"
        w.node(("node", t.name), label, "box")
    for a in schema.arcs:
        w.edge(("node", a.source), ("node", a.target), format_term(a.inscription))


def _run(w: _Writer, run: Run):
    for c in sorted(run.conditions, key=_id_key):
        w.node(("node", c), run.describe(c), "ellipse")
    for e in sorted(run.events, key=_id_key):
        w.node(("node", e), str(run.events[e].mode), "box")
    for s, t in sorted(run.flow, key=lambda st: (_id_key(st[0]), _id_key(st[1]))):
        w.edge(("node", s), ("node", t))


def _interior(w: _Writer, x):
    if isinstance(x, NetSchema):
        _net(w, x)
    elif isinstance(x, NetInstance):
        _net(w, x.schema, x.marking)
    elif isinstance(x, Run):
        _run(w, x)
    else:
        raise TypeError(f"cannot draw {type(x).__name__}")


def _module(m: Module) -> str:
    w = _Writer(m.name or "module")
    if m.interior is None:
        w.node(("body",), m.name or "module", "component")
    else:
        _interior(w, m.interior)
    for side, elems, rank in ((LEFT, m.left, "min"), (RIGHT, m.right, "max")):
        keys = []
        for e in elems:
            key = (side, e.label)
            label = e.label if e.sort is None else f"{e.label} : {e.sort}"
            w.node(key, label, "plaintext")
            keys.append(key)
            target = ("node", m.binding[key]) if m.interior is not None else ("body",)
            if side == LEFT:
                w.edge(key, target, style="dashed", arrowhead="none")
            else:
                w.edge(target, key, style="dashed", arrowhead="none")
        w.rank(rank, keys)
    return w.text()


def _graph(g: ReachabilityGraph) -> str:
    w = _Writer("reachability")
    places = sorted({p for m in g.markings for p in m.places})
    for i, m in enumerate(g.markings):
        attrs = {"peripheries": "2"} if i == g.initial else {}
        lines = [f"M{i}"] + [format_marking(m, [p]) for p in places]
        w.node(("m", i), "\n".join(lines), "box", style="rounded", **attrs)
    for s, mode, t in g.edges:
        w.edge(("m", s), ("m", t), str(mode))
    return w.text()


def export_dot(subject) -> str:
    """DOT digraph text for a module, schema, instance, run or reachability graph."""
    if isinstance(subject, Module):
        return _module(subject)
    if isinstance(subject, ReachabilityGraph):
        return _graph(subject)
    w = _Writer(type(subject).__name__.lower())
    _interior(w, subject)
    return w.text()
