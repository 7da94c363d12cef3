"""Versioned JSON encoding of engine values.

Every document is ``{"formatVersion": 1, "kind": <kind>, "body": <body>}``.
Import is strict: unknown or missing fields raise :class:`FormatError`.
``SCHEMA`` is the same contract as a JSON Schema document.
"""

from __future__ import annotations

import json

from ..calculus import InterfaceElement, Module
from ..errors import FormatError
from ..netschema import (Arc, Marking, Mode, NetInstance, NetSchema, Place,
                         ReachabilityGraph, Transition)
from ..runs import Condition, Event, Run
from ..signatures import (App, Compare, Const, ConstantSymbol, Elm, FunctionSymbol,
                          Requirement, SetSymbol, Signature, Structure, Var)
from .model import ModelSet, Ref, Seq

FORMAT_VERSION = 1

# report kinds carry plain dictionaries; see SCHEMA for their shape
REPORT_KINDS = ("analysis", "unfoldStats", "diagnostics", "composition")


# -- encoding ----------------------------------------------------------------

def enc_term(t):
    if t is None:
        return None
    if isinstance(t, Var):
        return {"term": "var", "name": t.name, "sort": t.sort}
    if isinstance(t, Const):
        return {"term": "const", "symbol": t.symbol, "sort": t.sort}
    if isinstance(t, Elm):
        return {"term": "elm", "symbol": t.symbol, "sort": t.sort}
    if isinstance(t, App):
        return {"term": "app", "symbol": t.symbol, "sort": t.sort,
                "args": [enc_term(a) for a in t.args]}
    if isinstance(t, Compare):
        return {"term": "cmp", "op": t.op, "left": enc_term(t.left),
                "right": enc_term(t.right)}
    raise TypeError(f"not a term: {t!r}")


def enc_signature(sig: Signature) -> dict:
    return {
        "name": sig.name,
        "sorts": list(sig.sorts),
        "sets": [{"name": s.name, "sort": s.sort} for s in sig.sets],
        "constants": [{"name": c.name, "sort": c.sort} for c in sig.constants],
        "functions": [{"name": f.name, "args": list(f.arg_sorts), "result": f.result_sort}
                      for f in sig.functions],
        "requirements": [{"kind": r.kind, "subject": r.subject} for r in sig.requirements],
    }


def enc_structure(s: Structure) -> dict:
    return {
        "name": s.name,
        "signature": enc_signature(s.signature),
        "carriers": {k: list(v) for k, v in s.carriers.items()},
        "sets": {k: list(v) for k, v in s.sets.items()},
        "constants": dict(s.constants),
        "functions": {fn: [{"args": list(k), "result": v} for k, v in table.items()]
                      for fn, table in s.functions.items()},
    }


def enc_schema(n: NetSchema) -> dict:
    return {
        "signature": enc_signature(n.signature),
        "places": [{"name": p.name, "sort": p.sort, "init": enc_term(p.init)}
                   for p in n.places],
        "transitions": [{"name": t.name, "guard": enc_term(t.guard)} for t in n.transitions],
        "arcs": [{"source": a.source, "target": a.target,
                  "inscription": enc_term(a.inscription)} for a in n.arcs],
    }


def enc_marking(m: Marking, places=None) -> dict:
    """Every place maps to a token list; empty places give empty lists."""
    places = m.places if places is None else places
    return {p: (m.tokens(p) if p in m.places else []) for p in places}


def enc_mode(mode: Mode) -> dict:
    return {"transition": mode.transition, "valuation": dict(mode.valuation)}


def enc_instance(inst: NetInstance) -> dict:
    return {"schema": enc_schema(inst.schema), "structure": enc_structure(inst.structure),
            "marking": enc_marking(inst.marking, [p.name for p in inst.schema.places])}


def enc_run(r: Run) -> dict:
    return {
        "conditions": [{"id": k, "place": c.place, "token": c.token, "index": c.index}
                       for k, c in r.conditions.items()],
        "events": [{"id": k, "mode": enc_mode(e.mode)} for k, e in r.events.items()],
        "flow": sorted([s, t] for s, t in r.flow),
    }


def enc_interior(x):
    if x is None:
        return None
    for kind, (cls, enc) in _INTERIORS.items():
        if isinstance(x, cls):
            return {"kind": kind, "value": enc(x)}
    raise TypeError(f"unsupported interior {type(x).__name__}")


def enc_module(m: Module) -> dict:
    def elems(es):
        return [{"label": e.label, "kind": e.kind, "sort": e.sort} for e in es]
    return {
        "name": m.name,
        "left": elems(m.left),
        "right": elems(m.right),
        "interior": enc_interior(m.interior),
        "binding": [{"side": side, "label": label, "node": node}
                    for (side, label), node in sorted(m.binding.items())],
    }


def enc_graph(g: ReachabilityGraph) -> dict:
    places = sorted({p for m in g.markings for p in m.places})
    return {
        "initial": g.initial,
        "nodes": [{"id": i, "marking": enc_marking(m, places)}
                  for i, m in enumerate(g.markings)],
        "edges": [{"source": s, "target": t, **enc_mode(mode)} for s, mode, t in g.edges],
    }


def enc_trace(modes) -> list:
    return [enc_mode(m) for m in modes]


def enc_system(expr) -> dict:
    if isinstance(expr, Ref):
        return {"module": expr.name}
    return {"compose": [enc_system(expr.left), enc_system(expr.right)]}


def enc_model(m: ModelSet) -> dict:
    return {"signatures": [enc_signature(s) for s in m.signatures.values()],
            "structures": [enc_structure(s) for s in m.structures.values()],
            "modules": [enc_module(x) for x in m.modules.values()],
            "systems": [{"name": n, "expr": enc_system(e)} for n, e in m.systems.items()]}


_INTERIORS = {
    "netSchema": (NetSchema, enc_schema),
    "netInstance": (NetInstance, enc_instance),
    "run": (Run, enc_run),
}

_ENCODERS = [
    (Signature, "signature", enc_signature),
    (Structure, "structure", enc_structure),
    (NetSchema, "netSchema", enc_schema),
    (NetInstance, "netInstance", enc_instance),
    (Module, "module", enc_module),
    (Run, "run", enc_run),
    (ReachabilityGraph, "reachabilityGraph", enc_graph),
    (Marking, "marking", enc_marking),
    (ModelSet, "modelSet", enc_model),
]


def document(kind: str, body) -> dict:
    return {"formatVersion": FORMAT_VERSION, "kind": kind, "body": body}


def to_document(subject, kind: str | None = None) -> dict:
    """Wrap ``subject``; lists of modes need ``kind="trace"``, reports a report kind."""
    if kind == "trace":
        return document("trace", enc_trace(subject))
    if kind == "runs":
        return document("runs", [enc_run(r) for r in subject])
    if kind in REPORT_KINDS:
        return document(kind, subject)
    for cls, name, enc in _ENCODERS:
        if isinstance(subject, cls):
            return document(name, enc(subject))
    raise TypeError(f"cannot export {type(subject).__name__}")


def export_json(subject, kind: str | None = None) -> str:
    return json.dumps(to_document(subject, kind), indent=2, ensure_ascii=False) + "\n"


# -- decoding ----------------------------------------------------------------

def _obj(x, required, optional=(), where="value") -> dict:
    if not isinstance(x, dict):
        raise FormatError(f"{where}: expected an object")
    unknown = set(x) - set(required) - set(optional)
    if unknown:
        raise FormatError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = [k for k in required if k not in x]
    if missing:
        raise FormatError(f"{where}: missing field(s) {missing}")
    return x


def _list(x, where) -> list:
    if not isinstance(x, list):
        raise FormatError(f"{where}: expected an array")
    return x


def _str(x, where) -> str:
    if not isinstance(x, str):
        raise FormatError(f"{where}: expected a string")
    return x


def _atom(x, where):
    if isinstance(x, bool) or not isinstance(x, (str, int)):
        raise FormatError(f"{where}: expected an atom (string or integer)")
    return x


def _int(x, where) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < 0:
        raise FormatError(f"{where}: expected a nonnegative integer")
    return x


def dec_term(x, where="term"):
    if x is None:
        return None
    kind = x.get("term") if isinstance(x, dict) else None
    if kind == "var":
        _obj(x, ("term", "name", "sort"), where=where)
        return Var(_str(x["name"], where), _str(x["sort"], where))
    if kind == "const":
        _obj(x, ("term", "symbol", "sort"), where=where)
        return Const(_str(x["symbol"], where), _str(x["sort"], where))
    if kind == "elm":
        _obj(x, ("term", "symbol", "sort"), where=where)
        return Elm(_str(x["symbol"], where), _str(x["sort"], where))
    if kind == "app":
        _obj(x, ("term", "symbol", "sort", "args"), where=where)
        return App(_str(x["symbol"], where),
                   tuple(dec_term(a, where) for a in _list(x["args"], where)),
                   _str(x["sort"], where))
    if kind == "cmp":
        _obj(x, ("term", "op", "left", "right"), where=where)
        try:
            return Compare(x["op"], dec_term(x["left"], where), dec_term(x["right"], where))
        except (ValueError, AttributeError) as e:
            raise FormatError(f"{where}: {e}") from None
    raise FormatError(f"{where}: unknown term encoding")


def dec_signature(x) -> Signature:
    _obj(x, ("name", "sorts", "sets", "constants", "functions", "requirements"),
         where="signature")
    def named(items, what):
        return [_obj(i, ("name", "sort"), where=what) for i in _list(items, what)]
    return Signature(
        _str(x["name"], "signature.name"),
        tuple(_str(s, "signature.sorts") for s in _list(x["sorts"], "signature.sorts")),
        tuple(SetSymbol(i["name"], i["sort"]) for i in named(x["sets"], "signature.sets")),
        tuple(ConstantSymbol(i["name"], i["sort"])
              for i in named(x["constants"], "signature.constants")),
        tuple(FunctionSymbol(f["name"], tuple(f["args"]), f["result"])
              for f in (_obj(f, ("name", "args", "result"), where="signature.functions")
                        for f in _list(x["functions"], "signature.functions"))),
        tuple(Requirement(r["kind"], r["subject"])
              for r in (_obj(r, ("kind", "subject"), where="signature.requirements")
                        for r in _list(x["requirements"], "signature.requirements"))),
    )


def dec_structure(x) -> Structure:
    _obj(x, ("name", "signature", "carriers", "sets", "constants", "functions"),
         where="structure")
    def atoms(table, what):
        _obj(table, table.keys() if isinstance(table, dict) else (), where=what)
        return {k: [_atom(a, what) for a in _list(v, what)] for k, v in table.items()}
    functions = {}
    for fn, entries in _obj(x["functions"], x["functions"].keys()
                            if isinstance(x["functions"], dict) else (),
                            where="structure.functions").items():
        table = {}
        for e in _list(entries, "structure.functions"):
            _obj(e, ("args", "result"), where="structure.functions")
            key = tuple(_atom(a, "structure.functions")
                        for a in _list(e["args"], "structure.functions"))
            table[key] = _atom(e["result"], "structure.functions")
        functions[fn] = table
    constants = _obj(x["constants"], x["constants"].keys()
                     if isinstance(x["constants"], dict) else (), where="structure.constants")
    return Structure(dec_signature(x["signature"]), atoms(x["carriers"], "structure.carriers"),
                     atoms(x["sets"], "structure.sets"),
                     {k: _atom(v, "structure.constants") for k, v in constants.items()},
                     functions, name=_str(x["name"], "structure.name"))


def dec_schema(x) -> NetSchema:
    _obj(x, ("signature", "places", "transitions", "arcs"), where="netSchema")
    places = [Place(p["name"], p["sort"], dec_term(p["init"]))
              for p in (_obj(p, ("name", "sort", "init"), where="place")
                        for p in _list(x["places"], "places"))]
    transitions = [Transition(t["name"], dec_term(t["guard"]))
                   for t in (_obj(t, ("name", "guard"), where="transition")
                             for t in _list(x["transitions"], "transitions"))]
    arcs = [Arc(a["source"], a["target"], dec_term(a["inscription"]))
            for a in (_obj(a, ("source", "target", "inscription"), where="arc")
                      for a in _list(x["arcs"], "arcs"))]
    return NetSchema(dec_signature(x["signature"]), places, transitions, arcs)


def dec_marking(x) -> Marking:
    if not isinstance(x, dict):
        raise FormatError("marking: expected an object")
    return Marking({_str(p, "marking"): [_atom(t, "marking") for t in _list(v, "marking")]
                    for p, v in x.items()})


def dec_mode(x, extra=()) -> Mode:
    _obj(x, ("transition", "valuation", *extra), where="mode")
    val = x["valuation"]
    if not isinstance(val, dict):
        raise FormatError("mode.valuation: expected an object")
    return Mode(_str(x["transition"], "mode.transition"),
                {k: _atom(v, "mode.valuation") for k, v in val.items()})


def dec_instance(x) -> NetInstance:
    _obj(x, ("schema", "structure", "marking"), where="netInstance")
    return NetInstance(dec_schema(x["schema"]), dec_structure(x["structure"]),
                       dec_marking(x["marking"]))


def dec_run(x) -> Run:
    _obj(x, ("conditions", "events", "flow"), where="run")
    conditions = {}
    for c in _list(x["conditions"], "run.conditions"):
        _obj(c, ("id", "place", "token", "index"), where="condition")
        conditions[_str(c["id"], "condition.id")] = Condition(
            _str(c["place"], "condition.place"), _atom(c["token"], "condition.token"),
            _int(c["index"], "condition.index"))
    events = {}
    for e in _list(x["events"], "run.events"):
        _obj(e, ("id", "mode"), where="event")
        mode = dec_mode(e["mode"])
        events[_str(e["id"], "event.id")] = Event(mode.transition, mode)
    flow = set()
    for pair in _list(x["flow"], "run.flow"):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise FormatError("run.flow: expected [source, target] pairs")
        flow.add((_str(pair[0], "run.flow"), _str(pair[1], "run.flow")))
    return Run(conditions, events, flow)


def dec_interior(x):
    if x is None:
        return None
    _obj(x, ("kind", "value"), where="interior")
    dec = {"netSchema": dec_schema, "netInstance": dec_instance, "run": dec_run}.get(x["kind"])
    if dec is None:
        raise FormatError(f"interior: unknown kind {x['kind']!r}")
    return dec(x["value"])


def dec_module(x) -> Module:
    _obj(x, ("name", "left", "right", "interior", "binding"), where="module")
    def elems(es, where):
        out = []
        for e in _list(es, where):
            _obj(e, ("label", "kind", "sort"), where=where)
            try:
                out.append(InterfaceElement(e["label"], e["kind"], e["sort"]))
            except ValueError as err:
                raise FormatError(f"{where}: {err}") from None
        return out
    binding = {}
    for b in _list(x["binding"], "module.binding"):
        _obj(b, ("side", "label", "node"), where="module.binding")
        binding[(b["side"], b["label"])] = b["node"]
    return Module(_str(x["name"], "module.name"), elems(x["left"], "module.left"),
                  elems(x["right"], "module.right"), dec_interior(x["interior"]), binding)


def dec_graph(x) -> ReachabilityGraph:
    _obj(x, ("initial", "nodes", "edges"), where="reachabilityGraph")
    nodes = _list(x["nodes"], "nodes")
    markings = []
    for i, n in enumerate(nodes):
        _obj(n, ("id", "marking"), where="node")
        if n["id"] != i:
            raise FormatError("reachabilityGraph: node ids must be 0..n-1 in order")
        markings.append(dec_marking(n["marking"]))
    edges = []
    for e in _list(x["edges"], "edges"):
        mode = dec_mode({k: v for k, v in e.items() if k not in ("source", "target")})
        _obj(e, ("source", "target", "transition", "valuation"), where="edge")
        edges.append((_int(e["source"], "edge.source"), mode, _int(e["target"], "edge.target")))
    return ReachabilityGraph(tuple(markings), tuple(edges), _int(x["initial"], "initial"))


def dec_system(x):
    if isinstance(x, dict) and "module" in x:
        _obj(x, ("module",), where="system")
        return Ref(_str(x["module"], "system.module"))
    _obj(x, ("compose",), where="system")
    pair = _list(x["compose"], "system.compose")
    if len(pair) != 2:
        raise FormatError("system.compose: expected two operands")
    return Seq(dec_system(pair[0]), dec_system(pair[1]))


def dec_model(x) -> ModelSet:
    _obj(x, ("signatures", "structures", "modules", "systems"), where="modelSet")
    m = ModelSet()
    for s in _list(x["signatures"], "signatures"):
        sig = dec_signature(s)
        m.signatures[sig.name] = sig
    for s in _list(x["structures"], "structures"):
        st = dec_structure(s)
        m.structures[st.name] = st
    for s in _list(x["modules"], "modules"):
        mod = dec_module(s)
        m.modules[mod.name] = mod
    for s in _list(x["systems"], "systems"):
        _obj(s, ("name", "expr"), where="systems")
        m.systems[_str(s["name"], "system.name")] = dec_system(s["expr"])
    return m


_DECODERS = {
    "signature": dec_signature,
    "structure": dec_structure,
    "netSchema": dec_schema,
    "netInstance": dec_instance,
    "module": dec_module,
    "run": dec_run,
    "runs": lambda body: [dec_run(r) for r in _list(body, "runs")],
    "reachabilityGraph": dec_graph,
    "marking": dec_marking,
    "trace": lambda body: [dec_mode(m) for m in _list(body, "trace")],
    "modelSet": dec_model,
}


def from_document(doc):
    _obj(doc, ("formatVersion", "kind", "body"), where="document")
    if doc["formatVersion"] != FORMAT_VERSION:
        raise FormatError(f"unsupported formatVersion {doc['formatVersion']!r}")
    kind = doc["kind"]
    if kind in REPORT_KINDS:
        return doc["body"]
    dec = _DECODERS.get(kind)
    if dec is None:
        raise FormatError(f"unknown kind {kind!r}")
    try:
        return dec(doc["body"])
    except FormatError:
        raise
    except (TypeError, ValueError, KeyError, AttributeError) as e:
        raise FormatError(f"{kind}: {e}") from None


def import_json(text: str, expect: str | None = None):
    """Decode a document; ``expect`` restricts the accepted kind."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e}") from None
    if expect is not None and isinstance(doc, dict) and doc.get("kind") != expect:
        raise FormatError(f"expected a {expect!r} document, got {doc.get('kind')!r}")
    return from_document(doc)


# -- JSON Schema ---------------------------------------------------------------

def _closed(props: dict, required=None) -> dict:
    return {"type": "object", "properties": props,
            "required": list(props) if required is None else required,
            "additionalProperties": False}


_ATOM = {"type": ["string", "integer"]}
_NAME = {"type": "string"}
_NAMES = {"type": "array", "items": _NAME}
_ATOMS = {"type": "array", "items": _ATOM}
_NULLABLE_TERM = {"anyOf": [{"type": "null"}, {"$ref": "#/$defs/term"}]}
_VALUATION = {"type": "object", "additionalProperties": _ATOM}
_MARKING = {"type": "object", "additionalProperties": _ATOMS}
_COUNT = {"type": "integer", "minimum": 0}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "hkl document",
    "type": "object",
    "required": ["formatVersion", "kind", "body"],
    "additionalProperties": False,
    "properties": {
        "formatVersion": {"const": FORMAT_VERSION},
        "kind": {"enum": [*(_k for _, _k, _ in _ENCODERS), "runs", "trace", *REPORT_KINDS]},
        "body": {},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": k}}},
         "then": {"properties": {"body": {"$ref": f"#/$defs/{k}"}}}}
        for k in [*(_k for _, _k, _ in _ENCODERS), "runs", "trace", *REPORT_KINDS]
    ],
    "$defs": {
        "term": {"oneOf": [
            _closed({"term": {"const": "var"}, "name": _NAME, "sort": _NAME}),
            _closed({"term": {"const": "const"}, "symbol": _NAME, "sort": _NAME}),
            _closed({"term": {"const": "elm"}, "symbol": _NAME, "sort": _NAME}),
            _closed({"term": {"const": "app"}, "symbol": _NAME, "sort": _NAME,
                     "args": {"type": "array", "items": {"$ref": "#/$defs/term"}}}),
            _closed({"term": {"const": "cmp"}, "op": {"enum": ["==", "!="]},
                     "left": {"$ref": "#/$defs/term"}, "right": {"$ref": "#/$defs/term"}}),
        ]},
        "mode": _closed({"transition": _NAME, "valuation": _VALUATION}),
        "signature": _closed({
            "name": _NAME, "sorts": _NAMES,
            "sets": {"type": "array", "items": _closed({"name": _NAME, "sort": _NAME})},
            "constants": {"type": "array", "items": _closed({"name": _NAME, "sort": _NAME})},
            "functions": {"type": "array", "items": _closed(
                {"name": _NAME, "args": _NAMES, "result": _NAME})},
            "requirements": {"type": "array", "items": _closed(
                {"kind": {"enum": ["injective", "total", "partial"]}, "subject": _NAME})},
        }),
        "structure": _closed({
            "name": _NAME, "signature": {"$ref": "#/$defs/signature"},
            "carriers": {"type": "object", "additionalProperties": _ATOMS},
            "sets": {"type": "object", "additionalProperties": _ATOMS},
            "constants": {"type": "object", "additionalProperties": _ATOM},
            "functions": {"type": "object", "additionalProperties": {
                "type": "array", "items": _closed({"args": _ATOMS, "result": _ATOM})}},
        }),
        "netSchema": _closed({
            "signature": {"$ref": "#/$defs/signature"},
            "places": {"type": "array", "items": _closed(
                {"name": _NAME, "sort": _NAME, "init": _NULLABLE_TERM})},
            "transitions": {"type": "array", "items": _closed(
                {"name": _NAME, "guard": _NULLABLE_TERM})},
            "arcs": {"type": "array", "items": _closed(
                {"source": _NAME, "target": _NAME, "inscription": {"$ref": "#/$defs/term"}})},
        }),
        "marking": _MARKING,
        "netInstance": _closed({"schema": {"$ref": "#/$defs/netSchema"},
                                "structure": {"$ref": "#/$defs/structure"},
                                "marking": _MARKING}),
        "run": _closed({
            "conditions": {"type": "array", "items": _closed(
                {"id": _NAME, "place": _NAME, "token": _ATOM, "index": _COUNT})},
            "events": {"type": "array", "items": _closed(
                {"id": _NAME, "mode": {"$ref": "#/$defs/mode"}})},
            "flow": {"type": "array", "items": {
                "type": "array", "items": _NAME, "minItems": 2, "maxItems": 2}},
        }),
        "runs": {"type": "array", "items": {"$ref": "#/$defs/run"}},
        "module": _closed({
            "name": _NAME,
            "left": {"type": "array", "items": {"$ref": "#/$defs/element"}},
            "right": {"type": "array", "items": {"$ref": "#/$defs/element"}},
            "interior": {"anyOf": [
                {"type": "null"},
                _closed({"kind": {"const": "netSchema"}, "value": {"$ref": "#/$defs/netSchema"}}),
                _closed({"kind": {"const": "netInstance"},
                         "value": {"$ref": "#/$defs/netInstance"}}),
                _closed({"kind": {"const": "run"}, "value": {"$ref": "#/$defs/run"}}),
            ]},
            "binding": {"type": "array", "items": _closed(
                {"side": {"enum": ["left", "right"]}, "label": _NAME, "node": _NAME})},
        }),
        "element": _closed({"label": _NAME, "kind": {"enum": ["place", "transition"]},
                            "sort": {"type": ["string", "null"]}}),
        "reachabilityGraph": _closed({
            "initial": _COUNT,
            "nodes": {"type": "array", "items": _closed({"id": _COUNT, "marking": _MARKING})},
            "edges": {"type": "array", "items": _closed(
                {"source": _COUNT, "target": _COUNT, "transition": _NAME,
                 "valuation": _VALUATION})},
        }),
        "trace": {"type": "array", "items": {"$ref": "#/$defs/mode"}},
        "system": {"oneOf": [
            _closed({"module": _NAME}),
            _closed({"compose": {"type": "array", "items": {"$ref": "#/$defs/system"},
                                 "minItems": 2, "maxItems": 2}})]},
        "modelSet": _closed({
            "signatures": {"type": "array", "items": {"$ref": "#/$defs/signature"}},
            "structures": {"type": "array", "items": {"$ref": "#/$defs/structure"}},
            "modules": {"type": "array", "items": {"$ref": "#/$defs/module"}},
            "systems": {"type": "array", "items": _closed(
                {"name": _NAME, "expr": {"$ref": "#/$defs/system"}})}}),
        "analysis": _closed({
            "markings": _COUNT,
            "edges": _COUNT,
            "placeInvariants": {"type": "array", "items": {"$ref": "#/$defs/invariant"}},
            "transitionInvariants": {"type": "array", "items": {"$ref": "#/$defs/invariant"}},
            "deadlocks": {"type": "array", "items": _MARKING},
            "lowPlaces": {"type": "array", "items": _closed({"place": _NAME, "token": _ATOM})},
            "lowTransitions": {"type": "array", "items": {"$ref": "#/$defs/mode"}},
        }, required=[]),
        "invariant": _closed({"weights": {"type": "array", "items": {"type": "integer"}},
                              "text": {"type": "string"},
                              "value": {"type": ["integer", "null"]}}, required=["weights"]),
        "unfoldStats": _closed({"runs": {"type": "array", "items": _closed(
            {"events": _COUNT, "conditions": _COUNT, "views": _COUNT,
             "linearizations": _COUNT})}}),
        "diagnostics": {"type": "array", "items": _closed({
            "code": _NAME, "message": _NAME, "severity": {"enum": ["error", "warning"]},
            "file": {"type": ["string", "null"]}, "line": {"type": ["integer", "null"]},
            "col": {"type": ["integer", "null"]}})},
        "composition": _closed({"module": {"$ref": "#/$defs/module"},
                                "left": _NAMES, "right": _NAMES}),
    },
}
