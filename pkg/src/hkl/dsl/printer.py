"""Canonical text form of a model set; ``parse`` inverts it."""

from __future__ import annotations

from ..calculus import LEFT, RIGHT, Module
from ..netschema import NetSchema
from ..signatures import App, Compare, Const, Elm, Signature, Structure, Var
from .lexer import is_plain_name
from .model import ModelSet, Ref, Seq

INDENT = "    "


def quote(name: str) -> str:
    if is_plain_name(name):
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def atom(a) -> str:
    return str(a) if isinstance(a, int) else quote(a)


def term(t) -> str:
    if isinstance(t, Var):
        return quote(t.name)
    if isinstance(t, Const):
        return quote(t.symbol)
    if isinstance(t, Elm):
        return f"elm({quote(t.symbol)})"
    if isinstance(t, App):
        return f"{quote(t.symbol)}({', '.join(term(a) for a in t.args)})"
    if isinstance(t, Compare):
        return f"{term(t.left)} {t.op} {term(t.right)}"
    raise TypeError(f"not a term: {t!r}")


def _atoms(values) -> str:
    return "{" + ", ".join(atom(v) for v in values) + "}"


def print_signature(sig: Signature) -> str:
    lines = [f"signature {quote(sig.name)} {{"]
    if sig.sorts:
        lines.append(f"{INDENT}sorts {', '.join(quote(s) for s in sig.sorts)};")
    for s in sig.sets:
        lines.append(f"{INDENT}set {quote(s.name)} : {quote(s.sort)};")
    for c in sig.constants:
        lines.append(f"{INDENT}const {quote(c.name)} : {quote(c.sort)};")
    for f in sig.functions:
        flags = "".join(f" {r.kind}" for r in sig.requirements if r.subject == f.name)
        args = ", ".join(quote(s) for s in f.arg_sorts)
        lines.append(f"{INDENT}fn {quote(f.name)} : {args} -> {quote(f.result_sort)}{flags};")
    lines.append("}")
    return "\n".join(lines)


def print_structure(s: Structure) -> str:
    sig = s.signature
    lines = [f"structure {quote(s.name)} : {quote(sig.name)} {{"]
    for sort in sig.sorts:
        if sort in s.carriers:
            lines.append(f"{INDENT}{quote(sort)} = {_atoms(s.carriers[sort])};")
    for sym in sig.sets:
        if sym.name in s.sets:
            lines.append(f"{INDENT}{quote(sym.name)} = {_atoms(s.sets[sym.name])};")
    for sym in sig.constants:
        if sym.name in s.constants:
            lines.append(f"{INDENT}{quote(sym.name)} = {atom(s.constants[sym.name])};")
    for sym in sig.functions:
        if sym.name not in s.functions:
            continue
        entries = []
        for args, res in s.functions[sym.name].items():
            lhs = atom(args[0]) if len(args) == 1 else \
                "(" + ", ".join(atom(a) for a in args) + ")"
            entries.append(f"{lhs} -> {atom(res)}")
        lines.append(f"{INDENT}{quote(sym.name)} = {{{', '.join(entries)}}};")
    lines.append("}")
    return "\n".join(lines)


def _interface(m: Module, side: str, elems) -> list:
    lines = [f"{INDENT}{side} {{"]
    for e in elems:
        text = f"{e.kind} {quote(e.label)}"
        if e.sort is not None:
            text += f" : {quote(e.sort)}"
        if m.interior is not None:
            text += f" = {quote(m.binding[(side, e.label)])}"
        lines.append(f"{INDENT * 2}{text};")
    lines.append(f"{INDENT}}}")
    return lines


def print_module(m: Module) -> str:
    if m.interior is not None and not isinstance(m.interior, NetSchema):
        raise TypeError(f"module {m.name!r}: only schema interiors have a text form")
    head = f"module {quote(m.name)}"
    if m.interior is not None:
        head += f" : {quote(m.interior.signature.name)}"
    lines = [head + " {"]
    if m.left:
        lines.extend(_interface(m, LEFT, m.left))
    if m.right:
        lines.extend(_interface(m, RIGHT, m.right))
    net = m.interior
    if net is not None:
        lines.append(f"{INDENT}net {{")
        for p in net.places:
            init = "" if p.init is None else f" init {term(p.init)}"
            lines.append(f"{INDENT * 2}place {quote(p.name)} : {quote(p.sort)}{init};")
        for t in net.transitions:
            guard = "" if t.guard is None else f" guard {term(t.guard)}"
            lines.append(f"{INDENT * 2}transition {quote(t.name)}{guard};")
        for a in net.arcs:
            lines.append(f"{INDENT * 2}arc {quote(a.source)} -> {quote(a.target)} : "
                         f"{term(a.inscription)};")
        lines.append(f"{INDENT}}}")
    lines.append("}")
    return "\n".join(lines)


def system_expr(expr) -> str:
    if isinstance(expr, Ref):
        return quote(expr.name)
    right = system_expr(expr.right)
    if isinstance(expr.right, Seq):
        right = f"({right})"
    return f"{system_expr(expr.left)} . {right}"


def pretty_print(model: ModelSet) -> str:
    """Signatures, structures, modules, then systems, each in declaration order."""
    blocks = [print_signature(s) for s in model.signatures.values()]
    blocks += [print_structure(s) for s in model.structures.values()]
    blocks += [print_module(m) for m in model.modules.values()]
    blocks += [f"system {quote(n)} = {system_expr(e)};" for n, e in model.systems.items()]
    return "\n\n".join(blocks) + ("\n" if blocks else "")
