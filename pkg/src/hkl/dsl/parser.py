"""Recursive-descent parser and name resolver for ``.hkl`` files.

Parsing is total: malformed input yields diagnostics, never an exception.
The grammar (``[]`` optional, ``*`` repetition)::

    file       = decl*
    decl       = signature | structure | module | system
    signature  = "signature" name "{" sigitem* "}"
    sigitem    = "sorts" name ("," name)* ";"
               | "set" name ":" name ";"
               | "const" name ":" name ";"
               | "fn" name ":" name ("," name)* "->" name flag* ";"
    flag       = "injective" | "total" | "partial"
    structure  = "structure" name ":" name "{" (name "=" value ";")* "}"
    value      = atom | "{" [entry ("," entry)*] "}"
    entry      = atom | atom "->" atom | "(" atom ("," atom)* ")" "->" atom
    module     = "module" name [":" name] "{" ["left" iface] ["right" iface]
                 ["net" "{" netitem* "}"] "}"
    iface      = "{" (("place" | "transition") name [":" name] ["=" name] ";")* "}"
    netitem    = "place" name ":" name ["init" term] ";"
               | "transition" name ["guard" term ("==" | "!=") term] ";"
               | "arc" name "->" name ":" term ";"
    term       = "elm" "(" name ")" | name ["(" term ("," term)* ")"]
    system     = "system" name "=" sysexpr ";"
    sysexpr    = sysatom (("." | "•") sysatom)*
    sysatom    = name | "(" sysexpr ")"
    name       = identifier | string
    atom       = identifier | integer | string
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..calculus import LEFT, RIGHT, InterfaceElement, Module
from ..errors import Diagnostic, HklError
from ..netschema import Arc, NetSchema, Place, Transition, validate_schema
from ..signatures import (App, Compare, Const, ConstantSymbol, Elm, FunctionSymbol,
                          Requirement, SetSymbol, Signature, Structure, Var,
                          validate_signature, validate_structure)
from .lexer import TOP_LEVEL, Token, tokenize
from .model import ModelSet, Ref, Seq, SourceFile


class ParseError(Exception):
    def __init__(self, message, token):
        super().__init__(message)
        self.token = token


# -- syntax tree -------------------------------------------------------------

@dataclass
class Name:
    text: str
    tok: Token


@dataclass
class SigDecl:
    name: Name
    sorts: list = field(default_factory=list)
    sets: list = field(default_factory=list)        # (name, sort)
    consts: list = field(default_factory=list)      # (name, sort)
    fns: list = field(default_factory=list)         # (name, [sorts], sort, [flag tokens])


@dataclass
class Entry:
    args: list      # atom tokens; one element unless written as a tuple
    result: object  # atom token or None
    tupled: bool
    tok: Token


@dataclass
class StructDecl:
    name: Name
    sig: Name
    items: list = field(default_factory=list)       # (name, value) ; value: Token | [Entry]


@dataclass
class TermNode:
    head: Name
    args: list | None   # None for a bare name
    elm: bool = False


@dataclass
class ModuleDecl:
    name: Name
    sig: Name | None
    left: list = field(default_factory=list)        # (kind, name, sort|None, node|None)
    right: list = field(default_factory=list)
    net: list | None = None                         # ("place"|"transition"|"arc", ...)


@dataclass
class SystemDecl:
    name: Name
    expr: object


# -- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens, path):
        self.toks = tokens
        self.pos = 0
        self.path = path

    @property
    def cur(self) -> Token:
        return self.toks[self.pos]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, value, kind=None) -> bool:
        tok = self.cur
        return tok.value == value and tok.kind in ((kind,) if kind else ("punct", "keyword"))

    def accept(self, value) -> Token | None:
        return self.advance() if self.at(value) else None

    def expect(self, value) -> Token:
        if not self.at(value):
            raise ParseError(f"expected '{value}', found {self.cur}", self.cur)
        return self.advance()

    def name(self, what="name") -> Name:
        tok = self.cur
        if tok.kind in ("ident", "string"):
            self.advance()
            return Name(tok.value, tok)
        raise ParseError(f"expected {what}, found {tok}", tok)

    def atom(self) -> Token:
        tok = self.cur
        if tok.kind in ("ident", "string", "int"):
            return self.advance()
        raise ParseError(f"expected an atom, found {tok}", tok)

    # declarations

    def file(self, diags):
        decls = []
        while self.cur.kind != "eof":
            start = self.pos
            try:
                decls.append(self.decl())
            except ParseError as e:
                diags.append(Diagnostic("syntax", str(e), file=self.path,
                                        line=e.token.line, col=e.token.col))
                if self.pos == start:
                    self.advance()
                while self.cur.kind != "eof" and not (
                        self.cur.kind == "keyword" and self.cur.value in TOP_LEVEL):
                    self.advance()
        return decls

    def decl(self):
        tok = self.cur
        if tok.kind == "keyword" and tok.value == "signature":
            return self.signature()
        if tok.kind == "keyword" and tok.value == "structure":
            return self.structure()
        if tok.kind == "keyword" and tok.value == "module":
            return self.module()
        if tok.kind == "keyword" and tok.value == "system":
            return self.system()
        raise ParseError(f"expected a declaration, found {tok}", tok)

    def signature(self) -> SigDecl:
        self.expect("signature")
        decl = SigDecl(self.name("signature name"))
        self.expect("{")
        while not self.accept("}"):
            if self.accept("sorts"):
                decl.sorts.append(self.name("sort name"))
                while self.accept(","):
                    decl.sorts.append(self.name("sort name"))
            elif self.accept("set"):
                n = self.name("set name")
                self.expect(":")
                decl.sets.append((n, self.name("sort name")))
            elif self.accept("const"):
                n = self.name("constant name")
                self.expect(":")
                decl.consts.append((n, self.name("sort name")))
            elif self.accept("fn"):
                n = self.name("function name")
                self.expect(":")
                args = [self.name("sort name")]
                while self.accept(","):
                    args.append(self.name("sort name"))
                self.expect("->")
                res = self.name("sort name")
                flags = []
                while self.cur.kind == "keyword" and self.cur.value in (
                        "injective", "total", "partial"):
                    flags.append(self.advance())
                decl.fns.append((n, args, res, flags))
            else:
                raise ParseError(f"expected 'sorts', 'set', 'const', 'fn' or '}}', "
                                 f"found {self.cur}", self.cur)
            self.expect(";")
        return decl

    def structure(self) -> StructDecl:
        self.expect("structure")
        decl = StructDecl(self.name("structure name"), None)
        self.expect(":")
        decl.sig = self.name("signature name")
        self.expect("{")
        while not self.accept("}"):
            n = self.name("symbol or sort name")
            self.expect("=")
            if self.at("{"):
                self.advance()
                entries = []
                if not self.at("}"):
                    entries.append(self.entry())
                    while self.accept(","):
                        entries.append(self.entry())
                self.expect("}")
                decl.items.append((n, entries))
            else:
                decl.items.append((n, self.atom()))
            self.expect(";")
        return decl

    def entry(self) -> Entry:
        tok = self.cur
        if self.accept("("):
            args = [self.atom()]
            while self.accept(","):
                args.append(self.atom())
            self.expect(")")
            self.expect("->")
            return Entry(args, self.atom(), True, tok)
        a = self.atom()
        if self.accept("->"):
            return Entry([a], self.atom(), False, tok)
        return Entry([a], None, False, tok)

    def module(self) -> ModuleDecl:
        self.expect("module")
        decl = ModuleDecl(self.name("module name"), None)
        if self.accept(":"):
            decl.sig = self.name("signature name")
        self.expect("{")
        if self.accept("left"):
            decl.left = self.interface()
        if self.accept("right"):
            decl.right = self.interface()
        if self.accept("net"):
            self.expect("{")
            decl.net = []
            while not self.accept("}"):
                decl.net.append(self.net_item())
        self.expect("}")
        return decl

    def interface(self) -> list:
        self.expect("{")
        out = []
        while not self.accept("}"):
            kind_tok = self.cur
            if not (self.at("place") or self.at("transition")):
                raise ParseError(f"expected 'place', 'transition' or '}}', found "
                                 f"{kind_tok}", kind_tok)
            self.advance()
            n = self.name("interface label")
            sort = self.name("sort name") if self.accept(":") else None
            node = self.name("node name") if self.accept("=") else None
            self.expect(";")
            out.append((kind_tok.value, n, sort, node))
        return out

    def net_item(self):
        tok = self.cur
        if self.accept("place"):
            n = self.name("place name")
            self.expect(":")
            sort = self.name("sort name")
            init = self.term() if self.accept("init") else None
            self.expect(";")
            return ("place", n, sort, init)
        if self.accept("transition"):
            n = self.name("transition name")
            guard = None
            if self.accept("guard"):
                lhs = self.term()
                op = self.cur
                if not (self.at("==") or self.at("!=")):
                    raise ParseError(f"expected '==' or '!=', found {op}", op)
                self.advance()
                guard = (lhs, op, self.term())
            self.expect(";")
            return ("transition", n, guard)
        if self.accept("arc"):
            src = self.name("node name")
            self.expect("->")
            dst = self.name("node name")
            self.expect(":")
            t = self.term()
            self.expect(";")
            return ("arc", src, dst, t, tok)
        raise ParseError(f"expected 'place', 'transition', 'arc' or '}}', found {tok}", tok)

    def term(self) -> TermNode:
        if self.accept("elm"):
            self.expect("(")
            n = self.name("set name")
            self.expect(")")
            return TermNode(n, None, elm=True)
        head = self.name("term")
        if not self.accept("("):
            return TermNode(head, None)
        args = [self.term()]
        while self.accept(","):
            args.append(self.term())
        self.expect(")")
        return TermNode(head, args)

    def system(self) -> SystemDecl:
        self.expect("system")
        n = self.name("system name")
        self.expect("=")
        expr = self.sysexpr()
        self.expect(";")
        return SystemDecl(n, expr)

    def sysexpr(self):
        expr = self.sysatom()
        while self.accept("."):
            expr = Seq(expr, self.sysatom())
        return expr

    def sysatom(self):
        if self.accept("("):
            expr = self.sysexpr()
            self.expect(")")
            return expr
        return self.name("module name")


# -- resolution ----------------------------------------------------------------

class _Resolver:
    def __init__(self):
        self.diags = []
        self.model = ModelSet()

    def err(self, code, msg, tok: Token, path, severity="error"):
        self.diags.append(Diagnostic(code, msg, severity=severity, file=path,
                                     line=tok.line, col=tok.col))

    def unique(self, table, name: Name, kind, path) -> bool:
        if name.text in table:
            self.err("duplicate-name", f"{kind} {name.text!r} declared twice", name.tok, path)
            return False
        return True

    def lookup_sig(self, name: Name, path):
        sig = self.model.signatures.get(name.text)
        if sig is None:
            self.err("unresolved-name", f"unknown signature {name.text!r}", name.tok, path)
        return sig

    # signatures

    def signature(self, d: SigDecl, path):
        if not self.unique(self.model.signatures, d.name, "signature", path):
            return
        where = {}
        for n in d.sorts:
            where.setdefault(n.text, n.tok)
        sets = [SetSymbol(n.text, s.text) for n, s in d.sets]
        consts = [ConstantSymbol(n.text, s.text) for n, s in d.consts]
        fns, reqs = [], []
        for n, args, res, flags in d.fns:
            fns.append(FunctionSymbol(n.text, tuple(a.text for a in args), res.text))
            reqs.extend(Requirement(f.value, n.text) for f in flags)
        for n, s in (*d.sets, *d.consts):
            where.setdefault(n.text, n.tok)
            if s.text not in [x.text for x in d.sorts]:
                self.err("unresolved-name", f"undeclared sort {s.text!r}", s.tok, path)
        for n, args, res, _ in d.fns:
            where.setdefault(n.text, n.tok)
            for s in (*args, res):
                if s.text not in [x.text for x in d.sorts]:
                    self.err("unresolved-name", f"undeclared sort {s.text!r}", s.tok, path)
        sig = Signature(d.name.text, tuple(n.text for n in d.sorts), sets, consts, fns, reqs)
        for diag in validate_signature(sig):
            if diag.code == "undeclared-sort":
                continue  # reported above with the offending token
            tok = where.get(diag.subject, d.name.tok)
            self.err(diag.code, diag.message, tok, path)
        self.model.signatures[d.name.text] = sig

    # structures

    def structure(self, d: StructDecl, path):
        if not self.unique(self.model.structures, d.name, "structure", path):
            return
        sig = self.lookup_sig(d.sig, path)
        if sig is None:
            return
        carriers, sets, consts, fns = {}, {}, {}, {}
        where = {}
        ok = True
        for n, value in d.items:
            if n.text in where:
                self.err("duplicate-name", f"{n.text!r} interpreted twice", n.tok, path)
                ok = False
                continue
            where[n.text] = n.tok
            is_sort = n.text in sig.sorts
            sym = sig._symbols.get(n.text)
            if not is_sort and sym is None:
                self.err("unresolved-name", f"{n.text!r} is neither a sort nor a symbol of "
                                            f"{sig.name}", n.tok, path)
                ok = False
                continue
            if isinstance(sym, ConstantSymbol):
                if not isinstance(value, Token):
                    self.err("syntax", f"constant {n.text!r} takes a single atom", n.tok, path)
                    ok = False
                else:
                    consts[n.text] = value.value
                continue
            if isinstance(value, Token):
                self.err("syntax", f"{n.text!r} takes a braced list", value, path)
                ok = False
                continue
            if isinstance(sym, FunctionSymbol):
                table = {}
                for e in value:
                    if e.result is None or len(e.args) != len(sym.arg_sorts) or (
                            len(e.args) == 1 and e.tupled):
                        self.err("syntax", f"entry of {n.text!r} must map "
                                           f"{len(sym.arg_sorts)} argument(s) to a result",
                                 e.tok, path)
                        ok = False
                        continue
                    key = tuple(a.value for a in e.args)
                    if key in table:
                        self.err("duplicate-name", f"{n.text!r} defined twice at {key}",
                                 e.tok, path)
                        ok = False
                    table[key] = e.result.value
                fns[n.text] = table
                continue
            atoms = []
            for e in value:
                if e.result is not None or e.tupled:
                    self.err("syntax", f"{n.text!r} takes a list of atoms", e.tok, path)
                    ok = False
                    continue
                a = e.args[0].value
                if a in atoms:
                    self.err("duplicate-name", f"atom {a!r} listed twice", e.tok, path)
                    ok = False
                atoms.append(a)
            (carriers if is_sort else sets)[n.text] = atoms
        structure = Structure(sig, carriers, sets, consts, fns, name=d.name.text)
        for diag in validate_structure(structure):
            tok = where.get(diag.subject, d.name.tok)
            self.err(diag.code, diag.message, tok, path)
            ok = False
        if ok:
            self.model.structures[d.name.text] = structure

    # modules

    def term(self, node: TermNode, expected, env, sig, path):
        if node.elm:
            sym = sig._symbols.get(node.head.text)
            if not isinstance(sym, SetSymbol):
                raise _TypeError(f"{node.head.text!r} is not a set symbol", node.head.tok)
            t = Elm(sym.name, sym.sort)
        elif node.args is None:
            sym = sig._symbols.get(node.head.text)
            if isinstance(sym, ConstantSymbol):
                t = Const(sym.name, sym.sort)
            elif sym is not None:
                raise _TypeError(f"{node.head.text!r} is not a constant or variable",
                                 node.head.tok)
            else:
                sort = env.get(node.head.text, expected)
                if sort is None:
                    raise _TypeError(f"cannot infer the sort of variable "
                                     f"{node.head.text!r}", node.head.tok)
                env[node.head.text] = sort
                t = Var(node.head.text, sort)
        else:
            sym = sig._symbols.get(node.head.text)
            if not isinstance(sym, FunctionSymbol):
                raise _TypeError(f"{node.head.text!r} is not a function symbol",
                                 node.head.tok)
            if len(node.args) != len(sym.arg_sorts):
                raise _TypeError(f"{sym.name} expects {len(sym.arg_sorts)} argument(s)",
                                 node.head.tok)
            args = tuple(self.term(a, s, env, sig, path)
                         for a, s in zip(node.args, sym.arg_sorts))
            t = App(sym.name, args, sym.result_sort)
        if expected is not None and t.sort != expected:
            raise _TypeError(f"expected a term of sort {expected!r}, got {t.sort!r}",
                             node.head.tok)
        return t

    def module(self, d: ModuleDecl, path):
        if not self.unique(self.model.modules, d.name, "module", path):
            return
        sig = self.lookup_sig(d.sig, path) if d.sig is not None else None
        if d.sig is not None and sig is None:
            return
        interior = None
        nodes = {}
        ok = True
        if d.net is not None:
            if sig is None:
                self.err("missing-signature", f"module {d.name.text!r} has a net but no "
                                              f"signature", d.name.tok, path)
                return
            places, transitions, arcs = [], [], []
            guards = []
            env_by_t = {}
            for item in d.net:
                if item[0] in ("place", "transition"):
                    n = item[1]
                    if n.text in nodes:
                        self.err("duplicate-name", f"node {n.text!r} declared twice",
                                 n.tok, path)
                        ok = False
                        continue
                    nodes[n.text] = (item[0], n.tok)
            for item in d.net:
                try:
                    if item[0] == "place":
                        _, n, sort, init = item
                        if sort.text not in sig.sorts:
                            raise _TypeError(f"undeclared sort {sort.text!r}", sort.tok)
                        t = None if init is None else self.term(init, sort.text, {}, sig, path)
                        places.append(Place(n.text, sort.text, t))
                    elif item[0] == "transition":
                        transitions.append(Transition(item[1].text))
                        if item[2] is not None:
                            guards.append((item[1].text, item[2]))
                except _TypeError as e:
                    self.err("type", str(e), e.tok, path)
                    ok = False
            place_sorts = {p.name: p.sort for p in places}
            for item in d.net:
                if item[0] != "arc":
                    continue
                _, src, dst, term, tok = item
                try:
                    for end in (src, dst):
                        if end.text not in nodes:
                            raise _TypeError(f"unknown node {end.text!r}", end.tok)
                    kinds = (nodes[src.text][0], nodes[dst.text][0])
                    if kinds[0] == kinds[1]:
                        raise _TypeError(f"arc connects two {kinds[0]}s", tok)
                    place, trans = (src, dst) if kinds[0] == "place" else (dst, src)
                    if place.text not in place_sorts:
                        ok = False
                        continue
                    env = env_by_t.setdefault(trans.text, {})
                    t = self.term(term, place_sorts[place.text], env, sig, path)
                    arcs.append(Arc(src.text, dst.text, t))
                except _TypeError as e:
                    self.err("type", str(e), e.tok, path)
                    ok = False
            for tname, (lhs, op, rhs) in guards:
                env = env_by_t.setdefault(tname, {})
                try:
                    left = self.term(lhs, None, env, sig, path)
                    right = self.term(rhs, left.sort, env, sig, path)
                    transitions = [Transition(t.name, Compare(op.value, left, right))
                                   if t.name == tname else t for t in transitions]
                except _TypeError as e:
                    self.err("type", str(e), e.tok, path)
                    ok = False
            if not ok:
                return
            interior = NetSchema(sig, places, transitions, arcs)
            # interface transitions gain their input arcs by fusion; the full
            # system is checked again when it is instantiated
            open_nodes = {node.text for *_, node in (*d.left, *d.right) if node is not None}
            for diag in validate_schema(interior):
                if diag.code == "free-variable" and diag.subject in open_nodes:
                    continue
                tok = nodes.get(diag.subject, (None, d.name.tok))[1]
                self.err(diag.code, diag.message, tok, path)
                ok = False

        left, right, binding = [], [], {}
        for side, items, out in ((LEFT, d.left, left), (RIGHT, d.right, right)):
            for kind, label, sort, node in items:
                if sort is not None and sig is not None and sort.text not in sig.sorts:
                    self.err("unresolved-name", f"undeclared sort {sort.text!r}",
                             sort.tok, path)
                    ok = False
                    continue
                out.append(InterfaceElement(label.text, kind,
                                            sort.text if sort is not None else None))
                if interior is not None:
                    # labels never fuse with same-named nodes by accident
                    if node is None:
                        hint = (f"; write '= {label.text}' to bind the node of that name"
                                if label.text in nodes else "")
                        self.err("unbound-interface", f"interface element {label.text!r} "
                                                      f"needs an explicit binding{hint}",
                                 label.tok, path)
                        ok = False
                        continue
                    if node.text not in nodes:
                        self.err("unresolved-name", f"interface element {label.text!r} "
                                                    f"binds unknown node {node.text!r}",
                                 node.tok, path)
                        ok = False
                        continue
                    if label.text in nodes and label.text != node.text:
                        self.err("name-clash", f"interface element {label.text!r} is bound "
                                               f"to {node.text!r} but shares its name with "
                                               f"another node", label.tok, path)
                        ok = False
                        continue
                    binding[(side, label.text)] = node.text
                elif node is not None:
                    self.err("unresolved-name", f"abstract module cannot bind "
                                                f"{label.text!r}", node.tok, path)
                    ok = False
        if not ok:
            return
        try:
            self.model.modules[d.name.text] = Module(d.name.text, left, right, interior,
                                                     binding)
        except (HklError, ValueError) as e:
            self.err("module", str(e), d.name.tok, path)

    def system(self, d: SystemDecl, path):
        if not self.unique(self.model.systems, d.name, "system", path):
            return
        ok = True

        def convert(expr):
            nonlocal ok
            if isinstance(expr, Seq):
                return Seq(convert(expr.left), convert(expr.right))
            if expr.text not in self.model.modules:
                self.err("unresolved-name", f"unknown module {expr.text!r}", expr.tok, path)
                ok = False
            return Ref(expr.text)

        expr = convert(d.expr)
        if ok:
            self.model.systems[d.name.text] = expr


class _TypeError(Exception):
    def __init__(self, message, tok):
        super().__init__(message)
        self.tok = tok


def _as_source(f) -> SourceFile:
    if isinstance(f, SourceFile):
        return f
    return SourceFile("<input>", f)


def parse(files):
    """Parse and resolve ``files`` (``SourceFile`` objects or raw strings).

    Returns ``(model, diagnostics)``; ``model`` is ``None`` whenever an
    error-severity diagnostic was produced.
    """
    if isinstance(files, (str, SourceFile)):
        files = [files]
    diags = []
    parsed = []
    for f in map(_as_source, files):
        tokens, lex_diags = tokenize(f.text, f.path)
        diags.extend(lex_diags)
        parsed.append((f.path, _Parser(tokens, f.path).file(diags)))

    r = _Resolver()
    # resolution order follows dependencies, not file order
    for kind, fn in ((SigDecl, r.signature), (StructDecl, r.structure),
                     (ModuleDecl, r.module), (SystemDecl, r.system)):
        for path, decls in parsed:
            for d in decls:
                if isinstance(d, kind):
                    fn(d, path)
    diags.extend(r.diags)
    if any(d.is_error for d in diags):
        return None, diags
    return r.model, diags


def parse_path(*paths):
    files = []
    for p in paths:
        with open(p, encoding="utf-8") as fh:
            files.append(SourceFile(str(p), fh.read()))
    return parse(files)
