"""Many-sorted signatures, finite structures that interpret them, and terms.

A :class:`Signature` is a vocabulary of sorted symbols for sets, constants and
functions, plus requirements (injective, total, partial) on the function
symbols.  A :class:`Structure` binds every symbol to finite, explicit data.
Terms are immutable trees built through the sort-checking helpers on
:class:`Signature` and evaluated with :func:`eval_term`.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Any, Iterable, Mapping, Union

from .errors import (Diagnostic, SortMismatch, UnboundVariable,
                     UnknownSymbol)

Atom = Union[str, int]

BOOL = "bool"
REQUIREMENT_KINDS = ("injective", "total", "partial")


def atom_key(a: Atom):
    """Total order on atoms: integers first (numerically), then strings."""
    if isinstance(a, bool):
        raise TypeError(f"boolean is not an atom: {a!r}")
    return (0, a, "") if isinstance(a, int) else (1, 0, a)


def sort_atoms(atoms: Iterable[Atom]) -> tuple:
    return tuple(sorted(set(atoms), key=atom_key))


class _Undefined:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNDEFINED"

    def __bool__(self):
        return False

    def __reduce__(self):
        return (_Undefined, ())


#: Result of applying a partial function outside its domain.
UNDEFINED = _Undefined()


# -- signature ---------------------------------------------------------------

@dataclass(frozen=True)
class SetSymbol:
    name: str
    sort: str


@dataclass(frozen=True)
class ConstantSymbol:
    name: str
    sort: str


@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    arg_sorts: tuple
    result_sort: str

    def __post_init__(self):
        object.__setattr__(self, "arg_sorts", tuple(self.arg_sorts))


@dataclass(frozen=True)
class Requirement:
    kind: str
    subject: str


@dataclass(frozen=True)
class Signature:
    name: str = ""
    sorts: tuple = ()
    sets: tuple = ()
    constants: tuple = ()
    functions: tuple = ()
    requirements: tuple = ()

    def __post_init__(self):
        for f in ("sorts", "sets", "constants", "functions", "requirements"):
            object.__setattr__(self, f, tuple(getattr(self, f)))

    @cached_property
    def _symbols(self) -> dict:
        table = {}
        for sym in (*self.sets, *self.constants, *self.functions):
            table.setdefault(sym.name, sym)
        return table

    def symbol(self, name: str):
        try:
            return self._symbols[name]
        except KeyError:
            raise UnknownSymbol(f"unknown symbol {name!r}") from None

    def has_symbol(self, name: str) -> bool:
        return name in self._symbols

    def set_symbol(self, name: str) -> SetSymbol:
        sym = self.symbol(name)
        if not isinstance(sym, SetSymbol):
            raise UnknownSymbol(f"{name!r} is not a set symbol")
        return sym

    def constant(self, name: str) -> ConstantSymbol:
        sym = self.symbol(name)
        if not isinstance(sym, ConstantSymbol):
            raise UnknownSymbol(f"{name!r} is not a constant symbol")
        return sym

    def function(self, name: str) -> FunctionSymbol:
        sym = self.symbol(name)
        if not isinstance(sym, FunctionSymbol):
            raise UnknownSymbol(f"{name!r} is not a function symbol")
        return sym

    def requirement_kinds(self, fn: str) -> set:
        return {r.kind for r in self.requirements if r.subject == fn}

    def is_injective(self, fn: str) -> bool:
        return "injective" in self.requirement_kinds(fn)

    def is_total(self, fn: str) -> bool:
        # functions are total unless declared partial
        return "partial" not in self.requirement_kinds(fn)

    # sort-checked term construction

    def var(self, name: str, sort: str) -> "Var":
        if sort not in self.sorts:
            raise SortMismatch(f"variable {name!r}: undeclared sort {sort!r}")
        return Var(name, sort)

    def const(self, name: str) -> "Const":
        return Const(name, self.constant(name).sort)

    def app(self, name: str, *args: "Term") -> "App":
        fn = self.function(name)
        if len(args) != len(fn.arg_sorts):
            raise SortMismatch(
                f"{name} expects {len(fn.arg_sorts)} arguments, got {len(args)}")
        for i, (arg, want) in enumerate(zip(args, fn.arg_sorts)):
            if arg.sort != want:
                raise SortMismatch(
                    f"argument {i + 1} of {name}: expected sort {want!r}, "
                    f"got {arg.sort!r}")
        return App(name, tuple(args), fn.result_sort)

    def elm(self, name: str) -> "Elm":
        return Elm(name, self.set_symbol(name).sort)


def validate_signature(sig: Signature) -> list:
    """Check name uniqueness, declared sorts and requirement subjects."""
    out = []
    seen_sorts = set()
    for s in sig.sorts:
        if s in seen_sorts:
            out.append(Diagnostic("duplicate-name", f"sort {s!r} declared twice", s))
        seen_sorts.add(s)

    seen = set()
    for sym in (*sig.sets, *sig.constants, *sig.functions):
        if sym.name in seen or sym.name in seen_sorts:
            out.append(Diagnostic("duplicate-name",
                                  f"name {sym.name!r} declared twice", sym.name))
        seen.add(sym.name)
        used = (sym.sort,) if not isinstance(sym, FunctionSymbol) else (
            *sym.arg_sorts, sym.result_sort)
        for s in used:
            if s not in seen_sorts:
                out.append(Diagnostic("undeclared-sort",
                                      f"{sym.name!r} uses undeclared sort {s!r}",
                                      sym.name))

    fn_names = {f.name for f in sig.functions}
    modes = Counter()
    for req in sig.requirements:
        if req.kind not in REQUIREMENT_KINDS:
            out.append(Diagnostic("bad-requirement",
                                  f"unknown requirement kind {req.kind!r}",
                                  req.subject))
        elif req.subject not in fn_names:
            out.append(Diagnostic("bad-requirement",
                                  f"requirement {req.kind} on non-function "
                                  f"{req.subject!r}", req.subject))
        if req.kind in ("total", "partial"):
            modes[req.subject] += 1
    for name, n in sorted(modes.items()):
        if n > 1:
            out.append(Diagnostic("bad-requirement",
                                  f"{name!r} marked total/partial {n} times", name))
    return out


# -- terms -------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    sort: str


@dataclass(frozen=True)
class Const:
    symbol: str
    sort: str


@dataclass(frozen=True)
class App:
    symbol: str
    args: tuple
    sort: str


@dataclass(frozen=True)
class Elm:
    symbol: str
    sort: str


@dataclass(frozen=True)
class Compare:
    """Boolean (in)equality test between two terms of one sort."""
    op: str
    left: Any
    right: Any
    sort: str = BOOL

    def __post_init__(self):
        if self.op not in ("==", "!="):
            raise ValueError(f"unknown comparison {self.op!r}")
        if self.left.sort != self.right.sort:
            raise SortMismatch(
                f"cannot compare {self.left.sort!r} with {self.right.sort!r}")


Term = Union[Var, Const, App, Elm, Compare]


def term_vars(t: Term) -> list:
    """Variables of ``t`` in first-occurrence order, without duplicates."""
    out = []

    def walk(u):
        if isinstance(u, Var):
            if u not in out:
                out.append(u)
        elif isinstance(u, App):
            for a in u.args:
                walk(a)
        elif isinstance(u, Compare):
            walk(u.left)
            walk(u.right)

    walk(t)
    return out


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return t.symbol
    if isinstance(t, App):
        return f"{t.symbol}({', '.join(format_term(a) for a in t.args)})"
    if isinstance(t, Elm):
        return f"elm({t.symbol})"
    if isinstance(t, Compare):
        return f"{format_term(t.left)} {t.op} {format_term(t.right)}"
    raise TypeError(f"not a term: {t!r}")


def substitute(t: Term, name: str, replacement: Term) -> Term:
    if isinstance(t, Var):
        return replacement if t.name == name else t
    if isinstance(t, App):
        return App(t.symbol, tuple(substitute(a, name, replacement) for a in t.args),
                   t.sort)
    if isinstance(t, Compare):
        return Compare(t.op, substitute(t.left, name, replacement),
                       substitute(t.right, name, replacement))
    return t


# -- structures --------------------------------------------------------------

def _as_key(k) -> tuple:
    return k if isinstance(k, tuple) else (k,)


@dataclass(frozen=True)
class Structure:
    """Finite interpretation of a signature.

    Carriers and set interpretations are stored as sorted tuples of atoms.
    Function tables map argument tuples to results; a missing key means the
    function is undefined there.
    """

    signature: Signature
    carriers: Mapping = field(default_factory=dict)
    sets: Mapping = field(default_factory=dict)
    constants: Mapping = field(default_factory=dict)
    functions: Mapping = field(default_factory=dict)
    name: str = ""

    __hash__ = None

    def __post_init__(self):
        object.__setattr__(self, "carriers",
                           {k: sort_atoms(v) for k, v in self.carriers.items()})
        object.__setattr__(self, "sets",
                           {k: sort_atoms(v) for k, v in self.sets.items()})
        object.__setattr__(self, "constants", dict(self.constants))
        tables = {}
        for fn, table in self.functions.items():
            entries = sorted(((_as_key(k), v) for k, v in table.items()),
                             key=lambda kv: tuple(atom_key(a) for a in kv[0]))
            tables[fn] = dict(entries)
        object.__setattr__(self, "functions", tables)

    def carrier(self, sort: str) -> tuple:
        return self.carriers.get(sort, ())

    def apply(self, fn: str, args: tuple):
        table = self.functions.get(fn)
        if table is None:
            raise UnknownSymbol(f"function {fn!r} is not interpreted")
        return table.get(tuple(args), UNDEFINED)


def validate_structure(s: Structure) -> list:
    """Return one diagnostic per violated structure invariant or requirement."""
    sig = s.signature
    out = []
    carriers = {}
    for sort in sig.sorts:
        if sort not in s.carriers:
            out.append(Diagnostic("uninterpreted", f"sort {sort!r} has no carrier", sort))
        carriers[sort] = set(s.carriers.get(sort, ()))
    for sort in s.carriers:
        if sort not in sig.sorts:
            out.append(Diagnostic("unknown-symbol", f"carrier for unknown sort {sort!r}",
                                  sort))

    for sym in sig.sets:
        if sym.name not in s.sets:
            out.append(Diagnostic("uninterpreted", f"set {sym.name!r} is not interpreted",
                                  sym.name))
            continue
        stray = [a for a in s.sets[sym.name] if a not in carriers.get(sym.sort, ())]
        if stray:
            out.append(Diagnostic("sort", f"set {sym.name!r} contains {stray} outside "
                                          f"carrier of {sym.sort!r}", sym.name))

    for sym in sig.constants:
        if sym.name not in s.constants:
            out.append(Diagnostic("uninterpreted",
                                  f"constant {sym.name!r} is not interpreted", sym.name))
        elif s.constants[sym.name] not in carriers.get(sym.sort, ()):
            out.append(Diagnostic("sort", f"constant {sym.name!r} = "
                                          f"{s.constants[sym.name]!r} is not in "
                                          f"carrier of {sym.sort!r}", sym.name))

    for fn in sig.functions:
        if fn.name not in s.functions:
            out.append(Diagnostic("uninterpreted",
                                  f"function {fn.name!r} is not interpreted", fn.name))
            continue
        table = s.functions[fn.name]
        bad = []
        for args, res in table.items():
            ok = len(args) == len(fn.arg_sorts) and all(
                a in carriers.get(srt, ()) for a, srt in zip(args, fn.arg_sorts))
            if not ok or res not in carriers.get(fn.result_sort, ()):
                bad.append(args)
        if bad:
            out.append(Diagnostic("sort", f"function {fn.name!r} maps "
                                          f"{[_fmt_args(a) for a in bad]} outside "
                                          f"its declared sorts", fn.name))
        if sig.is_injective(fn.name):
            images = Counter(table.values())
            clashes = sorted((v for v, n in images.items() if n > 1), key=atom_key)
            if clashes:
                out.append(Diagnostic("injectivity", f"function {fn.name!r} is not "
                                                     f"injective: {clashes} hit more "
                                                     f"than once", fn.name))
        if sig.is_total(fn.name):
            domain = product(*(sort_atoms(carriers.get(srt, ())) for srt in fn.arg_sorts))
            missing = [args for args in domain if args not in table]
            if missing:
                out.append(Diagnostic("totality", f"total function {fn.name!r} is "
                                                  f"undefined at "
                                                  f"{[_fmt_args(a) for a in missing]}",
                                      fn.name))

    known = {sym.name for sym in (*sig.sets, *sig.constants, *sig.functions)}
    for mapping in (s.sets, s.constants, s.functions):
        for name in mapping:
            if name not in known:
                out.append(Diagnostic("unknown-symbol",
                                      f"interpretation for unknown symbol {name!r}", name))
    return out


def _fmt_args(args: tuple) -> str:
    return ", ".join(str(a) for a in args)


# -- evaluation ---------------------------------------------------------------

def eval_term(t: Term, s: Structure, v: Mapping[str, Atom]):
    """Evaluate ``t`` under structure ``s`` and valuation ``v``.

    Returns an atom, ``True``/``False`` for comparisons, or :data:`UNDEFINED`
    when a partial function is applied outside its domain.
    """
    if isinstance(t, Var):
        if t.name not in v:
            raise UnboundVariable(f"variable {t.name!r} is unbound")
        value = v[t.name]
        if value not in s.carrier(t.sort):
            raise SortMismatch(f"{t.name} = {value!r} is not of sort {t.sort!r}")
        return value
    if isinstance(t, Const):
        try:
            return s.constants[t.symbol]
        except KeyError:
            raise UnknownSymbol(f"constant {t.symbol!r} is not interpreted") from None
    if isinstance(t, App):
        args = []
        for a in t.args:
            val = eval_term(a, s, v)
            if val is UNDEFINED:
                return UNDEFINED
            args.append(val)
        return s.apply(t.symbol, tuple(args))
    if isinstance(t, Compare):
        lhs = eval_term(t.left, s, v)
        rhs = eval_term(t.right, s, v)
        if lhs is UNDEFINED or rhs is UNDEFINED:
            return UNDEFINED
        return (lhs == rhs) if t.op == "==" else (lhs != rhs)
    if isinstance(t, Elm):
        raise SortMismatch("elm(...) denotes a token set, not a value")
    raise TypeError(f"not a term: {t!r}")


def expand_elm(sym: str, s: Structure) -> tuple:
    """Elements of the set symbol ``sym``, one token candidate each."""
    s.signature.set_symbol(sym)
    if sym not in s.sets:
        raise UnknownSymbol(f"set {sym!r} is not interpreted")
    return s.sets[sym]
