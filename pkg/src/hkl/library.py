"""Programmatic builders for the letter-posting system and small test nets.

``letters_signature`` has sorts Letter, Stamp and Code, the set symbols
``letters``, ``stamps`` and ``codes``, an injective total ``f`` (letter to
stamp) and an injective partial ``g`` (stamp to matrix code).  The sender
posts letters to the postal service, which forwards them to the delivery
box and delivers them to the receiver's inbox.
"""

from __future__ import annotations

from .calculus import InterfaceElement, Module, bind_by_name, compose_all
from .netschema import Arc, NetInstance, NetSchema, Place, Transition, instantiate
from .signatures import (ConstantSymbol, FunctionSymbol, Requirement, SetSymbol,
                         Signature, Structure)

F_TABLE = {"a": "m", "b": "n", "c": "o"}
G_TABLE = {"m": 1, "n": 2, "l": 3}


def letters_signature() -> Signature:
    return Signature(
        name="Sigma0",
        sorts=("Letter", "Stamp", "Code"),
        sets=(SetSymbol("letters", "Letter"), SetSymbol("stamps", "Stamp"),
              SetSymbol("codes", "Code")),
        functions=(FunctionSymbol("f", ("Letter",), "Stamp"),
                   FunctionSymbol("g", ("Stamp",), "Code")),
        requirements=(Requirement("injective", "f"), Requirement("injective", "g"),
                      Requirement("partial", "g")),
    )


def letters_structure(letters=("a", "b", "c"), sig: Signature | None = None) -> Structure:
    """The structure S0; ``letters`` restricts the letter carrier (and ``f``)."""
    sig = sig or letters_signature()
    return Structure(
        sig,
        carriers={"Letter": letters, "Stamp": ("l", "m", "n", "o"), "Code": (1, 2, 3)},
        sets={"letters": letters, "stamps": ("l", "m", "n", "o"), "codes": (1, 2, 3)},
        functions={"f": {k: v for k, v in F_TABLE.items() if k in letters},
                   "g": dict(G_TABLE)},
        name="S0",
    )


def letter_modules(sig: Signature | None = None) -> tuple:
    """The sender, postal service and receiver modules at schema level."""
    sig = sig or letters_signature()
    x = sig.var("x", "Letter")
    post = InterfaceElement("post", "transition")
    deliver = InterfaceElement("deliver", "transition")
    sender = bind_by_name("sender", (), (post,), NetSchema(
        sig,
        [Place("outbox", "Letter", sig.elm("letters"))],
        [Transition("post")],
        [Arc("outbox", "post", x)]))
    postal = bind_by_name("postal", (post,), (deliver,), NetSchema(
        sig,
        [Place("postbox", "Letter"), Place("deliveryBox", "Letter")],
        [Transition("post"), Transition("forward"), Transition("deliver")],
        [Arc("post", "postbox", x), Arc("postbox", "forward", x),
         Arc("forward", "deliveryBox", x), Arc("deliveryBox", "deliver", x)]))
    receiver = bind_by_name("receiver", (deliver,), (), NetSchema(
        sig,
        [Place("inbox", "Letter")],
        [Transition("deliver")],
        [Arc("deliver", "inbox", x)]))
    return sender, postal, receiver


def abstract_letter_modules() -> tuple:
    post = InterfaceElement("post", "transition")
    deliver = InterfaceElement("deliver", "transition")
    return (Module("sender", (), (post,)), Module("postal", (post,), (deliver,)),
            Module("receiver", (deliver,), ()))


def letter_system(letters=("a", "b", "c")) -> NetInstance:
    """sender . postal . receiver, instantiated with S0 (restricted to ``letters``)."""
    sig = letters_signature()
    composed = compose_all(letter_modules(sig))
    return instantiate(composed.interior, letters_structure(letters, sig))


def toggle_system() -> NetInstance:
    """One token moving back and forth between two places: a 2-transition cycle."""
    sig = Signature("Toggle", sorts=("Tok",), sets=(SetSymbol("toks", "Tok"),))
    x = sig.var("x", "Tok")
    schema = NetSchema(
        sig,
        [Place("here", "Tok", sig.elm("toks")), Place("there", "Tok")],
        [Transition("go"), Transition("back")],
        [Arc("here", "go", x), Arc("go", "there", x),
         Arc("there", "back", x), Arc("back", "here", x)])
    return instantiate(schema, Structure(sig, {"Tok": ("t",)}, {"toks": ("t",)}))


def choice_system() -> NetInstance:
    """One token and two transitions competing for it."""
    sig = Signature("Choice", sorts=("Tok",), sets=(SetSymbol("toks", "Tok"),))
    x = sig.var("x", "Tok")
    schema = NetSchema(
        sig,
        [Place("start", "Tok", sig.elm("toks")), Place("west", "Tok"),
         Place("east", "Tok")],
        [Transition("goWest"), Transition("goEast")],
        [Arc("start", "goWest", x), Arc("goWest", "west", x),
         Arc("start", "goEast", x), Arc("goEast", "east", x)])
    return instantiate(schema, Structure(sig, {"Tok": ("t",)}, {"toks": ("t",)}))


def idle_system() -> NetInstance:
    """A single marked place and no transitions."""
    sig = Signature("Idle", sorts=("Tok",), sets=(SetSymbol("toks", "Tok"),))
    schema = NetSchema(sig, [Place("p", "Tok", sig.elm("toks"))])
    return instantiate(schema, Structure(sig, {"Tok": ("t",)}, {"toks": ("t",)}))


def constant_system() -> NetInstance:
    """A place initialised by a constant symbol interpreted as stamp ``m``."""
    sig = Signature("Const", sorts=("Stamp",), constants=(ConstantSymbol("special", "Stamp"),))
    schema = NetSchema(sig, [Place("tray", "Stamp", sig.const("special"))])
    return instantiate(schema, Structure(sig, {"Stamp": ("l", "m")}, constants={"special": "m"}))
