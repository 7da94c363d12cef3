from collections import Counter
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from hkl import library
from hkl.errors import (BoundExceeded, InvalidSchema, InvalidStructure, NotEnabled,
                        SignatureMismatch)
from hkl.library import letters_signature, letters_structure
from hkl.netschema import (Arc, Marking, Mode, NetSchema, Place, Transition,
                           enabled_modes, fire, instantiate, mode_effect,
                           reachable_markings, validate_schema)
from hkl.signatures import Signature, SetSymbol, Structure

BOXES = ("outbox", "postbox", "deliveryBox", "inbox")


def box_assignments(letters):
    """Every way of putting each letter in exactly one box."""
    for boxes in product(BOXES, repeat=len(letters)):
        data = {b: [] for b in BOXES}
        for letter, box in zip(letters, boxes):
            data[box].append(letter)
        yield Marking(data)


def test_initial_marking(s0):
    assert s0.marking.tokens("outbox") == ["a", "b", "c"]
    for box in BOXES[1:]:
        assert s0.marking.tokens(box) == []


def test_empty_letter_set_gives_empty_marking():
    inst = library.letter_system(letters=())
    assert inst.marking.total() == 0
    assert enabled_modes(inst) == []


def test_constant_inscription():
    inst = library.constant_system()
    assert inst.marking.tokens("tray") == ["m"]


def test_signature_mismatch():
    sig = letters_signature()
    schema = library.letter_system().schema
    other = Structure(Signature("Other", ("Letter",)), {"Letter": ("a",)})
    with pytest.raises(SignatureMismatch):
        instantiate(schema, other)
    assert schema.signature == sig


def test_invalid_structure_rejected():
    s = letters_structure()
    bad = Structure(s.signature, s.carriers, s.sets, {},
                    {"f": {"a": "m", "b": "m", "c": "o"}, "g": s.functions["g"]})
    with pytest.raises(InvalidStructure) as info:
        instantiate(library.letter_system().schema, bad)
    assert [d.code for d in info.value.diagnostics] == ["injectivity"]


def test_initial_modes(s0):
    assert enabled_modes(s0) == [Mode("post", {"x": l}) for l in "abc"]


def test_no_modes_without_tokens(s0):
    assert enabled_modes(s0.with_marking(Marking.empty(BOXES))) == []


def coded_schema():
    sig = letters_signature()
    y = sig.var("y", "Stamp")
    return NetSchema(sig, [Place("box", "Code", sig.elm("codes")), Place("out", "Stamp")],
                     [Transition("decode")],
                     [Arc("box", "decode", sig.app("g", y)), Arc("decode", "out", y)])


def test_undefined_input_inscription_disables_mode():
    inst = instantiate(coded_schema(), letters_structure())
    modes = enabled_modes(inst)
    # g is undefined on o only
    assert [m.binding["y"] for m in modes] == ["l", "m", "n"]
    assert mode_effect(inst, Mode("decode", {"y": "o"})) is None


def test_undefined_output_inscription_disables_mode():
    sig = letters_signature()
    x = sig.var("x", "Letter")
    schema = NetSchema(sig, [Place("tray", "Letter", sig.elm("letters")),
                             Place("codes", "Code")],
                       [Transition("code")],
                       [Arc("tray", "code", x),
                        Arc("code", "codes", sig.app("g", sig.app("f", x)))])
    inst = instantiate(schema, letters_structure())
    # f(c) = o and g(o) is undefined
    assert [m.binding["x"] for m in enabled_modes(inst)] == ["a", "b"]


def test_guard():
    sig = Signature("G", ("Tok",), sets=(SetSymbol("toks", "Tok"),))
    x, y = sig.var("x", "Tok"), sig.var("y", "Tok")
    from hkl.signatures import Compare
    schema = NetSchema(sig, [Place("p", "Tok", sig.elm("toks"))],
                       [Transition("pair", Compare("!=", x, y))],
                       [Arc("p", "pair", x), Arc("p", "pair", y)])
    s = Structure(sig, {"Tok": (1, 2)}, {"toks": (1, 2)})
    modes = enabled_modes(instantiate(schema, s))
    assert [m.binding for m in modes] == [{"x": 1, "y": 2}, {"x": 2, "y": 1}]


def test_multiset_demand():
    sig = Signature("M", ("Tok",), sets=(SetSymbol("toks", "Tok"),))
    x = sig.var("x", "Tok")
    schema = NetSchema(sig, [Place("p", "Tok"), Place("q", "Tok")], [Transition("two")],
                       [Arc("p", "two", x), Arc("p", "two", x), Arc("two", "q", x)])
    s = Structure(sig, {"Tok": ("t",)}, {"toks": ("t",)})
    inst = instantiate(schema, s)
    assert enabled_modes(inst.with_marking(Marking({"p": ["t"], "q": []}))) == []
    inst = inst.with_marking(Marking({"p": ["t", "t", "t"], "q": []}))
    after = fire(inst, Mode("two", {"x": "t"}))
    assert after.marking.tokens("p") == ["t"] and after.marking.tokens("q") == ["t"]


def test_fire_post(s0):
    after = fire(s0, Mode("post", {"x": "a"}))
    assert after.marking.tokens("outbox") == ["b", "c"]
    assert after.marking.tokens("postbox") == ["a"]
    # value semantics
    assert s0.marking.tokens("outbox") == ["a", "b", "c"]
    assert after.marking.total() == 3


def test_fire_not_enabled(s0):
    with pytest.raises(NotEnabled):
        fire(s0, Mode("forward", {"x": "a"}))
    with pytest.raises(NotEnabled):
        fire(s0, Mode("outbox", {"x": "a"}))


def test_every_firing_sequence_ends_in_inbox(s0):
    finals = set()
    count = 0

    def dfs(inst):
        nonlocal count
        modes = enabled_modes(inst)
        if not modes:
            finals.add(inst.marking)
            count += 1
            return
        for m in modes:
            dfs(fire(inst, m))

    dfs(s0)
    assert count == 1680
    assert finals == {Marking({"outbox": [], "postbox": [], "deliveryBox": [],
                               "inbox": ["a", "b", "c"]})}


def test_reachable_markings_s0(s0):
    graph = reachable_markings(s0, 1000)
    assert len(graph.markings) == 64
    assert set(graph.markings) == set(box_assignments("abc"))


def test_reachable_markings_one_letter():
    graph = reachable_markings(library.letter_system(letters=("a",)))
    assert set(graph.markings) == set(box_assignments("a"))
    assert len(graph.markings) == 4


def test_no_transitions_single_marking():
    graph = reachable_markings(library.idle_system())
    assert len(graph.markings) == 1 and graph.edges == ()


def test_bound_exceeded(s0):
    with pytest.raises(BoundExceeded):
        reachable_markings(s0, 10)


def test_exploration_is_deterministic(s0):
    assert reachable_markings(s0) == reachable_markings(library.letter_system())


def test_validate_schema_checks():
    sig = letters_signature()
    x = sig.var("x", "Letter")
    s = sig.var("s", "Stamp")
    schema = NetSchema(sig,
                       [Place("p", "Letter"), Place("q", "Stamp"), Place("p", "Letter")],
                       [Transition("t")],
                       [Arc("p", "q", x), Arc("p", "t", s), Arc("t", "q", sig.app("f", x)),
                        Arc("t", "nowhere", x)])
    codes = sorted(d.code for d in validate_schema(schema))
    assert codes == ["arc-kind", "duplicate-name", "free-variable", "free-variable", "sort",
                     "unknown-node"]
    with pytest.raises(InvalidSchema):
        instantiate(schema, letters_structure())


def test_free_output_variable_rejected():
    sig = letters_signature()
    schema = NetSchema(sig, [Place("p", "Letter")], [Transition("make")],
                       [Arc("make", "p", sig.var("x", "Letter"))])
    assert [d.code for d in validate_schema(schema)] == ["free-variable"]


def test_marking_multiset_semantics():
    m = Marking({"p": ["a", "a", "b"]})
    assert m.count("p", "a") == 2
    assert m == Marking({"p": Counter({"b": 1, "a": 2})})
    assert hash(m) == hash(Marking({"p": ["b", "a", "a"]}))
    with pytest.raises(ValueError):
        Marking({"p": Counter({"a": -1})})


GRAPH = reachable_markings(library.letter_system())
ADJACENT = {"post": {"outbox", "postbox"}, "forward": {"postbox", "deliveryBox"},
            "deliver": {"deliveryBox", "inbox"}}


@settings(max_examples=60)
@given(st.sampled_from(range(len(GRAPH.markings))))
def test_fire_touches_only_adjacent_places(i):
    inst = library.letter_system().with_marking(GRAPH.markings[i])
    for mode in enabled_modes(inst):
        after = fire(inst, mode).marking
        changed = {p for p in BOXES if after[p] != inst.marking[p]}
        assert changed <= ADJACENT[mode.transition]
        assert after.total() == 3


@settings(max_examples=60)
@given(st.sampled_from(range(len(GRAPH.markings))),
       st.sampled_from(BOXES), st.sampled_from("abc"))
def test_modes_monotone_in_unrelated_tokens(i, box, letter):
    inst = library.letter_system().with_marking(GRAPH.markings[i])
    before = enabled_modes(inst)
    grown = inst.marking.with_changes(Counter(), Counter({(box, letter): 1}))
    after = enabled_modes(inst.with_marking(grown))
    # tokens added to a place never remove modes
    assert set(before) <= set(after)
