from itertools import combinations, permutations
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

from hkl import library
from hkl.calculus import LEFT, RIGHT, InterfaceElement, Module
from hkl.errors import (BoundExceeded, CycleIntroduced, OccurrenceNetViolation,
                        UnknownToken)
from hkl.netschema import Mode, enabled_modes, fire, reachable_markings
from hkl.runs import (Condition, Event, Run, check_occurrence_net, compose_runs,
                      count_linearizations, global_views, is_deterministic, isomorphic,
                      linearizations, project_run, run_module, unfold, view_marking)

PLACES = ["outbox", "postbox", "deliveryBox", "inbox"]


def closure(run):
    """Strict causal order from the flow relation, by fixpoint iteration."""
    below = {n: set() for n in (*run.conditions, *run.events)}
    changed = True
    while changed:
        changed = False
        for s, t in run.flow:
            new = {s} | below[s]
            if not new <= below[t]:
                below[t] |= new
                changed = True
    return below


def antichain_views(run):
    below = closure(run)
    conds = sorted(run.conditions)
    co = lambda a, b: a not in below[b] and b not in below[a]
    anti = [set(s) for k in range(len(conds) + 1) for s in combinations(conds, k)
            if all(co(a, b) for a, b in combinations(s, 2))]
    return {frozenset(a) for a in anti
            if not any(c not in a and all(co(c, d) for d in a) for c in conds)}


def test_unfold_s0(s0_run):
    assert len(s0_run.events) == 9
    assert len(s0_run.conditions) == 12
    check_occurrence_net(s0_run)
    assert len(s0_run.minimal()) == 3 and len(s0_run.maximal()) == 3


def test_unfold_single_run(s0):
    assert len(unfold(s0)) == 1


def test_letter_chains(s0_run):
    for letter in "abc":
        ev = {e.mode.transition: k for k, e in s0_run.events.items()
              if e.mode.binding["x"] == letter}
        assert s0_run.precedes(ev["post"], ev["forward"])
        assert s0_run.precedes(ev["forward"], ev["deliver"])
    posts = [k for k, e in s0_run.events.items() if e.transition == "post"]
    assert all(s0_run.concurrent(a, b) for a, b in combinations(posts, 2))


def test_unfold_small_systems():
    one = unfold(library.letter_system(("a",)))
    assert [(len(r.events), len(r.conditions)) for r in one] == [(3, 4)]
    empty = unfold(library.letter_system(()))
    assert [len(r.events) for r in empty] == [0]
    assert global_views(empty[0]) == [()]
    assert count_linearizations(empty[0]) == 1


def test_unfold_bound():
    with pytest.raises(BoundExceeded):
        unfold(library.toggle_system(), max_events=5)
    with pytest.raises(ValueError):
        unfold(library.letter_system(), max_events=0)


def test_choice_unfolds_into_two_runs():
    inst = library.choice_system()
    runs = unfold(inst)
    assert len(runs) == 2
    assert {next(iter(r.events.values())).transition for r in runs} == {"goWest", "goEast"}
    ok, witness = is_deterministic(inst)
    assert not ok
    assert {witness.first.transition, witness.second.transition} == {"goWest", "goEast"}


def test_letters_deterministic(s0):
    assert is_deterministic(s0) == (True, None)


def test_project_run_chain(s0_run):
    p = project_run(s0_run, "a")
    assert len(p.conditions) == 4 and len(p.events) == 3
    order = [p.describe(n) for n in p.topological()]
    assert order == ["outbox:a", "post(x=a)", "postbox:a", "forward(x=a)",
                     "deliveryBox:a", "deliver(x=a)", "inbox:a"]


def test_project_single_condition():
    r = Run({"c0": Condition("p", "z")})
    assert project_run(r, "z") == r
    with pytest.raises(UnknownToken):
        project_run(r, "y")


def test_projections_compose_to_full_run(s0_run):
    parts = [project_run(s0_run, t) for t in "abc"]
    whole = compose_runs(compose_runs(parts[0], parts[1]), parts[2])
    assert isomorphic(whole, s0_run)
    assert not isomorphic(compose_runs(parts[0], parts[1]), s0_run)


def test_empty_run_is_identity(s0_run):
    assert isomorphic(compose_runs(s0_run, Run()), s0_run)
    assert isomorphic(compose_runs(Run(), s0_run), s0_run)


def test_sequential_run_composition():
    one = unfold(library.letter_system(("a",)))[0]
    first = project_run(one, "a")
    assert isomorphic(first, one)
    # cut the chain at postbox:a and glue it back
    cut = [k for k, c in one.conditions.items() if c.place == "postbox"][0]
    pre = {n for n in (*one.conditions, *one.events) if one.precedes(n, cut)} | {cut}
    post = {n for n in (*one.conditions, *one.events) if one.precedes(cut, n)} | {cut}

    def sub(nodes):
        return Run({k: v for k, v in one.conditions.items() if k in nodes},
                   {k: v for k, v in one.events.items() if k in nodes},
                   {(s, t) for s, t in one.flow if s in nodes and t in nodes})

    assert isomorphic(compose_runs(sub(pre), sub(post)), one)


def test_cycle_introduced():
    def half(ev, tr):
        run = Run({"c0": Condition("p", "a"), "c1": Condition("p", "a")},
                  {ev: Event(tr, Mode(tr, {}))}, {("c0", ev), (ev, "c1")})
        return run

    u, v = InterfaceElement("u", "place"), InterfaceElement("v", "place")
    a = Module("a", (), (u, v), half("e0", "s"), {(RIGHT, "u"): "c0", (RIGHT, "v"): "c1"})
    b = Module("b", (u, v), (), half("e0", "t"), {(LEFT, "u"): "c1", (LEFT, "v"): "c0"})
    with pytest.raises(CycleIntroduced):
        compose_runs(a, b)


def test_occurrence_net_violations():
    two_producers = Run({"c0": Condition("p", 1)},
                        {"e0": Event("t", Mode("t", {})), "e1": Event("t", Mode("t", {}))},
                        {("e0", "c0"), ("e1", "c0")})
    with pytest.raises(OccurrenceNetViolation):
        check_occurrence_net(two_producers)
    with pytest.raises(OccurrenceNetViolation):
        check_occurrence_net(Run({"c0": Condition("p", 1), "c1": Condition("p", 1)},
                                 {}, {("c0", "c1")}))
    with pytest.raises(OccurrenceNetViolation):
        check_occurrence_net(Run({}, {}, {("c0", "e9")}))


def test_run_module_labels_repeat():
    r = Run({"c0": Condition("p", 1), "c1": Condition("p", 1)})
    m = run_module(r)
    assert m.left_labels() == ["p:1", "p:1#2"]


def test_global_views_against_antichains(s0_run):
    views = global_views(s0_run)
    assert len(views) == 64
    assert {frozenset(v) for v in views} == antichain_views(s0_run)


def test_global_views_match_reachable_markings(s0, s0_run):
    marks = [view_marking(s0_run, v, PLACES) for v in global_views(s0_run)]
    assert len(set(marks)) == len(marks)
    assert set(marks) == set(reachable_markings(s0).markings)


def test_two_letters():
    run = unfold(library.letter_system(("a", "b")))[0]
    assert len(global_views(run)) == 16
    assert count_linearizations(run) == 20


def test_view_cap(s0_run):
    with pytest.raises(BoundExceeded):
        global_views(s0_run, cap=10)


def brute_linearizations(run):
    below = closure(run)
    events = sorted(run.events)
    return sum(1 for perm in permutations(events)
               if all(d not in below[perm[j]]
                      for i, d in enumerate(perm) for j in range(i)))


def test_count_linearizations(s0_run):
    n = count_linearizations(s0_run)
    assert n == factorial(9) // factorial(3) ** 3 == 1680
    assert n == sum(1 for _ in linearizations(s0_run))


def test_count_linearizations_small_brute():
    run = unfold(library.letter_system(("a", "b")))[0]
    assert count_linearizations(run) == brute_linearizations(run) == 20


def test_linearizations_replay(s0, s0_run):
    final = None
    for k, order in enumerate(linearizations(s0_run)):
        if k % 37:
            continue
        inst = s0
        for e in order:
            inst = fire(inst, s0_run.events[e].mode)
        assert enabled_modes(inst) == []
        final = final or inst.marking
        assert inst.marking == final


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from("abc"), unique=True))
def test_letter_subsets(letters):
    runs = unfold(library.letter_system(tuple(letters)))
    assert len(runs) == 1
    run = runs[0]
    n = len(letters)
    assert len(run.events) == 3 * n and len(run.conditions) == 4 * n
    assert len(global_views(run)) == 4 ** n
    assert count_linearizations(run) == factorial(3 * n) // 6 ** n


@pytest.mark.parametrize("letters", [("a",), ("a", "b")])
def test_every_linearization_replays(letters):
    inst = library.letter_system(letters)
    (run,) = unfold(inst)
    seen = 0
    for order in linearizations(run):
        state = inst
        for e in order:
            state = fire(state, run.events[e].mode)
        assert enabled_modes(state) == []
        seen += 1
    assert seen == count_linearizations(run)


def test_projections_cover_every_event_once(s0_run):
    covered = [e for t in "abc" for e in project_run(s0_run, t).events]
    assert sorted(covered) == sorted(s0_run.events)
