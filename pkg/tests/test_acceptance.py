"""Acceptance criteria, one test each.

Every test prints one ``PASS``/``FAIL`` line with its timing, visible even
without ``-s``.  Run just these with ``pytest tests/test_acceptance.py``.
"""

import io
import random
import time
from contextlib import contextmanager
from math import factorial

import pytest

from conftest import FIXTURES, LETTERS
from corruption import corruptions
from hkl import library
from hkl.analysis import (check_invariant, expand, invariant_value, place_invariants,
                          transition_invariants)
from hkl.calculus import (LEFT, RIGHT, InterfaceElement, Module, canonical_form, compose)
from hkl.cli import main
from hkl.dsl.parser import parse, parse_path
from hkl.dsl.printer import pretty_print
from hkl.errors import DuplicateLabel, KindMismatch
from hkl.netschema import (Arc, Marking, NetSchema, Place, Transition, enabled_modes,
                           fire, reachable_markings)
from hkl.runs import (compose_runs, count_linearizations, global_views,
                      is_deterministic, isomorphic, linearizations, project_run, unfold,
                      view_marking)
from hkl.signatures import SetSymbol, Signature, Structure, validate_structure

BOXES = ["outbox", "postbox", "deliveryBox", "inbox"]


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def run(number, title, limit=None):
        start = time.perf_counter()
        ok = False
        try:
            yield
            elapsed = time.perf_counter() - start
            assert limit is None or elapsed < limit, \
                f"took {elapsed:.2f} s, limit {limit} s"
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            bound = f" < {limit} s" if limit else ""
            with capsys.disabled():
                print(f"\n[criterion {number:>2}] {'PASS' if ok else 'FAIL'}  {title}  "
                      f"({elapsed:.2f} s{bound})")
    return run


def firing_sequences(inst):
    """Every maximal firing sequence, depth first."""
    modes = enabled_modes(inst)
    if not modes:
        yield [], inst.marking
        return
    for m in modes:
        for rest, final in firing_sequences(fire(inst, m)):
            yield [m] + rest, final


def test_1_reachable_markings(criterion):
    with criterion(1, "letter system under S0 has exactly 64 reachable markings", 1.0):
        graph = reachable_markings(library.letter_system())
        assert len(graph.markings) == 64


def test_2_unique_run(criterion):
    with criterion(2, "one maximal run, deterministic, 9 events, per-letter chains", 1.0):
        inst = library.letter_system()
        runs = unfold(inst)
        assert len(runs) == 1
        assert is_deterministic(inst) == (True, None)
        run = runs[0]
        assert len(run.events) == 9 and len(run.conditions) == 12
        by_letter = {}
        for k, e in run.events.items():
            by_letter.setdefault(e.mode.binding["x"], {})[e.transition] = k
        for chain in by_letter.values():
            assert run.precedes(chain["post"], chain["forward"])
            assert run.precedes(chain["forward"], chain["deliver"])
        for a in by_letter:
            for b in by_letter:
                if a != b:
                    for e in by_letter[a].values():
                        for f in by_letter[b].values():
                            assert run.concurrent(e, f)
    # outside the timed block: every firing sequence has 9 steps, creates
    # 9 + 3 token occurrences and ends in the same marking
    lengths, finals = set(), set()
    for seq, final in firing_sequences(inst):
        lengths.add(len(seq))
        finals.add(final)
    assert lengths == {len(run.events)}
    assert 3 + len(run.events) == len(run.conditions)
    assert len(finals) == 1


def test_3_views_and_markings(criterion):
    with criterion(3, "64 global views, bijective with the reachable markings", 5.0):
        inst = library.letter_system()
        (run,) = unfold(inst)
        views = global_views(run)
        assert len(views) == 64
        marks = [view_marking(run, v, BOXES) for v in views]
        assert len(set(marks)) == 64
        assert set(marks) == set(reachable_markings(inst).markings)


def test_4_linearizations(criterion):
    with criterion(4, "1680 linearizations, matching brute-force enumeration", 5.0):
        (run,) = unfold(library.letter_system())
        n = count_linearizations(run)
        assert n == 1680 == factorial(9) // factorial(3) ** 3
        assert sum(1 for _ in linearizations(run)) == n


# -- criterion 5 ------------------------------------------------------------------

SIG = Signature("One", ("Tok",), sets=(SetSymbol("toks", "Tok"),))
X = SIG.var("x", "Tok")
# a label always denotes the same kind, so most triples fuse without conflict
LABEL_KINDS = {"a": "place", "b": "place", "c": "transition", "d": "transition"}


def random_module(rng, name, offered=()):
    places = [f"p{i}" for i in range(rng.randint(0, 3))]
    trans = [f"t{i}" for i in range(rng.randint(0, 3))]
    arcs = []
    for p in places:
        for t in trans:
            r = rng.random()
            if r < 0.3:
                arcs.append(Arc(p, t, X))
            elif r < 0.6:
                arcs.append(Arc(t, p, X))
    net = NetSchema(SIG, [Place(p, "Tok") for p in places],
                    [Transition(t) for t in trans], arcs)
    side_elems, binding = {LEFT: [], RIGHT: []}, {}
    for side in (LEFT, RIGHT):
        free = {"place": list(places), "transition": list(trans)}
        labels = rng.sample(sorted(LABEL_KINDS), rng.randint(0, 3))
        if side == LEFT and offered and rng.random() < 0.8:
            # lean towards fusing with what the previous module offers
            labels = sorted(set(labels) | set(rng.sample(offered, rng.randint(1, len(offered)))))
        for label in labels:
            kind = LABEL_KINDS[label]
            if not free[kind]:
                continue
            node = free[kind].pop(rng.randrange(len(free[kind])))
            side_elems[side].append(InterfaceElement(label, kind))
            binding[(side, label)] = node
    return Module(name, side_elems[LEFT], side_elems[RIGHT], net, binding)


def test_5_associativity(criterion):
    rng = random.Random(20240501)
    checked = skipped = fused = 0
    with criterion(5, "1000 random composable triples are associative", 10.0):
        while checked < 1000:
            r = random_module(rng, "R")
            s = random_module(rng, "S", r.right_labels())
            t = random_module(rng, "T", s.right_labels())
            try:
                left = compose(compose(r, s), t)
                right = compose(r, compose(s, t))
            except (KindMismatch, DuplicateLabel):
                skipped += 1
                continue
            assert canonical_form(left) == canonical_form(right)
            checked += 1
            fused += bool(set(r.right_labels()) & set(s.left_labels()) and
                          set(s.right_labels()) & set(t.left_labels()))
    # the sample must exercise fusion on both seams, not just disjoint unions
    assert fused > 150


def test_6_run_composition(criterion):
    with criterion(6, "per-letter projections compose to the full run", 1.0):
        (run,) = unfold(library.letter_system())
        a, b, c = (project_run(run, t) for t in "abc")
        assert isomorphic(compose_runs(compose_runs(a, b), c), run)


def test_7_invariants(criterion):
    with criterion(7, "place invariants conserved; per-letter vectors; no T-invariants", 1.0):
        inst = library.letter_system()
        net = expand(inst)
        invs = place_invariants(net)
        markings = reachable_markings(inst).markings
        assert len(markings) == 64
        assert all(check_invariant(inst, iv, markings) for iv in invs)
        for letter in "abc":
            want = tuple(1 if tok == letter else 0 for _, tok in net.low_places)
            assert any(iv.weights == want for iv in invs)
        assert all(invariant_value(inst, iv, inst.marking) == 1 for iv in invs)
        assert transition_invariants(net) == []


def test_8_structure_requirements(criterion):
    with criterion(8, "S0 valid; injectivity, totality and sort breaches each flagged once"):
        s = library.letters_structure()
        assert validate_structure(s) == []

        def mutant(f):
            return Structure(s.signature, s.carriers, s.sets, s.constants,
                             {**s.functions, "f": f}, name="mutant")

        cases = {"injectivity": {"a": "m", "b": "m", "c": "o"},
                 "totality": {"a": "m", "b": "n"},
                 "sort": {"a": "m", "b": "n", "c": 7}}
        for code, table in cases.items():
            assert [d.code for d in validate_structure(mutant(table))] == [code]


def test_9_round_trip_and_fuzz(criterion):
    with criterion(9, "round-trip on the corpus; 10,000 corruptions all diagnosed", 60.0):
        corpus = [LETTERS] + sorted(FIXTURES.glob("*.hkl"))
        for path in corpus:
            model, diags = parse_path(path)
            if model is None:
                continue
            again, diags = parse(pretty_print(model))
            assert diags == [] and again == model
        text = LETTERS.read_text()
        for kind, bad in corruptions(text, 10_000, seed=9):
            model, diags = parse(bad)
            assert model is None and any(d.is_error for d in diags), (kind, bad)


def final_marking(output):
    return [l for l in output.splitlines() if l.startswith("final:")]


def test_10_trace_replay(criterion, tmp_path):
    rng = random.Random(10)
    with criterion(10, "100 seeded random traces replay to the same final marking", 5.0):
        for trial in range(100):
            trace = tmp_path / f"trace{trial}.json"
            steps = rng.randint(0, 12)
            out = io.StringIO()
            assert main(["simulate", str(LETTERS), "--random", "--seed", str(trial),
                         "--steps", str(steps), "--out", str(trace)],
                        stdout=out, stderr=io.StringIO()) == 0
            again = io.StringIO()
            assert main(["simulate", str(LETTERS), "--replay", str(trace)],
                        stdout=again, stderr=io.StringIO()) == 0
            first = final_marking(out.getvalue())
            assert len(first) == 1 and first == final_marking(again.getvalue())
