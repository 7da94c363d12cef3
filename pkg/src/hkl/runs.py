"""Distributed runs: occurrence nets recording one concurrent execution.

A run's conditions are token occurrences ``(place, token)``; its events are
transition occurrences.  The transitive closure of the flow relation is the
causal order.  Runs double as composition interiors: their minimal and
maximal conditions form the left and right interface of :func:`run_module`.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Mapping

from .calculus import (LEFT, RIGHT, InterfaceElement, Module, canonical_form,
                       compose)
from .errors import (BoundExceeded, CycleIntroduced, FusionConflict,
                     OccurrenceNetViolation, UnknownToken)
from .netschema import (Marking, Mode, NetInstance, consumption, enabled_modes,
                        production, reachable_markings)
from .signatures import atom_key


@dataclass(frozen=True)
class Condition:
    place: str
    token: object
    index: int = 0


@dataclass(frozen=True)
class Event:
    transition: str
    mode: Mode


def _id_key(node_id: str):
    head = node_id.rstrip("'")
    digits = "".join(ch for ch in head if ch.isdigit())
    prefix = head[:len(head) - len(digits)] if digits and head.endswith(digits) else head
    num = int(digits) if digits and head.endswith(digits) else -1
    return (prefix, num, node_id)


@dataclass(frozen=True)
class Run:
    conditions: Mapping = field(default_factory=dict)
    events: Mapping = field(default_factory=dict)
    flow: frozenset = frozenset()

    __hash__ = None
    prefixes = {"place": "c", "transition": "e"}

    def __post_init__(self):
        object.__setattr__(self, "conditions", dict(self.conditions))
        object.__setattr__(self, "events", dict(self.events))
        object.__setattr__(self, "flow", frozenset(self.flow))

    # structure

    @cached_property
    def _pre(self) -> dict:
        pre = defaultdict(list)
        for s, t in self.flow:
            pre[t].append(s)
        return {k: sorted(v, key=_id_key) for k, v in pre.items()}

    @cached_property
    def _post(self) -> dict:
        post = defaultdict(list)
        for s, t in self.flow:
            post[s].append(t)
        return {k: sorted(v, key=_id_key) for k, v in post.items()}

    def preset(self, node: str) -> list:
        return self._pre.get(node, [])

    def postset(self, node: str) -> list:
        return self._post.get(node, [])

    def condition_ids(self) -> list:
        return sorted(self.conditions, key=_id_key)

    def event_ids(self) -> list:
        return sorted(self.events, key=_id_key)

    def minimal(self) -> list:
        return [c for c in self.condition_ids() if not self.preset(c)]

    def maximal(self) -> list:
        return [c for c in self.condition_ids() if not self.postset(c)]

    def topological(self) -> list:
        """All nodes in a deterministic topological order; raises on cycles."""
        nodes = sorted((*self.conditions, *self.events), key=_id_key)
        indeg = {n: len(self.preset(n)) for n in nodes}
        ready = [n for n in nodes if indeg[n] == 0]
        order = []
        while ready:
            ready.sort(key=_id_key)
            n = ready.pop(0)
            order.append(n)
            for m in self.postset(n):
                indeg[m] -= 1
                if indeg[m] == 0:
                    ready.append(m)
        if len(order) != len(nodes):
            raise CycleIntroduced("the flow relation of the run is cyclic")
        return order

    @cached_property
    def _below(self) -> dict:
        """node -> set of strict causal predecessors."""
        below = {}
        for n in self.topological():
            acc = set()
            for p in self.preset(n):
                acc.add(p)
                acc |= below[p]
            below[n] = acc
        return below

    def precedes(self, x: str, y: str) -> bool:
        return x in self._below[y]

    def concurrent(self, x: str, y: str) -> bool:
        return x != y and not self.precedes(x, y) and not self.precedes(y, x)

    # interior protocol

    def node_kinds(self) -> dict:
        kinds = {c: "place" for c in self.conditions}
        kinds.update((e, "transition") for e in self.events)
        return kinds

    def renamed(self, mapping) -> "Run":
        r = lambda n: mapping.get(n, n)
        return Run({r(k): v for k, v in self.conditions.items()},
                   {r(k): v for k, v in self.events.items()},
                   {(r(s), r(t)) for s, t in self.flow})

    def union(self, other: "Run", shared: set) -> "Run":
        conditions = dict(self.conditions)
        events = dict(self.events)
        for k, c in other.conditions.items():
            if k in shared and (conditions[k].place, conditions[k].token) != (
                    c.place, c.token):
                raise FusionConflict(f"fused conditions {k!r} carry different tokens")
            conditions.setdefault(k, c)
        for k, e in other.events.items():
            if k in shared and events[k] != e:
                raise FusionConflict(f"fused events {k!r} differ")
            events.setdefault(k, e)
        run = Run(conditions, events, self.flow | other.flow)
        check_occurrence_net(run)
        return run.reindexed()

    def sorted(self) -> "Run":
        return self.reindexed()

    def node_colors(self) -> dict:
        colors = {k: f"C|{c.place}|{c.token!r}" for k, c in self.conditions.items()}
        colors.update((k, f"E|{e.mode.transition}|{e.mode.valuation!r}")
                      for k, e in self.events.items())
        return colors

    def edge_list(self) -> list:
        return [(s, t, "") for s, t in self.flow]

    def reindexed(self) -> "Run":
        """Recompute occurrence indices along a deterministic topological order."""
        seen = Counter()
        conditions = {}
        for n in self.topological():
            if n in self.conditions:
                c = self.conditions[n]
                conditions[n] = Condition(c.place, c.token, seen[(c.place, c.token)])
                seen[(c.place, c.token)] += 1
        return Run(conditions, self.events, self.flow)

    def describe(self, node: str) -> str:
        if node in self.conditions:
            c = self.conditions[node]
            return f"{c.place}:{c.token}"
        return str(self.events[node].mode)


def check_occurrence_net(run: Run) -> None:
    """Raise unless ``run`` is an acyclic occurrence net."""
    for s, t in run.flow:
        kinds = {s in run.conditions, t in run.conditions}
        if (s not in run.conditions and s not in run.events) or \
                (t not in run.conditions and t not in run.events):
            raise OccurrenceNetViolation(f"flow {s} -> {t} names an unknown node")
        if len(kinds) != 2:
            raise OccurrenceNetViolation(f"flow {s} -> {t} joins two nodes of one kind")
    run.topological()
    for c in run.conditions:
        if len(run.preset(c)) > 1:
            raise OccurrenceNetViolation(f"condition {c} has several producers")
        if len(run.postset(c)) > 1:
            raise OccurrenceNetViolation(f"condition {c} has several consumers")


# -- runs as modules ---------------------------------------------------------

def _labels(run: Run, conds: list) -> list:
    counts = Counter()
    out = []
    for c in conds:
        base = run.describe(c)
        counts[base] += 1
        out.append(base if counts[base] == 1 else f"{base}#{counts[base]}")
    return out


def run_module(run: Run, name: str = "run") -> Module:
    """View ``run`` as a module: minimal conditions left, maximal conditions right."""
    left, right, binding = [], [], {}
    for side, conds, elems in ((LEFT, run.minimal(), left), (RIGHT, run.maximal(), right)):
        for c, label in zip(conds, _labels(run, conds)):
            elems.append(InterfaceElement(label, "place"))
            binding[(side, label)] = c
    return Module(name, left, right, run, binding)


def _as_module(r) -> Module:
    return r if isinstance(r, Module) else run_module(r)


def compose_runs(r1, r2) -> Run:
    """Fuse two runs (or run modules); the result is re-validated as an occurrence net."""
    m = compose(_as_module(r1), _as_module(r2))
    return m.interior if m.interior is not None else Run()


def isomorphic(r1: Run, r2: Run) -> bool:
    return canonical_form(run_module(r1)) == canonical_form(run_module(r2))


# -- unfolding ---------------------------------------------------------------

def _cut_marking(places, cut) -> Marking:
    data = {p: Counter() for p in places}
    for key in cut:
        data[key[-3]][key[-2]] += 1
    return Marking(data)


def _choices(cut, demand):
    """Ways to pick concrete conditions from ``cut`` meeting ``demand``.

    Sibling conditions (same producer, place and token) are interchangeable,
    so only the lowest-numbered siblings are ever picked.
    """
    per_label = []
    for (place, tok), n in sorted(demand.items(), key=lambda kv: (kv[0][0], atom_key(kv[0][1]))):
        avail = sorted((k for k in cut if k[-3] == place and k[-2] == tok), key=repr)
        options = set()
        for comb in combinations(avail, n):
            groups = Counter(k[:-1] for k in comb)
            pick = []
            for g, cnt in sorted(groups.items(), key=repr):
                sibs = sorted((k for k in avail if k[:-1] == g), key=lambda k: k[-1])
                pick.extend(sibs[:cnt])
            options.add(tuple(sorted(pick, key=repr)))
        per_label.append(sorted(options))

    def rec(i, acc):
        if i == len(per_label):
            yield tuple(sorted(acc, key=repr))
            return
        for opt in per_label[i]:
            yield from rec(i + 1, acc + list(opt))

    yield from rec(0, [])


def unfold(inst: NetInstance, max_events: int = 1000) -> list:
    """All maximal runs of ``inst`` (at most ``max_events`` events each).

    Runs are explored as configurations (causally closed, conflict-free event
    sets); conflicts branch into separate runs.  The list is ordered
    deterministically.
    """
    if max_events < 1:
        raise ValueError("max_events must be positive")
    places = [p.name for p in inst.schema.places]
    initial = []
    for place in places:
        for tok, n in sorted(inst.marking[place].items(), key=lambda tn: atom_key(tn[0])):
            initial.extend(("init", place, tok, k) for k in range(n))

    # event key: (mode, preset keys); output condition key: (event key, place, token, k)
    outputs = {}
    seen = set()
    maximal = []
    stack = [(frozenset(), frozenset(initial))]
    while stack:
        events, cut = stack.pop()
        if events in seen:
            continue
        seen.add(events)
        here = inst.with_marking(_cut_marking(places, cut))
        extensions = []
        for mode in enabled_modes(here):
            made = production(here, mode)
            for pre in _choices(cut, consumption(here, mode)):
                ev = (mode, pre)
                if ev not in outputs:
                    outputs[ev] = [(ev, place, tok, k)
                                   for (place, tok), n in sorted(
                                       made.items(),
                                       key=lambda kv: (kv[0][0], atom_key(kv[0][1])))
                                   for k in range(n)]
                extensions.append(ev)
        if not extensions:
            maximal.append(events)
            continue
        if len(events) >= max_events:
            raise BoundExceeded(f"a run exceeds {max_events} events")
        for ev in reversed(extensions):
            stack.append((events | {ev}, (cut - set(ev[1])) | set(outputs[ev])))

    runs = [_build_run(initial, events, outputs) for events in maximal]
    runs.sort(key=lambda r: (len(r.events), sorted(
        (e.mode.sort_key() for e in r.events.values()))))
    return runs


def _build_run(initial, events, outputs) -> Run:
    ids = {}
    conditions = {}
    for key in initial:
        ids[key] = f"c{len(conditions)}"
        conditions[ids[key]] = Condition(key[1], key[2])
    run_events = {}
    flow = set()
    pending = set(events)
    while pending:
        ready = [ev for ev in pending if all(k in ids for k in ev[1])]
        ev = min(ready, key=lambda ev: (ev[0].sort_key(),
                                        sorted(int(ids[k][1:]) for k in ev[1])))
        pending.discard(ev)
        eid = f"e{len(run_events)}"
        run_events[eid] = Event(ev[0].transition, ev[0])
        for k in ev[1]:
            flow.add((ids[k], eid))
        for key in outputs[ev]:
            cid = f"c{len(conditions)}"
            ids[key] = cid
            conditions[cid] = Condition(key[1], key[2])
            flow.add((eid, cid))
    return Run(conditions, run_events, flow).reindexed()


# -- determinism -------------------------------------------------------------

@dataclass(frozen=True)
class ConflictWitness:
    marking: Marking
    first: Mode
    second: Mode


def find_conflict(inst: NetInstance):
    """Two enabled modes of ``inst`` whose joint demand exceeds the marking."""
    modes = enabled_modes(inst)
    demands = [consumption(inst, m) for m in modes]
    for i, j in combinations(range(len(modes)), 2):
        joint = demands[i] + demands[j]
        for (place, tok), n in joint.items():
            if demands[i][(place, tok)] and demands[j][(place, tok)] and \
                    inst.marking.count(place, tok) < n:
                return ConflictWitness(inst.marking, modes[i], modes[j])
    return None


def is_deterministic(inst: NetInstance, bound: int = 10_000):
    """``(True, None)`` if no reachable marking holds a conflict, else ``(False, witness)``."""
    graph = reachable_markings(inst, bound)
    for marking in graph.markings:
        witness = find_conflict(inst.with_marking(marking))
        if witness is not None:
            return False, witness
    return True, None


# -- projection ---------------------------------------------------------------

def project_run(run: Run, token) -> Run:
    """Sub-run of the conditions carrying ``token`` and the events touching them."""
    conds = {k: c for k, c in run.conditions.items() if c.token == token}
    if not conds:
        raise UnknownToken(f"no condition carries {token!r}")
    events = {}
    for k in conds:
        for e in (*run.preset(k), *run.postset(k)):
            events[e] = run.events[e]
    flow = {(s, t) for s, t in run.flow
            if (s in conds or s in events) and (t in conds or t in events)}
    return Run(conds, events, flow).reindexed()


# -- global views and linearizations -------------------------------------------

def global_views(run: Run, cap: int = 1_000_000) -> list:
    """All maximal antichains of conditions under the causal order.

    Bron-Kerbosch with pivoting on the concurrency graph of the conditions;
    views are returned as sorted tuples of condition ids, in sorted order.
    """
    conds = run.condition_ids()
    co = {c: {d for d in conds if run.concurrent(c, d)} for c in conds}
    views = []

    def expand(chosen, candidates, excluded):
        if not candidates and not excluded:
            views.append(tuple(sorted(chosen, key=_id_key)))
            if len(views) > cap:
                raise BoundExceeded(f"more than {cap} global views")
            return
        pivot = max(candidates | excluded, key=lambda u: (len(co[u] & candidates), _id_key(u)))
        for v in sorted(candidates - co[pivot], key=_id_key):
            expand(chosen | {v}, candidates & co[v], excluded & co[v])
            candidates = candidates - {v}
            excluded = excluded | {v}

    if conds:
        expand(set(), set(conds), set())
    else:
        views.append(())
    views.sort(key=lambda v: [_id_key(c) for c in v])
    return views


def view_marking(run: Run, view, places=None) -> Marking:
    """The marking a global view stands for."""
    data = {p: Counter() for p in (places or ())}
    for c in view:
        cond = run.conditions[c]
        data.setdefault(cond.place, Counter())[cond.token] += 1
    return Marking(data)


def count_linearizations(run: Run) -> int:
    """Number of total orders of the events that extend the causal order."""
    events = run.event_ids()
    pos = {e: i for i, e in enumerate(events)}
    preds = [0] * len(events)
    for e in events:
        for d in events:
            if run.precedes(d, e):
                preds[pos[e]] |= 1 << pos[d]
    full = (1 << len(events)) - 1
    ways = {full: 1}

    def count(done: int) -> int:
        if done in ways:
            return ways[done]
        total = 0
        for i in range(len(events)):
            if not done >> i & 1 and preds[i] & ~done == 0:
                total += count(done | 1 << i)
        ways[done] = total
        return total

    return count(0)


def linearizations(run: Run):
    """Yield every linear extension as a list of event ids (exponential)."""
    events = run.event_ids()

    def rec(done, order):
        if len(order) == len(events):
            yield list(order)
            return
        for e in events:
            if e not in done and all(d in done for d in events if run.precedes(d, e)):
                done.add(e)
                order.append(e)
                yield from rec(done, order)
                order.pop()
                done.discard(e)

    yield from rec(set(), [])
