"""Operational semantics and explicit-state exploration."""

from __future__ import annotations

from collections import deque
from typing import Iterable

from .syntax import (
    TAU,
    TICK,
    TOCK,
    Chaos,
    Div,
    Event,
    ExtChoice,
    Hide,
    IntChoice,
    Interrupt,
    Machine,
    MuRec,
    Omega,
    Parallel,
    Prefix,
    PriorityOrder,
    Prioritise,
    Process,
    Rec,
    Rename,
    Run,
    Seq,
    Skip,
    Sliding,
    Stop,
    Throw,
    Var,
    Wait,
    sorted_events,
    substitute,
)

DEFAULT_CAP = 1_000_000

Transition = tuple[Event, Process]


class SemanticsError(Exception):
    pass


class UnboundVar(SemanticsError):
    pass


class RenameDomainIncomplete(SemanticsError):
    pass


class StateCapExceeded(SemanticsError):
    def __init__(self, cap: int):
        super().__init__(f"more than {cap} reachable states; the process is probably unbounded")
        self.cap = cap


_CACHE: dict[Process, tuple[Transition, ...]] = {}


def clear_cache() -> None:
    _CACHE.clear()


def transitions(p: Process) -> tuple[Transition, ...]:
    """All single-step transitions of a closed term, in syntactic order."""
    hit = _CACHE.get(p)
    if hit is None:
        hit = tuple(_step(p))
        _CACHE[p] = hit
    return hit


def initials(p: Process) -> frozenset[Event]:
    return frozenset(e for e, _ in transitions(p))


def _sorted(events: Iterable[Event]) -> list[Event]:
    return sorted_events(events)


def _step(p: Process) -> list[Transition]:
    if isinstance(p, (Stop, Omega)):
        return []
    if isinstance(p, Div):
        return [(TAU, p)]
    if isinstance(p, Skip):
        return [(TICK, Omega())]
    if isinstance(p, Prefix):
        return [(p.event, p.proc)]
    if isinstance(p, Chaos):
        return [(TAU, Stop())] + [(TAU, Prefix(a, p)) for a in _sorted(p.events)]
    if isinstance(p, Run):
        return [(a, p) for a in _sorted(p.events)]
    if isinstance(p, Wait):
        return [(TOCK, Wait(p.t - 1))] if p.t > 0 else [(TICK, Omega())]
    if isinstance(p, IntChoice):
        return [(TAU, p.left), (TAU, p.right)]
    if isinstance(p, ExtChoice):
        out = []
        for e, l2 in transitions(p.left):
            out.append((e, ExtChoice(l2, p.right) if e is TAU else l2))
        for e, r2 in transitions(p.right):
            out.append((e, ExtChoice(p.left, r2) if e is TAU else r2))
        return out
    if isinstance(p, Sliding):
        out = []
        for e, l2 in transitions(p.left):
            out.append((e, Sliding(l2, p.right) if e is TAU else l2))
        out.append((TAU, p.right))
        return out
    if isinstance(p, Parallel):
        return _parallel(p)
    if isinstance(p, Hide):
        out = []
        for e, q in transitions(p.proc):
            if e is TICK:
                out.append((TICK, Omega()))
            else:
                out.append((TAU if e in p.events else e, Hide(q, p.events)))
        return out
    if isinstance(p, Rename):
        img = p.image()
        out = []
        for e, q in transitions(p.proc):
            nxt = Rename(q, p.pairs)
            if e is TAU:
                out.append((TAU, nxt))
            elif e is TICK:
                out.append((TICK, Omega()))
            elif e in img:
                out.extend((b, nxt) for b in img[e])
            elif e is TOCK:
                out.append((TOCK, nxt))
            else:
                raise RenameDomainIncomplete(f"renaming does not cover event {e}")
        return out
    if isinstance(p, Seq):
        out = []
        for e, l2 in transitions(p.left):
            out.append((TAU, p.right) if e is TICK else (e, Seq(l2, p.right)))
        return out
    if isinstance(p, Throw):
        out = []
        for e, l2 in transitions(p.left):
            if e is TICK:
                out.append((TICK, Omega()))
            elif e in p.events:
                out.append((e, p.right))
            else:
                out.append((e, Throw(l2, p.events, p.right)))
        return out
    if isinstance(p, Interrupt):
        out = []
        for e, l2 in transitions(p.left):
            out.append((TICK, Omega()) if e is TICK else (e, Interrupt(l2, p.right)))
        for e, r2 in transitions(p.right):
            if e is TAU:
                out.append((TAU, Interrupt(p.left, r2)))
            else:
                out.append((e, Omega() if e is TICK else r2))
        return out
    if isinstance(p, Rec):
        return [(TAU, substitute(p.body, {p.name: p}))]
    if isinstance(p, MuRec):
        env = {n: MuRec(i, p.names, p.bodies) for i, n in enumerate(p.names)}
        return [(TAU, substitute(p.bodies[p.index], env))]
    if isinstance(p, Machine):
        return [(e, Machine(p.lts, d)) for e, d in p.lts.step(p.state)]
    if isinstance(p, Var):
        raise UnboundVar(f"unbound process variable {p.name}")
    if isinstance(p, Prioritise):
        return [(e, Prioritise(q, p.order)) for e, q in prioritised_transitions(p.proc, p.order)]
    raise TypeError(f"not a process term: {p!r}")


def _parallel(p: Parallel) -> list[Transition]:
    left, sync, right = p.left, p.sync, p.right
    lt = transitions(left)
    rt = transitions(right)
    out: list[Transition] = []
    for e, l2 in lt:
        if e is TICK:
            out.append((TAU, Parallel(Omega(), sync, right)))
        elif e is TAU or e not in sync:
            out.append((e, Parallel(l2, sync, right)))
        else:
            for f, r2 in rt:
                if f is e:
                    out.append((e, Parallel(l2, sync, r2)))
    for e, r2 in rt:
        if e is TICK:
            out.append((TAU, Parallel(left, sync, Omega())))
        elif e is TAU or e not in sync:
            out.append((e, Parallel(left, sync, r2)))
    if isinstance(left, Omega) and isinstance(right, Omega):
        out.append((TICK, Omega()))
    return out


def prioritised_transitions(p: Process, order: PriorityOrder) -> list[Transition]:
    """Transitions of ``p`` that survive prioritisation by ``order``.

    Tick shares tau's level: neither is ever pruned, and both pre-empt every
    visible event outside X.
    """
    trans = transitions(p)
    init = {e for e, _ in trans}
    out = []
    for e, q in trans:
        if e is TAU or e is TICK:
            out.append((e, q))
            continue
        if e not in order.x_set and (TAU in init or TICK in init):
            continue
        above = order.above.get(e)
        if above and not above.isdisjoint(init):
            continue
        out.append((e, q))
    return out


def is_stable(trans: Iterable[Transition]) -> bool:
    return all(e is not TAU for e, _ in trans)


class Lts:
    """A fully materialised, immutable labelled transition system.

    States are numbered in BFS order from the root (state 0); each state's
    transition list keeps the order produced by :func:`transitions`.
    """

    def __init__(self, terms: list[Process], trans: list[tuple[tuple[Event, int], ...]]):
        self.terms = terms
        self.trans = trans
        self.root = 0
        self.stable = [all(e is not TAU for e, _ in ts) for ts in trans]

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def n_transitions(self) -> int:
        return sum(len(t) for t in self.trans)

    def step(self, state: int) -> tuple[tuple[Event, int], ...]:
        return self.trans[state]

    def labels(self) -> set[Event]:
        return {e for ts in self.trans for e, _ in ts}

    def has_tick(self) -> bool:
        return TICK in self.labels()

    def dump(self) -> str:
        """Text dump: ``root <id>``, ``stable: ...`` and one ``src<TAB>label<TAB>dst`` per transition."""
        lines = [f"root {self.root}", "stable: " + " ".join(str(i) for i, s in enumerate(self.stable) if s)]
        for i, ts in enumerate(self.trans):
            for e, j in ts:
                lines.append(f"{i}\t{e}\t{j}")
        return "\n".join(lines) + "\n"


def explore(p: Process, cap: int = DEFAULT_CAP) -> Lts:
    """Materialise the reachable state graph of a closed term."""
    if p.fv:
        raise UnboundVar("free variables: " + ", ".join(sorted(p.fv)))
    ids: dict[Process, int] = {p: 0}
    terms = [p]
    trans: list[tuple[tuple[Event, int], ...]] = []
    queue = deque([p])
    while queue:
        q = queue.popleft()
        row = []
        for e, r in transitions(q):
            j = ids.get(r)
            if j is None:
                j = len(terms)
                if j >= cap:
                    raise StateCapExceeded(cap)
                ids[r] = j
                terms.append(r)
                queue.append(r)
            row.append((e, j))
        trans.append(tuple(row))
    return Lts(terms, trans)


def compact(lts: Lts) -> Lts:
    """Merge every state whose only move is a single tau into its target.
    Such states (recursion unfoldings, mostly) are invisible in every model."""

    def forward(s: int) -> int:
        seen = set()
        while s not in seen:
            seen.add(s)
            ts = lts.step(s)
            if len(ts) == 1 and ts[0][0] is TAU and ts[0][1] != s:
                s = ts[0][1]
            else:
                return s
        return s

    rep = [forward(s) for s in range(len(lts))]
    ids = {rep[lts.root]: 0}
    keep = [rep[lts.root]]
    queue = deque(keep)
    while queue:
        s = queue.popleft()
        for _, d in lts.step(s):
            r = rep[d]
            if r not in ids:
                ids[r] = len(keep)
                keep.append(r)
                queue.append(r)
    trans = [tuple((e, ids[rep[d]]) for e, d in lts.step(s)) for s in keep]
    return Lts([lts.terms[s] for s in keep], trans)


def compress(p: Process, cap: int = DEFAULT_CAP) -> Process:
    """``p`` as an explicit, compacted LTS, usable inside larger terms."""
    return Machine(compact(explore(p, cap)), 0)
