"""Trace refinement by lazy normalisation, and refinement in richer models
by composing it with the shifting contexts."""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

from .semantics import DEFAULT_CAP, Lts, StateCapExceeded, explore
from .shifting import BUILDERS, decode, shift
from .syntax import (
    DONE,
    TAU,
    TOCK,
    Alphabet,
    Chaos,
    Event,
    ExtChoice,
    Parallel,
    Prefix,
    Process,
    Rename,
    Sliding,
    Stop,
    Var,
    ev,
    events_of,
    int_choice,
    mutual,
    sorted_events,
)

ALL_MODELS = ("T", "F", "R", "A", "RT", "FL", "TF")


@dataclass
class Verdict:
    holds: bool
    counterexample: list[Event] | None = None
    decoded: object = None
    model: str = "T"
    states: int = 0
    transitions: int = 0
    millis: float = 0.0
    warnings: list[str] = field(default_factory=list)
    impl_lts: Lts | None = field(default=None, repr=False)
    end_state: int | None = field(default=None, repr=False)

    def __bool__(self) -> bool:
        return self.holds

    def describe(self) -> str:
        if self.holds:
            return "holds"
        trace = ", ".join(map(str, self.counterexample or []))
        return f"fails: trace <{trace}> decodes to {self.decoded}"


class _Normaliser:
    """Deterministic view of a spec LTS: tau-closed subsets, built on demand."""

    def __init__(self, lts: Lts):
        self.lts = lts
        self._closure: dict[int, frozenset] = {}
        self._moves: dict[tuple[frozenset, Event], frozenset] = {}

    def closure_of(self, s: int) -> frozenset:
        hit = self._closure.get(s)
        if hit is None:
            seen = {s}
            stack = [s]
            while stack:
                x = stack.pop()
                for e, d in self.lts.step(x):
                    if e is TAU and d not in seen:
                        seen.add(d)
                        stack.append(d)
            hit = self._closure[s] = frozenset(seen)
        return hit

    def initial(self) -> frozenset:
        return self.closure_of(self.lts.root)

    def move(self, states: frozenset, e: Event) -> frozenset:
        key = (states, e)
        hit = self._moves.get(key)
        if hit is None:
            out: set = set()
            for s in states:
                for f, d in self.lts.step(s):
                    if f is e:
                        out |= self.closure_of(d)
            hit = self._moves[key] = frozenset(out)
        return hit


@dataclass
class _Search:
    holds: bool
    trace: list[Event] | None
    end_state: int | None
    pairs: int
    edges: int


def _product_search(spec: Lts, impl: Lts, cap: int) -> _Search:
    norm = _Normaliser(spec)
    start = (impl.root, norm.initial())
    parent: dict = {start: None}
    edges = 0

    def saturate(layer: list) -> list:
        # close a layer under impl tau moves, which keep the spec subset fixed
        out = []
        k = 0
        while k < len(layer):
            node = layer[k]
            k += 1
            out.append(node)
            for e, j in impl.step(node[0]):
                if e is TAU:
                    nxt = (j, node[1])
                    if nxt not in parent:
                        parent[nxt] = (node, None)
                        layer.append(nxt)
        return out

    # layer n holds the pairs reachable with exactly n visible events, so the
    # first failure found is a shortest one; ties go to transition order
    layer = saturate([start])
    while layer:
        nxt_layer = []
        for node in layer:
            i, S = node
            for e, j in impl.step(i):
                edges += 1
                if e is TAU:
                    continue
                S2 = norm.move(S, e)
                if not S2:
                    trace = [e]
                    cur = node
                    while parent[cur] is not None:
                        cur, lab = parent[cur]
                        if lab is not None:
                            trace.append(lab)
                    trace.reverse()
                    return _Search(False, trace, j, len(parent), edges)
                nxt = (j, S2)
                if nxt not in parent:
                    if len(parent) >= cap:
                        raise StateCapExceeded(cap)
                    parent[nxt] = (node, e)
                    nxt_layer.append(nxt)
        layer = saturate(nxt_layer)
    return _Search(True, None, None, len(parent), edges)


def trace_refines(spec: Lts | Process, impl: Lts | Process, cap: int = DEFAULT_CAP, workers: int = 1) -> Verdict:
    """Every trace of ``impl`` (ticks and ciphers included) is a trace of ``spec``.

    ``workers`` is accepted for interface compatibility; the search itself
    runs on one thread.
    """
    t0 = time.perf_counter()
    spec_lts = spec if isinstance(spec, Lts) else explore(spec, cap)
    impl_lts = impl if isinstance(impl, Lts) else explore(impl, cap)
    res = _product_search(spec_lts, impl_lts, cap)
    v = Verdict(res.holds, res.trace, None, "T", res.pairs, res.edges)
    if not res.holds:
        v.decoded = decode("T", res.trace)
    v.millis = (time.perf_counter() - t0) * 1000
    v.impl_lts = impl_lts
    v.end_state = res.end_state
    return v


def default_alphabet(*procs: Process) -> Alphabet:
    evs = set()
    for p in procs:
        evs |= {e for e in events_of(p) if e.role == "plain" or e is TOCK}
    if not evs:
        evs = {ev("a")}
    return Alphabet(sorted_events(evs))


def _complete_walk(lts: Lts, state: int, trace: list[Event]) -> list[Event]:
    """Extend a counterexample that stops inside an acceptance walk up to
    the closing ``done``, so it decodes to a complete acceptance set."""
    if not trace or trace[-1].role != "doubleprimed":
        return trace
    parent = {state: None}
    dq = deque([state])
    while dq:
        s = dq.popleft()
        for e, d in lts.step(s):
            if e is not TAU and e is not DONE and e.role != "doubleprimed":
                continue
            if d in parent:
                continue
            parent[d] = (s, e)
            if e is DONE:
                ext = []
                cur = d
                while parent[cur] is not None:
                    cur, lab = parent[cur]
                    if lab is not TAU:
                        ext.append(lab)
                return trace + ext[::-1]
            dq.append(d)
    return trace


def refines(
    model: str,
    spec: Process,
    impl: Process,
    alphabet=None,
    cap: int = DEFAULT_CAP,
    workers: int = 1,
    tick: bool | None = None,
) -> Verdict:
    """Decide ``spec [=_model impl`` by trace refinement of shifted processes."""
    t0 = time.perf_counter()
    if model not in ALL_MODELS:
        raise ValueError(f"unknown model {model!r}")
    if alphabet is None:
        alphabet = default_alphabet(spec, impl)
    # tock is an ordinary letter everywhere except in the timed model
    sigma = [e for e in alphabet if e is not TOCK or model != "TF"]
    if model == "TF":
        from .timed import maximal_progress, shift_TF

        s_spec = shift_TF(maximal_progress(spec, sigma), sigma, cap=cap)
        s_impl = shift_TF(maximal_progress(impl, sigma), sigma, cap=cap)
    elif model == "T":
        s_spec, s_impl = spec, impl
    else:
        if tick is None:
            tick = explore(spec, cap).has_tick() or explore(impl, cap).has_tick()
        s_spec = shift(model, spec, sigma, tick).inner
        s_impl = shift(model, impl, sigma, tick).inner
    v = trace_refines(s_spec, s_impl, cap, workers)
    v.model = model
    if not v.holds:
        trace = v.counterexample
        if model in ("A", "FL"):
            trace = _complete_walk(v.impl_lts, v.end_state, trace)
            v.counterexample = trace
        v.decoded = decode(model, trace)
    v.millis = (time.perf_counter() - t0) * 1000
    return v


# ---------------------------------------------------------------------------
# Conflict detection


GENERIC = ev("gen")


def conflict_spec(sigma, shared, g: Event = GENERIC) -> Process:
    """The most nondeterministic process without a revival ``(s, shared, g)``
    for a ``g``-free trace ``s``."""
    full = list(sigma) + [g]
    chaos = Chaos(full)
    branches: list[Process] = [Stop()]
    branches += [Prefix(e, Var("S")) for e in sigma]
    branches += [ExtChoice(Prefix(g, chaos), Prefix(i, Var("S"))) for i in sorted_events(shared)]
    branches.append(Sliding(Prefix(g, chaos), Stop()))
    return mutual({"S": int_choice(branches)})["S"]


def check_conflict_freedom(q: Process, r: Process, X, Y, alphabet=None, g: Event = GENERIC, cap: int = DEFAULT_CAP) -> Verdict:
    """Holds iff ``q [X||Y] r`` has no conflict: no stable state after a
    trace where both sides offer shared events yet the shared interface is
    refused. A fresh ``g`` stands for "some shared event"."""
    X, Y = frozenset(X), frozenset(Y)
    shared = X & Y
    if alphabet is None:
        alphabet = default_alphabet(q, r)
    sigma = list(alphabet)
    if g in set(sigma) | X | Y:
        raise ValueError(f"generic event {g} is not fresh")
    ident = [(e, e) for e in sigma]

    def lift(p: Process) -> Process:
        return Rename(p, ident + [(x, g) for x in shared])

    # the alphabetised parallel synchronises on X & Y plus g; private
    # events interleave
    composed = Parallel(lift(q), shared | {g}, lift(r))
    v = refines("R", conflict_spec(sigma, shared, g), composed, Alphabet(sigma + [g]), cap)
    return v
