"""Rational models: canonical encoding, transducers and generic shifting.

An observation ``<A0, a1, A1, ..., an, An>`` is written over the symbols
``<``, ``>``, ``,`` and ``*`` (for a bullet) plus ``x''`` for each member of
an acceptance set, listed in alphabet order. A model is supplied as a
finite automaton over ``left.`` symbols (the encoded observation) and
``right.`` symbols (the encoded model observation). Shifting the finite
linear observations of a process through that automaton gives a process
whose traces are the encoded model observations.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

from .models import BULLET, all_observations, extends
from .semantics import explore
from .shifting import decode, shift_FL
from .syntax import (
    DONE,
    PRIMED,
    STAB,
    SYM,
    TERM,
    TICK,
    Event,
    Hide,
    Parallel,
    Prefix,
    Process,
    Rename,
    Seq,
    Stop,
    Var,
    dprime,
    ev,
    ext_choice,
    mutual,
    prime,
    tag,
)

OPEN = Event(SYM, "<")
CLOSE = Event(SYM, ">")
COMMA = Event(SYM, ",")
STAR = Event(SYM, "*")
SYMS = (OPEN, CLOSE, COMMA, STAR)


class TransducerError(ValueError):
    pass


def event_from_text(text: str) -> Event:
    """Inverse of ``str(event)`` for every event the tools print."""
    if text in ("<", ">", ",", "*"):
        return Event(SYM, text)
    if text in ("stab", "done", "term", "tock", "tick", "tau"):
        return Event(text)
    for side in ("left", "right"):
        if text.startswith(side + "."):
            return tag(side, event_from_text(text[len(side) + 1 :]))
    if text.endswith("''"):
        return dprime(event_from_text(text[:-2]))
    if text.endswith("'"):
        return prime(event_from_text(text[:-1]))
    return ev(text)


def xi(alphabet) -> list[Event]:
    """The encoding alphabet for ``alphabet``."""
    sigma = list(alphabet)
    return sigma + [dprime(a) for a in sigma] + list(SYMS)


# ---------------------------------------------------------------------------
# Canonical encoding


def encode_phi(obs, alphabet) -> list[Event]:
    order = {a: i for i, a in enumerate(alphabet)}
    out = [OPEN]
    for i, x in enumerate(obs):
        if i:
            out.append(COMMA)
        if i % 2:
            out.append(x)
        elif x is BULLET:
            out.append(STAR)
        else:
            out.extend(dprime(a) for a in sorted(x, key=order.__getitem__))
    out.append(CLOSE)
    return out


def decode_phi(word) -> tuple:
    """Inverse of :func:`encode_phi`; raises on malformed input."""
    word = list(word)
    if len(word) < 2 or word[0] is not OPEN or word[-1] is not CLOSE:
        raise TransducerError("an encoded observation is bracketed by < and >")
    parts: list[list[Event]] = [[]]
    for e in word[1:-1]:
        if e is COMMA:
            parts.append([])
        else:
            parts[-1].append(e)
    if len(parts) % 2 == 0:
        raise TransducerError("slots and events must alternate")
    out = []
    for i, part in enumerate(parts):
        if i % 2:
            if len(part) != 1 or part[0].role != "plain":
                raise TransducerError("expected a single event between commas")
            out.append(part[0])
        elif part == [STAR]:
            out.append(BULLET)
        elif all(e.role == "doubleprimed" for e in part):
            out.append(frozenset(e.inner for e in part))
        else:
            raise TransducerError("malformed acceptance slot")
    return tuple(out)


# ---------------------------------------------------------------------------
# Automata


@dataclass
class Transducer:
    """A finite automaton whose labels are ``left.``/``right.`` tagged events.

    With only untagged labels it is a plain NFA, which is how
    :func:`nfa_as_process` uses it.
    """

    states: list[str]
    initial: str
    accepting: set[str]
    edges: list[tuple[str, Event, str]]
    left: list[Event] = field(default_factory=list)
    right: list[Event] = field(default_factory=list)

    def __post_init__(self):
        known = set(self.states)
        for s, lab, d in self.edges:
            if s not in known or d not in known:
                raise TransducerError(f"edge {s} {lab} {d} mentions an undeclared state")
        if self.initial not in known:
            raise TransducerError("initial state is not declared")
        if not set(self.accepting) <= known:
            raise TransducerError("accepting state is not declared")
        lset = {tag("left", e) for e in self.left}
        rset = {tag("right", e) for e in self.right}
        if self.left or self.right:
            for _, lab, _ in self.edges:
                if lab not in lset and lab not in rset:
                    raise TransducerError(f"label {lab} is outside the declared alphabets")

    def successors(self) -> dict[str, list[tuple[Event, str]]]:
        out: dict[str, list] = {s: [] for s in self.states}
        for s, lab, d in self.edges:
            out[s].append((lab, d))
        return out

    def useful_states(self) -> set[str]:
        """States on some path from the initial state to an accepting one."""
        succ = self.successors()
        reach = {self.initial}
        dq = deque([self.initial])
        while dq:
            s = dq.popleft()
            for _, d in succ[s]:
                if d not in reach:
                    reach.add(d)
                    dq.append(d)
        pred: dict[str, set] = {s: set() for s in self.states}
        for s, _, d in self.edges:
            pred[d].add(s)
        co = set(self.accepting)
        dq = deque(co)
        while dq:
            s = dq.popleft()
            for p in pred[s]:
                if p not in co:
                    co.add(p)
                    dq.append(p)
        return reach & co

    # -- text format
    def dumps(self) -> str:
        def sym(e: Event) -> str:
            side = "l." if e.name == "left" else "r."
            return side + str(e.inner)

        lines = ["left: " + " ".join(map(str, self.left)), "right: " + " ".join(map(str, self.right))]
        lines.append("initial: " + self.initial)
        lines.append("accepting: " + " ".join(s for s in self.states if s in self.accepting))
        for s, lab, d in self.edges:
            lines.append(f"{s} {sym(lab)} {d}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Transducer":
        left: list[Event] = []
        right: list[Event] = []
        initial = None
        accepting: list[str] = []
        edges = []
        states: dict[str, None] = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            head, _, rest = line.partition(":")
            if _ and head.strip() in ("left", "right", "initial", "accepting"):
                words = rest.split()
                key = head.strip()
                if key == "left":
                    left = [event_from_text(w) for w in words]
                elif key == "right":
                    right = [event_from_text(w) for w in words]
                elif key == "initial":
                    if len(words) != 1:
                        raise TransducerError(f"line {n}: exactly one initial state")
                    initial = words[0]
                    states.setdefault(initial)
                else:
                    accepting = words
                    for w in words:
                        states.setdefault(w)
                continue
            words = line.split()
            if len(words) != 3:
                raise TransducerError(f"line {n}: expected 'state label state'")
            s, lab, d = words
            if lab.startswith("l."):
                e = tag("left", event_from_text(lab[2:]))
            elif lab.startswith("r."):
                e = tag("right", event_from_text(lab[2:]))
            else:
                raise TransducerError(f"line {n}: labels carry an l. or r. prefix")
            states.setdefault(s)
            states.setdefault(d)
            edges.append((s, e, d))
        if initial is None:
            raise TransducerError("missing 'initial:' line")
        return cls(list(states), initial, set(accepting), edges, left, right)


def nfa_as_process(nfa: Transducer) -> Process:
    """A process whose traces are the prefixes of the automaton's language.

    One definition per useful state, offering an external choice over its
    edges; equally labelled edges make the choice nondeterministic.
    """
    useful = nfa.useful_states()
    if nfa.initial not in useful:
        return Stop()
    succ = nfa.successors()
    names = {s: f"N{i}" for i, s in enumerate(nfa.states)}
    defs = {}
    for s in nfa.states:
        if s in useful:
            defs[names[s]] = ext_choice(Prefix(lab, Var(names[d])) for lab, d in succ[s] if d in useful)
    return mutual(defs)[names[nfa.initial]]


# ---------------------------------------------------------------------------
# Built-in model transducers


class _Builder:
    def __init__(self, alphabet):
        self.sigma = list(alphabet)
        self.states: dict[str, None] = {}
        self.edges: list = []
        self.accepting: set = set()

    def st(self, name: str) -> str:
        self.states.setdefault(name)
        return name

    def left(self, s: str, e: Event, d: str) -> None:
        self.edges.append((self.st(s), tag("left", e), self.st(d)))

    def right(self, s: str, e: Event, d: str) -> None:
        self.edges.append((self.st(s), tag("right", e), self.st(d)))

    def subsets(self):
        out = []
        for r in range(len(self.sigma) + 1):
            out.extend(frozenset(c) for c in combinations(self.sigma, r))
        return out

    def name(self, A) -> str:
        if A is BULLET:
            return "b"
        return "".join("1" if a in A else "0" for a in self.sigma)

    def slots(self, on_comma, on_close) -> None:
        """Slot-reading states ``SLOT_<set>`` that record the current slot.

        ``on_comma(A)`` and ``on_close(A)`` give the state entered after the
        slot is terminated by a comma or by the closing bracket.
        """
        self.left("I", OPEN, "SLOT_" + self.name(frozenset()))
        for A in self.subsets():
            src = "SLOT_" + self.name(A)
            for x in self.sigma:
                if x not in A and all(self.sigma.index(y) < self.sigma.index(x) for y in A):
                    self.left(src, dprime(x), "SLOT_" + self.name(A | {x}))
            if not A:
                self.left(src, STAR, "SLOT_b")
        for A in self.subsets() + [BULLET]:
            src = "SLOT_" + self.name(A)
            for d in on_comma(A):
                self.left(src, COMMA, d)
            for d in on_close(A):
                self.left(src, CLOSE, d)

    def events(self, entry: str = "EV") -> None:
        """Read an event, echo it, read the following comma."""
        for a in self.sigma:
            self.left(entry, a, f"O_{a}")
            self.right(f"O_{a}", a, "EC")
        self.left("EC", COMMA, "SLOT_" + self.name(frozenset()))

    def optional_refusals(self, prefix: str, A, final: bool) -> str:
        """States emitting an increasing run of ``x'`` for ``x`` outside
        ``A``; returns the name of the entry state."""
        k = len(self.sigma)
        for i in range(k + 1):
            src = f"{prefix}_{self.name(A)}_{i}"
            self.st(src)
            if final:
                self.accepting.add(src)
            for j in range(i, k):
                x = self.sigma[j]
                if x not in A:
                    self.right(src, prime(x), f"{prefix}_{self.name(A)}_{j + 1}")
        return f"{prefix}_{self.name(A)}_0"

    def build(self, right: list[Event]) -> Transducer:
        return Transducer(list(self.states), "I", self.accepting, self.edges, xi(self.sigma), right)


def transducer_T(alphabet) -> Transducer:
    b = _Builder(alphabet)
    b.slots(lambda A: ["EV"], lambda A: ["ACC"])
    b.events()
    b.accepting.add(b.st("ACC"))
    return b.build(list(b.sigma))


def transducer_F(alphabet) -> Transducer:
    b = _Builder(alphabet)

    def close(A):
        if A is BULLET:
            return ["ACC"]
        return [f"FIN_{b.name(A)}"]

    b.slots(lambda A: ["EV"], close)
    b.events()
    b.accepting.add(b.st("ACC"))
    for A in b.subsets():
        entry = b.optional_refusals("RF", A, final=True)
        b.right(f"FIN_{b.name(A)}", STAB, entry)
    return b.build(list(b.sigma) + [prime(a) for a in b.sigma] + [STAB])


def transducer_R(alphabet) -> Transducer:
    b = _Builder(alphabet)

    def comma(A):
        return ["EV"] if A is BULLET else ["EV", f"RV_{b.name(A)}"]

    def close(A):
        return ["ACC"] if A is BULLET else [f"FIN_{b.name(A)}"]

    b.slots(comma, close)
    b.events()
    b.accepting.add(b.st("ACC"))
    for A in b.subsets():
        entry = b.optional_refusals("RF", A, final=True)
        b.right(f"FIN_{b.name(A)}", STAB, entry)
        # revival branch: stab, refusals, one echoed event, then the rest
        # of the observation is read without output
        entry = b.optional_refusals("RX", A, final=False)
        b.right(f"RV_{b.name(A)}", STAB, entry)
        for i in range(len(b.sigma) + 1):
            for a in b.sigma:
                b.left(f"RX_{b.name(A)}_{i}", a, f"RO_{a}")
    for a in b.sigma:
        b.right(f"RO_{a}", a, "RC")
    b.left("RC", COMMA, "TAIL")
    for x in b.sigma:
        b.left("TAIL", dprime(x), "TAIL")
    b.left("TAIL", STAR, "TAIL")
    b.left("TAIL", CLOSE, "ACC")
    return b.build(list(b.sigma) + [prime(a) for a in b.sigma] + [STAB])


def transducer_A(alphabet) -> Transducer:
    b = _Builder(alphabet)
    b.slots(lambda A: ["EV"], lambda A: ["ACC"] if A is BULLET else [f"FIN_{b.name(A)}_0"])
    b.events()
    b.accepting.add(b.st("ACC"))
    for A in b.subsets():
        members = [a for a in b.sigma if a in A]
        for i, a in enumerate(members):
            b.right(f"FIN_{b.name(A)}_{i}", dprime(a), f"FIN_{b.name(A)}_{i + 1}")
        b.right(f"FIN_{b.name(A)}_{len(members)}", DONE, "ACC")
    return b.build(list(b.sigma) + [dprime(a) for a in b.sigma] + [DONE])


def transducer_RT(alphabet) -> Transducer:
    b = _Builder(alphabet)

    def comma(A):
        return ["EV"] if A is BULLET else [f"PS_{b.name(A)}"]

    def close(A):
        return ["ACC"] if A is BULLET else [f"PF_{b.name(A)}"]

    b.slots(comma, close)
    b.events()
    b.accepting.add(b.st("ACC"))
    for A in b.subsets():
        entry = b.optional_refusals("RF", A, final=True)
        b.right(f"PF_{b.name(A)}", STAB, entry)
        entry = b.optional_refusals("RX", A, final=False)
        b.right(f"PS_{b.name(A)}", STAB, entry)
        for i in range(len(b.sigma) + 1):
            for a in b.sigma:
                b.left(f"RX_{b.name(A)}_{i}", a, f"O_{a}")
    return b.build(list(b.sigma) + [prime(a) for a in b.sigma] + [STAB])


def transducer_FL(alphabet) -> Transducer:
    """The identity relation on encoded observations."""
    b = _Builder(alphabet)
    syms = xi(b.sigma)
    for s in syms:
        b.left("I" if s is OPEN else "M", s, f"E_{s}")
        b.right(f"E_{s}", s, "ACC" if s is CLOSE else "M")
    b.accepting.add(b.st("ACC"))
    return b.build(syms)


BUILTIN = {
    "T": transducer_T,
    "F": transducer_F,
    "R": transducer_R,
    "A": transducer_A,
    "RT": transducer_RT,
    "FL": transducer_FL,
}


# ---------------------------------------------------------------------------
# Generic shifting


def bridge(alphabet) -> Process:
    """Translate the trace encoding of the finite-linear context (walks of
    ``x''`` closed by ``done``, between events) into canonical words on
    ``left.`` symbols."""
    sigma = list(alphabet)
    L = lambda e: tag("left", e)
    defs = {
        "START": Prefix(L(OPEN), Var("SLOT")),
        "SLOT": ext_choice(
            [Prefix(dprime(x), Prefix(L(dprime(x)), Var("SET"))) for x in sigma]
            + [Prefix(DONE, Var("AFTER")), Prefix(L(STAR), Var("AFTER"))]
        ),
        "SET": ext_choice([Prefix(dprime(x), Prefix(L(dprime(x)), Var("SET"))) for x in sigma] + [Prefix(DONE, Var("AFTER"))]),
        "AFTER": ext_choice([Prefix(L(CLOSE), Stop()), Prefix(L(COMMA), Var("EVT"))]),
        "EVT": ext_choice([Prefix(a, Prefix(L(a), Prefix(L(COMMA), Var("SLOT")))) for a in sigma]),
    }
    return mutual(defs)["START"]


def shift_rational(p: Process, transducer: Transducer, alphabet) -> Process:
    """The generic context: encode the finite linear observations of ``p``,
    feed them through ``transducer`` and keep only its outputs."""
    sigma = list(alphabet)
    if transducer.left and set(transducer.left) != set(xi(sigma)):
        raise TransducerError("the transducer's left alphabet does not match the process alphabet")
    inner = shift_FL(p, sigma)
    traced = sigma + [dprime(a) for a in sigma] + [DONE]
    lefts = [tag("left", s) for s in xi(sigma)]
    composed = Parallel(Parallel(inner, traced, bridge(sigma)), lefts, nfa_as_process(transducer))
    hidden = Hide(composed, traced + lefts)
    rights = transducer.right or sorted({lab.inner for _, lab, _ in transducer.edges if lab.name == "right"}, key=str)
    return Rename(hidden, [(tag("right", t), t) for t in rights])


def rational_refines(model, spec: Process, impl: Process, alphabet, cap: int | None = None):
    """Refinement through a transducer. ``model`` is a built-in model name
    or a :class:`Transducer`; built-ins are regenerated for the alphabet
    extended with ``term`` when either side can terminate."""
    from .refine import trace_refines
    from .semantics import DEFAULT_CAP

    cap = cap or DEFAULT_CAP
    sigma = list(alphabet)
    tick = explore(spec, cap).has_tick() or explore(impl, cap).has_tick()
    if tick:
        if not isinstance(model, str):
            raise TransducerError("user transducers do not support termination")
        sigma = sigma + [TERM]
        spec = Seq(spec, Prefix(TERM, Stop()))
        impl = Seq(impl, Prefix(TERM, Stop()))
    t = BUILTIN[model](sigma) if isinstance(model, str) else model
    v = trace_refines(shift_rational(spec, t, sigma), shift_rational(impl, t, sigma), cap)
    if isinstance(model, str):
        v.model = model
        if not v.holds and model in ("T", "F", "R", "RT", "A"):
            v.decoded = decode(model, v.counterexample)
    return v


# ---------------------------------------------------------------------------
# Order reflection (bounded)


def run_outputs(t: Transducer, word, max_output: int) -> set[tuple]:
    """Output words of accepting runs on the left word ``word``."""
    word = [tag("left", e) for e in word]
    succ = t.successors()
    out: set = set()
    seen = set()
    dq = deque([(t.initial, 0, ())])
    while dq:
        node = dq.popleft()
        if node in seen:
            continue
        seen.add(node)
        s, i, w = node
        if i == len(word) and s in t.accepting:
            out.add(w)
        for lab, d in succ[s]:
            if lab.name == "left":
                if i < len(word) and lab is word[i]:
                    dq.append((d, i + 1, w))
            elif len(w) < max_output:
                dq.append((d, i, w + (lab.inner,)))
    return out


def check_order_reflecting(t: Transducer, alphabet, depth: int = 2, warn: bool = True) -> list:
    """Look for encoded model observations ``u`` a prefix of ``w`` whose
    observations are not ordered, among observations of at most ``depth``
    events. Returns the offending pairs (and warns when there are any)."""
    sigma = list(alphabet)
    pre: dict[tuple, list] = {}
    limit = 4 * (depth + 1) * (len(sigma) + 2)
    for n in range(depth + 1):
        for o in all_observations(sigma, n):
            for w in run_outputs(t, encode_phi(o, sigma), limit):
                pre.setdefault(w, []).append(o)
    bad = []
    words = sorted(pre, key=len)
    for u in words:
        for w in words:
            if len(u) <= len(w) and w[: len(u)] == u and u != w:
                ok = all(any(extends(a, b) for a in pre[u]) for b in pre[w] if _length(b) <= depth)
                if not ok:
                    bad.append((u, w))
    if bad and warn:
        warnings.warn(f"transducer output order is not reflected for {len(bad)} pairs up to depth {depth}")
    return bad


def _length(o) -> int:
    return len(o) // 2
