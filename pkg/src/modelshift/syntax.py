"""Events, the CSP term language and priority orders.

Process terms are hash-consed: building the same term twice yields the same
object, so identity is structural equality and every term can be used as an
explored state without further canonicalisation.
"""

from __future__ import annotations

from typing import Iterable, Iterator

PLAIN = "plain"
PRIMED = "primed"
DPRIMED = "doubleprimed"
TAGGED = "tagged"
SYM = "sym"
SYMBOLS = ("<", ">", ",", "*")
SPECIAL_ROLES = ("tau", "tick", "tock", "stab", "done", "term")

RESERVED = frozenset(SPECIAL_ROLES)


class Event:
    """An alphabet symbol together with its role tag."""

    __slots__ = ("role", "name", "inner", "_text")
    _table: dict = {}

    def __new__(cls, role: str, name: str | None = None, inner: "Event | None" = None):
        key = (role, name, inner)
        obj = cls._table.get(key)
        if obj is not None:
            return obj
        if role in (PRIMED, DPRIMED):
            if inner is None or inner.role not in (PLAIN, "term", "tock"):
                raise ValueError("ciphers wrap a plain event, term or tock")
            text = str(inner) + ("'" if role == PRIMED else "''")
        elif role == TAGGED:
            if name not in ("left", "right") or inner is None or inner.role == TAGGED:
                raise ValueError("tagged events nest exactly one level under left/right")
            text = f"{name}.{inner}"
        elif role == SYM:
            if name not in SYMBOLS:
                raise ValueError(f"unknown encoding symbol {name!r}")
            text = name
        elif role == PLAIN:
            if not name or name in RESERVED:
                raise ValueError(f"invalid user event name {name!r}")
            text = name
        elif role in SPECIAL_ROLES:
            text = role
        else:
            raise ValueError(f"unknown event role {role!r}")
        obj = object.__new__(cls)
        obj.role = role
        obj.name = name
        obj.inner = inner
        obj._text = text
        cls._table[key] = obj
        return obj

    def __str__(self) -> str:
        return self._text

    def __repr__(self) -> str:
        return f"Event({self._text})"

    def __reduce__(self):
        return (Event, (self.role, self.name, self.inner))

    @property
    def visible(self) -> bool:
        return self.role != "tau"


def ev(name: str) -> Event:
    return Event(PLAIN, name)


def prime(e: Event) -> Event:
    return Event(PRIMED, None, e)


def dprime(e: Event) -> Event:
    return Event(DPRIMED, None, e)


def tag(side: str, e: Event) -> Event:
    return Event(TAGGED, side, e)


TAU = Event("tau")
TICK = Event("tick")
TOCK = Event("tock")
STAB = Event("stab")
DONE = Event("done")
TERM = Event("term")


def event_key(e: Event) -> str:
    return str(e)


def sorted_events(events: Iterable[Event]) -> list[Event]:
    return sorted(events, key=event_key)


class Alphabet:
    """A finite, non-empty, totally ordered set of events.

    The order is declaration order and serves as the "alphabetical" order
    wherever acceptance sets are listed.
    """

    def __init__(self, events: Iterable[Event]):
        seen: dict[Event, int] = {}
        for e in events:
            if e not in seen:
                seen[e] = len(seen)
        if not seen:
            raise ValueError("alphabet must be non-empty")
        self.events: tuple[Event, ...] = tuple(seen)
        self._index = seen

    @classmethod
    def of(cls, *names: str) -> "Alphabet":
        return cls(ev(n) for n in names)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def __contains__(self, e: object) -> bool:
        return e in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self.events == other.events

    def __hash__(self) -> int:
        return hash(self.events)

    def __repr__(self) -> str:
        return "Alphabet(" + ", ".join(map(str, self.events)) + ")"

    def index(self, e: Event) -> int:
        return self._index[e]

    def sort(self, events: Iterable[Event]) -> list[Event]:
        return sorted(events, key=self._index.__getitem__)

    def extended(self, *extra: Event) -> "Alphabet":
        return Alphabet(self.events + tuple(e for e in extra if e not in self))

    def as_set(self) -> frozenset[Event]:
        return frozenset(self.events)


# ---------------------------------------------------------------------------
# Process terms

_INTERN: dict = {}
_NOFV: frozenset = frozenset()


def _node(cls, fields: tuple, fv: frozenset):
    key = (cls, fields)
    obj = _INTERN.get(key)
    if obj is None:
        obj = object.__new__(cls)
        obj._f = fields
        obj.fv = fv
        _INTERN[key] = obj
    return obj


def _evset(events: Iterable[Event]) -> frozenset:
    s = frozenset(events)
    for e in s:
        if not isinstance(e, Event):
            raise TypeError(f"expected Event, got {e!r}")
    return s


class Process:
    """Base class of hash-consed CSP terms."""

    __slots__ = ("_f", "fv")

    def __repr__(self) -> str:
        from .dsl import pretty

        return pretty(self)

    def __reduce__(self):
        return (type(self), self._f)

    @property
    def closed(self) -> bool:
        return not self.fv


class Stop(Process):
    __slots__ = ()

    def __new__(cls):
        return _node(cls, (), _NOFV)


class Div(Process):
    __slots__ = ()

    def __new__(cls):
        return _node(cls, (), _NOFV)


class Skip(Process):
    __slots__ = ()

    def __new__(cls):
        return _node(cls, (), _NOFV)


class Omega(Process):
    """The terminated state reached after a tick."""

    __slots__ = ()

    def __new__(cls):
        return _node(cls, (), _NOFV)


class Chaos(Process):
    __slots__ = ()

    def __new__(cls, events: Iterable[Event]):
        return _node(cls, (_evset(events),), _NOFV)

    events = property(lambda s: s._f[0])


class Run(Process):
    __slots__ = ()

    def __new__(cls, events: Iterable[Event]):
        return _node(cls, (_evset(events),), _NOFV)

    events = property(lambda s: s._f[0])


class Wait(Process):
    __slots__ = ()

    def __new__(cls, t: int):
        if not isinstance(t, int) or t < 0:
            raise ValueError("WAIT needs a non-negative integer")
        return _node(cls, (t,), _NOFV)

    t = property(lambda s: s._f[0])


class Prefix(Process):
    __slots__ = ()

    def __new__(cls, event: Event, proc: Process):
        if not event.visible or event is TICK:
            raise ValueError(f"cannot prefix with {event}")
        return _node(cls, (event, proc), proc.fv)

    event = property(lambda s: s._f[0])
    proc = property(lambda s: s._f[1])


class _Binary(Process):
    __slots__ = ()

    def __new__(cls, left: Process, right: Process):
        return _node(cls, (left, right), left.fv | right.fv)

    left = property(lambda s: s._f[0])
    right = property(lambda s: s._f[1])


class IntChoice(_Binary):
    __slots__ = ()


class ExtChoice(_Binary):
    __slots__ = ()


class Sliding(_Binary):
    __slots__ = ()


class Seq(_Binary):
    __slots__ = ()


class Interrupt(_Binary):
    __slots__ = ()


class Parallel(Process):
    __slots__ = ()

    def __new__(cls, left: Process, sync: Iterable[Event], right: Process):
        return _node(cls, (left, _evset(sync), right), left.fv | right.fv)

    left = property(lambda s: s._f[0])
    sync = property(lambda s: s._f[1])
    right = property(lambda s: s._f[2])


class Throw(Process):
    __slots__ = ()

    def __new__(cls, left: Process, events: Iterable[Event], right: Process):
        return _node(cls, (left, _evset(events), right), left.fv | right.fv)

    left = property(lambda s: s._f[0])
    events = property(lambda s: s._f[1])
    right = property(lambda s: s._f[2])


class Hide(Process):
    __slots__ = ()

    def __new__(cls, proc: Process, events: Iterable[Event]):
        return _node(cls, (proc, _evset(events)), proc.fv)

    proc = property(lambda s: s._f[0])
    events = property(lambda s: s._f[1])


class Rename(Process):
    """Relational renaming; ``pairs`` holds (old, new) event pairs."""

    __slots__ = ()

    def __new__(cls, proc: Process, pairs: Iterable[tuple[Event, Event]]):
        rel = frozenset((a, b) for a, b in pairs)
        return _node(cls, (proc, rel), proc.fv)

    proc = property(lambda s: s._f[0])
    pairs = property(lambda s: s._f[1])

    def image(self) -> dict[Event, list[Event]]:
        out: dict[Event, list[Event]] = {}
        for a, b in sorted(self.pairs, key=lambda p: (str(p[0]), str(p[1]))):
            out.setdefault(a, []).append(b)
        return out


class Var(Process):
    __slots__ = ()

    def __new__(cls, name: str):
        return _node(cls, (name,), frozenset((name,)))

    name = property(lambda s: s._f[0])


class Rec(Process):
    __slots__ = ()

    def __new__(cls, name: str, body: Process):
        return _node(cls, (name, body), body.fv - {name})

    name = property(lambda s: s._f[0])
    body = property(lambda s: s._f[1])


class MuRec(Process):
    """Component ``index`` of a group of mutually recursive definitions."""

    __slots__ = ()

    def __new__(cls, index: int, names: tuple[str, ...], bodies: tuple[Process, ...]):
        names = tuple(names)
        bodies = tuple(bodies)
        if len(names) != len(bodies) or not 0 <= index < len(names):
            raise ValueError("malformed recursion group")
        fv = frozenset().union(*(b.fv for b in bodies)) - set(names)
        return _node(cls, (index, names, bodies), fv)

    index = property(lambda s: s._f[0])
    names = property(lambda s: s._f[1])
    bodies = property(lambda s: s._f[2])

    @property
    def name(self) -> str:
        return self._f[1][self._f[0]]


class Prioritise(Process):
    __slots__ = ()

    def __new__(cls, proc: Process, order: "PriorityOrder"):
        return _node(cls, (proc, order), proc.fv)

    proc = property(lambda s: s._f[0])
    order = property(lambda s: s._f[1])


class Machine(Process):
    """A state of an explicit, already explored LTS, so that a compressed
    component can be used inside a larger term."""

    __slots__ = ()

    def __new__(cls, lts, state: int = 0):
        return _node(cls, (lts, state), _NOFV)

    lts = property(lambda s: s._f[0])
    state = property(lambda s: s._f[1])


def mutual(defs: dict[str, Process] | list[tuple[str, Process]]) -> dict[str, Process]:
    """Close a system of equations, returning one closed term per name."""
    items = list(defs.items()) if isinstance(defs, dict) else list(defs)
    names = tuple(n for n, _ in items)
    bodies = tuple(b for _, b in items)
    return {n: MuRec(i, names, bodies) for i, n in enumerate(names)}


def ext_choice(procs: Iterable[Process]) -> Process:
    """Right-nested external choice; the empty choice is STOP."""
    procs = list(procs)
    if not procs:
        return Stop()
    out = procs[-1]
    for p in reversed(procs[:-1]):
        out = ExtChoice(p, out)
    return out


def int_choice(procs: Iterable[Process]) -> Process:
    procs = list(procs)
    if not procs:
        raise ValueError("empty internal choice")
    out = procs[-1]
    for p in reversed(procs[:-1]):
        out = IntChoice(p, out)
    return out


def interleave(left: Process, right: Process) -> Process:
    return Parallel(left, (), right)


# ---------------------------------------------------------------------------
# Substitution


_SUBST_CACHE: dict = {}


def substitute(p: Process, mapping: dict[str, Process]) -> Process:
    """Capture-free substitution of closed terms for free variables."""
    if not (p.fv & mapping.keys()):
        return p
    key = (p, tuple(sorted(mapping.items(), key=lambda kv: kv[0])))
    hit = _SUBST_CACHE.get(key)
    if hit is not None:
        return hit
    out = _subst(p, mapping)
    _SUBST_CACHE[key] = out
    return out


def _subst(p: Process, m: dict[str, Process]) -> Process:
    if isinstance(p, Var):
        return m.get(p.name, p)
    if isinstance(p, Rec):
        inner = {k: v for k, v in m.items() if k != p.name}
        return Rec(p.name, substitute(p.body, inner)) if inner else p
    if isinstance(p, MuRec):
        inner = {k: v for k, v in m.items() if k not in p.names}
        if not inner:
            return p
        return MuRec(p.index, p.names, tuple(substitute(b, inner) for b in p.bodies))
    f = p._f
    new = tuple(substitute(x, m) if isinstance(x, Process) else x for x in f)
    return type(p)(*new)


def clear_caches() -> None:
    """Drop memo tables (interned terms stay valid)."""
    _SUBST_CACHE.clear()
    from . import semantics

    semantics.clear_cache()


def events_of(p: Process) -> set[Event]:
    """Visible events syntactically mentioned by a term."""
    out: set[Event] = set()
    seen: set[Process] = set()
    stack = [p]
    while stack:
        q = stack.pop()
        if q in seen:
            continue
        seen.add(q)
        if isinstance(q, Prefix):
            out.add(q.event)
        elif isinstance(q, (Chaos, Run, Hide, Throw, Parallel)):
            out.update(q.events if not isinstance(q, Parallel) else q.sync)
        elif isinstance(q, Rename):
            for a, b in q.pairs:
                out.add(a)
                out.add(b)
        elif isinstance(q, Wait):
            if q.t > 0:
                out.add(TOCK)
        elif isinstance(q, Prioritise):
            out.update(q.order.x_set)
        elif isinstance(q, Machine):
            out.update(q.lts.labels())
        for x in q._f:
            if isinstance(x, Process):
                stack.append(x)
            elif isinstance(x, tuple) and x and isinstance(x[0], Process):
                stack.extend(x)
    out.discard(TAU)
    out.discard(TICK)
    return out


# ---------------------------------------------------------------------------
# Priority


class PriorityError(ValueError):
    pass


class NonMaximalX(PriorityError):
    def __init__(self, event: Event):
        super().__init__(f"event {event} may occur alongside tau but is not maximal")
        self.event = event


class NonMaximalIncomparable(PriorityError):
    def __init__(self, event: Event):
        super().__init__(f"event {event} is incomparable to tau but not maximal")
        self.event = event


class CycleInOrder(PriorityError):
    def __init__(self, events):
        self.events = tuple(sorted_events(events))
        super().__init__("priority order has a cycle through " + ", ".join(map(str, self.events)))


class PriorityOrder:
    """A strict partial order on events plus the set X of events allowed
    alongside tau. Every visible event outside X sits below tau."""

    __slots__ = ("pairs", "x_set", "above")
    _table: dict = {}

    def __new__(cls, pairs: Iterable[tuple[Event, Event]], x_set: Iterable[Event]):
        closure = _transitive_closure(frozenset(pairs))
        xs = frozenset(x_set)
        key = (closure, xs)
        obj = cls._table.get(key)
        if obj is None:
            obj = object.__new__(cls)
            obj.pairs = closure
            obj.x_set = xs
            above: dict[Event, set] = {}
            for lo, hi in closure:
                above.setdefault(lo, set()).add(hi)
            obj.above = {k: frozenset(v) for k, v in above.items()}
            cls._table[key] = obj
        return obj

    def __reduce__(self):
        return (PriorityOrder, (self.pairs, self.x_set))

    def __repr__(self) -> str:
        ps = ", ".join(sorted(f"{a}<{b}" for a, b in self.pairs))
        xs = ", ".join(sorted(map(str, self.x_set)))
        return f"PriorityOrder({{{ps}}}, X={{{xs}}})"

    def less(self, a: Event, b: Event) -> bool:
        """a < b in the order extended with y < tau for visible y outside X."""
        if b is TAU or b is TICK:
            return a not in self.x_set and a is not TAU and a is not TICK
        return b in self.above.get(a, ())

    def maximal(self, a: Event) -> bool:
        return not self.above.get(a)


def _transitive_closure(pairs: frozenset) -> frozenset:
    succ: dict = {}
    for a, b in pairs:
        succ.setdefault(a, set()).add(b)
    out = set()
    for a in list(succ):
        stack = list(succ[a])
        seen = set()
        while stack:
            b = stack.pop()
            if b in seen:
                continue
            seen.add(b)
            out.add((a, b))
            stack.extend(succ.get(b, ()))
    return frozenset(out)


def validate_priority(order: PriorityOrder, alphabet: Iterable[Event]) -> None:
    """Raise unless ``order`` is a legal argument for prioritise over ``alphabet``.

    Events of ``alphabet`` outside X are placed below tau by the extension, so
    only X members and events the extension does not reach have to be maximal.
    """
    universe = set(alphabet)
    cyc = {a for a, b in order.pairs if a is b}
    if cyc:
        raise CycleInOrder(cyc)
    for a, b in sorted(order.pairs, key=lambda p: (str(p[0]), str(p[1]))):
        if a in (TAU, TICK) or b in (TAU, TICK):
            raise NonMaximalIncomparable(a if a in (TAU, TICK) else b)
    for x in sorted_events(order.x_set):
        if not order.maximal(x):
            raise NonMaximalX(x)
    mentioned = {a for a, _ in order.pairs}
    for a in sorted_events(mentioned):
        if a not in order.x_set and a not in universe and not order.maximal(a):
            raise NonMaximalIncomparable(a)
