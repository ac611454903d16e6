"""Bounded denotational oracle over finite linear observations.

An observation is a plain tuple ``(A0, a1, A1, ..., an, An)`` whose slots
are frozensets of events or :data:`BULLET`. A terminated observation ends
``(..., an, BULLET, TICK)``. The projections below map observations into the
coarser models T, F, R, A, RT and the discrete timed failures model D.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, Union

from .semantics import Lts
from .syntax import TAU, TERM, TICK, TOCK, Alphabet, Event, sorted_events


class _Bullet:
    __slots__ = ()
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = object.__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "•"

    def __reduce__(self):
        return (_Bullet, ())


BULLET = _Bullet()

Slot = Union[frozenset, _Bullet]
Observation = tuple

MODEL_NAMES = ("T", "F", "R", "A", "RT", "D")


class ModelRequiresTock(ValueError):
    pass


def _fmt_slot(x) -> str:
    if x is BULLET:
        return "•"
    if isinstance(x, Event):
        return str(x)
    return "{" + ",".join(map(str, sorted_events(x))) + "}"


def _fmt_trace(s) -> str:
    return "<" + ",".join(map(str, s)) + ">"


def format_observation(obs: Observation) -> str:
    return "<" + ", ".join(_fmt_slot(x) for x in obs) + ">"


# ---------------------------------------------------------------------------
# Model observations


@dataclass(frozen=True)
class TraceObs:
    trace: tuple

    def __str__(self) -> str:
        return _fmt_trace(self.trace)


@dataclass(frozen=True)
class FailureObs:
    trace: tuple
    refusal: Slot

    def __str__(self) -> str:
        return f"({_fmt_trace(self.trace)}, {_fmt_slot(self.refusal)})"


@dataclass(frozen=True)
class RevivalObs:
    trace: tuple
    refusal: Slot
    revival: object  # Event or BULLET

    def __str__(self) -> str:
        return f"({_fmt_trace(self.trace)}, {_fmt_slot(self.refusal)}, {_fmt_slot(self.revival)})"


@dataclass(frozen=True)
class AcceptanceObs:
    trace: tuple
    acceptance: Slot

    def __str__(self) -> str:
        return f"({_fmt_trace(self.trace)}, {_fmt_slot(self.acceptance)})"


@dataclass(frozen=True)
class RTObs:
    entries: tuple

    def __str__(self) -> str:
        return "<" + ", ".join(_fmt_slot(x) for x in self.entries) + ">"


@dataclass(frozen=True)
class TimedObs:
    """Segments ``((s0, X0), (s1, X1), ...)`` with a tock between consecutive ones."""

    segments: tuple

    def __str__(self) -> str:
        parts = []
        for s, x in self.segments:
            parts.append(f"{_fmt_trace(s)}, {_fmt_slot(x)}")
        return "(" + ", tock, ".join(parts) + ")"


@dataclass(frozen=True)
class FLObs:
    """A finite linear observation, as a model observation of FL itself."""

    entries: tuple

    def __str__(self) -> str:
        return format_observation(self.entries)


ModelObservation = Union[FLObs, TraceObs, FailureObs, RevivalObs, AcceptanceObs, RTObs, TimedObs]


# ---------------------------------------------------------------------------
# Observation helpers


def events_of_obs(obs: Observation) -> tuple:
    return obs[1::2]


def slots_of_obs(obs: Observation) -> tuple:
    return obs[0::2]


def _normalise(obs: Observation) -> Observation:
    """Rewrite a terminated observation so that tick is an ordinary event
    followed by a bullet slot."""
    if obs and obs[-1] is TICK:
        return obs + (BULLET,)
    return obs


def is_well_formed(obs: Observation) -> bool:
    if len(obs) % 2 == 0:
        return obs[-1] is TICK and len(obs) >= 2 and obs[-2] is BULLET
    for i in range(0, len(obs) - 2, 2):
        a = obs[i]
        if a is not BULLET and obs[i + 1] not in a:
            return False
    return True


def extends(small: Observation, big: Observation) -> bool:
    """The extension order: ``small`` is below ``big``."""
    small, big = _normalise(small), _normalise(big)
    if len(small) > len(big):
        return False
    for i, x in enumerate(small):
        if i % 2:
            if x is not big[i]:
                return False
        elif x is not BULLET and x != big[i]:
            return False
    return True


# ---------------------------------------------------------------------------
# Enumeration


def encode_termination(lts: Lts) -> Lts:
    """Replace every tick by tau into a stable state offering only ``term``.

    This is the LTS-level image of ``P ; term -> STOP``.
    """
    if not lts.has_tick():
        return lts
    terms = list(lts.terms)
    trans = [list(ts) for ts in lts.trans]
    dead = len(terms)
    terms.append(None)
    trans.append([])
    gate = len(terms)
    terms.append(None)
    trans.append([(TERM, dead)])
    out = []
    for ts in trans:
        out.append(tuple((TAU, gate) if e is TICK else (e, d) for e, d in ts))
    return Lts(terms, out)


def fl_observations(lts: Lts, max_events: int) -> set[Observation]:
    """All finite linear observations with at most ``max_events`` events.

    A state is stable when it has neither tau nor tick; its acceptance is
    the set of its visible initials. Tick does not consume budget.
    """
    closure_memo: dict[int, frozenset] = {}

    def closure(s: int) -> frozenset:
        hit = closure_memo.get(s)
        if hit is None:
            seen = {s}
            stack = [s]
            while stack:
                x = stack.pop()
                for e, d in lts.step(x):
                    if e is TAU and d not in seen:
                        seen.add(d)
                        stack.append(d)
            hit = closure_memo[s] = frozenset(seen)
        return hit

    def stable(s: int) -> bool:
        return all(e is not TAU and e is not TICK for e, _ in lts.step(s))

    local_memo: dict[tuple[int, int], frozenset] = {}
    obs_memo: dict[tuple[int, int], frozenset] = {}

    def local(s: int, k: int) -> frozenset:
        key = (s, k)
        hit = local_memo.get(key)
        if hit is not None:
            return hit
        out = {(BULLET,)}
        st = stable(s)
        acc = frozenset(e for e, _ in lts.step(s)) if st else None
        if st:
            out.add((acc,))
        for e, d in lts.step(s):
            if e is TAU:
                continue
            if e is TICK:
                out.add((BULLET, TICK))
                continue
            if k == 0:
                continue
            for rest in obs(d, k - 1):
                out.add((BULLET, e) + rest)
                if st:
                    out.add((acc, e) + rest)
        hit = local_memo[key] = frozenset(out)
        return hit

    def obs(s: int, k: int) -> frozenset:
        key = (s, k)
        hit = obs_memo.get(key)
        if hit is None:
            acc: set = set()
            for t in closure(s):
                acc |= local(t, k)
            hit = obs_memo[key] = frozenset(acc)
        return hit

    return set(obs(lts.root, max_events))


@lru_cache(maxsize=None)
def _subsets(universe: frozenset) -> tuple[frozenset, ...]:
    items = sorted_events(universe)
    return tuple(frozenset(c) for r in range(len(items) + 1) for c in combinations(items, r))


def _refusals(slot, sigma: frozenset) -> tuple:
    if slot is BULLET:
        return (BULLET,)
    return _subsets(sigma - slot) + (BULLET,)


def _project_one(model: str, obs: Observation, sigma: frozenset) -> Iterable:
    obs = _normalise(obs)
    evs = obs[1::2]
    slots = obs[0::2]
    if model == "T":
        yield TraceObs(evs)
    elif model == "F":
        for x in _refusals(slots[-1], sigma):
            yield FailureObs(evs, x)
    elif model == "R":
        if evs:
            for x in _refusals(slots[-2], sigma):
                yield RevivalObs(evs[:-1], x, evs[-1])
        for x in _refusals(slots[-1], sigma):
            yield RevivalObs(evs, x, BULLET)
    elif model == "A":
        yield AcceptanceObs(evs, slots[-1])
    elif model == "RT":
        for xs in product(*(_refusals(a, sigma) for a in slots)):
            entries = [xs[0]]
            for e, x in zip(evs, xs[1:]):
                entries += [e, x]
            yield RTObs(tuple(entries))
    elif model == "D":
        yield from _project_timed(evs, slots, sigma)
    else:
        raise ValueError(f"unknown model {model!r}")


def _project_timed(evs, slots, sigma: frozenset):
    choices = []
    segs: list[list] = [[]]
    for i, e in enumerate(evs):
        if e is TOCK:
            slot = slots[i]
            choices.append((frozenset(),) if slot is BULLET else _subsets(sigma - slot))
            segs.append([])
        else:
            segs[-1].append(e)
    choices.append(_refusals(slots[-1], sigma))
    for xs in product(*choices):
        yield TimedObs(tuple((tuple(s), x) for s, x in zip(segs, xs)))


def project(model: str, obs: Iterable[Observation], alphabet: Iterable[Event]) -> set:
    """Image of a set of observations under a model's defining relation.

    For F, R and RT a set slot also yields the bullet refusal; since
    observation sets of processes are downward closed this adds nothing
    the bullet weakening of the same observation would not.
    """
    if model == "TF":
        model = "D"
    sigma = frozenset(alphabet) - {TOCK}
    if model == "D" and TOCK not in frozenset(alphabet):
        raise ModelRequiresTock("the timed failures model needs tock in the alphabet")
    out: set = set()
    for o in obs:
        out.update(_project_one(model, o, sigma))
    return out


def _obs_key(x) -> tuple:
    return (_size(x), _weight(x), str(x))


def _weight(x) -> int:
    parts = x.entries if isinstance(x, (RTObs, FLObs)) else vars(x).values()
    return sum(len(p) for p in parts if isinstance(p, frozenset))


def _size(x) -> int:
    if isinstance(x, (RTObs, FLObs)):
        return len(x.entries) // 2
    if isinstance(x, TimedObs):
        return sum(len(s) + 1 for s, _ in x.segments) - 1
    if isinstance(x, RevivalObs):
        return len(x.trace) + (x.revival is not BULLET)
    return len(x.trace)


@dataclass
class OracleVerdict:
    holds: bool
    witness: object = None

    def __bool__(self) -> bool:
        return self.holds


def model_semantics(model: str, lts: Lts, max_events: int, alphabet: Iterable[Event]) -> set:
    return project(model, fl_observations(lts, max_events), alphabet)


def oracle_refines(model: str, spec: Lts, impl: Lts, max_events: int, alphabet: Iterable[Event] | None = None) -> OracleVerdict:
    """Decide ``spec [=_model impl`` by comparing bounded projections.

    ``model`` may also be ``"FL"`` (no projection) or ``"TF"`` (alias of D).
    Ticks are first encoded as a visible ``term`` event on both sides.
    """
    if model == "TF":
        model = "D"
    if spec.has_tick() or impl.has_tick():
        spec, impl = encode_termination(spec), encode_termination(impl)
    if alphabet is None:
        alphabet = {e for e in spec.labels() | impl.labels() if e.visible} - {TICK}
    alphabet = frozenset(alphabet)
    if TERM in spec.labels() | impl.labels():
        alphabet = alphabet | {TERM}
    if model == "FL":
        s = fl_observations(spec, max_events)
        i = fl_observations(impl, max_events)
        bad = {FLObs(o) for o in i - s}
    else:
        s = model_semantics(model, spec, max_events, alphabet)
        i = model_semantics(model, impl, max_events, alphabet)
        bad = i - s
    if not bad:
        return OracleVerdict(True)
    return OracleVerdict(False, min(bad, key=_obs_key))


# ---------------------------------------------------------------------------
# Induced order


def all_observations(alphabet: Iterable[Event], n: int) -> list[Observation]:
    """Every well-formed observation with exactly ``n`` events."""
    sigma = frozenset(alphabet)
    evs = sorted_events(sigma)
    slots = list(_subsets(sigma)) + [BULLET]
    out: list[Observation] = []

    def build(prefix: tuple, k: int):
        for a in slots:
            cur = prefix + (a,)
            if k == 0:
                out.append(cur)
                continue
            for e in evs:
                if a is BULLET or e in a:
                    build(cur + (e,), k - 1)

    build((), n)
    return out


def _preimage(model: str, y, sigma: frozenset) -> list[Observation]:
    n = _size(y)
    if model == "R" and isinstance(y, RevivalObs) and y.revival is not BULLET:
        n = len(y.trace) + 1
    sig = sigma | ({TOCK} if model == "D" else set())
    return [o for o in all_observations(sig, n) if y in set(_project_one(model, o, sigma))]


def induced_leq(model: str, x, y, alphabet: Iterable[Event]) -> bool:
    """Decide ``x <= y`` in the order a model induces on its observations.

    Preimages are enumerated over observations no longer than ``y``'s
    (or ``x``'s for the existential side), which suffices since the
    projection preserves the event count.
    """
    if model == "TF":
        model = "D"
    sigma = frozenset(alphabet) - {TOCK}
    ys = _preimage(model, y, sigma)
    if not ys:
        raise ValueError(f"{y} is not an observation over the alphabet")
    xs = _preimage(model, x, sigma)
    return all(any(extends(a, b) for a in xs) for b in ys)


def downward_closed(model: str, sem: set, alphabet: Iterable[Event]) -> bool:
    """Check that ``sem`` is closed under the induced order, among
    observations no longer than its longest member (test helper)."""
    if model == "TF":
        model = "D"
    sigma = frozenset(alphabet) - {TOCK}
    if not sem:
        return True
    n = max(_size(y) for y in sem)
    cands: set = set()
    for k in range(n + 1):
        for o in all_observations(sigma, k):
            cands.update(_project_one(model, o, sigma))
    pre: dict = {}

    def preimage(x):
        hit = pre.get(x)
        if hit is None:
            hit = pre[x] = _preimage(model, x, sigma)
        return hit

    for x in cands - sem:
        xs = preimage(x)
        for y in sem:
            if not preimage(y):
                raise ValueError(f"{y} is not an observation over the alphabet")
            if all(any(extends(a, b) for a in xs) for b in preimage(y)):
                return False
    return True
