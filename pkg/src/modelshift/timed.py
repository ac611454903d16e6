"""Discrete time: tock discipline, maximal progress, timed-failures model
shifting, the refusal-testing projection and timed specification
combinators."""

from __future__ import annotations

import random
from collections import deque
from itertools import product

from .semantics import DEFAULT_CAP, Lts, compact, compress, explore
from .syntax import (
    STAB,
    TAU,
    TICK,
    TOCK,
    Div,
    Event,
    ExtChoice,
    Hide,
    IntChoice,
    Parallel,
    Prefix,
    PriorityOrder,
    Prioritise,
    Process,
    Rec,
    Rename,
    Run,
    Seq,
    Sliding,
    Stop,
    Var,
    Wait,
    ev,
    events_of,
    ext_choice,
    interleave,
    mutual,
    prime,
    sorted_events,
)


class TockDisciplineError(ValueError):
    def __init__(self, message: str, path: list[Event]):
        super().__init__(f"{message} after <{', '.join(map(str, path))}>")
        self.path = path


class TockInUnstableState(TockDisciplineError):
    pass


class StableStateWithoutTock(TockDisciplineError):
    pass


def _visible(p: Process, alphabet=()) -> list[Event]:
    evs = set(events_of(p)) | set(alphabet)
    return sorted_events(e for e in evs if e.role not in ("tau", "tick", "tock"))


def maximal_progress(p: Process, alphabet=()) -> Process:
    """Give tau and tick priority over tock; every other event is unaffected."""
    return Prioritise(p, PriorityOrder([], _visible(p, alphabet)))


def _stable(lts: Lts, s: int) -> bool:
    return all(e is not TAU and e is not TICK for e, _ in lts.step(s))


def _path(parent: dict, s: int) -> list[Event]:
    out = []
    while parent[s] is not None:
        s, e = parent[s]
        if e is not TAU:
            out.append(e)
    return out[::-1]


def discipline_violation(lts: Lts) -> TockDisciplineError | None:
    """The first state (in BFS order) breaking tock discipline, if any."""
    parent: dict = {lts.root: None}
    dq = deque([lts.root])
    while dq:
        s = dq.popleft()
        stable = _stable(lts, s)
        has_tock = any(e is TOCK for e, _ in lts.step(s))
        if stable and not has_tock:
            return StableStateWithoutTock("stable state cannot perform tock", _path(parent, s))
        if not stable and has_tock:
            return TockInUnstableState("unstable state can perform tock", _path(parent, s))
        for e, d in lts.step(s):
            if d not in parent:
                parent[d] = (s, e)
                dq.append(d)
    return None


def check_tock_discipline(p: Process | Lts, cap: int = DEFAULT_CAP) -> None:
    """Raise unless tock is offered in every stable state and no unstable one.
    Ticking states count as unstable."""
    lts = p if isinstance(p, Lts) else explore(p, cap)
    err = discipline_violation(lts)
    if err is not None:
        raise err


def instantaneous_withdrawals(p: Process | Lts, cap: int = DEFAULT_CAP) -> list[str]:
    """Warnings for tocks that withdraw an offer: a stable state accepts
    ``a`` (so ``a`` cannot be refused up to the tock) yet ``a`` is
    impossible straight after the tock."""
    lts = p if isinstance(p, Lts) else explore(p, cap)
    closure: dict[int, set] = {}

    def reach(s: int) -> set:
        hit = closure.get(s)
        if hit is None:
            seen = {s}
            stack = [s]
            while stack:
                x = stack.pop()
                for e, d in lts.step(x):
                    if e is TAU and d not in seen:
                        seen.add(d)
                        stack.append(d)
            hit = closure[s] = {e for x in seen for e, _ in lts.step(x) if e is not TAU}
        return hit

    out = []
    for s in range(len(lts)):
        if not _stable(lts, s):
            continue
        offered = {e for e, _ in lts.step(s) if e is not TOCK}
        for e, d in lts.step(s):
            if e is TOCK:
                lost = offered - reach(d)
                if lost:
                    names = ", ".join(sorted(map(str, lost)))
                    out.append(f"state {s}: tock withdraws {names}")
    return out


# ---------------------------------------------------------------------------
# Timed failures by model shifting


def shift_TF(p: Process, alphabet, with_stab: bool = False, check: bool = True, cap: int = DEFAULT_CAP) -> Process:
    """Refusal flags ``a'`` between tocks, and no ordinary event after a
    flag until the next tock. ``with_stab`` adds a final stability flag."""
    sigma = [e for e in alphabet if e is not TOCK]
    if check:
        check_tock_discipline(p, cap)
    primes = [prime(a) for a in sigma]
    order = PriorityOrder([(prime(a), a) for a in sigma], sigma)
    layer = Prioritise(interleave(p, Run(primes + ([STAB] if with_stab else []))), order)
    end = [Prefix(STAB, Stop())] if with_stab else []
    defs = mutual(
        {
            "REG": ext_choice(
                [Prefix(TOCK, Var("REG"))]
                + [Prefix(a, Var("REG")) for a in sigma]
                + [Prefix(a, Var("REG1")) for a in primes]
                + end
            ),
            "REG1": ext_choice([Prefix(TOCK, Var("REG"))] + [Prefix(a, Var("REG1")) for a in primes] + end),
        }
    )
    sync = sigma + primes + [TOCK] + ([STAB] if with_stab else [])
    return Parallel(layer, sync, defs["REG"])


def regp(alphabet) -> Process:
    """Ordinary events run freely from the unstable start; once stable only
    tock continues, and an event leads to DIV."""
    sigma = [e for e in alphabet if e is not TOCK]
    free = ext_choice([Prefix(a, Var("REGP")) for a in sigma])
    settled = ext_choice([Prefix(TOCK, Var("REGP"))] + [Prefix(a, Div()) for a in sigma])
    return Rec("REGP", Sliding(free, settled))


def project_TF_to_RT(p: Process, alphabet, check: bool = True, cap: int = DEFAULT_CAP) -> Process:
    sigma = [e for e in alphabet if e is not TOCK]
    if check:
        check_tock_discipline(p, cap)
    return Parallel(p, sigma + [TOCK], regp(sigma))


# ---------------------------------------------------------------------------
# Combinators


def tstop() -> Process:
    """The process that only lets time pass."""
    return Rec("TSTOP", Prefix(TOCK, Var("TSTOP")))


def idling(branches: list[Process], name: str) -> Process:
    """``rec name. branches [] tock -> name``: offers that persist over time."""
    return Rec(name, ext_choice(list(branches) + [Prefix(TOCK, Var(name))]))


def tchaos(A) -> Process:
    """Each time unit, independently, any of ``A`` may be offered or refused."""
    A = sorted_events(A)
    onestep = Rec("ONESTEP", Sliding(ext_choice([Prefix(a, Var("ONESTEP")) for a in A]), Wait(1)))
    return Rec("TCHAOS", Seq(onestep, Var("TCHAOS")))


def lazy_abstract(p: Process, A) -> Process:
    """``(p [|A|] tchaos(A)) \\ A`` with tock synchronised, then maximal progress."""
    A = frozenset(A)
    if TOCK in A:
        raise ValueError("tock cannot be abstracted")
    chaos = compress(tchaos(A))
    return maximal_progress(Hide(Parallel(p, A | {TOCK}, chaos), A), _visible(p))


def timed_enable(E, R, m: int) -> Process:
    """Offer deadline: ``R`` events reset a clock of ``m`` tocks; while it
    runs only ``R - E`` is possible, and when it expires all of ``R`` is
    offered (persistently) until one happens."""
    E, R = frozenset(E), frozenset(R)
    if not E <= R:
        raise ValueError("E must be a subset of R")
    if m < 0:
        raise ValueError("m must be non-negative")
    rest = sorted_events(R - E)
    defs: dict[str, Process] = {"EN": idling([Prefix(x, Var(f"DIS{m}")) for x in sorted_events(R)], "EN_IDLE")}
    for k in range(1, m + 1):
        defs[f"DIS{k}"] = ext_choice([Prefix(x, Var(f"DIS{m}")) for x in rest] + [Seq(Wait(1), Var(f"DIS{k - 1}"))])
    defs["DIS0"] = Var("EN")
    return mutual(defs)[f"DIS{m}"]


# ---------------------------------------------------------------------------
# Bounded buffer specifications


def buffer_events(data) -> dict[str, list[Event]]:
    return {ch: [ev(f"{ch}.{x}") for x in data] for ch in ("left", "right", "leftnd", "rightnd")}


def _seqs(data, bound: int):
    for k in range(bound + 1):
        yield from product(data, repeat=k)


def _name(prefix: str, s: tuple, *extra) -> str:
    return "_".join([prefix, "".join(map(str, s)) or "e", *map(str, extra)])


def tfbuff(n: int, bound: int, data=(0, 1)) -> Process:
    """Hand-coded tock-CSP bounded buffer with offer deadline ``n``."""
    data = tuple(data)
    left = {x: ev(f"left.{x}") for x in data}
    right = {x: ev(f"right.{x}") for x in data}
    defs: dict[str, Process] = {}
    for s in _seqs(data, bound):
        for k in range(n + 1):
            out = [Prefix(right[s[0]], Var(_name("TFB", s[1:], 0)))] if s else []
            ins = [Prefix(left[x], Var(_name("TFB", s + (x,), 0))) for x in data]
            if k < n:
                offers = out + (ins if len(s) < bound else [])
                body = Sliding(ext_choice(offers), Prefix(TOCK, Var(_name("TFB", s, k + 1))))
            else:
                branches = list(out)
                if not s:
                    branches += ins
                if 0 < len(s) < bound:
                    branches.append(Sliding(ext_choice(ins), Stop()))
                branches.append(Prefix(TOCK, Var(_name("TFB", s, k))))
                body = ext_choice(branches)
            defs[_name("TFB", s, k)] = body
    return mutual(defs)[_name("TFB", (), 0)]


def tfb(bound: int, data=(0, 1)) -> Process:
    """Buffer behaviour with deterministic and nondeterministic variants of
    each channel, as a timed process that idles in every state."""
    data = tuple(data)
    evs = {ch: dict(zip(data, es)) for ch, es in buffer_events(data).items()}
    defs: dict[str, Process] = {}
    for s in _seqs(data, bound):
        branches: list[Process] = []
        if s:
            nxt = Var(_name("B", s[1:]))
            branches += [Prefix(evs["right"][s[0]], nxt), Prefix(evs["rightnd"][s[0]], nxt)]
        if not s:
            branches += [Prefix(evs["left"][x], Var(_name("B", (x,)))) for x in data]
        if len(s) < bound:
            branches += [Prefix(evs["leftnd"][x], Var(_name("B", s + (x,)))) for x in data]
        defs[_name("B", s)] = ext_choice(branches + [Prefix(TOCK, Var(_name("B", s)))])
    return mutual(defs)[_name("B", ())]


def composed_buffer_spec(n: int, bound: int, data=(0, 1)) -> Process:
    """The buffer split into behaviour, offer deadline and nondeterminism,
    with the nondeterministic channels renamed back onto the real ones."""
    data = tuple(data)
    evs = buffer_events(data)
    real = evs["left"] + evs["right"]
    nd = evs["leftnd"] + evs["rightnd"]
    enable = timed_enable(real, real + nd, n)
    core = Parallel(tfb(bound, data), real + nd + [TOCK], enable)
    spec = Parallel(core, nd + [TOCK], tchaos(nd))
    pairs = [(e, e) for e in real] + list(zip(nd, real))
    return maximal_progress(Rename(spec, pairs), real)


# ---------------------------------------------------------------------------
# Random tock-disciplined processes


class TimedGenerator:
    """Random tock-CSP terms; callers keep the ones that pass the tock
    discipline check after maximal progress."""

    def __init__(self, rng: random.Random, alphabet):
        self.rng = rng
        self.sigma = [e for e in alphabet if e is not TOCK]
        self._fresh = 0

    def fresh(self) -> str:
        self._fresh += 1
        return f"T{self._fresh}"

    def subset(self, nonempty: bool = False) -> frozenset:
        while True:
            s = frozenset(e for e in self.sigma if self.rng.random() < 0.5)
            if s or not nonempty:
                return s

    def leaf(self, usable: tuple) -> Process:
        r = self.rng
        opts = [tstop, tstop, lambda: Seq(Wait(1), tstop()), lambda: tchaos(self.subset(True)), Div]
        if usable:
            opts += [lambda: Var(r.choice(usable))] * 3
        return r.choice(opts)()

    def term(self, depth: int, bound: tuple = (), guarded: bool = False) -> Process:
        usable = bound if guarded else ()
        if depth <= 0 or self.rng.random() < 0.15:
            return self.leaf(usable)
        d = depth - 1
        r = self.rng
        kind = r.choice(["prefix"] * 3 + ["idle"] * 3 + ["tock"] * 2 + ["int", "ext", "sliding", "par", "hide", "rec", "rec"])
        if kind == "prefix":
            return Prefix(r.choice(self.sigma), self.term(d, bound, True))
        if kind == "tock":
            return Prefix(TOCK, self.term(d, bound, True))
        if kind == "idle":
            name = self.fresh()
            a = r.choice(self.sigma)
            return Rec(name, ExtChoice(Prefix(a, self.term(d, bound, True)), Prefix(TOCK, Var(name))))
        if kind in ("int", "ext", "sliding"):
            cls = {"int": IntChoice, "ext": ExtChoice, "sliding": Sliding}[kind]
            return cls(self.term(d, bound, guarded), self.term(d, bound, guarded))
        if kind == "par":
            return Parallel(self.term(d), self.subset() | {TOCK}, self.term(d))
        if kind == "hide":
            return Hide(self.term(d), self.subset(True))
        name = self.fresh()
        return Rec(name, self.term(d, bound + (name,), False))


def random_timed_process(rng: random.Random, alphabet, depth: int = 3, cap: int = 2000) -> Process:
    """A random process over ``alphabet`` and tock that, after maximal
    progress, satisfies tock discipline and has at most ``cap`` states."""
    from .semantics import StateCapExceeded

    gen = TimedGenerator(rng, alphabet)
    while True:
        p = maximal_progress(gen.term(depth), gen.sigma)
        try:
            lts = explore(p, cap)
        except StateCapExceeded:
            continue
        if discipline_violation(lts) is None:
            return p


def random_timed_pairs(seed: int, n: int, alphabet, depth: int = 3) -> list[tuple[Process, Process]]:
    """Spec/impl pairs: unrelated terms, internal-choice weakenings and
    perturbations by a choice operator."""
    rng = random.Random(seed)
    sigma = [e for e in alphabet if e is not TOCK]
    out = []
    for k in range(n):
        p = random_timed_process(rng, alphabet, depth)
        mode = k % 3
        if mode == 0:
            out.append((p, random_timed_process(rng, alphabet, depth)))
            continue
        q = random_timed_process(rng, alphabet, max(1, depth - 1))
        if mode == 1:
            out.append((maximal_progress(IntChoice(p, q), sigma), p))
        else:
            op = rng.choice([ExtChoice, IntChoice, Sliding])
            cand = maximal_progress(op(p, q), sigma)
            if discipline_violation(explore(cand)) is None:
                out.append((p, cand))
            else:
                out.append((q, p))
    return out
