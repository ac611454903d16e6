"""Seedable generators of test processes, plus the fixed distinguishing rows."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .dsl import parse
from .semantics import StateCapExceeded, explore
from .syntax import (
    Alphabet,
    Chaos,
    Div,
    ExtChoice,
    Hide,
    IntChoice,
    Interrupt,
    Parallel,
    Prefix,
    Process,
    Rec,
    Rename,
    Seq,
    Skip,
    Sliding,
    Stop,
    Throw,
    Var,
)

SIGMA = Alphabet.of("a", "b")

DISTINGUISHING = [
    # spec, impl, models that pass, models that fail
    ("a -> DIV", "a -> STOP", ("T",), ("F",)),
    ("((a -> DIV) [] DIV) |~| STOP", "a -> DIV", ("F",), ("R",)),
    ("(a -> DIV) |~| (DIV /\\ (a -> STOP))", "a -> STOP", ("R", "A"), ("RT", "FL")),
    ("(a -> STOP) |~| (b -> STOP)", "(a -> STOP) [] (b -> STOP)", ("R", "RT"), ("A", "FL")),
]


def distinguishing_rows():
    """The four distinguishing rows as parsed processes."""
    out = []
    for spec, impl, ok, bad in DISTINGUISHING:
        out.append((parse(spec, alphabet=SIGMA)[0], parse(impl, alphabet=SIGMA)[0], ok, bad))
    return out


class TermGenerator:
    """Random terms with guarded recursion, so every LTS is finite.

    Recursion variables may only occur under a prefix, and never beneath
    parallel, hiding, renaming, the left of ``;``, or the left of an
    interrupt or throw.
    """

    def __init__(self, rng: random.Random, alphabet=SIGMA, tick: bool = True):
        self.rng = rng
        self.sigma = list(alphabet)
        self.tick = tick
        self._fresh = 0

    def subset(self, nonempty: bool = False) -> frozenset:
        while True:
            s = frozenset(e for e in self.sigma if self.rng.random() < 0.5)
            if s or not nonempty:
                return s

    def leaf(self, usable: tuple) -> Process:
        opts = [Stop, Stop, Div, lambda: Chaos(self.subset(True))]
        if self.tick:
            opts.append(Skip)
        if usable:
            opts += [lambda: Var(self.rng.choice(usable))] * 3
        return self.rng.choice(opts)()

    def term(self, depth: int, bound: tuple = (), guarded: bool = False) -> Process:
        usable = bound if guarded else ()
        if depth <= 0 or self.rng.random() < 0.15:
            return self.leaf(usable)
        d = depth - 1
        r = self.rng
        kind = r.choice(
            ["prefix"] * 5 + ["int", "ext", "ext", "sliding", "seq", "par", "hide", "rename", "interrupt", "throw", "rec", "rec"]
        )
        if kind == "prefix":
            return Prefix(r.choice(self.sigma), self.term(d, bound, True))
        if kind in ("int", "ext", "sliding"):
            cls = {"int": IntChoice, "ext": ExtChoice, "sliding": Sliding}[kind]
            return cls(self.term(d, bound, guarded), self.term(d, bound, guarded))
        if kind == "seq":
            return Seq(self.term(d), self.term(d, bound, guarded))
        if kind == "interrupt":
            return Interrupt(self.term(d), self.term(d, bound, guarded))
        if kind == "throw":
            return Throw(self.term(d), self.subset(True), self.term(d, bound, guarded))
        if kind == "par":
            return Parallel(self.term(d), self.subset(), self.term(d))
        if kind == "hide":
            return Hide(self.term(d), self.subset(True))
        if kind == "rename":
            pairs = []
            for e in self.sigma:
                images = [f for f in self.sigma if r.random() < 0.5] or [r.choice(self.sigma)]
                pairs += [(e, f) for f in images]
            return Rename(self.term(d), pairs)
        self._fresh += 1
        name = f"X{self._fresh}"
        return Rec(name, self.term(d, bound + (name,), False))


def random_process(rng: random.Random, depth: int = 4, alphabet=SIGMA, cap: int = 3000, tick: bool = True) -> Process:
    """A random closed term whose LTS has at most ``cap`` states."""
    gen = TermGenerator(rng, alphabet, tick)
    while True:
        p = gen.term(depth)
        try:
            explore(p, cap)
        except StateCapExceeded:
            continue
        return p


@dataclass
class Pair:
    spec: Process
    impl: Process
    kind: str


def random_pairs(seed: int, n: int, depth: int = 4, alphabet=SIGMA, tick: bool = True) -> list[Pair]:
    """``n`` spec/impl pairs: a mix of unrelated terms, internal-choice
    weakenings (which always refine), small perturbations and swapped
    choice operators."""
    rng = random.Random(seed)
    out = []
    for k in range(n):
        mode = k % 4
        # composite pairs wrap their parts in one more operator, so the
        # parts get one level less to keep every term within ``depth``
        p = random_process(rng, depth if mode == 0 else depth - 1, alphabet, tick=tick)
        if mode == 0:
            out.append(Pair(p, random_process(rng, depth, alphabet, tick=tick), "independent"))
        elif mode == 1:
            q = random_process(rng, max(1, depth - 2), alphabet, tick=tick)
            out.append(Pair(IntChoice(p, q), p, "weakened"))
        elif mode == 2:
            q = random_process(rng, max(1, depth - 2), alphabet, tick=tick)
            op = rng.choice([ExtChoice, IntChoice, Sliding])
            out.append(Pair(p, op(p, q), "perturbed"))
        else:
            # the same two branches under different choice operators; these
            # pairs tend to separate the models from one another
            q = random_process(rng, depth - 1, alphabet, tick=tick)
            ops = [IntChoice, ExtChoice, Sliding]
            o1 = rng.choice(ops)
            o2 = rng.choice([o for o in ops if o is not o1])
            out.append(Pair(o1(p, q), o2(p, q), "choice"))
    return out
