import random
from collections import deque
from itertools import product

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from modelshift.corpus import SIGMA, random_process
from modelshift.semantics import explore
from modelshift.rational import Transducer
from modelshift.syntax import TAU, TICK, ev

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def proc_from(seed: int, depth: int = 3, tick: bool = True):
    return random_process(random.Random(seed), depth, SIGMA, tick=tick)


@pytest.fixture(scope="session")
def corpus():
    from modelshift.corpus import random_pairs

    return random_pairs(7, 60)


def bounded_traces(lts, n: int) -> set:
    """Traces with at most ``n`` events (ticks free), by plain reachability."""
    if not hasattr(lts, "step"):
        lts = explore(lts)
    out = set()
    dq = deque([(lts.root, ())])
    seen = set()
    while dq:
        s, tr = dq.popleft()
        if (s, tr) in seen:
            continue
        seen.add((s, tr))
        out.add(tr)
        for e, d in lts.step(s):
            if e is TAU:
                dq.append((d, tr))
            elif e is TICK:
                out.add(tr + (TICK,))
            elif len(tr) < n:
                dq.append((d, tr + (e,)))
    return out


def language_prefixes(t: Transducer, alphabet, depth: int) -> set:
    """pref(L(t)) cut at ``depth`` by plain subset simulation."""
    succ = t.successors()

    def move(states, e):
        return frozenset(d for s in states for lab, d in succ[s] if lab is e)

    def completes(states) -> bool:
        # an accepted extension, if any, needs fewer letters than states
        for k in range(len(t.states)):
            for u in product(alphabet, repeat=k):
                cur = states
                for e in u:
                    cur = move(cur, e)
                if cur & t.accepting:
                    return True
        return False

    memo: dict = {}
    out = {()}
    layer = {(): frozenset({t.initial})}
    for _ in range(depth + 1):
        nxt = {}
        for w, states in layer.items():
            if states not in memo:
                memo[states] = completes(states)
            if memo[states]:
                out.add(w)
            if len(w) < depth:
                for e in alphabet:
                    m = move(states, e)
                    if m:
                        nxt[w + (e,)] = m
        layer = nxt
    return out


def random_nfa(rng: random.Random) -> tuple[Transducer, list]:
    alphabet = [ev(x) for x in "abc"[: rng.randint(1, 3)]]
    n = rng.randint(1, 5)
    states = [str(k) for k in range(n)]
    edges = [(s, e, d) for s in states for e in alphabet for d in states if rng.random() < 0.25]
    accepting = {s for s in states if rng.random() < 0.3}
    return Transducer(states, "0", accepting, edges), alphabet
