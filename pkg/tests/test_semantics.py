import random

from hypothesis import given
from hypothesis import strategies as st

from modelshift.corpus import SIGMA, TermGenerator
from modelshift.dsl import parse
from modelshift.semantics import StateCapExceeded, compact, compress, explore, initials, prioritised_transitions, transitions
from modelshift.syntax import (
    TAU,
    TICK,
    Alphabet,
    Chaos,
    Div,
    ExtChoice,
    Prefix,
    PriorityOrder,
    Prioritise,
    Rec,
    Stop,
    Var,
    ev,
    interleave,
    prime,
    Run,
)

from conftest import proc_from, seeds

a, b = ev("a"), ev("b")


def test_basic_transitions():
    assert transitions(Stop()) == ()
    assert list(transitions(Div())) == [(TAU, Div())]
    assert list(transitions(ExtChoice(Prefix(a, Stop()), Prefix(b, Stop())))) == [(a, Stop()), (b, Stop())]


def test_priority_examples():
    order = PriorityOrder([(prime(a), a)], [a])
    both = ExtChoice(Prefix(a, Stop()), Prefix(prime(a), Stop()))
    assert [e for e, _ in prioritised_transitions(both, order)] == [a]
    assert [e for e, _ in prioritised_transitions(Prefix(prime(a), Stop()), order)] == [prime(a)]
    with_tau = ExtChoice(Div(), Prefix(prime(a), Stop()))
    assert [e for e, _ in prioritised_transitions(with_tau, order)] == [TAU]


def test_explore_recursion_and_stop():
    lts = explore(Rec("p", Prefix(a, Var("p"))))
    assert len(lts) == 2
    assert sorted(str(e) for ts in lts.trans for e, _ in ts) == ["a", "tau"]
    stop = explore(Stop())
    assert len(stop) == 1 and stop.n_transitions == 0


def test_chaos_reaches_stable_offer():
    # every state except the deadlocked STOP branch can reach a stable offer of a
    lts = explore(Chaos([a]))
    for s in range(len(lts)):
        if lts.terms[s] is Stop():
            continue
        seen, stack = {s}, [s]
        found = False
        while stack:
            x = stack.pop()
            if lts.stable[x] and any(e is a for e, _ in lts.step(x)):
                found = True
            for e, d in lts.step(x):
                if e is TAU and d not in seen:
                    seen.add(d)
                    stack.append(d)
        assert found


def test_random_terms_explore_or_hit_cap():
    sigma = Alphabet.of("a", "b", "c")
    for seed in range(500):
        p = TermGenerator(random.Random(seed), sigma).term(6)
        try:
            explore(p, 100_000)
        except StateCapExceeded:
            pass


@given(seeds)
def test_exploration_is_deterministic(seed):
    p = proc_from(seed)
    assert explore(p).dump() == explore(p).dump()


def _random_order(rng: random.Random):
    pool = list(SIGMA) + [prime(e) for e in SIGMA]
    pairs = [(prime(e), e) for e in SIGMA if rng.random() < 0.7]
    xs = [e for e in SIGMA if rng.random() < 0.7]
    return pool, PriorityOrder(pairs, xs)


@given(seeds, st.randoms(use_true_random=False))
def test_priority_soundness(seed, rng):
    pool, order = _random_order(rng)
    p = Prioritise(interleave(proc_from(seed), Run([prime(e) for e in SIGMA])), order)
    lts = explore(p)
    for s, term in enumerate(lts.terms):
        init = initials(term.proc)
        for e, _ in lts.step(s):
            for f in init:
                if f is not e and order.less(e, f):
                    raise AssertionError(f"{e} fired although {f} was available")


@given(seeds)
def test_maximal_events_are_transparent(seed):
    p = proc_from(seed)
    order = PriorityOrder([], SIGMA)
    for term in explore(p).terms:
        assert list(prioritised_transitions(term, order)) == list(transitions(term))


def test_tick_shares_tau_level():
    p = parse("SKIP [] a -> STOP", alphabet=SIGMA)[0]
    order = PriorityOrder([], [])
    assert [e for e, _ in prioritised_transitions(p, order)] == [TICK]


@given(seeds)
def test_compact_preserves_traces_and_failures(seed):
    from modelshift.refine import refines

    p = proc_from(seed)
    q = compress(p)
    for model in ("T", "FL"):
        assert refines(model, p, q, SIGMA).holds and refines(model, q, p, SIGMA).holds
    assert len(compact(explore(p))) <= len(explore(p))
