import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from modelshift.corpus import SIGMA, TermGenerator
from modelshift.dsl import DslError, parse, parse_script, pretty
from modelshift.syntax import (
    TAU,
    Alphabet,
    CycleInOrder,
    Event,
    NonMaximalX,
    Prefix,
    PriorityError,
    PriorityOrder,
    Stop,
    Wait,
    ev,
    prime,
    validate_priority,
)

from conftest import seeds

a, b = ev("a"), ev("b")


def test_parse_constants():
    assert parse("STOP")[0] is Stop()
    assert parse("a -> STOP")[0] is Prefix(a, Stop())


def test_terms_are_interned():
    assert Prefix(a, Stop()) is Prefix(a, Stop())
    assert ev("a") is a


def test_reserved_names_rejected():
    for name in ("tau", "tick", "tock", "stab", "done", "term"):
        with pytest.raises(ValueError):
            ev(name)
    with pytest.raises(DslError):
        parse_script("alphabet a, stab")


def test_wait_needs_nonnegative_int():
    with pytest.raises(ValueError):
        Wait(-1)


def test_alphabet_order_is_declaration_order():
    script = parse_script("alphabet b, a\nP = a -> STOP")
    assert [str(e) for e in script.alphabet] == ["b", "a"]


@given(seeds)
def test_pretty_parse_round_trip(seed):
    p = TermGenerator(random.Random(seed), SIGMA).term(5)
    assert parse(pretty(p), alphabet=SIGMA)[0] is p


def test_round_trip_thousand_terms():
    rng = random.Random(2024)
    gen = TermGenerator(rng, Alphabet.of("a", "b", "c"))
    for _ in range(1000):
        p = gen.term(4)
        assert parse(pretty(p), alphabet=Alphabet.of("a", "b", "c"))[0] is p


def test_priority_examples():
    validate_priority(PriorityOrder([(prime(a), a)], [a]), [a, prime(a)])
    with pytest.raises(CycleInOrder):
        validate_priority(PriorityOrder([(a, b), (b, a)], [a, b]), [a, b])
    with pytest.raises(NonMaximalX):
        validate_priority(PriorityOrder([(prime(a), a)], [prime(a)]), [a, prime(a)])


POOL = [ev("a"), ev("b"), ev("c"), prime(ev("a"))]


def _definitional(pairs, xs, universe) -> bool:
    # partial order, X maximal, and anything incomparable to tau maximal;
    # tau-comparable means in the alphabet but outside X
    closure = set(pairs)
    changed = True
    while changed:
        changed = False
        for p, q in list(closure):
            for r, s in list(closure):
                if q is r and (p, s) not in closure:
                    closure.add((p, s))
                    changed = True
    if any(p is q for p, q in closure):
        return False
    events = {p for p, _ in closure} | set(xs)
    for e in events:
        below_tau = e in universe and e not in xs
        if not below_tau and any(p is e for p, _ in closure):
            return False
    return True


@given(
    st.lists(st.tuples(st.sampled_from(POOL), st.sampled_from(POOL)), max_size=4),
    st.sets(st.sampled_from(POOL)),
    st.sets(st.sampled_from(POOL)),
)
def test_validate_priority_matches_definition(pairs, xs, universe):
    order = PriorityOrder(pairs, xs)
    try:
        validate_priority(order, universe)
        ok = True
    except PriorityError:
        ok = False
    assert ok == _definitional(pairs, frozenset(xs), frozenset(universe))


def test_event_roles():
    assert str(prime(a)) == "a'"
    assert not TAU.visible
    assert isinstance(prime(a), Event)
