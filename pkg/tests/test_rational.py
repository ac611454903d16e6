import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import bounded_traces, language_prefixes, random_nfa
from modelshift.corpus import SIGMA, random_pairs
from modelshift.models import BULLET, all_observations, extends, is_well_formed
from modelshift.rational import (
    BUILTIN,
    CLOSE,
    COMMA,
    OPEN,
    STAR,
    Transducer,
    TransducerError,
    check_order_reflecting,
    decode_phi,
    encode_phi,
    nfa_as_process,
    rational_refines,
    xi,
)
from modelshift.refine import refines
from modelshift.syntax import Stop, dprime, ev, tag

S = list(SIGMA)
a, b = S


def test_phi_examples():
    assert encode_phi((BULLET,), S) == [OPEN, STAR, CLOSE]
    word = encode_phi((frozenset({b, a}), a, BULLET), S)
    assert word == [OPEN, dprime(a), dprime(b), COMMA, a, COMMA, STAR, CLOSE]


def test_phi_round_trip_and_injective():
    seen = {}
    for n in range(3):
        for o in all_observations(S, n):
            w = tuple(encode_phi(o, S))
            assert decode_phi(w) == o
            assert seen.setdefault(w, o) == o


def test_phi_prefix_reflects_order():
    obs = [o for n in range(3) for o in all_observations(S, n)]
    rng = random.Random(3)
    for _ in range(2000):
        x, y = rng.choice(obs), rng.choice(obs)
        wx, wy = encode_phi(x, S), encode_phi(y, S)
        if wy[: len(wx)] == wx:
            assert extends(x, y)


@pytest.mark.parametrize("bad", [[STAR], [OPEN, STAR], [OPEN, a, CLOSE], [OPEN, STAR, COMMA, CLOSE]])
def test_decode_rejects_malformed(bad):
    with pytest.raises(TransducerError):
        decode_phi(bad)


def nfa(n, edges, accepting, initial="0"):
    return Transducer([str(k) for k in range(n)], initial, set(accepting), [(s, e, d) for s, e, d in edges])


def test_nfa_examples():
    ab = nfa(3, [("0", a, "1"), ("1", b, "2")], {"2"})
    assert bounded_traces(nfa_as_process(ab), 4) == {(), (a,), (a, b)}
    empty = nfa(2, [("1", a, "1")], {"1"})
    assert bounded_traces(nfa_as_process(empty), 4) == {()}
    star = nfa(1, [("0", a, "0")], {"0"})
    assert bounded_traces(nfa_as_process(star), 5) == {(a,) * k for k in range(6)}


def test_nfa_as_process_random():
    rng = random.Random(11)
    for _ in range(50):
        t, alphabet = random_nfa(rng)
        assert bounded_traces(nfa_as_process(t), 8) == language_prefixes(t, alphabet, 8)


def test_transducer_text_round_trip():
    for model, build in BUILTIN.items():
        t = build(S)
        again = Transducer.loads(t.dumps())
        assert again.dumps() == t.dumps()
        assert again.initial == t.initial and again.accepting == t.accepting


def test_transducer_rejects_bad_input():
    with pytest.raises(TransducerError):
        Transducer.loads("left: a\nright: a\n0 l.a 1\n")
    with pytest.raises(TransducerError):
        Transducer.loads("initial: 0\n0 a 1\n")
    with pytest.raises(TransducerError):
        Transducer.loads("left: a\nright: a\ninitial: 0\n0 l.b 1\n")


def identity(alphabet) -> Transducer:
    symbols = xi(alphabet)
    states = ["q"] + [f"m{k}" for k in range(len(symbols))]
    edges = []
    for k, x in enumerate(symbols):
        edges += [("q", tag("left", x), f"m{k}"), (f"m{k}", tag("right", x), "q")]
    return Transducer(states, "q", {"q"}, edges, symbols, symbols)


def test_identity_transducer_is_fl(corpus):
    t = identity(S)
    for pair in corpus[:24]:
        try:
            got = rational_refines(t, pair.spec, pair.impl, S).holds
        except TransducerError:
            # user transducers do not cover termination
            continue
        assert got == refines("FL", pair.spec, pair.impl, S).holds


def test_alphabet_mismatch():
    t = identity([a])
    with pytest.raises(TransducerError):
        rational_refines(t, Stop(), Stop(), S)


@pytest.mark.parametrize("model", ["T", "F"])
def test_builtin_transducers_match_contexts(model, corpus):
    for pair in corpus:
        assert rational_refines(model, pair.spec, pair.impl, S).holds == refines(model, pair.spec, pair.impl, S).holds


@pytest.mark.parametrize("model", ["R", "A", "RT"])
def test_richer_transducers_match_contexts(model):
    for pair in random_pairs(19, 16, depth=3):
        assert rational_refines(model, pair.spec, pair.impl, S).holds == refines(model, pair.spec, pair.impl, S).holds


@pytest.mark.parametrize("model", ["T", "F", "R", "A", "RT", "FL"])
def test_builtin_order_reflecting(model):
    assert check_order_reflecting(BUILTIN[model](S), S, depth=2, warn=False) == []


def test_order_reflection_warns_on_bad_transducer():
    # <{}> maps to a and <{a}> to ab, yet the two are unordered
    L = lambda x: tag("left", x)
    R = lambda x: tag("right", x)
    edges = [
        ("0", L(OPEN), "1"),
        ("1", L(CLOSE), "2"),
        ("2", R(a), "3"),
        ("1", L(dprime(a)), "4"),
        ("4", L(CLOSE), "5"),
        ("5", R(a), "6"),
        ("6", R(b), "7"),
    ]
    t = Transducer([str(k) for k in range(8)], "0", {"3", "7"}, edges)
    with pytest.warns(UserWarning):
        bad = check_order_reflecting(t, S, depth=0)
    assert bad


@given(st.lists(st.sampled_from([0, 1]), min_size=0, max_size=2), st.data())
def test_phi_round_trip_property(events, data):
    slots = [frozenset(), frozenset({a}), frozenset({b}), frozenset({a, b}), BULLET]
    obs = [data.draw(st.sampled_from(slots))]
    for k in events:
        obs += [S[k], data.draw(st.sampled_from(slots))]
    obs = tuple(obs)
    if not is_well_formed(obs):
        return
    assert decode_phi(encode_phi(obs, S)) == obs
