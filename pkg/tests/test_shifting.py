from itertools import product

import pytest
from hypothesis import given, settings

from modelshift.corpus import SIGMA
from modelshift.dsl import parse
from modelshift.models import FailureObs, RevivalObs, model_semantics, oracle_refines
from modelshift.refine import refines
from modelshift.semantics import explore
from modelshift.shifting import AlphabetMismatch, decode, shift, shift_F, shift_FL
from modelshift.syntax import DONE, STAB, TERM, TICK, Alphabet, dprime, ev, prime

from conftest import bounded_traces, proc_from, seeds

a, b = ev("a"), ev("b")
FLAGS = [prime(a), prime(b), STAB]


def p_(text):
    return parse(text, alphabet=SIGMA)[0]


def test_refusal_flag_example():
    P, Q = p_("a -> STOP"), p_("(a -> STOP) |~| STOP")
    assert (prime(a),) in bounded_traces(shift_F(Q, SIGMA), 1)
    assert (prime(a),) not in bounded_traces(shift_F(P, SIGMA), 1)


def test_stop_refuses_everything():
    traces = bounded_traces(shift_F(p_("STOP"), SIGMA), 3)
    assert traces == {w for k in range(4) for w in product(FLAGS, repeat=k)}


def test_fl_prefix_shape():
    sigma = Alphabet.of("a")
    traces = bounded_traces(shift_FL(p_("a -> STOP"), sigma), 4)
    assert (dprime(a), DONE, a, DONE) in traces
    assert () in traces


def test_distinguishing_rows_by_context():
    interrupting = (p_("(a -> DIV) |~| (DIV /\\ (a -> STOP))"), p_("a -> STOP"))
    choosing = (p_("(a -> STOP) |~| (b -> STOP)"), p_("(a -> STOP) [] (b -> STOP)"))
    assert not refines("FL", *choosing, SIGMA).holds
    assert not refines("RT", *interrupting, SIGMA).holds
    assert refines("A", *interrupting, SIGMA).holds


def test_revival_witness():
    v = refines("R", p_("((a -> DIV) [] DIV) |~| STOP"), p_("a -> DIV"), SIGMA)
    assert not v.holds and v.decoded == RevivalObs((), frozenset(), a)


def test_skip_and_stop_under_tick_wrapper():
    skip = bounded_traces(shift("F", p_("SKIP"), SIGMA, tick=True).inner, 3)
    # term' only after term, in the dead state every process shares
    assert not any(prime(TERM) in t and TERM not in t for t in skip)
    assert (prime(a), prime(b)) in skip
    stop = bounded_traces(shift("F", p_("STOP"), SIGMA, tick=True).inner, 3)
    assert (prime(TERM),) in stop and (prime(a), prime(b), prime(TERM)) in stop


def test_stop_or_skip_against_skip():
    v = refines("F", p_("SKIP"), p_("STOP |~| SKIP"), SIGMA)
    assert not v.holds
    assert v.decoded == FailureObs((), frozenset({TICK}))
    assert refines("F", p_("SKIP"), p_("SKIP"), SIGMA).holds


def test_alphabet_mismatch():
    with pytest.raises(AlphabetMismatch):
        shift_F(p_("a -> STOP"), Alphabet.of("b"))


def test_hidden_events_need_no_declaration():
    p = parse("(a -> b -> STOP) \\ {b}")[0]
    assert refines("F", p, p, Alphabet.of("a")).holds


def test_decode_shapes():
    assert str(decode("F", [a, prime(b), STAB])) == "(<a>, {b})"
    assert str(decode("RT", [prime(a), STAB, b])) == "<{a}, b, •>"
    assert str(decode("FL", [dprime(a), DONE, a, DONE])) == "<{a}, a, {}>"


@given(seeds)
def test_ciphers_erase_to_traces(seed):
    p = proc_from(seed)
    base = bounded_traces(p, 5)
    for model in ("F", "R", "RT", "A", "FL"):
        for t in bounded_traces(shift(model, p, SIGMA).inner, 5):
            plain = tuple(TICK if e is TERM else e for e in t if e.role == "plain" or e is TERM)
            assert plain in base


@given(seeds)
@settings(max_examples=50)
def test_refusal_flag_iff_failure(seed):
    p = proc_from(seed, tick=False)
    shifted = bounded_traces(shift_F(p, SIGMA), 4)
    failures = model_semantics("F", explore(p), 3, SIGMA)
    for s in bounded_traces(p, 3):
        for x in SIGMA:
            assert ((s + (prime(x),)) in shifted) == (FailureObs(s, frozenset({x})) in failures)


def test_contexts_match_oracle(corpus):
    for pair in corpus:
        S, I = explore(pair.spec), explore(pair.impl)
        for model in ("T", "F", "R", "A", "RT", "FL"):
            assert refines(model, pair.spec, pair.impl, SIGMA).holds == oracle_refines(model, S, I, 4, SIGMA).holds
