from modelshift.refine import refines
from modelshift.semantics import explore
from modelshift.syntax import TOCK, ev
from modelshift.timed import check_tock_discipline, tfbuff
from modelshift.window import DUP, LOSS, abstracted_protocol, deadline_search, protocol

DATA = [ev(f"left.{x}") for x in (0, 1)] + [ev(f"right.{x}") for x in (0, 1)]


def test_protocol_is_disciplined():
    check_tock_discipline(abstracted_protocol(3))
    labels = explore(protocol(3)).labels()
    assert {LOSS, DUP, TOCK} <= labels
    assert not any(str(e).startswith(("snd", "rcv", "ack")) for e in labels)


def test_deadline_threshold():
    res = deadline_search(errors=3)
    assert (res.failing, res.passing) == (11, 12)
    assert all(not res.verdicts[n].holds for n in range(12))


def test_faster_timeout_gives_earlier_deadline():
    res = deadline_search(errors=3, timeout=0)
    assert (res.failing, res.passing) == (6, 7)


def test_frequent_errors_meet_no_deadline():
    res = deadline_search(errors=1, limit=14)
    assert res.passing is None and res.failing == 14


def test_generous_deadline_is_met():
    impl = abstracted_protocol(3)
    assert refines("TF", tfbuff(20, 2), impl, DATA).holds
