"""A reduced timed sliding-window protocol (window 1, sequence numbers
mod 2) over media that lose and duplicate messages under controlled
errors, and a search for the offer deadline it meets."""

from __future__ import annotations

from dataclasses import dataclass

from .refine import refines
from .semantics import compress
from .syntax import TOCK, Hide, Parallel, Prefix, Process, Seq, Var, Wait, ev, ext_choice, mutual
from .timed import lazy_abstract, maximal_progress, tfbuff

LOSS = ev("loss")
DUP = ev("dup")


def _idle(branches: list[Process], name: str) -> Process:
    return ext_choice(list(branches) + [Prefix(TOCK, Var(name))])


def _then(p: str) -> Process:
    # every action takes one time unit
    return Seq(Wait(1), Var(p))


def protocol(errors: int, data=(0, 1), timeout: int = 1, compressed: bool = True) -> Process:
    """Sender, receiver, a data medium that can lose or duplicate, an ack
    medium that can lose, and a regulator leaving ``errors`` tocks between
    consecutive errors. Internal channels are hidden; loss and dup stay
    visible for lazy abstraction."""
    data = tuple(data)
    left = {x: ev(f"left.{x}") for x in data}
    right = {x: ev(f"right.{x}") for x in data}
    snd = {(i, x): ev(f"snd.{i}.{x}") for i in (0, 1) for x in data}
    rcv = {(i, x): ev(f"rcv.{i}.{x}") for i in (0, 1) for x in data}
    acks = {i: ev(f"acks.{i}") for i in (0, 1)}
    ackr = {i: ev(f"ackr.{i}") for i in (0, 1)}
    d: dict[str, Process] = {}

    for i in (0, 1):
        d[f"S{i}"] = _idle([Prefix(left[x], _then(f"SEND{i}{x}")) for x in data], f"S{i}")
        for x in data:
            d[f"SEND{i}{x}"] = _idle([Prefix(snd[i, x], _then(f"WAIT{i}{x}_{timeout}"))], f"SEND{i}{x}")
            for t in range(timeout + 1):
                acks_in = [
                    Prefix(ackr[i], _then(f"S{1 - i}")),
                    Prefix(ackr[1 - i], _then(f"WAIT{i}{x}_{t}")),
                ]
                later = _then(f"WAIT{i}{x}_{t - 1}") if t > 0 else None
                if later is None:
                    # timed out: resend, still listening for the ack
                    d[f"WAIT{i}{x}_{t}"] = _idle(acks_in + [Prefix(snd[i, x], _then(f"WAIT{i}{x}_{timeout}"))], f"WAIT{i}{x}_{t}")
                else:
                    d[f"WAIT{i}{x}_{t}"] = ext_choice(acks_in + [later])
    sender = mutual(d)["S0"]

    d = {}
    for j in (0, 1):
        d[f"R{j}"] = _idle(
            [Prefix(rcv[j, x], _then(f"OUT{j}{x}")) for x in data]
            + [Prefix(rcv[1 - j, x], _then(f"REACK{j}")) for x in data],
            f"R{j}",
        )
        for x in data:
            d[f"OUT{j}{x}"] = _idle([Prefix(right[x], _then(f"ACK{j}"))], f"OUT{j}{x}")
        d[f"ACK{j}"] = _idle([Prefix(acks[j], _then(f"R{1 - j}"))], f"ACK{j}")
        d[f"REACK{j}"] = _idle([Prefix(acks[1 - j], _then(f"R{j}"))], f"REACK{j}")
    receiver = mutual(d)["R0"]

    d = {"M": _idle([Prefix(snd[m], Var(f"CARRY{m[0]}{m[1]}")) for m in sorted(snd)], "M")}
    for i, x in sorted(snd):
        m = f"{i}{x}"
        d[f"CARRY{m}"] = ext_choice([Prefix(LOSS, _then("M")), _then(f"DEL{m}")])
        d[f"DEL{m}"] = _idle([Prefix(rcv[i, x], Var(f"AFTER{m}"))], f"DEL{m}")
        d[f"AFTER{m}"] = ext_choice([Prefix(DUP, Var(f"DUPL{m}")), _then("M")])
        # the duplicate is delivered promptly
        d[f"DUPL{m}"] = _idle([Prefix(rcv[i, x], _then("M"))], f"DUPL{m}")
    data_medium = mutual(d)["M"]

    d = {"A": _idle([Prefix(acks[i], Var(f"ACARRY{i}")) for i in (0, 1)], "A")}
    for i in (0, 1):
        d[f"ACARRY{i}"] = ext_choice([Prefix(LOSS, _then("A")), _then(f"ADEL{i}")])
        d[f"ADEL{i}"] = _idle([Prefix(ackr[i], _then("A"))], f"ADEL{i}")
    ack_medium = mutual(d)["A"]

    d = {"E0": _idle([Prefix(LOSS, Var(f"E{errors}")), Prefix(DUP, Var(f"E{errors}"))], "E0")}
    for k in range(1, errors + 1):
        d[f"E{k}"] = _then(f"E{k - 1}")
    regulator = mutual(d)["E0"]

    internal = list(snd.values()) + list(rcv.values()) + list(acks.values()) + list(ackr.values())
    # each component is compacted first, so recursion unfoldings do not
    # multiply through the product
    if compressed:
        sender, receiver, data_medium, ack_medium, regulator = map(
            compress, (sender, receiver, data_medium, ack_medium, regulator)
        )
    media = Parallel(data_medium, [TOCK], ack_medium)
    ends = Parallel(sender, [TOCK], receiver)
    net = Parallel(ends, internal + [TOCK], media)
    system = Parallel(net, [LOSS, DUP, TOCK], regulator)
    visible = list(left.values()) + list(right.values()) + [LOSS, DUP]
    return maximal_progress(Hide(system, internal), visible)


def abstracted_protocol(errors: int, data=(0, 1), timeout: int = 1) -> Process:
    return lazy_abstract(compress(protocol(errors, data, timeout)), [LOSS, DUP])


@dataclass
class DeadlineResult:
    failing: int | None
    passing: int | None
    verdicts: dict


def deadline_search(errors: int = 3, data=(0, 1), bound: int = 2, limit: int = 40, timeout: int = 1) -> DeadlineResult:
    """Smallest deadline ``n`` for which the protocol timed-failures refines
    the bounded buffer with offer deadline ``n``, and the largest failing
    one below it."""
    impl = abstracted_protocol(errors, data, timeout)
    alphabet = [ev(f"left.{x}") for x in data] + [ev(f"right.{x}") for x in data]
    verdicts = {}
    failing = None
    for n in range(limit + 1):
        v = refines("TF", tfbuff(n, bound, data), impl, alphabet)
        verdicts[n] = v
        if v.holds:
            return DeadlineResult(failing, n, verdicts)
        failing = n
    return DeadlineResult(failing, None, verdicts)
