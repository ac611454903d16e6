"""Model-shifting contexts.

Each context wraps a process so that its traces spell out the observations
of a richer model: ``a'`` flags a stable refusal of ``a``, ``a''`` a stable
acceptance of ``a``, ``stab`` closes a refusal burst and ``done`` closes an
acceptance set. Refinement in the model then reduces to trace refinement
of the wrapped processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .models import (
    BULLET,
    AcceptanceObs,
    FailureObs,
    FLObs,
    RevivalObs,
    RTObs,
    TimedObs,
    TraceObs,
)
from .syntax import (
    DONE,
    STAB,
    TERM,
    TICK,
    TOCK,
    Alphabet,
    Event,
    Hide,
    Parallel,
    Prefix,
    PriorityOrder,
    Prioritise,
    Process,
    Run,
    Seq,
    Stop,
    Var,
    dprime,
    events_of,
    ext_choice,
    interleave,
    mutual,
    prime,
)

MODELS = ("T", "F", "R", "A", "RT", "FL")


class AlphabetMismatch(ValueError):
    pass


def _sigma(alphabet) -> list[Event]:
    return list(alphabet)


def _check(p: Process, alphabet, extra=()) -> None:
    # only events the process can actually perform matter, so hidden
    # internal channels need not be declared
    from .semantics import TAU, TICK, explore

    allowed = set(alphabet) | set(extra) | {TAU, TICK}
    stray = {e for e in explore(p).labels() if e not in allowed}
    if stray:
        raise AlphabetMismatch("events outside the alphabet: " + ", ".join(sorted(map(str, stray))))


def _choice(events, target: Process) -> list[Process]:
    return [Prefix(e, target) for e in events]


def refusal_layer(p: Process, alphabet, with_stab: bool = True) -> Process:
    """Offer ``a'`` exactly when ``p`` is stable and refuses ``a``."""
    sigma = _sigma(alphabet)
    primes = [prime(a) for a in sigma]
    run = primes + ([STAB] if with_stab else [])
    order = PriorityOrder([(prime(a), a) for a in sigma], sigma)
    return Prioritise(interleave(p, Run(run)), order)


def acceptance_layer(p: Process, alphabet) -> Process:
    """On top of :func:`refusal_layer`, offer ``a''`` exactly when ``a`` is stably accepted."""
    sigma = _sigma(alphabet)
    c1 = refusal_layer(p, sigma, with_stab=False)
    order = PriorityOrder([(dprime(a), prime(a)) for a in sigma], sigma)
    return Prioritise(interleave(c1, Run([dprime(a) for a in sigma])), order)


def _synced(p: Process, reg: Process, events) -> Process:
    return Parallel(p, events, reg)


def shift_F(p: Process, alphabet) -> Process:
    """Stable failures: a trace followed by at most one refusal burst."""
    _check(p, alphabet)
    sigma = _sigma(alphabet)
    flags = [prime(a) for a in sigma] + [STAB]
    defs = mutual(
        {
            "UNSTABLE": ext_choice(_choice(sigma, Var("UNSTABLE")) + _choice(flags, Var("STABLE"))),
            "STABLE": ext_choice(_choice(flags, Var("STABLE"))),
        }
    )
    return _synced(refusal_layer(p, sigma), defs["UNSTABLE"], sigma + flags)


def shift_RT(p: Process, alphabet) -> Process:
    """Refusal testing: a stab-terminated refusal burst may precede every event."""
    _check(p, alphabet)
    sigma = _sigma(alphabet)
    primes = [prime(a) for a in sigma]
    flags = primes + [STAB]
    defs = mutual(
        {
            "UNSTABLE": ext_choice(
                _choice(sigma, Var("UNSTABLE")) + _choice(primes, Var("BURST")) + [Prefix(STAB, Var("UNSTABLE"))]
            ),
            "BURST": ext_choice(_choice(primes, Var("BURST")) + [Prefix(STAB, Var("UNSTABLE"))]),
        }
    )
    return _synced(refusal_layer(p, sigma), defs["UNSTABLE"], sigma + flags)


def shift_R(p: Process, alphabet) -> Process:
    """Revivals: one stab-terminated refusal burst, then at most one event."""
    _check(p, alphabet)
    sigma = _sigma(alphabet)
    primes = [prime(a) for a in sigma]
    flags = primes + [STAB]
    defs = mutual(
        {
            "UNSTABLE": ext_choice(
                _choice(sigma, Var("UNSTABLE")) + _choice(primes, Var("BURST")) + [Prefix(STAB, Var("AFTER"))]
            ),
            "BURST": ext_choice(_choice(primes, Var("BURST")) + [Prefix(STAB, Var("AFTER"))]),
            "AFTER": ext_choice(_choice(sigma, Stop())),
        }
    )
    return _synced(refusal_layer(p, sigma), defs["UNSTABLE"], sigma + flags)


def _walker(sigma: list[Event], after: str) -> dict[str, Process]:
    """Regulator that reads one of ``x'``/``x''`` per letter, in alphabet
    order, then ``done``. ``after`` is the state entered after ``done``."""
    n = len(sigma)
    defs: dict[str, Process] = {}
    walk0 = [Prefix(prime(sigma[0]), Var("W1")), Prefix(dprime(sigma[0]), Var("W1"))]
    defs["UNSTABLE"] = ext_choice(_choice(sigma, Var("UNSTABLE")) + walk0)
    for i in range(1, n):
        x = sigma[i]
        defs[f"W{i}"] = ext_choice([Prefix(prime(x), Var(f"W{i + 1}")), Prefix(dprime(x), Var(f"W{i + 1}"))])
    defs[f"W{n}"] = Prefix(DONE, Var(after) if after != "STOP" else Stop())
    if after == "EV":
        defs["EV"] = ext_choice(_choice(sigma, Var("UNSTABLE")))
    return defs


def _acceptance_context(p: Process, alphabet, after: str) -> Process:
    sigma = _sigma(alphabet)
    primes = [prime(a) for a in sigma]
    dprimes = [dprime(a) for a in sigma]
    reg = mutual(_walker(sigma, after))["UNSTABLE"]
    body = _synced(acceptance_layer(p, sigma), reg, sigma + primes + dprimes)
    return Hide(body, primes)


def shift_A(p: Process, alphabet) -> Process:
    """Acceptances: a trace optionally closed by its complete acceptance set."""
    _check(p, alphabet)
    return _acceptance_context(p, alphabet, "STOP")


def shift_FL(p: Process, alphabet) -> Process:
    """Finite linear observations: an acceptance set may be recorded at
    every stable point, once between consecutive events."""
    _check(p, alphabet)
    return _acceptance_context(p, alphabet, "EV")


def shift_T(p: Process, alphabet) -> Process:
    _check(p, alphabet)
    return p


BUILDERS = {"T": shift_T, "F": shift_F, "R": shift_R, "A": shift_A, "RT": shift_RT, "FL": shift_FL}


def shift_tick(p: Process, base_shift, alphabet) -> Process:
    """Termination wrapper: run ``p ; term -> STOP`` through ``base_shift``
    with ``term`` as an ordinary letter (so ``term'`` flags a refusal to
    terminate). ``term`` stays visible and decodes back to tick."""
    if TERM in set(alphabet):
        raise AlphabetMismatch("term is already in the alphabet")
    ext = list(alphabet) + [TERM]
    return base_shift(Seq(p, Prefix(TERM, Stop())), ext)


@dataclass
class ShiftedProcess:
    inner: Process
    model: str
    alphabet: tuple
    cipher_map: dict = field(default_factory=dict)


def cipher_map(alphabet, model: str) -> dict:
    out: dict = {}
    for a in alphabet:
        if model in ("F", "R", "RT", "FL", "A", "TF"):
            out[prime(a)] = ("refuse", a)
        if model in ("A", "FL"):
            out[dprime(a)] = ("accept", a)
    if model in ("F", "R", "RT"):
        out[STAB] = ("stable", None)
    if model in ("A", "FL"):
        out[DONE] = ("end of acceptance", None)
    return out


def shift(model: str, p: Process, alphabet, tick: bool | None = None) -> ShiftedProcess:
    """Apply the context for ``model``; ``tick`` forces or suppresses the
    termination wrapper (default: use it when ``p`` can terminate)."""
    if model not in BUILDERS:
        raise ValueError(f"unknown model {model!r}")
    sigma = list(alphabet)
    if tick is None:
        from .semantics import explore

        tick = explore(p).has_tick()
    if tick:
        inner = shift_tick(p, BUILDERS[model], sigma)
        sigma = sigma + [TERM]
    else:
        inner = BUILDERS[model](p, sigma)
    return ShiftedProcess(inner, model, tuple(sigma), cipher_map(sigma, model))


# ---------------------------------------------------------------------------
# Decoding


def _plain(e: Event):
    return TICK if e is TERM else e


def _set(events) -> frozenset:
    return frozenset(_plain(e) for e in events)


def decode(model: str, trace, alphabet=None):
    """Read a shifted trace back as an observation of ``model``.

    Unfinished refusal bursts decode to the refusals seen so far, which is
    sound because refusal sets are subset closed.
    """
    trace = list(trace)
    if model == "T":
        return TraceObs(tuple(_plain(e) for e in trace))
    if model in ("F", "R", "RT"):
        return _decode_refusals(model, trace)
    if model in ("A", "FL"):
        return _decode_acceptances(model, trace)
    if model in ("TF", "D"):
        return _decode_timed(trace)
    raise ValueError(f"unknown model {model!r}")


def _decode_refusals(model: str, trace):
    if model == "R":
        flags = [i for i, e in enumerate(trace) if e.role == "primed" or e is STAB]
        if not flags:
            return RevivalObs(tuple(map(_plain, trace)), BULLET, BULLET)
        i = flags[0]
        burst = {e.inner for e in trace[i:] if e.role == "primed"}
        rest = [e for e in trace[i:] if e.role == "plain" or e is TERM]
        revival = _plain(rest[0]) if rest else BULLET
        return RevivalObs(tuple(map(_plain, trace[:i])), _set(burst), revival)
    entries: list = [BULLET]
    burst: set | None = None
    for e in trace:
        if e.role == "primed" or e is STAB:
            burst = burst if burst is not None else set()
            if e is not STAB:
                burst.add(e.inner)
            entries[-1] = _set(burst)
            if e is STAB:
                burst = None
        else:
            burst = None
            entries += [_plain(e), BULLET]
    if model == "F":
        return FailureObs(tuple(entries[1::2]), entries[-1])
    return RTObs(tuple(entries))


def _decode_acceptances(model: str, trace):
    entries: list = [BULLET]
    acc: set | None = None
    for e in trace:
        if e.role == "doubleprimed":
            acc = acc if acc is not None else set()
            acc.add(e.inner)
        elif e is DONE:
            entries[-1] = _set(acc or ())
            acc = None
        else:
            entries += [_plain(e), BULLET]
    if acc is not None:
        # an unfinished walk: report what has been accepted so far
        entries[-1] = _set(acc)
    if model == "A":
        return AcceptanceObs(tuple(entries[1::2]), entries[-1])
    return FLObs(tuple(entries))


def _decode_timed(trace):
    segments = []
    cur: list = []
    ref: set | None = None
    for e in trace:
        if e is TOCK:
            segments.append((tuple(cur), _set(ref or ())))
            cur, ref = [], None
        elif e.role == "primed":
            ref = ref if ref is not None else set()
            ref.add(e.inner)
        else:
            cur.append(_plain(e))
    segments.append((tuple(cur), BULLET if ref is None else _set(ref)))
    return TimedObs(tuple(segments))


def alphabet_of(p: Process) -> Alphabet:
    from .syntax import sorted_events

    return Alphabet(sorted_events(e for e in events_of(p) if e.role == "plain"))
