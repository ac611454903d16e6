"""Concrete syntax: a small CSP-like language for processes and assertions.

    alphabet a, b, c
    P = a -> P [] b -> STOP
    assert P [= [F] (a -> STOP |~| b -> STOP)

Binary operators, loosest first: ``;``, ``|~|``, ``[]``, ``[>``,
``/\\`` and ``THROW(A)``, ``[|A|]``; postfix ``\\ A`` and ``[[a <- b]]``
bind tighter, and prefix ``a -> P`` tightest. All binary operators are
right-associative. ``--`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .syntax import (
    RESERVED,
    TOCK,
    Alphabet,
    Chaos,
    Div,
    Event,
    ExtChoice,
    Hide,
    IntChoice,
    Interrupt,
    Machine,
    MuRec,
    Omega,
    Parallel,
    Prefix,
    Prioritise,
    Process,
    Rec,
    Rename,
    Run,
    Seq,
    Skip,
    Sliding,
    Stop,
    Throw,
    Var,
    Wait,
    ev,
    mutual,
)

MODELS = ("T", "F", "R", "A", "RT", "FL", "TF")
KEYWORDS = {
    "STOP", "DIV", "SKIP", "CHAOS", "RUN", "WAIT", "rec", "THROW",
    "alphabet", "assert", "TCHAOS", "LABS", "TENABLE",
}


class DslError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line = line
        self.col = col


class UnboundIdentifier(DslError):
    pass


class AlphabetViolation(DslError):
    pass


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+|--[^\n]*)
  | (?P<nl>\n)
  | (?P<op>\|~\||\[\]|\[>|\[\||\|\]|\[\[|\]\]|\[=|/\\|<-|->|[\\\[\](){},;=.])
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z0-9_]+)*'*)
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos, line, lstart = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DslError(f"unexpected character {text[pos]!r}", line, pos - lstart + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            lstart = m.end()
        elif kind != "ws":
            out.append(Token(kind, m.group(), line, m.start() - lstart + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - lstart + 1))
    return out


@dataclass
class Assertion:
    name: str
    model: str
    spec: Process
    impl: Process
    line: int = 0


@dataclass
class Script:
    alphabet: Alphabet | None
    definitions: dict[str, Process] = field(default_factory=dict)
    assertions: list[Assertion] = field(default_factory=list)


class Parser:
    def __init__(self, text: str, alphabet: Alphabet | None = None, env: dict[str, Process] | None = None):
        self.toks = tokenize(text)
        self.i = 0
        self.declared: list[Event] = list(alphabet or [])
        self.env = dict(env or {})
        self.bound: list[str] = []
        self.defnames: set[str] = set(self.env)

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "ident") and t.text == text

    def take(self, text: str | None = None, kind: str | None = None) -> Token:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = text or kind
            raise DslError(f"expected {want!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        self.i += 1
        return t

    def error(self, msg: str, cls=DslError):
        return cls(msg, self.tok.line, self.tok.col)

    # -- events
    def event(self) -> Event:
        t = self.take(kind="ident")
        if t.text == "tock":
            return TOCK
        if t.text in RESERVED or t.text in KEYWORDS:
            raise DslError(f"{t.text!r} cannot be used as an event", t.line, t.col)
        e = ev(t.text)
        if self.declared and e not in self.declared:
            raise AlphabetViolation(f"event {t.text} not declared in alphabet", t.line, t.col)
        return e

    def evset(self) -> frozenset[Event]:
        self.take("{")
        out = []
        if not self.at("}"):
            out.append(self.event())
            while self.at(","):
                self.take(",")
                out.append(self.event())
        self.take("}")
        return frozenset(out)

    # -- processes, loosest binding first
    def proc(self) -> Process:
        return self.seq()

    def _binary(self, sub, op: str, cls):
        left = sub()
        if self.at(op):
            self.take(op)
            return cls(left, self._binary(sub, op, cls))
        return left

    def seq(self) -> Process:
        return self._binary(self.intc, ";", Seq)

    def intc(self) -> Process:
        return self._binary(self.extc, "|~|", IntChoice)

    def extc(self) -> Process:
        return self._binary(self.sliding, "[]", ExtChoice)

    def sliding(self) -> Process:
        return self._binary(self.interrupt, "[>", Sliding)

    def interrupt(self) -> Process:
        left = self.par()
        if self.at("/\\"):
            self.take("/\\")
            return Interrupt(left, self.interrupt())
        if self.at("THROW"):
            self.take("THROW")
            self.take("(")
            a = self.evset()
            self.take(")")
            return Throw(left, a, self.interrupt())
        return left

    def par(self) -> Process:
        left = self.postfix()
        if self.at("[|"):
            self.take("[|")
            a = self.evset()
            self.take("|]")
            return Parallel(left, a, self.par())
        return left

    def postfix(self) -> Process:
        p = self.prefix()
        while True:
            if self.at("\\"):
                self.take("\\")
                p = Hide(p, self.evset())
            elif self.at("[["):
                p = Rename(p, self.renaming())
            else:
                return p

    def renaming(self) -> frozenset:
        self.take("[[")
        pairs = []
        while True:
            a = self.event()
            self.take("<-")
            b = self.event()
            pairs.append((a, b))
            if not self.at(","):
                break
            self.take(",")
        self.take("]]")
        dom = {a for a, _ in pairs}
        for e in self.declared:
            if e not in dom:
                pairs.append((e, e))
        return frozenset(pairs)

    def prefix(self) -> Process:
        t = self.tok
        nxt = self.toks[self.i + 1]
        if t.kind == "ident" and nxt.text == "->" and t.text not in KEYWORDS:
            e = self.event()
            self.take("->")
            return Prefix(e, self.prefix())
        return self.atom()

    def atom(self) -> Process:
        t = self.tok
        if t.kind == "op" and t.text == "(":
            self.take("(")
            p = self.proc()
            self.take(")")
            return p
        if t.kind != "ident":
            raise self.error(f"expected a process, found {t.text or 'end of input'!r}")
        word = t.text
        if word == "STOP":
            self.take()
            return Stop()
        if word == "DIV":
            self.take()
            return Div()
        if word == "SKIP":
            self.take()
            return Skip()
        if word in ("CHAOS", "RUN", "TCHAOS"):
            self.take()
            self.take("(")
            a = self.evset()
            self.take(")")
            if word == "CHAOS":
                return Chaos(a)
            if word == "RUN":
                return Run(a)
            from .timed import tchaos

            return tchaos(a)
        if word == "WAIT":
            self.take()
            self.take("(")
            n = int(self.take(kind="int").text)
            self.take(")")
            return Wait(n)
        if word == "LABS":
            from .timed import lazy_abstract

            self.take()
            self.take("(")
            a = self.evset()
            self.take(",")
            p = self.proc()
            self.take(")")
            return lazy_abstract(p, a)
        if word == "TENABLE":
            from .timed import timed_enable

            self.take()
            self.take("(")
            e = self.evset()
            self.take(",")
            r = self.evset()
            self.take(",")
            m = int(self.take(kind="int").text)
            self.take(")")
            return timed_enable(e, r, m)
        if word == "rec":
            self.take()
            name = self.take(kind="ident").text
            self.take(".")
            self.bound.append(name)
            try:
                body = self.proc()
            finally:
                self.bound.pop()
            return Rec(name, body)
        if word in KEYWORDS:
            raise self.error(f"unexpected keyword {word!r}")
        self.take()
        if word in self.bound or word in self.defnames:
            return Var(word)
        raise UnboundIdentifier(f"unbound identifier {word!r}", t.line, t.col)


def _close(p: Process, defs: dict[str, Process]) -> Process:
    from .syntax import substitute

    return substitute(p, defs) if p.fv else p


def parse_script(text: str, alphabet: Alphabet | None = None, env: dict[str, Process] | None = None) -> Script:
    """Parse a whole file: alphabet declarations, definitions and assertions.

    Definitions may be mutually recursive; references to them are closed
    over a single recursion group so every returned term is closed.
    """
    ps = Parser(text, alphabet, env)
    # first pass: collect definition names so forward references resolve
    toks = ps.toks
    for k, t in enumerate(toks[:-1]):
        if t.kind == "ident" and toks[k + 1].text == "=" and (k == 0 or toks[k - 1].kind != "op" or toks[k - 1].text in (")", "}", "]]", "|]")):
            ps.defnames.add(t.text)
    raw_defs: list[tuple[str, Process]] = []
    raw_asserts: list[tuple[str, Process, Process, int]] = []
    while ps.tok.kind != "eof":
        t = ps.tok
        if ps.at("alphabet"):
            ps.take()
            names = [ps.take(kind="ident")]
            while ps.at(","):
                ps.take(",")
                names.append(ps.take(kind="ident"))
            for n in names:
                if n.text in RESERVED or n.text in KEYWORDS:
                    raise DslError(f"{n.text!r} is reserved", n.line, n.col)
                e = ev(n.text)
                if e not in ps.declared:
                    ps.declared.append(e)
        elif ps.at("assert"):
            ps.take()
            spec = ps.proc()
            ps.take("[=")
            ps.take("[")
            m = ps.take(kind="ident")
            if m.text not in MODELS:
                raise DslError(f"unknown model {m.text!r}", m.line, m.col)
            ps.take("]")
            impl = ps.proc()
            raw_asserts.append((m.text, spec, impl, t.line))
        elif t.kind == "ident" and ps.toks[ps.i + 1].text == "=":
            name = ps.take().text
            if name in KEYWORDS or name in RESERVED:
                raise DslError(f"{name!r} is reserved", t.line, t.col)
            ps.take("=")
            raw_defs.append((name, ps.proc()))
        else:
            raise ps.error(f"expected a declaration, found {t.text!r}")
    defined = {n for n, _ in raw_defs} | set(ps.env)
    missing = ps.defnames - defined
    if missing:
        raise UnboundIdentifier("unbound identifier " + ", ".join(sorted(missing)))
    group = list(ps.env.items()) + raw_defs
    closed = mutual(group) if group else {}
    script = Script(Alphabet(ps.declared) if ps.declared else None)
    script.definitions = {n: closed[n] for n, _ in raw_defs}
    for k, (model, spec, impl, line) in enumerate(raw_asserts):
        script.assertions.append(
            Assertion(f"assert{k + 1}@{line}", model, _close(spec, closed), _close(impl, closed), line)
        )
    return script


def parse(text: str, env: dict[str, Process] | None = None, alphabet: Alphabet | None = None):
    """Parse a process expression, optionally preceded by declaration lines.

    The last non-empty line is the expression. Returns ``(process,
    alphabet)``; without a declaration the alphabet is the events the term
    mentions, in order of first occurrence.
    """
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise DslError("empty input")
    if len(lines) > 1:
        script = parse_script("\n".join(lines[:-1]), alphabet, env)
        alphabet = script.alphabet or alphabet
        env = {**(env or {}), **script.definitions}
    ps = Parser(lines[-1], alphabet, env)
    p = ps.proc()
    if ps.tok.kind != "eof":
        raise ps.error(f"unexpected {ps.tok.text!r}")
    if env and p.fv:
        defs = env if all(q.closed for q in env.values()) else mutual(list(env.items()))
        p = _close(p, defs)
    alpha = Alphabet(ps.declared) if ps.declared else None
    if alpha is None:
        evs = [e for e in events_in_order(p) if e.role == "plain"]
        alpha = Alphabet(evs) if evs else None
    return p, alpha


def events_in_order(p: Process) -> list[Event]:
    """Events mentioned by a term, in left-to-right syntactic order."""
    seen: dict[Event, None] = {}
    visited: set[Process] = set()

    def walk(x):
        if isinstance(x, Event):
            seen.setdefault(x, None)
        elif isinstance(x, Process):
            if x in visited:
                return
            visited.add(x)
            for f in x._f:
                walk(f)
        elif isinstance(x, (frozenset, set)):
            for y in sorted(x, key=str):
                walk(y)
        elif isinstance(x, tuple):
            for y in x:
                walk(y)

    walk(p)
    return list(seen)


# ---------------------------------------------------------------------------
# Pretty printing

_LEVEL = {Seq: 1, IntChoice: 2, ExtChoice: 3, Sliding: 4, Interrupt: 5, Throw: 5, Parallel: 6}
_OPS = {Seq: ";", IntChoice: "|~|", ExtChoice: "[]", Sliding: "[>", Interrupt: "/\\"}


def _set(events) -> str:
    return "{" + ", ".join(sorted(map(str, events))) + "}"


def pretty(p: Process) -> str:
    return _pp(p, 0)


def _pp(p: Process, ctx: int) -> str:
    """Render ``p`` for a context whose binding level is ``ctx``."""
    lvl = _LEVEL.get(type(p))
    if lvl is not None:
        if isinstance(p, Parallel):
            op = f"[| {_set(p.sync)} |]"
        elif isinstance(p, Throw):
            op = f"THROW({_set(p.events)})"
        else:
            op = _OPS[type(p)]
        s = f"{_pp(p.left, lvl + 1)} {op} {_pp(p.right, lvl)}"
        return f"({s})" if ctx > lvl else s
    if isinstance(p, (Hide, Rename)):
        if isinstance(p, Hide):
            s = f"{_pp(p.proc, 7)} \\ {_set(p.events)}"
        else:
            pairs = ", ".join(f"{a} <- {b}" for a, b in sorted(p.pairs, key=lambda x: (str(x[0]), str(x[1]))))
            s = f"{_pp(p.proc, 7)} [[{pairs}]]"
        return f"({s})" if ctx > 7 else s
    if isinstance(p, Prefix):
        s = f"{p.event} -> {_pp(p.proc, 8)}"
        return f"({s})" if ctx > 8 else s
    if isinstance(p, Rec):
        s = f"rec {p.name} . {_pp(p.body, 0)}"
        return f"({s})" if ctx > 0 else s
    if isinstance(p, Stop):
        return "STOP"
    if isinstance(p, Div):
        return "DIV"
    if isinstance(p, Skip):
        return "SKIP"
    if isinstance(p, Omega):
        return "OMEGA"
    if isinstance(p, Chaos):
        return f"CHAOS({_set(p.events)})"
    if isinstance(p, Run):
        return f"RUN({_set(p.events)})"
    if isinstance(p, Wait):
        return f"WAIT({p.t})"
    if isinstance(p, Var):
        return p.name
    if isinstance(p, MuRec):
        return f"<{p.name}>"
    if isinstance(p, Machine):
        return f"<lts of {len(p.lts)} states @ {p.state}>"
    if isinstance(p, Prioritise):
        return f"prioritise({_pp(p.proc, 0)}, {p.order!r})"
    raise TypeError(p)
