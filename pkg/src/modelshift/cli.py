"""Batch driver: parse DSL files, run their assertions, report verdicts.

Exit status: 0 when every assertion holds, 1 when one fails, 2 for
unreadable or ill-formed input, 3 when a resource limit is hit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dsl import MODELS, Assertion, DslError, parse_script
from .models import oracle_refines
from .refine import default_alphabet, refines
from .semantics import DEFAULT_CAP, StateCapExceeded, explore
from .shifting import AlphabetMismatch
from .syntax import TOCK

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_RESOURCE = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="modelshift", description="Check CSP refinement assertions by model shifting.")
    ap.add_argument("files", nargs="*", type=Path, help="DSL files containing assert lines")
    ap.add_argument("--model-override", choices=MODELS, help="check every assertion in this model instead")
    ap.add_argument("--cap", type=int, default=DEFAULT_CAP, help="state cap per exploration")
    ap.add_argument("--workers", type=int, default=1, help="accepted for compatibility; checks run on one thread")
    ap.add_argument("--oracle", action="store_true", help="cross-check each verdict against bounded enumeration")
    ap.add_argument("--oracle-depth", type=int, default=4, help="events per observation for --oracle")
    ap.add_argument("--dump-lts", type=Path, help="write the implementation LTS of each check to this file")
    ap.add_argument("--transducer", type=Path, help="check every assertion in the rational model of this transducer")
    ap.add_argument("--format", choices=("human", "machine"), default="human")
    return ap


def _record(name: str, model: str, v, oracle: bool | None) -> dict:
    rec = {
        "name": name,
        "model": model,
        "holds": v.holds,
        "counterexample": None if v.holds else [str(e) for e in v.counterexample],
        "decoded_observation": None if v.decoded is None else str(v.decoded),
        "states": v.states,
        "transitions": v.transitions,
        "millis": round(v.millis, 3),
    }
    if oracle is not None:
        rec["oracle_agrees"] = oracle
    return rec


def _human(rec: dict) -> str:
    line = f"{rec['name']} [{rec['model']}]: "
    if rec["holds"]:
        line += "holds"
    else:
        line += f"fails on <{', '.join(rec['counterexample'])}>"
        if rec["decoded_observation"]:
            line += f" = {rec['decoded_observation']}"
    line += f"  ({rec['states']} states, {rec['transitions']} transitions, {rec['millis']:.1f} ms)"
    if rec.get("oracle_agrees") is False:
        line += "  ORACLE DISAGREES"
    return line


def check(a: Assertion, alphabet, args, transducer=None):
    """Run one assertion; returns the verdict and the oracle agreement."""
    model = args.model_override or a.model
    if alphabet is None:
        alphabet = default_alphabet(a.spec, a.impl)
    if transducer is not None:
        from .rational import rational_refines

        sigma = [e for e in alphabet if e is not TOCK]
        v = rational_refines(transducer, a.spec, a.impl, sigma, args.cap)
        return "rational", v, None
    v = refines(model, a.spec, a.impl, alphabet, args.cap, args.workers)
    agrees = None
    if args.oracle:
        oalpha = list(alphabet) + ([TOCK] if model == "TF" and TOCK not in set(alphabet) else [])
        spec, impl = a.spec, a.impl
        if model == "TF":
            from .timed import maximal_progress

            spec, impl = maximal_progress(spec, alphabet), maximal_progress(impl, alphabet)
        o = oracle_refines(model, explore(spec, args.cap), explore(impl, args.cap), args.oracle_depth, oalpha)
        # the oracle only sees observations up to the depth, so a bounded
        # pass cannot contradict a deeper failure
        deep = not v.holds and len([e for e in v.counterexample if e.role == "plain" or e is TOCK]) > args.oracle_depth
        agrees = o.holds == v.holds or (o.holds and deep)
    return model, v, agrees


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    transducer = None
    try:
        if args.transducer is not None:
            from .rational import Transducer

            transducer = Transducer.loads(args.transducer.read_text())
        scripts = [(f, parse_script(f.read_text())) for f in args.files]
    except (OSError, DslError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_PARSE
    status = EXIT_OK
    dumps: list[str] = []
    for f, script in scripts:
        for a in script.assertions:
            name = f"{f.stem}:{a.name}" if len(scripts) > 1 else a.name
            try:
                model, v, agrees = check(a, script.alphabet, args, transducer)
            except StateCapExceeded as exc:
                print(f"error: {name}: {exc}", file=err)
                return EXIT_RESOURCE
            except MemoryError:
                print(f"error: {name}: out of memory", file=err)
                return EXIT_RESOURCE
            except (AlphabetMismatch, ValueError) as exc:
                print(f"error: {name}: {exc}", file=err)
                return EXIT_PARSE
            rec = _record(name, model, v, agrees)
            if args.format == "machine":
                print(json.dumps(rec), file=out)
            else:
                print(_human(rec), file=out)
            if args.dump_lts is not None and v.impl_lts is not None:
                dumps.append(f"# {name}\n{v.impl_lts.dump()}")
            if not v.holds:
                status = EXIT_FAIL
            if agrees is False:
                print(f"warning: {name}: oracle disagrees", file=err)
                status = EXIT_FAIL
    if args.dump_lts is not None:
        args.dump_lts.write_text("".join(dumps))
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
