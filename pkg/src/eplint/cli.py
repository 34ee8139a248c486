"""Command-line front end.

Exit codes: 0 ok, 1 lint violation or counterexample found, 2 usage error,
3 unreadable or invalid model/formula file.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import __version__
from .lint import LintError, Sameness, lint
from .models import (
    FinCategory,
    FinMonoid,
    FinSet,
    GuardError,
    ModelClass,
    ModelError,
    dumps_model,
    enumerate_categories,
    enumerate_monoids,
    enumerate_sets,
    load_model,
)
from .morphisms import Bijection, find_equivalence
from .oracle import Bounds, check_invariance
from .semantics import SemanticsError, evaluate
from .syntax import (
    EplintError,
    Signature,
    builtin_names,
    builtin_signature,
    parse_signature,
    parse_sorted,
)
from .transport import transport_monoid

EXIT_OK = 0
EXIT_FOUND = 1
EXIT_USAGE = 2
EXIT_INPUT = 3


class _InputError(Exception):
    """Problem with a file named on the command line (exit 3)."""


class _UsageError(Exception):
    """Flags that parse but make no sense together (exit 2)."""


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as e:
        raise _InputError(f"{path}: cannot read: {e}") from None


def _formula(path: str, sig: Signature):
    text = _read(path)
    try:
        return parse_sorted(text, sig)
    except EplintError as e:
        where = f"{path}:{e.span}" if e.span else path
        raise _InputError(f"{where}: error: {e.message}") from None


def _model(path: str):
    try:
        return load_model(path)
    except (OSError, ModelError, EplintError, ValueError) as e:
        raise _InputError(f"{path}: invalid model: {e}") from None


def _sameness(text: str) -> Sameness:
    try:
        return Sameness.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _emit(out, text: str) -> None:
    out.write(text if text.endswith("\n") else text + "\n")


def _json(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


# -- subcommands ------------------------------------------------------------------


def cmd_lint(args, out) -> int:
    if args.sig_file:
        text = _read(args.sig_file)
        try:
            sig = parse_signature(text)
        except EplintError as e:
            where = f"{args.sig_file}:{e.span}" if e.span else args.sig_file
            raise _InputError(f"{where}: error: {e.message}") from None
    else:
        sig = builtin_signature(args.sig)
    sf = _formula(args.formula, sig)
    try:
        report = lint(sf, sig, args.sameness)
    except LintError as e:
        raise _UsageError(f"{e.message} ({sig.name})") from None
    _emit(out, _json(report.to_json()) if args.json else report.render(args.formula))
    return EXIT_OK if report.passed else EXIT_FOUND


def cmd_eval(args, out) -> int:
    model = _model(args.model)
    sf = _formula(args.formula, model.signature)
    try:
        value = evaluate(sf, model)
    except SemanticsError as e:
        raise _InputError(f"{args.formula}: {e.message}") from None
    _emit(out, _json({"value": value}) if args.json else str(value).lower())
    return EXIT_OK


def cmd_check(args, out) -> int:
    cls = ModelClass(args.cls)
    sig = builtin_signature(cls.value)
    sf = _formula(args.formula, sig)
    if args.jobs < 1:
        raise _UsageError("--jobs must be at least 1")
    if sf.context:
        raise _InputError(f"{args.formula}: formula must be closed")
    if args.max_arrows is not None and cls is not ModelClass.CATEGORY:
        raise _UsageError("--max-arrows only applies to --class category")
    bounds = Bounds(args.max_size, args.max_arrows, args.min_size)
    try:
        report = check_invariance(sf, cls, args.sameness, bounds, jobs=args.jobs)
    except GuardError as e:
        raise _UsageError(e.message) from None
    except SemanticsError as e:
        raise _InputError(f"{args.formula}: {e.message}") from None
    _emit(out, report.dumps() if args.json else report.render(args.verbose))
    return EXIT_FOUND if report.counterexample else EXIT_OK


def cmd_equiv(args, out) -> int:
    a, b = _model(args.model_a), _model(args.model_b)
    for path, m in ((args.model_a, a), (args.model_b, b)):
        if not isinstance(m, FinCategory):
            raise _InputError(f"{path}: equiv needs category models, got {m.kind}")
    try:
        w = find_equivalence(a, b)
    except GuardError as e:
        raise _UsageError(e.message) from None
    if args.json:
        _emit(out, _json({"equivalent": w is not None, "witness": w.to_json() if w else None}))
    elif w is None:
        _emit(out, "not equivalent")
    else:
        lines = [
            "equivalent",
            f"F objects: {list(w.F.objects)}",
            f"F arrows:  {list(w.F.arrows)}",
            f"G objects: {list(w.G.objects)}",
            f"G arrows:  {list(w.G.arrows)}",
            f"eta:       {list(w.eta)}",
            f"epsilon:   {list(w.epsilon)}",
        ]
        _emit(out, "\n".join(lines))
    return EXIT_OK


def _parse_bijection(text: str) -> Bijection:
    try:
        images = [int(p) for p in text.split(",")] if text.strip() else []
        return Bijection.from_images(images)
    except (ValueError, ModelError) as e:
        raise _UsageError(f"--bijection: {e}") from None


def cmd_transport(args, out) -> int:
    model = _model(args.model)
    sigma = _parse_bijection(args.bijection)
    carrier = model.objects if isinstance(model, FinCategory) else model.size
    if sigma.size != carrier:
        raise _UsageError(f"--bijection has {sigma.size} entries but the carrier has {carrier}")
    if isinstance(model, FinMonoid):
        result = transport_monoid(model, sigma)
    elif isinstance(model, FinSet):
        result = model.apply_bijection(sigma.forward)
    else:
        result = model.relabel(sigma.forward, range(len(model.arrows)))
    text = dumps_model(result)
    if not args.json:
        text = json.dumps(json.loads(text), indent=2)
    _emit(out, text)
    return EXIT_OK


def cmd_enumerate(args, out) -> int:
    cls = ModelClass(args.cls)
    if args.max_arrows is not None and cls is not ModelClass.CATEGORY:
        raise _UsageError("--max-arrows only applies to --class category")
    try:
        if cls is ModelClass.SET:
            models = enumerate_sets(args.size, up_to_iso=args.up_to_iso)
        elif cls is ModelClass.MONOID:
            if args.size < 1:
                raise _UsageError("monoids need --size at least 1")
            models = enumerate_monoids(args.size, up_to_iso=args.up_to_iso)
        else:
            arrows = args.size + 2 if args.max_arrows is None else args.max_arrows
            models = enumerate_categories(args.size, arrows, up_to_iso=args.up_to_iso)
        count = 0
        for m in models:
            count += 1
            if not args.count_only:
                out.write(dumps_model(m) + "\n")
    except (GuardError, ModelError) as e:
        raise _UsageError(e.message) from None
    if args.count_only:
        _emit(out, str(count))
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="eplint",
        description="Lint and model-check properties of sets, monoids and categories "
        "for invariance under isomorphism or equivalence.",
    )
    p.add_argument("--version", action="version", version=f"eplint {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("lint", help="check a formula against the invariant fragment")
    s.add_argument("formula")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--sig", choices=builtin_names())
    g.add_argument("--sig-file", metavar="F")
    s.add_argument("--sameness", type=_sameness, required=True, help="iso or equiv")
    s.add_argument("--json", action="store_true")
    s.set_defaults(run=cmd_lint)

    s = sub.add_parser("eval", help="evaluate a closed formula in a model")
    s.add_argument("formula")
    s.add_argument("model")
    s.add_argument("--json", action="store_true")
    s.set_defaults(run=cmd_eval)

    s = sub.add_parser("check", help="search all related model pairs for a counterexample")
    s.add_argument("formula")
    s.add_argument("--class", dest="cls", choices=[c.value for c in ModelClass], required=True)
    s.add_argument("--sameness", type=_sameness, required=True, help="iso or equiv")
    s.add_argument("--max-size", type=int, required=True)
    s.add_argument("--min-size", type=int, default=0)
    s.add_argument("--max-arrows", type=int)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--json", action="store_true")
    s.add_argument("--verbose", action="store_true")
    s.set_defaults(run=cmd_check)

    s = sub.add_parser("equiv", help="decide whether two finite categories are equivalent")
    s.add_argument("model_a", metavar="modelA")
    s.add_argument("model_b", metavar="modelB")
    s.add_argument("--json", action="store_true")
    s.set_defaults(run=cmd_equiv)

    s = sub.add_parser("transport", help="move a model along a bijection of its carrier")
    s.add_argument("model")
    s.add_argument("--bijection", required=True, metavar="i0,i1,...")
    s.add_argument("--json", action="store_true")
    s.set_defaults(run=cmd_transport)

    s = sub.add_parser("enumerate", help="list all models of a given size")
    s.add_argument("--class", dest="cls", choices=[c.value for c in ModelClass], required=True)
    s.add_argument("--size", type=int, required=True)
    s.add_argument("--max-arrows", type=int)
    s.add_argument("--up-to-iso", action="store_true")
    s.add_argument("--count-only", action="store_true")
    s.set_defaults(run=cmd_enumerate)
    return p


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    try:
        return args.run(args, out)
    except _UsageError as e:
        err.write(f"eplint: error: {e}\n")
        return EXIT_USAGE
    except _InputError as e:
        err.write(f"{e}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
