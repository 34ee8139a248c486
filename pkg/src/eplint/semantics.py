"""Classical satisfaction of sorted formulas in finite models.

A model is anything exposing

* ``signature`` -- the :class:`~eplint.syntax.Signature` it interprets,
* ``domain(sort, index)`` -- the elements of an applied sort,
* ``apply(name, args)`` -- the value of a function symbol,
* ``holds(name, args)`` -- the truth of a relation or label atom.

Formulas are compiled once into nested closures; evaluating the closure on
many models is the hot path of the invariance oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from .syntax import (
    App,
    Atom,
    Binary,
    EplintError,
    Equal,
    Formula,
    Not,
    Quant,
    SortApp,
    SortedFormula,
    Term,
    Truth,
    Var,
)

Environment = Mapping[str, int]


class SemanticsError(EplintError):
    """Model and formula do not fit together."""


def check_compatible(sf: SortedFormula, model) -> None:
    """Raise unless ``model`` interprets the formula's signature."""
    want = sf.signature
    have = model.signature
    if want == have:
        return
    have_sorts = {s.name for s in have.sorts}
    missing = [s.name for s in want.sorts if s.name not in have_sorts]
    if missing:
        raise SemanticsError(
            f"formula over signature {want.name!r} cannot be evaluated in a "
            f"{have.name!r} model (missing sort {missing[0]})"
        )
    for fn in want.functions:
        if have.function(fn.name) is None:
            raise SemanticsError(f"model does not interpret function symbol {fn.name!r}")
    for rel in want.relations:
        if have.relation(rel.name) is None:
            raise SemanticsError(f"model does not interpret relation symbol {rel.name!r}")
    for lb in want.labels:
        if have.label(lb.name) is None:
            raise SemanticsError(f"model does not interpret label {lb.name!r}")


# -- compilation ---------------------------------------------------------------

TermFn = Callable[[object, dict], int]
FormulaFn = Callable[[object, dict], bool]


def compile_term(t: Term) -> TermFn:
    if isinstance(t, Var):
        name = t.name
        return lambda m, env: env[name]
    name = t.name
    args = tuple(compile_term(a) for a in t.args)
    if not args:
        return lambda m, env: m.apply(name, ())
    if len(args) == 1:
        (a0,) = args
        return lambda m, env: m.apply(name, (a0(m, env),))
    if len(args) == 2:
        a0, a1 = args
        return lambda m, env: m.apply(name, (a0(m, env), a1(m, env)))
    return lambda m, env: m.apply(name, tuple(a(m, env) for a in args))


def _compile_sort(s: SortApp) -> Callable[[object, dict], object]:
    name = s.name
    idx = tuple(compile_term(a) for a in s.args)
    return lambda m, env: m.domain(name, tuple(i(m, env) for i in idx))


def compile_formula(f: Formula) -> FormulaFn:
    if isinstance(f, Truth):
        v = f.value
        return lambda m, env: v
    if isinstance(f, Equal):
        left, right = compile_term(f.left), compile_term(f.right)
        return lambda m, env: left(m, env) == right(m, env)
    if isinstance(f, Atom):
        name = f.name
        args = tuple(compile_term(a) for a in f.args)
        return lambda m, env: m.holds(name, tuple(a(m, env) for a in args))
    if isinstance(f, Not):
        body = compile_formula(f.body)
        return lambda m, env: not body(m, env)
    if isinstance(f, Binary):
        left, right = compile_formula(f.left), compile_formula(f.right)
        if f.op == "&":
            return lambda m, env: left(m, env) and right(m, env)
        if f.op == "|":
            return lambda m, env: left(m, env) or right(m, env)
        if f.op == "->":
            return lambda m, env: (not left(m, env)) or right(m, env)
        return lambda m, env: left(m, env) == right(m, env)
    if isinstance(f, Quant):
        var = f.var
        dom = _compile_sort(f.sort)
        body = compile_formula(f.body)
        if f.quantifier == "forall":

            def forall(m, env):
                saved = env.get(var, _ABSENT)
                try:
                    for e in dom(m, env):
                        env[var] = e
                        if not body(m, env):
                            return False
                    return True
                finally:
                    _restore(env, var, saved)

            return forall

        def exists(m, env):
            saved = env.get(var, _ABSENT)
            try:
                for e in dom(m, env):
                    env[var] = e
                    if body(m, env):
                        return True
                return False
            finally:
                _restore(env, var, saved)

        return exists
    raise TypeError(f"not a formula node: {f!r}")


_ABSENT = object()


def _restore(env: dict, var: str, saved) -> None:
    if saved is _ABSENT:
        env.pop(var, None)
    else:
        env[var] = saved


@dataclass(frozen=True)
class CompiledFormula:
    source: SortedFormula
    fn: FormulaFn

    def __call__(self, model, env: Environment | None = None) -> bool:
        return bool(self.fn(model, dict(env or {})))


def compile_sorted(sf: SortedFormula) -> CompiledFormula:
    return CompiledFormula(sf, compile_formula(sf.formula))


# -- public entry points ---------------------------------------------------------


def _check_env(sf: SortedFormula, model, env: Environment) -> None:
    for name, s in sf.context:
        if name not in env:
            raise SemanticsError(f"environment has no value for free variable {name!r}")
        dom = _compile_sort(s)(model, dict(env))
        if env[name] not in dom:
            raise SemanticsError(f"value {env[name]!r} of {name!r} does not inhabit its sort")


def interpret_term(t: Term, model, env: Environment | None = None) -> int:
    """The element a sorted term denotes under ``env``."""
    return compile_term(t)(model, dict(env or {}))


def evaluate(sf: SortedFormula, model, env: Environment | None = None) -> bool:
    """Truth of ``sf`` in ``model``; ``env`` binds the formula's free variables."""
    check_compatible(sf, model)
    env = dict(env or {})
    _check_env(sf, model, env)
    return bool(compile_formula(sf.formula)(model, env))


eval_formula = evaluate
