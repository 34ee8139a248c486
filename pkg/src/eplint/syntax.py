"""Signatures and the dependently-sorted first-order language.

A signature is a list of sorts, each of which may depend on variables of
earlier sorts (``sort A(x:O, y:O);``), plus function, relation and label
symbols.  Formulas are parsed into an AST that carries source spans, and
:func:`sort_check` annotates every term with its applied sort.

Function symbols may declare implicit indices in braces
(``fun comp{x,y,z}(f:A(x,y), g:A(y,z)) : A(x,z);``).  Indices that occur in
the sort of some explicit parameter are inferred at each application.
Indices that cannot be inferred that way (the ``x`` of ``id{x}()``) become
leading explicit parameters, so the user writes ``id(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, Union

KEYWORDS = frozenset({"forall", "exists", "true", "false"})
SIG_KEYWORDS = frozenset({"signature", "sort", "fun", "rel", "label", "admit"})
SAMENESS_NAMES = ("isomorphism", "equivalence")


# -- spans and errors ---------------------------------------------------------


@dataclass(frozen=True)
class SourceSpan:
    """Byte offsets into the UTF-8 source plus a 1-based line/column."""

    start: int
    end: int
    line: int
    column: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"span start {self.start} after end {self.end}")

    def to_json(self) -> dict:
        return {
            "start": self.start,
            "end": self.end,
            "line": self.line,
            "column": self.column,
        }

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class EplintError(Exception):
    """Base class for user-facing errors that point into a source text."""

    def __init__(self, message: str, span: SourceSpan | None = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self) -> str:
        if self.span is None:
            return self.message
        return f"{self.span}: {self.message}"


class ParseError(EplintError):
    def __init__(self, message, span=None, expected=frozenset()):
        super().__init__(message, span)
        self.expected = frozenset(expected)


class SignatureError(EplintError):
    pass


class SortError(EplintError):
    pass


# -- terms and sorts ----------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)
    sort: SortApp | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class App:
    name: str
    args: tuple[Term, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)
    sort: SortApp | None = field(default=None, compare=False, repr=False)


Term = Union[Var, App]


@dataclass(frozen=True)
class SortApp:
    """A sort applied to index terms, e.g. ``A(x, y)``."""

    name: str
    args: tuple[Term, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


def subst_term(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    return App(t.name, tuple(subst_term(a, mapping) for a in t.args), t.span)


def subst_sort(s: SortApp, mapping: Mapping[str, Term]) -> SortApp:
    if not mapping:
        return s
    return SortApp(s.name, tuple(subst_term(a, mapping) for a in s.args), s.span)


def term_vars(t: Term) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    else:
        for a in t.args:
            yield from term_vars(a)


def sort_vars(s: SortApp) -> Iterator[str]:
    for a in s.args:
        yield from term_vars(a)


# -- formulas -----------------------------------------------------------------


@dataclass(frozen=True)
class Truth:
    value: bool
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Atom:
    """Relation or label atom ``R(t1, ..., tn)``."""

    name: str
    args: tuple[Term, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Equal:
    left: Term
    right: Term
    span: SourceSpan | None = field(default=None, compare=False, repr=False)
    sort: SortApp | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    body: Formula
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


BINARY_OPS = ("&", "|", "->", "<->")


@dataclass(frozen=True)
class Binary:
    op: str
    left: Formula
    right: Formula
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Quant:
    """``forall``/``exists`` over one variable.

    ``chained`` records that the binder came from a multi-binder such as
    ``forall x,y:O.``; it only affects printing.
    """

    quantifier: str
    var: str
    sort: SortApp
    body: Formula
    span: SourceSpan | None = field(default=None, compare=False, repr=False)
    chained: bool = field(default=False, compare=False, repr=False)


Formula = Union[Truth, Atom, Equal, Not, Binary, Quant]


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.body)
    elif isinstance(f, Binary):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, Quant):
        yield from subformulas(f.body)


def formula_depth(f: Formula) -> int:
    if isinstance(f, Not):
        return 1 + formula_depth(f.body)
    if isinstance(f, Binary):
        return 1 + max(formula_depth(f.left), formula_depth(f.right))
    if isinstance(f, Quant):
        return 1 + formula_depth(f.body)
    return 1


# -- tokenizer ----------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "kw", "punct", "eof"
    text: str
    span: SourceSpan


_PUNCT = ("<->", "->", "(", ")", ",", ":", ".", "~", "&", "|", "=", "{", "}", ";")


class _Source:
    def __init__(self, text: str):
        self.text = text
        self._byte = [0] * (len(text) + 1)
        acc = 0
        for i, ch in enumerate(text):
            self._byte[i] = acc
            acc += len(ch.encode("utf-8"))
        self._byte[len(text)] = acc
        self._line_starts = [0]
        for i, ch in enumerate(text):
            if ch == "\n":
                self._line_starts.append(i + 1)

    def span(self, start: int, end: int) -> SourceSpan:
        lo, hi = 0, len(self._line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._line_starts[mid] <= start:
                lo = mid
            else:
                hi = mid - 1
        return SourceSpan(
            self._byte[start], self._byte[end], lo + 1, start - self._line_starts[lo] + 1
        )


def tokenize(text: str, keywords=KEYWORDS) -> list[Token]:
    src = _Source(text)
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isascii() and ch.isalpha():
            j = i + 1
            while j < n and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "kw" if word in keywords else "ident"
            tokens.append(Token(kind, word, src.span(i, j)))
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, src.span(i, i + len(p))))
                i += len(p)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", src.span(i, i + 1))
    tokens.append(Token("eof", "", src.span(n, n)))
    return tokens


def _join(a: SourceSpan, b: SourceSpan) -> SourceSpan:
    return SourceSpan(a.start, b.end, a.line, a.column)


class _Parser:
    def __init__(self, text: str, keywords=KEYWORDS):
        self.tokens = tokenize(text, keywords)
        self.pos = 0
        self.open_parens: list[SourceSpan] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("punct", "kw") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def fail(self, expected) -> ParseError:
        t = self.tok
        expected = frozenset(expected)
        want = ", ".join(sorted(expected))
        if t.kind == "eof":
            if self.open_parens:
                o = self.open_parens[-1]
                msg = f"unclosed '(' opened at {o}; unexpected end of input"
            else:
                msg = "unexpected end of input"
        else:
            msg = f"unexpected {t.text!r}"
        return ParseError(f"{msg} (expected {want})", t.span, expected)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.fail({repr(text)})
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            raise self.fail({"identifier"})
        return self.advance()

    def open(self) -> Token:
        t = self.expect("(")
        self.open_parens.append(t.span)
        return t

    def close(self) -> Token:
        t = self.expect(")")
        self.open_parens.pop()
        return t

    def end(self):
        if self.tok.kind != "eof":
            raise self.fail({"end of input"})

    # terms -------------------------------------------------------------

    def term(self) -> Term:
        name = self.ident()
        if not self.at("("):
            return Var(name.text, name.span)
        self.open()
        args = [self.term()]
        while self.at(","):
            self.advance()
            args.append(self.term())
        close = self.close()
        return App(name.text, tuple(args), _join(name.span, close.span))

    def sortapp(self) -> SortApp:
        t = self.term()
        if isinstance(t, Var):
            return SortApp(t.name, (), t.span)
        return SortApp(t.name, t.args, t.span)

    # formulas ----------------------------------------------------------

    FIRST = frozenset({"forall", "exists", "'~'", "true", "false", "'('", "identifier"})

    def formula(self) -> Formula:
        if self.at("forall") or self.at("exists"):
            return self.quant()
        return self.impl()

    def quant(self) -> Formula:
        q = self.advance()
        names = [self.ident()]
        while self.at(","):
            self.advance()
            names.append(self.ident())
        self.expect(":")
        sort = self.sortapp()
        self.expect(".")
        body = self.formula()
        span = _join(q.span, _span_of(body) or sort.span)
        for k, name in enumerate(reversed(names)):
            chained = k < len(names) - 1
            body = Quant(q.text, name.text, sort, body, span, chained)
        return body

    def impl(self) -> Formula:
        left = self.disj()
        if self.at("->") or self.at("<->"):
            op = self.advance().text
            right = self.impl()
            return Binary(op, left, right, _join(_span_of(left), _span_of(right)))
        return left

    def disj(self) -> Formula:
        left = self.conj()
        while self.at("|"):
            self.advance()
            right = self.conj()
            left = Binary("|", left, right, _join(_span_of(left), _span_of(right)))
        return left

    def conj(self) -> Formula:
        left = self.neg()
        while self.at("&"):
            self.advance()
            right = self.neg()
            left = Binary("&", left, right, _join(_span_of(left), _span_of(right)))
        return left

    def neg(self) -> Formula:
        if self.at("~"):
            t = self.advance()
            body = self.neg()
            return Not(body, _join(t.span, _span_of(body)))
        return self.atom()

    def atom(self) -> Formula:
        t = self.tok
        if self.at("true") or self.at("false"):
            self.advance()
            return Truth(t.text == "true", t.span)
        if self.at("("):
            self.open()
            inner = self.formula()
            self.close()
            return inner
        if t.kind != "ident":
            raise self.fail(self.FIRST)
        left = self.term()
        if self.at("="):
            self.advance()
            right = self.term()
            return Equal(left, right, _join(left.span, right.span))
        if isinstance(left, Var):
            return Atom(left.name, (), left.span)
        return Atom(left.name, left.args, left.span)


def _span_of(node) -> SourceSpan | None:
    return getattr(node, "span", None)


def parse_formula(text: str, sig: Signature | None = None) -> Formula:
    """Parse formula source into a raw (unsorted) AST with spans.

    ``sig`` is accepted for symmetry with :func:`sort_check`; parsing does
    not consult it.
    """
    p = _Parser(text)
    if p.tok.kind == "eof":
        raise p.fail(p.FIRST)
    f = p.formula()
    p.end()
    return f


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    p.end()
    return t


# -- printing -----------------------------------------------------------------


def format_term(t: Term) -> str:
    if isinstance(t, Var) or not t.args:
        return t.name
    return f"{t.name}({', '.join(format_term(a) for a in t.args)})"


def format_sort(s: SortApp) -> str:
    if not s.args:
        return s.name
    return f"{s.name}({', '.join(format_term(a) for a in s.args)})"


# precedence: 0 quant, 1 impl, 2 disj, 3 conj, 4 neg/atom
def _prec(f: Formula) -> int:
    if isinstance(f, Quant):
        return 0
    if isinstance(f, Binary):
        return {"->": 1, "<->": 1, "|": 2, "&": 3}[f.op]
    return 4


def format_formula(f: Formula) -> str:
    """Print with the fewest parentheses the grammar needs."""
    if isinstance(f, Truth):
        return "true" if f.value else "false"
    if isinstance(f, Equal):
        return f"{format_term(f.left)} = {format_term(f.right)}"
    if isinstance(f, Atom):
        return format_term(App(f.name, f.args)) if f.args else f.name
    if isinstance(f, Not):
        return "~" + _wrap(f.body, 4)
    if isinstance(f, Binary):
        p = _prec(f)
        if p == 1:
            left, right = _wrap(f.left, 2), _wrap(f.right, 1)
        else:
            left, right = _wrap(f.left, p), _wrap(f.right, p + 1)
        return f"{left} {f.op} {right}"
    names = [f.var]
    body = f.body
    while (
        isinstance(body, Quant)
        and body.chained
        and body.quantifier == f.quantifier
        and body.sort == f.sort
    ):
        names.append(body.var)
        body = body.body
    return f"{f.quantifier} {','.join(names)}:{format_sort(f.sort)}. {format_formula(body)}"


def _wrap(f: Formula, min_prec: int) -> str:
    s = format_formula(f)
    return s if _prec(f) >= min_prec else f"({s})"


# -- signatures ---------------------------------------------------------------

Context = tuple[tuple[str, SortApp], ...]


@dataclass(frozen=True)
class SortDecl:
    name: str
    context: Context = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class FunDecl:
    """Function symbol.  ``implicit`` indices are inferred at use sites."""

    name: str
    implicit: Context
    params: Context
    result: SortApp
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class RelDecl:
    name: str
    implicit: Context
    params: Context
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class LabelDecl:
    """A named element of a closed sort; used as a unary atom ``one(x)``."""

    name: str
    sort: SortApp
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, eq=False)
class Signature:
    name: str
    sorts: tuple[SortDecl, ...] = ()
    functions: tuple[FunDecl, ...] = ()
    relations: tuple[RelDecl, ...] = ()
    labels: tuple[LabelDecl, ...] = ()
    eq_admissible: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def sort(self, name: str) -> SortDecl | None:
        return next((s for s in self.sorts if s.name == name), None)

    def function(self, name: str) -> FunDecl | None:
        return next((f for f in self.functions if f.name == name), None)

    def relation(self, name: str) -> RelDecl | None:
        return next((r for r in self.relations if r.name == name), None)

    def label(self, name: str) -> LabelDecl | None:
        return next((lb for lb in self.labels if lb.name == name), None)

    def height(self, sort_name: str) -> int:
        """1 for a sort with empty context, else 1 + the tallest dependency."""
        decl = self.sort(sort_name)
        if decl is None:
            raise KeyError(sort_name)
        return 1 + max((self.height(s.name) for _, s in decl.context), default=0)

    @property
    def max_height(self) -> int:
        return max((self.height(s.name) for s in self.sorts), default=0)

    def is_object_valued(self, fun: FunDecl) -> bool:
        return self.height(fun.result.name) == 1

    def __eq__(self, other):
        if not isinstance(other, Signature):
            return NotImplemented
        return (
            self.name,
            self.sorts,
            self.functions,
            self.relations,
            self.labels,
            dict(self.eq_admissible),
        ) == (
            other.name,
            other.sorts,
            other.functions,
            other.relations,
            other.labels,
            dict(other.eq_admissible),
        )

    def __hash__(self):
        return hash((self.name, self.sorts, self.functions, self.relations, self.labels))


def _check_sortapp(sig: Signature, ctx: Mapping[str, SortApp], s: SortApp) -> SortApp:
    decl = sig.sort(s.name)
    if decl is None:
        raise SortError(f"unknown sort {s.name!r}", s.span)
    if len(s.args) != len(decl.context):
        raise SortError(
            f"sort {s.name} takes {len(decl.context)} index argument(s), got {len(s.args)}",
            s.span,
        )
    mapping: dict[str, Term] = {}
    args = []
    for (cvar, csort), arg in zip(decl.context, s.args):
        arg = _infer_term(sig, ctx, arg)
        want = subst_sort(csort, mapping)
        if arg.sort != want:
            raise SortError(
                f"index {format_term(arg)} has sort {format_sort(arg.sort)}, "
                f"expected {format_sort(want)}",
                arg.span or s.span,
            )
        mapping[cvar] = arg
        args.append(arg)
    return SortApp(s.name, tuple(args), s.span)


def _match(pattern: Term, actual: Term, metas: frozenset[str], binding: dict) -> bool:
    if isinstance(pattern, Var) and pattern.name in metas:
        bound = binding.get(pattern.name)
        if bound is None:
            binding[pattern.name] = actual
            return True
        return bound == actual
    if isinstance(pattern, Var):
        return isinstance(actual, Var) and actual.name == pattern.name
    if not isinstance(actual, App) or actual.name != pattern.name:
        return False
    if len(actual.args) != len(pattern.args):
        return False
    return all(_match(p, a, metas, binding) for p, a in zip(pattern.args, actual.args))


def _apply_symbol(
    sig: Signature,
    ctx: Mapping[str, SortApp],
    name: str,
    implicit: Context,
    params: Context,
    args: tuple[Term, ...],
    span,
) -> tuple[tuple[Term, ...], dict]:
    """Sort-check an application; returns sorted args and the substitution."""
    if len(args) != len(params):
        raise SortError(
            f"{name} expects {len(params)} argument(s), got {len(args)}", span
        )
    metas = frozenset(v for v, _ in implicit)
    binding: dict[str, Term] = {}
    out = []
    for (pname, psort), arg in zip(params, args):
        arg = _infer_term(sig, ctx, arg)
        pattern = subst_sort(psort, {k: v for k, v in binding.items() if k not in metas})
        actual = arg.sort
        ok = pattern.name == actual.name and len(pattern.args) == len(actual.args)
        trial = dict(binding)
        if ok:
            ok = all(_match(p, a, metas, trial) for p, a in zip(pattern.args, actual.args))
        if not ok:
            shown = subst_sort(pattern, {k: v for k, v in binding.items() if k in metas})
            raise SortError(
                f"index mismatch in {name}: argument {format_term(arg)} has sort "
                f"{format_sort(actual)}, expected {format_sort(shown)}",
                arg.span or span,
            )
        binding = trial
        binding[pname] = arg
        out.append(arg)
    return tuple(out), binding


def _infer_term(sig: Signature, ctx: Mapping[str, SortApp], t: Term) -> Term:
    if isinstance(t, Var):
        if t.name in ctx:
            return Var(t.name, t.span, ctx[t.name])
        fun = sig.function(t.name)
        if fun is not None and not fun.params:
            return App(t.name, (), t.span, fun.result)
        raise SortError(f"unbound variable {t.name!r}", t.span)
    fun = sig.function(t.name)
    if fun is None:
        raise SortError(f"unknown function symbol {t.name!r}", t.span)
    args, binding = _apply_symbol(sig, ctx, t.name, fun.implicit, fun.params, t.args, t.span)
    return App(t.name, args, t.span, subst_sort(fun.result, binding))


# -- signature construction and parsing --------------------------------------


def _infer_implicit(
    decl_name: str,
    sig: Signature,
    ivars: list[tuple[Token, SortApp | None]],
    params: list[tuple[str, SortApp]],
    result: SortApp | None,
) -> tuple[Context, Context]:
    """Give every implicit index a sort and lift the uninferable ones."""
    names = [t.text for t, _ in ivars]
    sorts: dict[str, SortApp] = {t.text: s for t, s in ivars if s is not None}
    occurrences = [s for _, s in params] + ([result] if result is not None else [])
    for s in occurrences:
        decl = sig.sort(s.name)
        if decl is None or len(decl.context) != len(s.args):
            continue
        mapping: dict[str, Term] = {}
        for (cvar, csort), arg in zip(decl.context, s.args):
            if isinstance(arg, Var) and arg.name in names and arg.name not in sorts:
                sorts[arg.name] = subst_sort(csort, mapping)
            mapping[cvar] = arg
    for t, _ in ivars:
        if t.text not in sorts:
            raise SignatureError(
                f"cannot infer the sort of index {t.text!r} of {decl_name}", t.span
            )
    inferable = {v for _, s in params for v in sort_vars(s)}
    implicit = tuple((v, sorts[v]) for v in names if v in inferable)
    lifted = tuple((v, sorts[v]) for v in names if v not in inferable)
    return implicit, lifted + tuple(params)


class _SigParser(_Parser):
    def __init__(self, text: str):
        super().__init__(text, KEYWORDS)

    def keyword(self) -> Token | None:
        t = self.tok
        return t if t.kind == "ident" and t.text in SIG_KEYWORDS else None

    def context(self, closer: str) -> list[tuple[Token, SortApp]]:
        entries = []
        if self.at(closer):
            return entries
        while True:
            name = self.ident()
            self.expect(":")
            entries.append((name, self.sortapp()))
            if not self.at(","):
                return entries
            self.advance()

    def ivars(self) -> list[tuple[Token, SortApp | None]]:
        entries = []
        self.expect("{")
        while True:
            name = self.ident()
            sort = None
            if self.at(":"):
                self.advance()
                sort = self.sortapp()
            entries.append((name, sort))
            if self.at("}"):
                self.advance()
                return entries
            self.expect(",")


def _scoped_check(sig: Signature, entries, span_owner: str) -> tuple[dict, Context]:
    ctx: dict[str, SortApp] = {}
    out = []
    for name, s in entries:
        text = name.text if isinstance(name, Token) else name
        if text in ctx:
            raise SignatureError(f"duplicate variable {text!r} in {span_owner}", getattr(name, "span", None))
        try:
            checked = _check_sortapp(sig, ctx, s)
        except SortError as e:
            raise SignatureError(e.message, e.span) from None
        ctx[text] = checked
        out.append((text, checked))
    return ctx, tuple(out)


def parse_signature(text: str) -> Signature:
    """Parse signature source.

    Declarations, each ending in ``;``::

        signature NAME;
        sort S;  sort S(x:T, ...);
        fun f{i, j:T, ...}(x:T, ...) : S(...);
        rel R{...}(x:T, ...);
        label one : S;
        admit isomorphism|equivalence : S, ...;
    """
    p = _SigParser(text)
    declared_sorts = {
        b.text
        for a, b in zip(p.tokens, p.tokens[1:])
        if a.kind == "ident" and a.text == "sort" and b.kind == "ident"
    }
    sig = Signature("anonymous")
    seen: dict[str, str] = {}
    admit: dict[str, tuple[list[Token], SourceSpan]] = {}

    def claim(tok: Token, kind: str):
        if tok.text in seen:
            raise SignatureError(
                f"{tok.text!r} already declared as a {seen[tok.text]}", tok.span
            )
        seen[tok.text] = kind

    while p.tok.kind != "eof":
        kw = p.keyword()
        if kw is None:
            raise p.fail({f"'{k}'" for k in SIG_KEYWORDS})
        p.advance()
        if kw.text == "signature":
            sig = replace(sig, name=p.ident().text)
        elif kw.text == "sort":
            name = p.ident()
            claim(name, "sort")
            entries = []
            if p.at("("):
                p.open()
                entries = p.context(")")
                p.close()
            for _, s in entries:
                if sig.sort(s.name) is None and s.name in declared_sorts:
                    raise SignatureError(
                        f"acyclicity violation: sort {name.text} depends on "
                        f"{s.name}, which is not declared before it",
                        s.span,
                    )
            _, ctx = _scoped_check(sig, entries, name.text)
            sig = replace(sig, sorts=sig.sorts + (SortDecl(name.text, ctx, name.span),))
        elif kw.text in ("fun", "rel"):
            name = p.ident()
            claim(name, "function" if kw.text == "fun" else "relation")
            ivars = p.ivars() if p.at("{") else []
            p.open()
            entries = p.context(")")
            p.close()
            result = None
            if kw.text == "fun":
                p.expect(":")
                result = p.sortapp()
            for v, _ in ivars:
                if any(v.text == e.text for e, _ in entries):
                    raise SignatureError(f"index {v.text!r} shadows a parameter", v.span)
            raw_params = [(e.text, s) for e, s in entries]
            implicit, params = _infer_implicit(name.text, sig, ivars, raw_params, result)
            ictx, implicit = _scoped_check(sig, implicit, name.text)
            # lifted indices come first in params; the implicit ones are in scope
            full = list(implicit) + list(params)
            ctx, checked = _scoped_check(sig, full, name.text)
            params = checked[len(implicit):]
            if kw.text == "fun":
                try:
                    res = _check_sortapp(sig, ctx, result)
                except SortError as e:
                    raise SignatureError(e.message, e.span) from None
                decl = FunDecl(name.text, implicit, params, res, name.span)
                sig = replace(sig, functions=sig.functions + (decl,))
            else:
                decl = RelDecl(name.text, implicit, params, name.span)
                sig = replace(sig, relations=sig.relations + (decl,))
        elif kw.text == "label":
            name = p.ident()
            claim(name, "label")
            p.expect(":")
            s = p.sortapp()
            try:
                s = _check_sortapp(sig, {}, s)
            except SortError as e:
                raise SignatureError(e.message, e.span) from None
            sig = replace(sig, labels=sig.labels + (LabelDecl(name.text, s, name.span),))
        else:
            which = p.ident()
            if which.text not in SAMENESS_NAMES:
                raise SignatureError(
                    f"unknown sameness notion {which.text!r}", which.span
                )
            p.expect(":")
            names = [p.ident()]
            while p.at(","):
                p.advance()
                names.append(p.ident())
            admit[which.text] = (names, which.span)
        p.expect(";")

    return _finish_admissibility(sig, admit)


def _finish_admissibility(sig: Signature, admit) -> Signature:
    defaults = default_admissibility(sig)
    table = dict(defaults)
    for notion, (names, span) in admit.items():
        for t in names:
            if sig.sort(t.text) is None:
                raise SignatureError(f"unknown sort {t.text!r}", t.span)
        if notion not in defaults:
            raise SignatureError(
                "equivalence sameness undefined for this signature", span
            )
        chosen = frozenset(t.text for t in names)
        extra = chosen - defaults[notion]
        if extra:
            raise SignatureError(
                f"equality at {', '.join(sorted(extra))} cannot be admitted under {notion}",
                span,
            )
        table[notion] = chosen
    return replace(sig, eq_admissible=table)


def default_admissibility(sig: Signature) -> dict[str, frozenset[str]]:
    table = {"isomorphism": frozenset(s.name for s in sig.sorts)}
    top = sig.max_height
    if top >= 2:
        table["equivalence"] = frozenset(
            s.name for s in sig.sorts if sig.height(s.name) == top
        )
    return table


def format_signature(sig: Signature) -> str:
    def ctx(entries):
        return ", ".join(f"{v}:{format_sort(s)}" for v, s in entries)

    lines = [f"signature {sig.name};"]
    for s in sig.sorts:
        lines.append(f"sort {s.name}({ctx(s.context)});" if s.context else f"sort {s.name};")
    for kind, decls in (("fun", sig.functions), ("rel", sig.relations)):
        for d in decls:
            imp = "{" + ctx(d.implicit) + "}" if d.implicit else ""
            tail = f" : {format_sort(d.result)}" if kind == "fun" else ""
            lines.append(f"{kind} {d.name}{imp}({ctx(d.params)}){tail};")
    for lb in sig.labels:
        lines.append(f"label {lb.name} : {format_sort(lb.sort)};")
    defaults = default_admissibility(sig)
    for notion in SAMENESS_NAMES:
        chosen = sig.eq_admissible.get(notion)
        if chosen is not None and chosen != defaults.get(notion):
            names = ", ".join(s.name for s in sig.sorts if s.name in chosen)
            lines.append(f"admit {notion} : {names};")
    return "\n".join(lines) + "\n"


# -- builtin signatures -------------------------------------------------------

CATEGORY_SIGNATURE = """\
signature category;
sort O;
sort A(x:O, y:O);
fun id{x}() : A(x, x);
fun comp{x, y, z}(f:A(x, y), g:A(y, z)) : A(x, z);
"""

MONOID_SIGNATURE = """\
signature monoid;
sort U;
fun unit() : U;
fun mul(a:U, b:U) : U;
"""

SET_SIGNATURE = """\
signature set;
sort U;
label one : U;
"""

_BUILTIN_TEXT = {
    "category": CATEGORY_SIGNATURE,
    "monoid": MONOID_SIGNATURE,
    "set": SET_SIGNATURE,
}
_BUILTIN_CACHE: dict[str, Signature] = {}


def builtin_signature(name: str) -> Signature:
    if name not in _BUILTIN_TEXT:
        raise KeyError(f"no builtin signature {name!r}")
    if name not in _BUILTIN_CACHE:
        _BUILTIN_CACHE[name] = parse_signature(_BUILTIN_TEXT[name])
    return _BUILTIN_CACHE[name]


def builtin_names() -> tuple[str, ...]:
    return tuple(_BUILTIN_TEXT)


# -- sort checking ------------------------------------------------------------


@dataclass(frozen=True)
class SortedFormula:
    """A formula whose terms carry their applied sorts."""

    formula: Formula
    signature: Signature
    context: Context = ()

    def __str__(self) -> str:
        return format_formula(self.formula)


def sort_check(
    f: Formula, sig: Signature, context: Mapping[str, SortApp] | None = None
) -> SortedFormula:
    """Annotate every term with its sort, or raise :class:`SortError`.

    ``context`` declares free variables (in dependency order); it defaults
    to none, so closed formulas are the norm.
    """
    ctx: dict[str, SortApp] = {}
    for name, s in (context or {}).items():
        ctx[name] = _check_sortapp(sig, ctx, s)
    checked = _check(sig, ctx, f)
    return SortedFormula(checked, sig, tuple(ctx.items()))


def _check(sig: Signature, ctx: dict[str, SortApp], f: Formula) -> Formula:
    if isinstance(f, Truth):
        return f
    if isinstance(f, Equal):
        left = _infer_term(sig, ctx, f.left)
        right = _infer_term(sig, ctx, f.right)
        if left.sort != right.sort:
            raise SortError(
                f"equality between {format_sort(left.sort)} and {format_sort(right.sort)}",
                f.span,
            )
        return Equal(left, right, f.span, left.sort)
    if isinstance(f, Atom):
        rel = sig.relation(f.name)
        if rel is not None:
            args, _ = _apply_symbol(sig, ctx, f.name, rel.implicit, rel.params, f.args, f.span)
            return Atom(f.name, args, f.span)
        label = sig.label(f.name)
        if label is not None:
            if len(f.args) != 1:
                raise SortError(f"label atom {f.name} takes one argument", f.span)
            arg = _infer_term(sig, ctx, f.args[0])
            if arg.sort != label.sort:
                raise SortError(
                    f"label {f.name} names an element of {format_sort(label.sort)}, "
                    f"not {format_sort(arg.sort)}",
                    arg.span or f.span,
                )
            return Atom(f.name, (arg,), f.span)
        raise SortError(f"unknown relation symbol {f.name!r}", f.span)
    if isinstance(f, Not):
        return Not(_check(sig, ctx, f.body), f.span)
    if isinstance(f, Binary):
        return Binary(f.op, _check(sig, ctx, f.left), _check(sig, ctx, f.right), f.span)
    if f.var in ctx:
        raise SortError(f"variable {f.var!r} is already bound", f.span)
    if sig.function(f.var) is not None and not sig.function(f.var).params:
        raise SortError(f"variable {f.var!r} clashes with a constant", f.span)
    s = _check_sortapp(sig, ctx, f.sort)
    ctx[f.var] = s
    try:
        body = _check(sig, ctx, f.body)
    finally:
        del ctx[f.var]
    return Quant(f.quantifier, f.var, s, body, f.span, f.chained)


def parse_sorted(text: str, sig: Signature) -> SortedFormula:
    return sort_check(parse_formula(text, sig), sig)
