"""Concrete syntax: predicates, session types, process terms, and the
protocol spec file format, with printers that round-trip.

Spec files hold named type definitions, named term definitions with
their full signatures, device definitions in the scripted-device
language, and run directives:

    type Quick = 1{t | t <= 5}
    term main uses x : Quick at 0 :: 1{t | t == 6} = recv{4} x(); send{t | t == 6}()
    device probe = close 3 5
    run main channel a horizon 40
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lts import Channel, NamelessObj, get_language
from .sessiontypes import (
    FALSE,
    HypSet,
    Pred,
    SessionType,
    TRUE,
    TemporalAnnot,
    TimeExpr,
    atom,
    pand,
    pnot,
    por,
)
from .proclang import (
    Sym,
    TFwd,
    TLet,
    TRecvChan,
    TRecvChanR,
    TRecvClose,
    TRecvSel,
    TRecvSelR,
    TSendChan,
    TSendChanR,
    TSendClose,
    TSendSel,
    TSendSelR,
    Term,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# tokenizer

_SYMBOLS = ["=>", "-o", "||", "&&", "<=", "==", "<", "!", "(", ")", "{", "}",
            "|", ";", ":", ",", ".", "+", "*", "&", "="]


@dataclass
class _Tok:
    kind: str  # "ident" | "num" | "chan" | "sym" | "eof"
    text: str
    line: int
    col: int


def _tokenize(src: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        ch = src[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and src[i] != "\n":
                i += 1
            continue
        if ch == "@":
            j = i + 1
            while j < n and (src[j].isalnum() or src[j] in "_%?'"):
                j += 1
            if j == i + 1:
                raise ParseError("empty channel name after @", line, col)
            toks.append(_Tok("chan", src[i + 1:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            toks.append(_Tok("num", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] in "_'"):
                j += 1
            toks.append(_Tok("ident", src[i:j], line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if src.startswith(sym, i):
                toks.append(_Tok("sym", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, src: str, type_env: dict[str, SessionType] | None = None):
        self.toks = _tokenize(src)
        self.pos = 0
        self.types = dict(type_env or {})

    # -- token plumbing ------------------------------------------------------
    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> _Tok:
        tok = self.peek()
        self.pos += 1
        return tok

    def at_sym(self, *texts: str) -> bool:
        t = self.peek()
        return t.kind == "sym" and t.text in texts

    def at_kw(self, *words: str) -> bool:
        t = self.peek()
        return t.kind == "ident" and t.text in words

    def expect_sym(self, text: str) -> _Tok:
        t = self.next()
        if t.kind != "sym" or t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        return t

    def expect_ident(self, what: str = "identifier") -> str:
        t = self.next()
        if t.kind != "ident":
            raise ParseError(f"expected {what}, found {t.text!r}", t.line, t.col)
        return t.text

    def fail(self, message: str):
        t = self.peek()
        raise ParseError(message + f" (found {t.text!r})", t.line, t.col)

    # -- time expressions and predicates --------------------------------------
    def time_expr(self) -> TimeExpr:
        t = self.next()
        if t.kind == "num":
            return TimeExpr(None, int(t.text))
        if t.kind == "ident":
            if self.at_sym("+"):
                self.next()
                num = self.next()
                if num.kind != "num":
                    raise ParseError("expected a constant offset", num.line, num.col)
                return TimeExpr(t.text, int(num.text))
            return TimeExpr(t.text, 0)
        raise ParseError(f"expected a time expression, found {t.text!r}", t.line, t.col)

    def pred(self) -> Pred:
        left = self.pred_and()
        if self.at_sym("||"):
            self.next()
            return por(left, self.pred())
        return left

    def pred_and(self) -> Pred:
        left = self.pred_not()
        if self.at_sym("&&"):
            self.next()
            return pand(left, self.pred_and())
        return left

    def pred_not(self) -> Pred:
        if self.at_sym("!"):
            self.next()
            return pnot(self.pred_not())
        if self.at_sym("("):
            self.next()
            p = self.pred()
            self.expect_sym(")")
            return p
        if self.at_kw("true"):
            self.next()
            return TRUE
        if self.at_kw("false"):
            self.next()
            return FALSE
        lhs = self.time_expr()
        op = self.next()
        if op.kind != "sym" or op.text not in ("<=", "<", "=="):
            raise ParseError(f"expected a comparison, found {op.text!r}", op.line, op.col)
        rhs = self.time_expr()
        return atom(lhs, op.text, rhs)

    def annot(self) -> TemporalAnnot:
        self.expect_sym("{")
        binder = self.expect_ident("time binder")
        self.expect_sym("|")
        p = self.pred()
        self.expect_sym("}")
        return TemporalAnnot(binder, p)

    def braces_are_annot(self) -> bool:
        # a `{` followed by `ident |` is a binder + predicate; otherwise a time
        return (self.peek(1).kind == "ident"
                and self.peek(2).kind == "sym" and self.peek(2).text == "|")

    def time_braces(self) -> TimeExpr:
        self.expect_sym("{")
        e = self.time_expr()
        self.expect_sym("}")
        return e

    # -- types -----------------------------------------------------------------
    def stype(self) -> SessionType:
        left = self.stype_atom()
        if self.at_sym("-o", "*", "&", "+"):
            op = self.next().text
            an = self.annot()
            right = self.stype()
            kind = {"-o": "lolli", "*": "tensor", "&": "with", "+": "plus"}[op]
            return SessionType(kind, an, left, right)
        return left

    def stype_atom(self) -> SessionType:
        if self.at_sym("("):
            self.next()
            a = self.stype()
            self.expect_sym(")")
            return a
        t = self.peek()
        if t.kind == "num" and t.text == "1":
            self.next()
            an = self.annot()
            return SessionType("one", an)
        if t.kind == "ident":
            if t.text in self.types:
                self.next()
                return self.types[t.text]
            raise ParseError(f"unknown type name {t.text!r}", t.line, t.col)
        raise ParseError(f"expected a type, found {t.text!r}", t.line, t.col)

    # -- terms -------------------------------------------------------------------
    def sym(self) -> Sym:
        t = self.next()
        if t.kind == "ident":
            return Sym(var=t.text)
        if t.kind == "chan":
            return Sym(chan=Channel(t.text))
        raise ParseError(f"expected a variable or channel, found {t.text!r}", t.line, t.col)

    def selector(self) -> int:
        name = self.expect_ident("selector")
        if name not in ("pi1", "pi2"):
            self.fail("expected pi1 or pi2")
        return int(name[2])

    def term(self) -> Term:
        t = self.peek()
        if self.at_sym("("):
            self.next()
            inner = self.term()
            self.expect_sym(")")
            return inner
        if t.kind == "ident" and t.text == "fwd":
            self.next()
            tm = self.time_braces()
            self.expect_sym("(")
            s = self.sym()
            self.expect_sym(")")
            return TFwd(s, tm)
        if t.kind == "ident" and t.text == "let":
            return self.term_let()
        if t.kind == "ident" and t.text == "send":
            return self.term_send()
        if t.kind == "ident" and t.text == "recv":
            return self.term_recv()
        if t.kind == "ident" and t.text == "case":
            self.next()
            an = self.annot()
            b1, b2 = self.branches()
            return TRecvSel(an, b1, b2)
        if t.kind == "ident" and t.text == "select":
            self.next()
            an = self.annot()
            self.expect_sym("(")
            sel = self.selector()
            self.expect_sym(")")
            self.expect_sym(";")
            return TSendSelR(an, sel, self.term())
        if t.kind in ("ident", "chan") and self.peek(1).kind == "sym" and self.peek(1).text == ".":
            subject = self.sym()
            self.expect_sym(".")
            verb = self.expect_ident("case or select")
            tm = self.time_braces()
            if verb == "select":
                self.expect_sym("(")
                sel = self.selector()
                self.expect_sym(")")
                self.expect_sym(";")
                return TSendSel(subject, tm, sel, self.term())
            if verb == "case":
                b1, b2 = self.branches()
                return TRecvSelR(subject, tm, b1, b2)
            self.fail("expected select or case after the subject")
        self.fail("expected a term")

    def branches(self) -> tuple[Term, Term]:
        self.expect_sym("(")
        if self.expect_ident("pi1") != "pi1":
            self.fail("first branch must be pi1")
        self.expect_sym("=>")
        b1 = self.term()
        self.expect_sym("|")
        if self.expect_ident("pi2") != "pi2":
            self.fail("second branch must be pi2")
        self.expect_sym("=>")
        b2 = self.term()
        self.expect_sym(")")
        return b1, b2

    def term_let(self) -> Term:
        self.next()
        tm = self.time_braces()
        var = self.expect_ident("bound variable")
        self.expect_sym(":")
        annot_type = self.stype()
        self.expect_sym("=")
        self.expect_sym("(")
        m1 = self.term()
        src = None
        if self.at_sym(":"):
            self.next()
            src = self.stype()
        self.expect_sym(")")
        self.expect_sym(";")
        m2 = self.term()
        return TLet(var, annot_type, src, m1, m2, tm)

    def term_send(self) -> Term:
        self.next()
        if self.braces_are_annot():
            an = self.annot()
            self.expect_sym("(")
            if self.at_sym(")"):
                self.next()
                return TSendClose(an)
            m1 = self.term()
            self.expect_sym(")")
            self.expect_sym(";")
            return TSendChanR(an, m1, self.term())
        tm = self.time_braces()
        subject = self.sym()
        self.expect_sym("(")
        m1 = self.term()
        self.expect_sym(")")
        self.expect_sym(";")
        return TSendChan(subject, tm, m1, self.term())

    def term_recv(self) -> Term:
        self.next()
        if self.braces_are_annot():
            an = self.annot()
            self.expect_sym("(")
            var = self.expect_ident("bound variable")
            self.expect_sym("=>")
            body = self.term()
            self.expect_sym(")")
            return TRecvChan(an, var, body)
        tm = self.time_braces()
        subject = self.sym()
        self.expect_sym("(")
        if self.at_sym(")"):
            self.next()
            self.expect_sym(";")
            return TRecvClose(subject, tm, self.term())
        var = self.expect_ident("bound variable")
        self.expect_sym("=>")
        body = self.term()
        self.expect_sym(")")
        return TRecvChanR(subject, tm, var, body)


# ---------------------------------------------------------------------------
# printers


def show_time_expr(e: TimeExpr) -> str:
    if e.var is None:
        return str(e.offset)
    if e.offset == 0:
        return e.var
    return f"{e.var} + {e.offset}"


def show_pred(p: Pred, prec: int = 0) -> str:
    # prec levels: 0 or-context, 1 and-context, 2 atom-context
    if p.kind == "true":
        return "true"
    if p.kind == "false":
        return "false"
    if p.kind == "atom":
        return f"{show_time_expr(p.lhs)} {p.op} {show_time_expr(p.rhs)}"
    if p.kind == "not":
        return f"!{show_pred(p.left, 2)}"
    if p.kind == "and":
        body = f"{show_pred(p.left, 2)} && {show_pred(p.right, 1)}"
        return f"({body})" if prec > 1 else body
    body = f"{show_pred(p.left, 1)} || {show_pred(p.right, 0)}"
    return f"({body})" if prec > 0 else body


def show_annot(an: TemporalAnnot) -> str:
    return f"{{{an.binder} | {show_pred(an.pred)}}}"


def show_type(a: SessionType, nested: bool = False) -> str:
    if a.kind == "one":
        return f"1{show_annot(a.annot)}"
    sym = {"lolli": "-o", "tensor": "*", "with": "&", "plus": "+"}[a.kind]
    body = f"{show_type(a.left, True)} {sym}{show_annot(a.annot)} {show_type(a.right)}"
    return f"({body})" if nested else body


def _show_sym(s: Sym) -> str:
    return s.var if not s.is_chan else f"@{s.chan.name}"


def show_term(m: Term) -> str:
    if isinstance(m, TFwd):
        return f"fwd{{{show_time_expr(m.time)}}}({_show_sym(m.sym)})"
    if isinstance(m, TLet):
        src = "" if m.src is None else f" : {show_type(m.src)}"
        return (f"let{{{show_time_expr(m.time)}}} {m.var} : {show_type(m.annot, True)} = "
                f"({show_term(m.m1)}{src}); {show_term(m.m2)}")
    if isinstance(m, TSendClose):
        return f"send{show_annot(m.annot)}()"
    if isinstance(m, TRecvClose):
        return f"recv{{{show_time_expr(m.time)}}} {_show_sym(m.sym)}(); {show_term(m.cont)}"
    if isinstance(m, TRecvChan):
        return f"recv{show_annot(m.annot)}({m.var} => {show_term(m.body)})"
    if isinstance(m, TSendChan):
        return (f"send{{{show_time_expr(m.time)}}} {_show_sym(m.sym)}"
                f"({show_term(m.arg)}); {show_term(m.cont)}")
    if isinstance(m, TSendChanR):
        return f"send{show_annot(m.annot)}({show_term(m.arg)}); {show_term(m.cont)}"
    if isinstance(m, TRecvChanR):
        return (f"recv{{{show_time_expr(m.time)}}} {_show_sym(m.sym)}"
                f"({m.var} => {show_term(m.body)})")
    if isinstance(m, TRecvSel):
        return f"case{show_annot(m.annot)}(pi1 => {show_term(m.b1)} | pi2 => {show_term(m.b2)})"
    if isinstance(m, TSendSel):
        return (f"{_show_sym(m.sym)}.select{{{show_time_expr(m.time)}}}(pi{m.sel}); "
                f"{show_term(m.cont)}")
    if isinstance(m, TSendSelR):
        return f"select{show_annot(m.annot)}(pi{m.sel}); {show_term(m.cont)}"
    if isinstance(m, TRecvSelR):
        return (f"{_show_sym(m.sym)}.case{{{show_time_expr(m.time)}}}"
                f"(pi1 => {show_term(m.b1)} | pi2 => {show_term(m.b2)})")
    raise TypeError(f"not a term: {m!r}")


# ---------------------------------------------------------------------------
# entry points for single constructs


def parse_pred(text: str) -> Pred:
    p = _Parser(text)
    out = p.pred()
    if p.peek().kind != "eof":
        p.fail("trailing input after predicate")
    return out


def parse_type(text: str, type_env: dict[str, SessionType] | None = None) -> SessionType:
    p = _Parser(text, type_env)
    out = p.stype()
    if p.peek().kind != "eof":
        p.fail("trailing input after type")
    return out


def parse_term(text: str, type_env: dict[str, SessionType] | None = None) -> Term:
    p = _Parser(text, type_env)
    out = p.term()
    if p.peek().kind != "eof":
        p.fail("trailing input after term")
    return out


def parse_time_expr(text: str) -> TimeExpr:
    p = _Parser(text)
    out = p.time_expr()
    if p.peek().kind != "eof":
        p.fail("trailing input after time expression")
    return out


# ---------------------------------------------------------------------------
# spec files


@dataclass
class TermDef:
    name: str
    gvars: tuple[str, ...]
    assume: tuple[Pred, ...]
    uses: tuple[tuple[str, SessionType], ...]
    at: TimeExpr
    stype: SessionType
    term: Term

    @property
    def hyp(self) -> HypSet:
        return HypSet(self.gvars, self.assume)

    @property
    def ctx(self) -> dict[str, SessionType]:
        return dict(self.uses)


@dataclass
class RunDirective:
    name: str
    channel: str = "a"
    horizon: int | None = None


@dataclass
class SpecFile:
    types: dict[str, SessionType] = field(default_factory=dict)
    terms: dict[str, TermDef] = field(default_factory=dict)
    devices: dict[str, NamelessObj] = field(default_factory=dict)
    runs: list[RunDirective] = field(default_factory=list)


def parse_spec(src: str) -> SpecFile:
    p = _Parser(src)
    spec = SpecFile()
    while p.peek().kind != "eof":
        kw = p.expect_ident("type, term, device, or run")
        if kw == "type":
            name = p.expect_ident("type name")
            p.expect_sym("=")
            p.types = spec.types
            spec.types[name] = p.stype()
        elif kw == "term":
            name = p.expect_ident("term name")
            gvars: tuple[str, ...] = ()
            assume: tuple[Pred, ...] = ()
            uses: list[tuple[str, SessionType]] = []
            at = TimeExpr(None, 0)
            p.types = spec.types
            while p.at_kw("given", "assume", "uses", "at"):
                clause = p.expect_ident()
                if clause == "given":
                    names = [p.expect_ident("time variable")]
                    while p.at_sym(","):
                        p.next()
                        names.append(p.expect_ident("time variable"))
                    gvars = gvars + tuple(names)
                elif clause == "assume":
                    assume = assume + (p.pred(),)
                elif clause == "uses":
                    while True:
                        var = p.expect_ident("variable")
                        p.expect_sym(":")
                        uses.append((var, p.stype()))
                        if not p.at_sym(","):
                            break
                        p.next()
                else:
                    at = p.time_expr()
            p.expect_sym(":")
            p.expect_sym(":")
            stype = p.stype()
            p.expect_sym("=")
            term = p.term()
            spec.terms[name] = TermDef(name, gvars, assume, tuple(uses), at, stype, term)
        elif kw == "device":
            name = p.expect_ident("device name")
            p.expect_sym("=")
            # device scripts run to the end of the line
            start = p.peek()
            words: list[str] = []
            while p.peek().kind != "eof" and p.peek().line == start.line:
                words.append(p.next().text)
            lang = get_language("device")
            spec.devices[name] = NamelessObj("device", lang.parse_term(" ".join(words)))
        elif kw == "run":
            name = p.expect_ident("term name")
            run = RunDirective(name)
            while p.at_kw("channel", "horizon"):
                clause = p.expect_ident()
                if clause == "channel":
                    run.channel = p.expect_ident("channel name")
                else:
                    num = p.next()
                    if num.kind != "num":
                        raise ParseError("expected a horizon number", num.line, num.col)
                    run.horizon = int(num.text)
            spec.runs.append(run)
        else:
            p.fail(f"unknown declaration {kw!r}")
    return spec


def show_spec(spec: SpecFile) -> str:
    lines: list[str] = []
    for name, a in spec.types.items():
        lines.append(f"type {name} = {show_type(a)}")
    for name, obj in spec.devices.items():
        lang = get_language(obj.lang)
        lines.append(f"device {name} = {lang.show_term(obj.term)}")
    for name, td in spec.terms.items():
        parts = [f"term {name}"]
        if td.gvars:
            parts.append("given " + ", ".join(td.gvars))
        for pred in td.assume:
            parts.append(f"assume {show_pred(pred)}")
        if td.uses:
            parts.append("uses " + ", ".join(f"{x} : {show_type(a, True)}" for x, a in td.uses))
        parts.append(f"at {show_time_expr(td.at)}")
        parts.append(f":: {show_type(td.stype)}")
        parts.append(f"= {show_term(td.term)}")
        lines.append(" ".join(parts))
    for run in spec.runs:
        extra = f" channel {run.channel}"
        if run.horizon is not None:
            extra += f" horizon {run.horizon}"
        lines.append(f"run {run.name}{extra}")
    return "\n".join(lines) + "\n"
