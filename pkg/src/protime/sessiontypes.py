"""Timed session types: temporal predicates, formation, entailment, and
the two retyping relations.

Predicates live in the difference-logic fragment (atoms ``e1 op e2`` with
``e ::= tvar | nat | tvar + nat`` and boolean connectives).  Entailment
converts hypotheses plus negated goal to disjunctive normal form and
refutes each disjunct by negative-cycle detection on the difference
constraint graph; the same machinery yields satisfying valuations for
harness use.
"""

from __future__ import annotations

from dataclasses import dataclass

from .timebase import FinTime

# ---------------------------------------------------------------------------
# time expressions and predicates


@dataclass(frozen=True)
class TimeExpr:
    """``var + offset``; a literal when ``var`` is None."""

    var: str | None
    offset: int

    def shift(self, delta: int) -> "TimeExpr":
        return TimeExpr(self.var, self.offset + delta)

    def __repr__(self) -> str:
        if self.var is None:
            return str(self.offset)
        if self.offset == 0:
            return self.var
        return f"{self.var} + {self.offset}"


def tlit(n: int) -> TimeExpr:
    return TimeExpr(None, n)


def tvar(name: str, offset: int = 0) -> TimeExpr:
    return TimeExpr(name, offset)


@dataclass(frozen=True)
class Pred:
    """kind in {"true", "false", "atom", "and", "or", "not"}."""

    kind: str
    op: str | None = None          # "<=", "<", "==" for atoms
    lhs: TimeExpr | None = None
    rhs: TimeExpr | None = None
    left: "Pred | None" = None
    right: "Pred | None" = None

    def __repr__(self) -> str:
        if self.kind == "true":
            return "true"
        if self.kind == "false":
            return "false"
        if self.kind == "atom":
            return f"{self.lhs!r} {self.op} {self.rhs!r}"
        if self.kind == "not":
            return f"!({self.left!r})"
        sym = "&&" if self.kind == "and" else "||"
        return f"({self.left!r}) {sym} ({self.right!r})"


TRUE = Pred("true")
FALSE = Pred("false")


def atom(lhs: TimeExpr, op: str, rhs: TimeExpr) -> Pred:
    if op not in ("<=", "<", "=="):
        raise ValueError(f"bad comparison: {op}")
    return Pred("atom", op=op, lhs=lhs, rhs=rhs)


def pand(a: Pred, b: Pred) -> Pred:
    return Pred("and", left=a, right=b)


def por(a: Pred, b: Pred) -> Pred:
    return Pred("or", left=a, right=b)


def pnot(a: Pred) -> Pred:
    return Pred("not", left=a)


def conj(preds: list[Pred]) -> Pred:
    out = TRUE
    for p in preds:
        out = p if out is TRUE else pand(out, p)
    return out


def pred_vars(p: Pred) -> frozenset[str]:
    if p.kind == "atom":
        out = set()
        if p.lhs.var is not None:
            out.add(p.lhs.var)
        if p.rhs.var is not None:
            out.add(p.rhs.var)
        return frozenset(out)
    if p.kind in ("and", "or"):
        return pred_vars(p.left) | pred_vars(p.right)
    if p.kind == "not":
        return pred_vars(p.left)
    return frozenset()


def subst_expr(e: TimeExpr, var: str, repl: TimeExpr) -> TimeExpr:
    if e.var == var:
        return TimeExpr(repl.var, repl.offset + e.offset)
    return e


def subst_pred(p: Pred, var: str, repl: TimeExpr) -> Pred:
    if p.kind == "atom":
        return atom(subst_expr(p.lhs, var, repl), p.op, subst_expr(p.rhs, var, repl))
    if p.kind in ("and", "or"):
        return Pred(p.kind, left=subst_pred(p.left, var, repl),
                    right=subst_pred(p.right, var, repl))
    if p.kind == "not":
        return pnot(subst_pred(p.left, var, repl))
    return p


def eval_expr(e: TimeExpr, env: dict[str, int]) -> int:
    base = 0 if e.var is None else env[e.var]
    return base + e.offset


def eval_pred(p: Pred, env: dict[str, int]) -> bool:
    if p.kind == "true":
        return True
    if p.kind == "false":
        return False
    if p.kind == "atom":
        a, b = eval_expr(p.lhs, env), eval_expr(p.rhs, env)
        return {"<=": a <= b, "<": a < b, "==": a == b}[p.op]
    if p.kind == "and":
        return eval_pred(p.left, env) and eval_pred(p.right, env)
    if p.kind == "or":
        return eval_pred(p.left, env) or eval_pred(p.right, env)
    return not eval_pred(p.left, env)


def max_constant(p: Pred) -> int:
    if p.kind == "atom":
        return max(abs(p.lhs.offset), abs(p.rhs.offset))
    if p.kind in ("and", "or"):
        return max(max_constant(p.left), max_constant(p.right))
    if p.kind == "not":
        return max_constant(p.left)
    return 0


# ---------------------------------------------------------------------------
# session types


@dataclass(frozen=True)
class TemporalAnnot:
    binder: str
    pred: Pred

    def __repr__(self) -> str:
        return f"{{{self.binder} | {self.pred!r}}}"


@dataclass(frozen=True)
class SessionType:
    """kind in {"one", "lolli", "tensor", "with", "plus"}."""

    kind: str
    annot: TemporalAnnot
    left: "SessionType | None" = None
    right: "SessionType | None" = None

    def __repr__(self) -> str:
        if self.kind == "one":
            return f"1{self.annot!r}"
        sym = {"lolli": "-o", "tensor": "*", "with": "&", "plus": "+"}[self.kind]
        return f"({self.left!r} {sym}{self.annot!r} {self.right!r})"


def one(binder: str, pred: Pred) -> SessionType:
    return SessionType("one", TemporalAnnot(binder, pred))


def lolli(a: SessionType, binder: str, pred: Pred, b: SessionType) -> SessionType:
    return SessionType("lolli", TemporalAnnot(binder, pred), a, b)


def tensor(a: SessionType, binder: str, pred: Pred, b: SessionType) -> SessionType:
    return SessionType("tensor", TemporalAnnot(binder, pred), a, b)


def swith(a: SessionType, binder: str, pred: Pred, b: SessionType) -> SessionType:
    return SessionType("with", TemporalAnnot(binder, pred), a, b)


def splus(a: SessionType, binder: str, pred: Pred, b: SessionType) -> SessionType:
    return SessionType("plus", TemporalAnnot(binder, pred), a, b)


def check_formation(gctx: frozenset[str], a: SessionType) -> bool:
    """Every predicate scoped in the context extended with its binder; the
    binder also scopes over the component types."""
    inner = gctx | {a.annot.binder}
    if not pred_vars(a.annot.pred) <= inner:
        return False
    if a.kind == "one":
        return True
    return check_formation(inner, a.left) and check_formation(inner, a.right)


def prop_of(a: SessionType, t: TimeExpr) -> Pred:
    """Top-level predicate with the binder instantiated; uniform across
    all five connectives."""
    return subst_pred(a.annot.pred, a.annot.binder, t)


def subst_type(a: SessionType, var: str, repl: TimeExpr) -> SessionType:
    if a.annot.binder == var:
        # the binder shadows; nothing free below
        return a
    annot = TemporalAnnot(a.annot.binder, subst_pred(a.annot.pred, var, repl))
    if a.kind == "one":
        return SessionType("one", annot)
    return SessionType(a.kind, annot,
                       subst_type(a.left, var, repl), subst_type(a.right, var, repl))


def type_vars(a: SessionType) -> frozenset[str]:
    out = pred_vars(a.annot.pred) - {a.annot.binder}
    if a.kind != "one":
        out |= (type_vars(a.left) | type_vars(a.right)) - {a.annot.binder}
    return frozenset(out)


def all_names_type(a: SessionType) -> frozenset[str]:
    """Binder and variable names anywhere in the type, for freshening."""
    out = pred_vars(a.annot.pred) | {a.annot.binder}
    if a.kind != "one":
        out |= all_names_type(a.left) | all_names_type(a.right)
    return frozenset(out)


def alpha_normalize(a: SessionType, depth: int = 0, env: dict[str, str] | None = None
                    ) -> SessionType:
    """Rename binders to canonical depth-indexed names for comparison."""
    env = env or {}
    fresh = f"%b{depth}"
    pred = a.annot.pred
    for old, new in env.items():
        pred = subst_pred(pred, old, tvar(new))
    pred = subst_pred(pred, a.annot.binder, tvar(fresh))
    annot = TemporalAnnot(fresh, pred)
    if a.kind == "one":
        return SessionType("one", annot)
    inner_env = {k: v for k, v in env.items() if k != a.annot.binder}
    inner_env[a.annot.binder] = fresh
    return SessionType(a.kind, annot,
                       alpha_normalize(a.left, depth + 1, inner_env),
                       alpha_normalize(a.right, depth + 1, inner_env))


def alpha_eq(a: SessionType, b: SessionType) -> bool:
    return alpha_normalize(a) == alpha_normalize(b)


# ---------------------------------------------------------------------------
# hypothesis sets and entailment


@dataclass(frozen=True)
class HypSet:
    gvars: tuple[str, ...] = ()
    hyps: tuple[Pred, ...] = ()

    def extend(self, var: str) -> "HypSet":
        if var in self.gvars:
            raise ValueError(f"time variable already bound: {var}")
        return HypSet(self.gvars + (var,), self.hyps)

    def assume(self, pred: Pred) -> "HypSet":
        return HypSet(self.gvars, self.hyps + (pred,))

    def fresh_var(self, base: str) -> str:
        if base not in self.gvars:
            return base
        i = 0
        while f"{base}_{i}" in self.gvars:
            i += 1
        return f"{base}_{i}"


class PredicateOutsideFragment(ValueError):
    pass


_Constraint = tuple[str | None, str | None, int]  # u - v <= k (None is the zero point)


def _nnf(p: Pred, neg: bool) -> Pred:
    if p.kind == "true":
        return FALSE if neg else TRUE
    if p.kind == "false":
        return TRUE if neg else FALSE
    if p.kind == "not":
        return _nnf(p.left, not neg)
    if p.kind == "and":
        return Pred("or" if neg else "and", left=_nnf(p.left, neg), right=_nnf(p.right, neg))
    if p.kind == "or":
        return Pred("and" if neg else "or", left=_nnf(p.left, neg), right=_nnf(p.right, neg))
    if p.kind != "atom":
        raise PredicateOutsideFragment(repr(p))
    if not neg:
        return p
    if p.op == "<=":
        return atom(p.rhs.shift(1), "<=", p.lhs)
    if p.op == "<":
        return atom(p.rhs, "<=", p.lhs)
    # negated equality splits
    return por(atom(p.lhs.shift(1), "<=", p.rhs), atom(p.rhs.shift(1), "<=", p.lhs))


def _atom_constraints(p: Pred) -> list[_Constraint]:
    def diff(lhs: TimeExpr, rhs: TimeExpr) -> _Constraint:
        # lhs <= rhs  ~~>  lhs.var - rhs.var <= rhs.offset - lhs.offset
        return (lhs.var, rhs.var, rhs.offset - lhs.offset)

    if p.op == "<=":
        return [diff(p.lhs, p.rhs)]
    if p.op == "<":
        return [diff(p.lhs.shift(1), p.rhs)]
    return [diff(p.lhs, p.rhs), diff(p.rhs, p.lhs)]


def _dnf(p: Pred) -> list[list[_Constraint]]:
    if p.kind == "true":
        return [[]]
    if p.kind == "false":
        return []
    if p.kind == "atom":
        return [_atom_constraints(p)]
    if p.kind == "or":
        return _dnf(p.left) + _dnf(p.right)
    if p.kind == "and":
        out = []
        rights = _dnf(p.right)
        for dl in _dnf(p.left):
            for dr in rights:
                out.append(dl + dr)
        return out
    raise PredicateOutsideFragment(repr(p))


def _solve(constraints: list[_Constraint]) -> dict[str, int] | None:
    """Satisfiability over the naturals; a model on success."""
    nodes: set[str | None] = {None}
    for u, v, _ in constraints:
        nodes.add(u)
        nodes.add(v)
    # u - v <= k becomes edge v -> u with weight k; naturals add x - 0... >= 0,
    # i.e. 0 - x <= 0, an edge x -> zero-point with weight 0.
    edges: list[tuple[str | None, str | None, int]] = []
    for u, v, k in constraints:
        edges.append((v, u, k))
    for n in nodes:
        if n is not None:
            edges.append((n, None, 0))
    dist: dict[str | None, int] = {n: 0 for n in nodes}
    for _ in range(len(nodes)):
        changed = False
        for v, u, k in edges:
            if dist[v] + k < dist[u]:
                dist[u] = dist[v] + k
                changed = True
        if not changed:
            break
    else:
        for v, u, k in edges:
            if dist[v] + k < dist[u]:
                return None  # negative cycle
    zero = dist[None]
    return {n: dist[n] - zero for n in nodes if n is not None}


_entail_cache: dict[tuple, bool] = {}


def entails(h: HypSet, goal: Pred) -> bool:
    """Does every natural-number valuation of the time variables that
    satisfies the hypotheses satisfy the goal?"""
    key = (h.hyps, goal)
    hit = _entail_cache.get(key)
    if hit is not None:
        return hit
    refutation = conj(list(h.hyps) + [_nnf(goal, True)])
    result = all(_solve(d) is None for d in _dnf(_nnf(refutation, False)))
    _entail_cache[key] = result
    return result


def find_model(h: HypSet) -> dict[str, int] | None:
    """A natural-number valuation satisfying the hypotheses, or None."""
    for d in _dnf(_nnf(conj(list(h.hyps)), False)):
        model = _solve(d)
        if model is not None:
            return {v: model.get(v, 0) for v in h.gvars}
    return None


def satisfying_times(pred: Pred, var: str, lo: FinTime, hi: FinTime) -> list[FinTime]:
    """Ground instants in [lo, hi] satisfying a single-variable predicate."""
    extra = pred_vars(pred) - {var}
    if extra:
        raise ValueError(f"predicate not closed: free {sorted(extra)}")
    return [t for t in range(lo, hi + 1) if eval_pred(pred, {var: t})]


def satisfiable_beyond(pred: Pred, var: str, bound: FinTime) -> FinTime | None:
    """The least satisfying instant strictly beyond ``bound``, if any.

    Atom truth values are eventually constant in the variable, so
    checking up to the predicate's largest constant plus one is complete.
    """
    limit = max(max_constant(pred) + 1, bound + 1)
    for t in range(bound + 1, limit + 1):
        if eval_pred(pred, {var: t}):
            return t
    return None


# ---------------------------------------------------------------------------
# retyping


def _retype(h: HypSet, a: SessionType, b: SessionType, t_expr: TimeExpr,
            cut_style: bool) -> str | None:
    """Shared recursion; returns a failure description or None."""
    if a.kind != b.kind:
        return f"connective mismatch: {a.kind} vs {b.kind}"
    t = _shared_binder(h, a, b, t_expr)
    p = subst_pred(a.annot.pred, a.annot.binder, tvar(t))
    q = subst_pred(b.annot.pred, b.annot.binder, tvar(t))
    h2 = h.extend(t)
    if cut_style:
        h2 = h2.assume(atom(t_expr, "<=", tvar(t))).assume(q)
        if not entails(h2, p):
            return f"entailment failed: {q!r}, {t_expr!r} <= {t} |- {p!r}"
    else:
        h2 = h2.assume(q)
        if not entails(h2, p):
            return f"entailment failed: {q!r} |- {p!r}"
        if not entails(h2, atom(t_expr, "<=", tvar(t))):
            return f"entailment failed: {q!r} |- {t_expr!r} <= {t}"
    if a.kind == "one":
        return None
    # open the components: the shared binder scopes over them
    ta = tvar(t)
    la = _open(a.left, a.annot.binder, ta)
    ra = _open(a.right, a.annot.binder, ta)
    lb = _open(b.left, b.annot.binder, ta)
    rb = _open(b.right, b.annot.binder, ta)
    if a.kind == "lolli":
        fail = _retype(h2, lb, la, ta, cut_style)
        if fail:
            return f"left component (contravariant): {fail}"
    else:
        fail = _retype(h2, la, lb, ta, cut_style)
        if fail:
            return f"left component: {fail}"
    fail = _retype(h2, ra, rb, ta, cut_style)
    if fail:
        return f"right component: {fail}"
    return None


def _open(a: SessionType, binder: str, repl: TimeExpr) -> SessionType:
    return subst_type(a, binder, repl)


def _shared_binder(h: HypSet, a: SessionType, b: SessionType, t_expr: TimeExpr) -> str:
    """A binder name usable for both annotations without capture."""
    def safe(cand: str) -> bool:
        if cand in h.gvars or cand == t_expr.var:
            return False
        for ty in (a, b):
            if cand != ty.annot.binder and cand in all_names_type(ty):
                return False
        return True

    if safe(a.annot.binder):
        return a.annot.binder
    avoid = set(h.gvars) | all_names_type(a) | all_names_type(b)
    if t_expr.var is not None:
        avoid.add(t_expr.var)
    base = a.annot.binder
    i = 0
    while f"{base}_{i}" in avoid:
        i += 1
    return f"{base}_{i}"


def retype_fwd(h: HypSet, a: SessionType, b: SessionType, t_expr: TimeExpr) -> bool:
    """The forwarding retyping a >< b: using a client of ``a`` as a
    provider of ``b``."""
    return _retype(h, a, b, t_expr, cut_style=False) is None


def retype_cut(h: HypSet, a: SessionType, b: SessionType, t_expr: TimeExpr) -> bool:
    """The cut retyping a |x b: handing a provider of ``a`` to a client
    expecting ``b``."""
    return _retype(h, a, b, t_expr, cut_style=True) is None


def retype_fwd_reason(h: HypSet, a: SessionType, b: SessionType, t_expr: TimeExpr) -> str | None:
    return _retype(h, a, b, t_expr, cut_style=False)


def retype_cut_reason(h: HypSet, a: SessionType, b: SessionType, t_expr: TimeExpr) -> str | None:
    return _retype(h, a, b, t_expr, cut_style=True)
