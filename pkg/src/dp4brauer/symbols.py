"""
Quaternion symbols (u, f) over function fields of quadric intersections:
construction from tangent forms, Galois conjugation, a certificate checker
for rewrite chains, and tame residues at discrete valuations of the
coefficient field.

A symbol is a formal sum (mod 2) of unordered pairs.  Simplification is not
a decision procedure: every rewrite step comes with a witness and is checked
in isolation by exact arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import product

from .field import (
    FieldDescriptor,
    FieldElement,
    UnsupportedValuation,
    Valuation,
    field_sqrt,
    reduce_at,
    valuation_of,
)
from .forms import RatFunc, XPoly
from .squares import AtomBasis, SquareClass, is_square

RULES = ("bilinearity", "killSquare", "normOfExtension", "substituteRelation",
         "constantSquare", "swapNegation")


class SymbolError(ValueError):
    pass


class StepRejected(SymbolError):
    def __init__(self, index, reason):
        super().__init__(f"step {index} rejected: {reason}")
        self.index = index
        self.reason = reason


class MissingTangentForm(SymbolError):
    pass


class IndeterminateReduction(SymbolError):
    pass


# --------------------------------------------------------------------------
# symbols

class QuaternionSymbol:
    """Formal sum of pairs (u, f) of rational functions, mod 2."""

    __slots__ = ("field", "pairs")

    def __init__(self, pairs, field: FieldDescriptor):
        self.field = field
        self.pairs = tuple((RatFunc.coerce(u, field), RatFunc.coerce(f, field)) for u, f in pairs)
        for u, f in self.pairs:
            if u.is_zero() or f.is_zero():
                raise SymbolError("symbol slots must be nonzero")

    @classmethod
    def zero(cls, field):
        return cls([], field)

    def __add__(self, other):
        return QuaternionSymbol(self.pairs + other.pairs, self.field)

    def normalized(self) -> "QuaternionSymbol":
        """Cancel repeated pairs and drop pairs with a slot equal to 1."""
        kept = []
        one = RatFunc.coerce(1, self.field)
        for p in self.pairs:
            if p[0] == one or p[1] == one:
                continue
            hit = next((k for k, q in enumerate(kept) if pair_equal(p, q)), None)
            if hit is None:
                kept.append(p)
            else:
                kept.pop(hit)
        return QuaternionSymbol(kept, self.field)

    def equal_formally(self, other) -> bool:
        """Equality of normalized pair multisets (pairs unordered)."""
        a, b = list(self.normalized().pairs), list(other.normalized().pairs)
        if len(a) != len(b):
            return False
        for p in a:
            hit = next((k for k, q in enumerate(b) if pair_equal(p, q)), None)
            if hit is None:
                return False
            b.pop(hit)
        return True

    def is_trivial_formally(self) -> bool:
        return not self.normalized().pairs

    def is_constant(self) -> bool:
        return all(u.is_constant() and f.is_constant() for u, f in self.pairs)

    def conjugate(self) -> "QuaternionSymbol":
        return conjugate_symbol(self)

    def __str__(self):
        if not self.pairs:
            return "0"
        return " + ".join(f"({u}, {f})" for u, f in self.pairs)

    def __repr__(self):
        return f"QuaternionSymbol({self})"


def pair_equal(p, q) -> bool:
    return (p[0] == q[0] and p[1] == q[1]) or (p[0] == q[1] and p[1] == q[0])


def conjugate_symbol(A: QuaternionSymbol) -> QuaternionSymbol:
    """Apply the nontrivial automorphism of the quadratic layer to every slot."""
    return QuaternionSymbol([(u.conjugate(), f.conjugate()) for u, f in A.pairs], A.field)


def class_element(eps: SquareClass, F: FieldDescriptor) -> FieldElement:
    """Product of the atoms of the canonical representative of a class."""
    rep = eps.in_field(F).representative()
    out = F.one
    for p in rep.atoms():
        out = out * FieldElement(F.base, F.base.frac(p)).lift(F)
    if rep.const is not None:
        out = out * F(F.frac(rep.const))
    return out


def build_algebra(subset, tangent_forms: dict, l, eps: SquareClass, F: FieldDescriptor,
                  locus=None, eps_all=None) -> QuaternionSymbol:
    """(eps, l^-2 * prod_T N(l_T)) for a subscheme satisfying the star condition.

    Degree-2 points contribute the norm of their tangent form from the
    residue field; degree-1 points contribute the form itself.
    """
    if locus is not None and eps_all is not None:
        from .cohomology import StarViolated
        from .pencil import star_clauses
        if not all(star_clauses(subset, locus, eps_all, F).values()):
            raise StarViolated(f"subset {subset} fails the star condition")
    if eps.in_field(F).is_trivial():
        return QuaternionSymbol.zero(F)
    prod = None
    for i in subset:
        if i not in tangent_forms:
            raise MissingTangentForm(f"no tangent form for point {i}")
        lt = XPoly.from_linear_form(tangent_forms[i])
        T = locus[i] if locus is not None else None
        if T is not None and T.degree == 2:
            lt = lt.norm().lift(F)
        prod = lt if prod is None else prod * lt
    lx = XPoly.from_linear_form(l)
    u = class_element(eps, F)
    return QuaternionSymbol([(u, RatFunc(prod, lx * lx))], F)


# --------------------------------------------------------------------------
# certificates

@dataclass
class RewriteStep:
    rule: str
    after: QuaternionSymbol
    witnesses: dict = dc_field(default_factory=dict)
    before: QuaternionSymbol | None = None
    line: int | None = None

    def __post_init__(self):
        if self.rule not in RULES:
            raise SymbolError(f"unknown rewrite rule {self.rule!r}")


@dataclass
class TraceRecord:
    index: int
    rule: str
    witnesses: dict
    before: str
    after: str
    detail: str


@dataclass
class Verification:
    final: QuaternionSymbol
    trace: list


def _diff(before: QuaternionSymbol, after: QuaternionSymbol):
    """Pairs removed from ``before`` and added in ``after`` (multiset difference)."""
    b, a = list(before.pairs), list(after.pairs)
    removed = []
    for p in b:
        hit = next((k for k, q in enumerate(a) if pair_equal(p, q)), None)
        if hit is None:
            removed.append(p)
        else:
            a.pop(hit)
    return removed, a


def _orientations(p):
    return [(p[0], p[1]), (p[1], p[0])]


def _check_bilinearity(removed, added):
    if len(removed) == 2 and len(added) == 1:
        split, merged = removed, added[0]
    elif len(removed) == 1 and len(added) == 2:
        split, merged = added, removed[0]
    else:
        return False, "bilinearity relates two pairs to one pair"
    for (x1, y1), (x2, y2), (xm, ym) in product(*(_orientations(p) for p in (*split, merged))):
        if x1 == x2 and x1 == xm and y1 * y2 == ym:
            return True, "shared slot, product in the other slot"
    return False, "no slot is shared with the product in the other slot"


def _single_change(removed, added, index, F):
    """The rewritten pair; a pair may also be rewritten to nothing (slot 1)."""
    if len(removed) == 1 and not added:
        one = RatFunc.coerce(1, F)
        p = removed[0]
        return p, [(p[0], one), (p[1], one)]
    if len(removed) != 1 or len(added) != 1:
        raise StepRejected(index, "rule rewrites exactly one pair")
    return removed[0], [added[0]]


def _shared(p, qs):
    """Orientations (u, f), (u, g) with a common first slot."""
    for q in qs:
        for (u, f), (v, g) in product(_orientations(p), _orientations(q)):
            if u == v:
                yield u, f, g


def _as_ratfunc(x, F):
    return RatFunc.coerce(x, F)


def find_norm_witness(u: RatFunc, r: RatFunc, F: FieldDescriptor):
    """Search monomial witnesses (s, t) of degree <= 2 with s^2 - u t^2 = r.

    ``u`` must be constant and ``r`` a polynomial with at most two terms,
    each a square monomial times a constant.
    """
    r = r.reduced()
    if not u.is_constant() or not r.den.is_constant():
        return None
    uc = u.constant_value()
    poly = r.num * XPoly.const(F, r.den.constant_value().inverse())
    terms = poly.terms()
    if not 1 <= len(terms) <= 2 or any(e % 2 for m, _ in terms for e in m):
        return None
    if any(sum(m) > 4 for m, _ in terms):
        return None

    def root_monomial(m):
        out = XPoly.const(F, 1)
        for i, e in enumerate(m):
            out = out * XPoly.var(F, i) ** (e // 2)
        return out

    zero = XPoly.const(F, 0)
    assignments = [(terms, [])] if len(terms) == 1 else []
    if len(terms) == 2:
        assignments = [([terms[0]], [terms[1]]), ([terms[1]], [terms[0]])]
    elif len(terms) == 1:
        assignments = [([terms[0]], []), ([], [terms[0]])]
    for s_terms, t_terms in assignments:
        s, t = zero, zero
        ok = True
        for m, c in s_terms:
            rt = field_sqrt(c)
            if rt is None:
                ok = False
                break
            s = XPoly.const(F, rt) * root_monomial(m)
        for m, c in t_terms:
            rt = field_sqrt(-c / uc)
            if rt is None:
                ok = False
                break
            t = XPoly.const(F, rt) * root_monomial(m)
        if ok:
            S, T = RatFunc(s), RatFunc(t)
            if S * S - u * T * T == r:
                return S, T
    return None


def check_step(step: RewriteStep, before: QuaternionSymbol, relations: dict, index: int) -> str:
    """Verify one rewrite; return a short description or raise StepRejected."""
    F = before.field
    after = step.after
    removed, added = _diff(before, after)
    w = step.witnesses
    rule = step.rule
    if rule == "bilinearity":
        ok, why = _check_bilinearity(removed, added)
        if not ok:
            raise StepRejected(index, why)
        return why
    if rule == "killSquare":
        p, q = _single_change(removed, added, index, F)
        wq = _as_ratfunc(w.get("w", 1), F)
        kq = _as_ratfunc(w.get("k", 1), F)
        if not kq.is_constant():
            raise StepRejected(index, "k must be a constant")
        if not is_square(kq.constant_value(), F):
            raise StepRejected(index, f"{kq} is not a square in {F}")
        for u, f, g in _shared(p, q):
            if f == g * kq * wq * wq:
                return f"removed square factor k*w^2 with k = {kq}, w = {wq}"
        raise StepRejected(index, "before slot is not after slot times k*w^2")
    if rule == "constantSquare":
        if len(removed) != 1 or added:
            raise StepRejected(index, "constantSquare drops exactly one pair")
        for slot in removed[0]:
            if slot.is_constant() and is_square(slot.constant_value(), F):
                return f"slot {slot} is a square constant"
        raise StepRejected(index, "no slot is a square constant")
    if rule == "swapNegation":
        if len(removed) != 1 or added:
            raise StepRejected(index, "swapNegation drops exactly one pair")
        u, f = removed[0]
        if f == -u:
            return "pair of the form (u, -u)"
        if f == u and is_square(F(-1), F):
            return "pair of the form (u, u) = (u, -1) with -1 a square"
        raise StepRejected(index, "pair is not (u, +-u)")
    if rule == "substituteRelation":
        p, q = _single_change(removed, added, index, F)
        name = w.get("Q")
        if name not in relations:
            raise StepRejected(index, f"unknown relation {name!r}")
        Qp = relations[name]
        for u, f, g in _shared(p, q):
            diff = f.num * g.den - g.num * f.den
            if diff.is_zero():
                return "slots already equal"
            h = diff.exquo(Qp.lift(diff.field) if not Qp.field.has_ext else Qp)
            if h is not None:
                return f"slots differ by ({h}) * {name} over a common denominator"
        raise StepRejected(index, f"slots do not differ by a multiple of {name}")
    if rule == "normOfExtension":
        p, q = _single_change(removed, added, index, F)
        for u, f, g in _shared(p, q):
            ratio = f / g
            if "s" in w or "t" in w:
                s = _as_ratfunc(w.get("s", 0), F)
                t = _as_ratfunc(w.get("t", 0), F)
            else:
                found = find_norm_witness(u, ratio, F)
                if found is None:
                    continue
                s, t = found
                w["s"], w["t"] = s, t
            if ratio == s * s - u * t * t:
                return f"slot ratio is the norm s^2 - u*t^2 with s = {s}, t = {t}"
        raise StepRejected(index, "slot ratio is not of the form s^2 - u*t^2")
    raise StepRejected(index, f"unknown rule {rule}")


def verify_simplification(start: QuaternionSymbol, steps, relations: dict) -> Verification:
    """Check a rewrite chain starting at ``start``; return the final symbol and trace."""
    current = start
    trace = []
    for k, step in enumerate(steps, 1):
        if step.before is not None and not step.before.equal_formally(current):
            raise StepRejected(k, "declared 'before' differs from the previous symbol")
        detail = check_step(step, current, relations, k)
        trace.append(TraceRecord(k, step.rule, {a: str(b) for a, b in step.witnesses.items()},
                                 str(current), str(step.after), detail))
        current = step.after
    return Verification(current, trace)


# --------------------------------------------------------------------------
# valuations of constant symbols

@dataclass
class Residue:
    element: FieldElement
    square_class: SquareClass

    @property
    def trivial(self) -> bool:
        return self.square_class.is_trivial()

    def __str__(self):
        return str(self.square_class)


def _constant_slots(A: QuaternionSymbol):
    out = []
    for u, f in A.pairs:
        if not (u.is_constant() and f.is_constant()):
            raise UnsupportedValuation("residues are computed for constant symbols only")
        out.append((u.constant_value(), f.constant_value()))
    return out


def tame_residue(A: QuaternionSymbol, v: Valuation) -> Residue:
    """Sum over pairs of the class of (-1)^(v(f)v(g)) f^v(g) g^(-v(f)) in the residue field."""
    R = v.residue_field
    total = R.one
    for f, g in _constant_slots(A):
        f, g = f.lift(v.field), g.lift(v.field)
        vf, vg = valuation_of(f, v), valuation_of(g, v)
        x = (f ** vg) * (g ** (-vf))
        if (vf * vg) % 2:
            x = -x
        try:
            total = total * reduce_at(x, v)
        except ValueError as exc:
            raise IndeterminateReduction(str(exc)) from None
    basis = AtomBasis(R)
    return Residue(total, basis.class_of(total, R))


def specialize(A: QuaternionSymbol, v: Valuation) -> QuaternionSymbol:
    """Reduce a symbol whose slots are all v-units to the residue field."""
    R = v.residue_field
    pairs = []
    for f, g in _constant_slots(A):
        f, g = f.lift(v.field), g.lift(v.field)
        if valuation_of(f, v) or valuation_of(g, v):
            raise IndeterminateReduction("slot is not a unit at the valuation")
        pairs.append((XPoly.const(R, reduce_at(f, v)), XPoly.const(R, reduce_at(g, v))))
    return QuaternionSymbol([(RatFunc(a), RatFunc(b)) for a, b in pairs], R)
