"""
Polynomials and rational functions in x0..x4 with coefficients in a field
descriptor, used for the second slot of quaternion symbols.

A polynomial over K(sqrt d) is stored as a pair (lo, hi) of polynomials over
K meaning lo + hi*sqrt(d).  Rational functions are kept as unreduced
num/den pairs and compared by cross-multiplication.
"""
from __future__ import annotations

from functools import lru_cache

from sympy import grlex
from sympy.polys.rings import PolyRing

from .field import FieldDescriptor, FieldElement, FieldMismatch, ZeroElement, frac_field

XVARS = ("x0", "x1", "x2", "x3", "x4")


@lru_cache(maxsize=None)
def x_ring(params: tuple) -> PolyRing:
    return PolyRing(XVARS, frac_field(params).to_domain(), grlex)


class XPoly:
    """lo + hi*sqrt(d) with lo, hi polynomials in x0..x4 over the base field."""

    __slots__ = ("field", "lo", "hi")

    def __init__(self, field: FieldDescriptor, lo, hi=None):
        R = x_ring(field.params)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi if hi is not None else R.zero)
        if self.hi and not field.has_ext:
            raise FieldMismatch("sqrt part in a field without extension layer")

    def __setattr__(self, key, value):
        raise AttributeError("XPoly is immutable")

    @classmethod
    def var(cls, field: FieldDescriptor, i: int) -> "XPoly":
        return cls(field, x_ring(field.params).gens[i])

    @classmethod
    def const(cls, field: FieldDescriptor, c) -> "XPoly":
        c = field(c)
        R = x_ring(field.params)
        return cls(field, R(c.lo) if c.lo else R.zero, R(c.hi) if c.hi else R.zero)

    @classmethod
    def from_linear_form(cls, form) -> "XPoly":
        out = cls.const(form.field, 0)
        for i, c in enumerate(form.coeffs):
            if not c.is_zero():
                out = out + cls.const(form.field, c) * cls.var(form.field, i)
        return out

    @classmethod
    def from_quadric(cls, Q) -> "XPoly":
        """x^T A x as a polynomial."""
        out = cls.const(Q.field, 0)
        for i in range(5):
            for j in range(5):
                if not Q[i, j].is_zero():
                    out = out + cls.const(Q.field, Q[i, j]) * cls.var(Q.field, i) * cls.var(Q.field, j)
        return out

    def _coerce(self, other):
        if isinstance(other, XPoly):
            if other.field == self.field:
                return other
            return other.lift(self.field) if not other.field.has_ext else _lift_pair(self, other)
        return XPoly.const(self.field, other)

    def lift(self, F: FieldDescriptor) -> "XPoly":
        if F == self.field:
            return self
        if self.field.has_ext:
            raise FieldMismatch(f"cannot move a polynomial from {self.field} to {F}")
        if F.params != self.field.params:
            raise FieldMismatch("different parameter sets")
        return XPoly(F, self.lo)

    def is_zero(self) -> bool:
        return not self.lo and not self.hi

    def __bool__(self):
        return not self.is_zero()

    def __add__(self, other):
        o = self._coerce(other)
        s = self if o.field == self.field else self.lift(o.field)
        return XPoly(o.field, s.lo + o.lo, s.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return XPoly(self.field, -self.lo, -self.hi)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        o = self._coerce(other)
        s = self if o.field == self.field else self.lift(o.field)
        F = o.field
        if not s.hi and not o.hi:
            return XPoly(F, s.lo * o.lo)
        d = F.ext
        return XPoly(F, s.lo * o.lo + s.hi * o.hi * d, s.lo * o.hi + s.hi * o.lo)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = XPoly.const(self.field, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, FieldElement)):
            other = XPoly.const(self.field, other)
        if not isinstance(other, XPoly):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    def conjugate(self) -> "XPoly":
        if not self.field.has_ext:
            from .field import NoExtensionLayer
            raise NoExtensionLayer(f"{self.field} has no extension layer")
        return XPoly(self.field, self.lo, -self.hi)

    def norm(self) -> "XPoly":
        """self * conjugate(self), as a polynomial over the base field."""
        n = self * self.conjugate()
        return XPoly(self.field.base, n.lo)

    @property
    def in_base(self) -> bool:
        return not self.hi

    def degree(self) -> int:
        ms = list(self.lo.monoms()) + list(self.hi.monoms())
        return max((sum(m) for m in ms), default=0)

    def is_constant(self) -> bool:
        return self.degree() == 0

    def constant_value(self) -> FieldElement:
        if not self.is_constant():
            raise ValueError("not a constant")
        F = self.field
        lo = self.lo.coeff(1) if self.lo else F.frac.zero
        hi = self.hi.coeff(1) if self.hi else F.frac.zero
        return FieldElement(F, F.frac(lo), F.frac(hi) if F.has_ext else None)

    def terms(self):
        """(monomial, FieldElement coefficient) pairs in descending grlex order."""
        F = self.field
        mons = sorted(set(self.lo.monoms()) | set(self.hi.monoms()),
                      key=lambda m: (sum(m), m), reverse=True)
        lo_terms, hi_terms = dict(self.lo.terms()), dict(self.hi.terms())
        out = []
        for m in mons:
            lo = lo_terms.get(m, F.frac.zero)
            hi = hi_terms.get(m, F.frac.zero)
            out.append((m, FieldElement(F, F.frac(lo), F.frac(hi) if F.has_ext else None)))
        return out

    def exquo(self, q: "XPoly"):
        """self / q if exact, else None; q must have base-layer coefficients."""
        if not q.in_base:
            # multiply through by the conjugate so the divisor lies in the base
            qn = q.norm().lift(self.field)
            num = self * q.conjugate()
            r = num.exquo(qn)
            return r
        out = []
        for part in (self.lo, self.hi):
            if not part:
                out.append(part)
                continue
            quo, rem = part.div(q.lo)
            if rem:
                return None
            out.append(quo)
        return XPoly(self.field, out[0], out[1])

    def __str__(self):
        return _fmt_terms(self.terms())

    def __repr__(self):
        return f"XPoly({self})"


def _lift_pair(a: XPoly, b: XPoly):
    if a.field.has_ext and b.field.has_ext and a.field != b.field:
        raise FieldMismatch("polynomials over different extension layers")
    return b


def _fmt_terms(terms) -> str:
    if not terms:
        return "0"
    parts = []
    for m, c in terms:
        mon = "*".join(f"x{i}" if e == 1 else f"x{i}^{e}" for i, e in enumerate(m) if e)
        cs = str(c)
        if not mon:
            parts.append(cs if _atomic(cs) else f"({cs})")
        elif cs == "1":
            parts.append(mon)
        elif cs == "-1":
            parts.append("-" + mon)
        else:
            parts.append((cs if _atomic(cs) else f"({cs})") + "*" + mon)
    return " + ".join(parts).replace("+ -", "- ")


def _atomic(s: str) -> bool:
    body = s[1:] if s.startswith("-") else s
    return not any(ch in body for ch in "+- /")


def _power_str(p: XPoly):
    """'(q)^k' when a base-layer polynomial is a monic power q^k, k > 1."""
    if not p.in_base or p.is_constant():
        return None
    lc, factors = p.lo.sqf_list()
    if lc != p.lo.ring.domain.one or len(factors) != 1 or factors[0][1] == 1:
        return None
    q, e = factors[0]
    body = str(XPoly(p.field, q))
    if len(XPoly(p.field, q).terms()) > 1:
        body = f"({body})"
    return f"{body}^{e}"


class RatFunc:
    """num/den with num, den XPoly over the same field; den != 0."""

    __slots__ = ("field", "num", "den")

    def __init__(self, num, den=None):
        if not isinstance(num, XPoly):
            raise TypeError("numerator must be an XPoly")
        den = den if den is not None else XPoly.const(num.field, 1)
        if den.is_zero():
            raise ZeroElement("zero denominator")
        F = num.field if num.field.has_ext else den.field
        object.__setattr__(self, "field", F)
        object.__setattr__(self, "num", num.lift(F) if num.field != F else num)
        object.__setattr__(self, "den", den.lift(F) if den.field != F else den)

    def __setattr__(self, key, value):
        raise AttributeError("RatFunc is immutable")

    @classmethod
    def coerce(cls, value, field: FieldDescriptor) -> "RatFunc":
        if isinstance(value, RatFunc):
            return value if value.field == field else value.lift(field)
        if isinstance(value, XPoly):
            return cls(value.lift(field) if value.field != field else value)
        return cls(XPoly.const(field, value))

    def lift(self, F):
        return RatFunc(self.num.lift(F), self.den.lift(F))

    def _c(self, other):
        if isinstance(other, RatFunc):
            if other.field == self.field:
                return self, other
            if not other.field.has_ext:
                return self, other.lift(self.field)
            return self.lift(other.field), other
        return self, RatFunc.coerce(other, self.field)

    def __add__(self, other):
        s, o = self._c(other)
        return RatFunc(s.num * o.den + o.num * s.den, s.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        s, o = self._c(other)
        return s + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        s, o = self._c(other)
        return RatFunc(s.num * o.num, s.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        s, o = self._c(other)
        if o.num.is_zero():
            raise ZeroElement("division by zero")
        return RatFunc(s.num * o.den, s.den * o.num)

    def __rtruediv__(self, other):
        return RatFunc.coerce(other, self.field) / self

    def __pow__(self, n: int):
        if n >= 0:
            return RatFunc(self.num ** n, self.den ** n)
        return RatFunc(self.den ** (-n), self.num ** (-n))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, other):
        if not isinstance(other, RatFunc):
            try:
                other = RatFunc.coerce(other, self.field)
            except Exception:
                return NotImplemented
        s, o = self._c(other)
        return s.num * o.den == o.num * s.den

    def __hash__(self):
        # cross-multiplication equality admits no cheap canonical hash
        return 0

    def conjugate(self) -> "RatFunc":
        return RatFunc(self.num.conjugate(), self.den.conjugate())

    def is_constant(self) -> bool:
        if self.num.is_zero():
            return True
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> FieldElement:
        return self.num.constant_value() / self.den.constant_value()

    def reduced(self) -> "RatFunc":
        """Cancel a common factor when both parts lie in the base layer."""
        if self.num.in_base and self.den.in_base and not self.num.is_zero():
            g = self.num.lo.gcd(self.den.lo)
            num, den = self.num.lo.exquo(g), self.den.lo.exquo(g)
            lc = den.LC
            F = self.num.field
            return RatFunc(XPoly(F, num.quo_ground(lc)).lift(self.field),
                           XPoly(F, den.quo_ground(lc)).lift(self.field))
        return self

    def __str__(self):
        r = self.reduced()
        if r.den == XPoly.const(r.field, 1):
            return str(r.num)
        num = str(r.num)
        den = _power_str(r.den)
        if len(r.num.terms()) > 1:
            num = f"({num})"
        if den is None:
            den = str(r.den)
            if len(r.den.terms()) > 1 or "*" in den:
                den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self):
        return f"RatFunc({self})"
