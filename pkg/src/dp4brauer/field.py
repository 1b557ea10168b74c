"""
Exact arithmetic in towers  Q(i)  <  K = Q(i)(params)  <  K(sqrt d).

Polynomials in the parameters are sympy sparse polynomials over the Gaussian
rationals (graded-lex order); elements of K are sympy fraction-field elements.
The single quadratic layer K(sqrt d) is handled here: an element is stored as
``lo + hi*sqrt(d)`` with ``lo, hi`` in K.

Two conventions for constants are supported.  In ``cyclotomic`` mode the
ground field stands for Q^cycl, where every nonzero constant is a square; in
``gaussian`` mode only exact squares of Q(i) are squares.  Arithmetic itself is
identical in both modes (all values live in Q(i)), only square tests differ.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt

from sympy import QQ, QQ_I, Symbol, grlex, sstr
from sympy.polys.fields import FracField
from sympy.polys.rings import PolyRing

CYCLOTOMIC = "cyclotomic"
GAUSSIAN = "gaussian"


class FieldError(ArithmeticError):
    pass


class ZeroElement(FieldError):
    pass


class NoExtensionLayer(FieldError):
    pass


class FieldMismatch(FieldError, TypeError):
    pass


class UnsupportedConstant(FieldError):
    """A computation would need a constant of Q^cycl that is not in Q(i)."""


class TowerTooDeep(FieldError):
    pass


# --------------------------------------------------------------------------
# constants

I = QQ_I(0, 1)


def constant(re, im=0):
    """Build an element of Q(i) from rationals (ints, Fractions or strings)."""
    return QQ_I(QQ(*_ratio(re)), QQ(*_ratio(im)))


def _ratio(x):
    x = Fraction(x)
    return x.numerator, x.denominator


def _rational_sqrt(q):
    q = Fraction(int(q.numerator), int(q.denominator))
    if q < 0:
        return None
    n, d = isqrt(q.numerator), isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


def gaussian_sqrt(z):
    """Exact square root in Q(i), or None."""
    x = Fraction(int(z.x.numerator), int(z.x.denominator))
    y = Fraction(int(z.y.numerator), int(z.y.denominator))
    if y == 0:
        if x >= 0:
            r = _rational_sqrt(x)
            return None if r is None else constant(r)
        r = _rational_sqrt(-x)
        return None if r is None else constant(0, r)
    r = _rational_sqrt(x * x + y * y)
    if r is None:
        return None
    p = _rational_sqrt((x + r) / 2)
    q = _rational_sqrt((r - x) / 2)
    if p is None or q is None:
        return None
    if y < 0:
        q = -q
    return constant(p, q)


def fmt_constant(z) -> str:
    """Plain text for a Q(i) constant, e.g. ``2``, ``-1/3*I``, ``1 + 2*I``."""
    x = Fraction(int(z.x.numerator), int(z.x.denominator))
    y = Fraction(int(z.y.numerator), int(z.y.denominator))
    if not y:
        return str(x)
    im = "I" if y == 1 else "-I" if y == -1 else f"{y}*I"
    if not x:
        return im
    return f"{x} - {im[1:]}" if im.startswith("-") else f"{x} + {im}"


def constant_is_square(z, mode):
    if not z:
        raise ZeroElement("zero has no square class")
    return mode == CYCLOTOMIC or gaussian_sqrt(z) is not None


# --------------------------------------------------------------------------
# polynomials over Q(i)

@lru_cache(maxsize=None)
def frac_field(params: tuple) -> FracField:
    return FracField(tuple(params), QQ_I, grlex)


@lru_cache(maxsize=None)
def poly_ring(params: tuple) -> PolyRing:
    return frac_field(params).ring


def unit_normalize(p):
    """Split ``p`` as ``(lc, monic)`` with respect to graded-lex order."""
    if not p:
        return p.ring.domain.zero, p
    lc = p.LC
    return lc, p.quo_ground(lc)


def poly_gcd(p, q):
    """Monic gcd; ``gcd(p, 0)`` is the normalization of ``p``."""
    if not q:
        return unit_normalize(p)[1]
    if not p:
        return unit_normalize(q)[1]
    return unit_normalize(p.gcd(q))[1]


def exact_quotient(p, q):
    """``p / q`` if the division is exact, else None."""
    quo, rem = p.div(q)
    return None if rem else quo


def is_constant(p) -> bool:
    return p.is_ground


def multiplicity(p, atom) -> int:
    """Largest e with atom**e | p (p nonzero, atom nonconstant)."""
    e = 0
    while True:
        quo = exact_quotient(p, atom)
        if quo is None:
            return e
        p, e = quo, e + 1


def radical(p):
    """Squarefree part: p / gcd(p, dp/dx_1, ..., dp/dx_n), made monic."""
    g = p
    for x in p.ring.gens:
        if g.is_ground:
            break
        g = g.gcd(p.diff(x))
    return unit_normalize(p.exquo(g))[1]


def radical_chain(p):
    """Return monic squarefree R_1, R_2, ... with p = lc * prod R_k.

    R_k is the product of the irreducible factors of multiplicity >= k, so
    R_1 is divisible by R_2, and so on.
    """
    chain = []
    _, p = unit_normalize(p)
    while not p.is_ground:
        r = radical(p)
        chain.append(r)
        p = unit_normalize(p.exquo(r))[1]
    return chain


def content_wrt(p, index: int):
    """Content of ``p`` viewed as a polynomial in generator ``index``."""
    coeffs = {}
    ring = p.ring
    for monom, coeff in p.terms():
        rest = monom[:index] + (0,) + monom[index + 1:]
        coeffs.setdefault(monom[index], []).append((rest, coeff))
    g = ring.zero
    for terms in coeffs.values():
        g = poly_gcd(g, ring.from_dict(dict(terms)))
        if g.is_ground:
            break
    return g


def poly_sqrt(p):
    """Exact square root of a polynomial over Q(i), or None."""
    if not p:
        return p
    lc, m = unit_normalize(p)
    chain = radical_chain(m)
    if len(chain) % 2:
        return None
    root = p.ring.one
    for k in range(0, len(chain), 2):
        if chain[k] != chain[k + 1]:
            return None
        root *= chain[k]
    c = gaussian_sqrt(lc)
    if c is None:
        return None
    return root.mul_ground(c)


def poly_is_square(p, mode) -> bool:
    """Square test up to the constant convention of ``mode``."""
    if not p:
        raise ZeroElement("zero has no square class")
    lc, m = unit_normalize(p)
    chain = radical_chain(m)
    if len(chain) % 2:
        return False
    if any(chain[k] != chain[k + 1] for k in range(0, len(chain), 2)):
        return False
    return constant_is_square(lc, mode)


def frac_sqrt(x):
    """Exact square root of a fraction-field element, or None."""
    lc_n, mn = unit_normalize(x.numer)
    lc_d, md = unit_normalize(x.denom)
    n, d = poly_sqrt(mn), poly_sqrt(md)
    c = gaussian_sqrt(lc_n / lc_d)
    if n is None or d is None or c is None:
        return None
    return x.field.new(n.mul_ground(c), d)


def frac_is_square(x, mode) -> bool:
    if not x:
        raise ZeroElement("zero has no square class")
    return poly_is_square(x.numer * x.denom, mode)


# --------------------------------------------------------------------------
# field descriptors

@dataclass(frozen=True)
class FieldDescriptor:
    """K = Q(i)(params), optionally with one quadratic layer K(sqrt ext).

    ``ext`` is an element of the base fraction field; it is checked to be a
    non-square at construction.
    """

    params: tuple
    constants: str = CYCLOTOMIC
    ext: object = None
    ext_label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        if self.constants not in (CYCLOTOMIC, GAUSSIAN):
            raise ValueError(f"unknown constant mode {self.constants!r}")
        if self.ext is not None:
            d = self.frac(self.ext)
            if d.field != self.frac:
                raise FieldMismatch("extension generator is not in the base field")
            if not d:
                raise ValueError("cannot adjoin sqrt(0)")
            if frac_is_square(d, self.constants):
                raise ValueError(f"{_fmt_frac(d)} is a square in the base field")
            object.__setattr__(self, "ext", d)
            if self.ext_label is None:
                object.__setattr__(self, "ext_label", f"sqrt({_fmt_frac(d)})")

    @property
    def frac(self) -> FracField:
        return frac_field(self.params)

    @property
    def ring(self) -> PolyRing:
        return poly_ring(self.params)

    @property
    def has_ext(self) -> bool:
        return self.ext is not None

    @property
    def base(self) -> "FieldDescriptor":
        if self.ext is None:
            return self
        return FieldDescriptor(self.params, self.constants)

    def extend(self, d, label=None) -> "FieldDescriptor":
        if self.ext is not None:
            raise TowerTooDeep(f"{self} already has a quadratic layer")
        if isinstance(d, FieldElement):
            if not d.in_base:
                raise TowerTooDeep("extension generator must lie in the base field")
            d = d.lo
        return FieldDescriptor(self.params, self.constants, d, label)

    def gen(self, name: str) -> "FieldElement":
        return FieldElement(self, self.frac.gens[self.params.index(name)])

    @property
    def sqrt_ext(self) -> "FieldElement":
        if self.ext is None:
            raise NoExtensionLayer(f"{self} has no extension layer")
        return FieldElement(self, self.frac.zero, self.frac.one)

    def __call__(self, value) -> "FieldElement":
        return _coerce(value, self)

    @property
    def zero(self):
        return FieldElement(self, self.frac.zero)

    @property
    def one(self):
        return FieldElement(self, self.frac.one)

    def __str__(self):
        ground = "Q^cycl" if self.constants == CYCLOTOMIC else "Q(i)"
        s = f"{ground}({','.join(self.params)})" if self.params else ground
        if self.ext is not None:
            s += f"({self.ext_label})"
        return s


# --------------------------------------------------------------------------
# elements

class FieldElement:
    """An element ``lo + hi*sqrt(d)`` of a field descriptor; immutable."""

    __slots__ = ("field", "lo", "hi")

    def __init__(self, field: FieldDescriptor, lo, hi=None):
        frac = field.frac
        lo = lo if getattr(lo, "field", None) == frac else frac(lo)
        hi = frac.zero if hi is None else (hi if getattr(hi, "field", None) == frac else frac(hi))
        if hi and field.ext is None:
            raise NoExtensionLayer(f"{field} has no extension layer")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, key, value):
        raise AttributeError("FieldElement is immutable")

    # -- predicates
    @property
    def in_base(self) -> bool:
        return not self.hi

    def is_zero(self) -> bool:
        return not self.lo and not self.hi

    def __bool__(self):
        return not self.is_zero()

    def is_constant(self) -> bool:
        """True if the element lies in Q(i)."""
        return self.in_base and self.lo.numer.is_ground and self.lo.denom.is_ground

    def constant_value(self):
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        return self.lo.numer.LC / self.lo.denom.LC if self.lo else QQ_I.zero

    def base_element(self) -> "FieldElement":
        """The same element viewed in the base layer (must have hi == 0)."""
        if self.hi:
            raise FieldMismatch(f"{self} does not lie in the base layer")
        return FieldElement(self.field.base, self.lo)

    def lift(self, field: FieldDescriptor) -> "FieldElement":
        if field == self.field:
            return self
        if field.base == self.field and self.field.ext is None:
            return FieldElement(field, self.lo)
        if field == self.field.base and self.in_base:
            return FieldElement(field, self.lo)
        raise FieldMismatch(f"cannot move {self} from {self.field} to {field}")

    # -- arithmetic
    def _pair(self, other):
        if isinstance(other, FieldElement):
            if other.field == self.field:
                return self, other
            if other.field == self.field.base:
                return self, other.lift(self.field)
            if self.field == other.field.base:
                return self.lift(other.field), other
            raise FieldMismatch(f"{self.field} vs {other.field}")
        return self, _coerce(other, self.field)

    def __add__(self, other):
        try:
            a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        return FieldElement(a.field, a.lo + b.lo, a.hi + b.hi)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, -self.lo, -self.hi)

    def __sub__(self, other):
        try:
            a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        return FieldElement(a.field, a.lo - b.lo, a.hi - b.hi)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        if not a.hi and not b.hi:
            return FieldElement(a.field, a.lo * b.lo)
        d = a.field.ext
        return FieldElement(a.field, a.lo * b.lo + d * a.hi * b.hi,
                            a.lo * b.hi + a.hi * b.lo)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroElement("division by zero")
        if not self.hi:
            return FieldElement(self.field, 1 / self.lo)
        n = self.lo ** 2 - self.field.ext * self.hi ** 2
        return FieldElement(self.field, self.lo / n, -self.hi / n)

    def __truediv__(self, other):
        try:
            a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        return a * b.inverse()

    def __rtruediv__(self, other):
        return _coerce(other, self.field) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result, base = self.field.one, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            if other.field != self.field and other.field.params != self.field.params:
                return False
            return self.lo == other.lo and self.hi == other.hi
        try:
            other = _coerce(other, self.field)
        except (TypeError, ValueError):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash(self.lo) if not self.hi else hash((self.lo, self.hi))

    # -- printing
    def __str__(self):
        if not self.hi:
            return _fmt_frac(self.lo)
        s = Symbol(self.field.ext_label)
        return sstr(self.lo.as_expr() + self.hi.as_expr() * s)

    def __repr__(self):
        return f"FieldElement({self})"

    # -- tower operations
    def conjugate(self) -> "FieldElement":
        return conjugate(self)

    def norm(self) -> "FieldElement":
        return norm(self)


def _fmt_frac(x) -> str:
    return sstr(x.as_expr())


def _coerce(value, field: FieldDescriptor) -> FieldElement:
    if isinstance(value, FieldElement):
        return value.lift(field)
    if isinstance(value, (int, Fraction)):
        return FieldElement(field, field.frac(QQ_I.convert(QQ(*_ratio(value)))))
    if isinstance(value, str):
        from .parsing import parse_field_element
        return parse_field_element(value, field)
    if hasattr(value, "field") and value.field == field.frac:
        return FieldElement(field, value)
    try:
        return FieldElement(field, field.frac(value))
    except Exception as exc:  # sympy raises a zoo of coercion errors
        raise TypeError(f"cannot coerce {value!r} into {field}") from exc


def conjugate(x: FieldElement) -> FieldElement:
    """lo + hi*sqrt(d)  ->  lo - hi*sqrt(d)."""
    if x.field.ext is None:
        raise NoExtensionLayer(f"{x.field} has no extension layer")
    return FieldElement(x.field, x.lo, -x.hi)


def norm(x: FieldElement) -> FieldElement:
    """x * conjugate(x), returned in the base layer."""
    if x.field.ext is None:
        raise NoExtensionLayer(f"{x.field} has no extension layer")
    return FieldElement(x.field.base, x.lo ** 2 - x.field.ext * x.hi ** 2)


def field_sqrt(x: FieldElement) -> FieldElement | None:
    """An exact square root of ``x`` inside its own field, or None.

    Only roots with constants in Q(i) are found; in cyclotomic mode a square
    such as 2 has a root in Q^cycl that this returns None for.
    """
    F = x.field
    if x.is_zero():
        return x
    if not x.hi:
        r = frac_sqrt(x.lo)
        if r is not None:
            return FieldElement(F, r)
        if F.ext is not None:
            r = frac_sqrt(x.lo / F.ext)
            if r is not None:
                return FieldElement(F, F.frac.zero, r)
        return None
    n = frac_sqrt(x.lo ** 2 - F.ext * x.hi ** 2)
    if n is None:
        return None
    w = (x.lo + n) / 2
    if not w:
        w = (x.lo - n) / 2
    u = frac_sqrt(w)
    if u is not None:
        return FieldElement(F, u, x.hi / (2 * u))
    v = frac_sqrt(w / F.ext)
    if v is not None:
        return FieldElement(F, x.hi / (2 * v), v)
    return None


# --------------------------------------------------------------------------
# valuations

class UnsupportedValuation(FieldError):
    pass


@dataclass(frozen=True)
class Valuation:
    """Discrete valuation of a field descriptor given by a prime uniformizer.

    Supported uniformizers: a base polynomial that is linear in one parameter
    with constant coefficient (so reduction is substitution), or the
    extension generator sqrt(d) itself when d is such a polynomial.
    """

    field: FieldDescriptor
    uniformizer: FieldElement
    prime: object          # monic polynomial in the base ring
    variable: str          # parameter eliminated by reduction
    substitution: object   # value of that parameter on the residue field
    ramified: bool
    residue_field: FieldDescriptor

    @classmethod
    def at(cls, field: FieldDescriptor, uniformizer) -> "Valuation":
        u = _coerce(uniformizer, field)
        if u.in_base:
            if not u.lo.denom.is_ground:
                raise UnsupportedValuation("uniformizer must be a polynomial")
            prime = unit_normalize(u.lo.numer)[1]
            ramified = False
        elif field.ext is not None and not u.lo and u.hi == field.frac.one:
            if not field.ext.denom.is_ground:
                raise UnsupportedValuation("extension generator must be a polynomial")
            prime = unit_normalize(field.ext.numer)[1]
            ramified = True
        else:
            raise UnsupportedValuation(f"unsupported uniformizer {u}")
        var, value = _linear_solve(prime, field.params)
        rest = tuple(p for p in field.params if p != var)
        residue = FieldDescriptor(rest, field.constants)
        if field.ext is not None and not ramified:
            if multiplicity(field.ext.numer, prime) or multiplicity(field.ext.denom, prime):
                raise UnsupportedValuation("extension generator is not a unit at this place")
            dbar = _substitute(field.ext, var, value, residue)
            if frac_is_square(dbar, field.constants):
                raise UnsupportedValuation("the place splits in the quadratic layer")
            residue = residue.extend(dbar, field.ext_label)
        return cls(field, u, prime, var, value, ramified, residue)

    def __str__(self):
        return f"v[{self.uniformizer} = 0]"


def _linear_solve(prime, params):
    """Find a parameter in which ``prime`` is linear with constant coefficient."""
    ring = prime.ring
    for j, name in enumerate(params):
        degs = [m[j] for m in prime.monoms()]
        if max(degs) != 1:
            continue
        lin = {m: c for m, c in prime.terms() if m[j] == 1}
        if len(lin) != 1 or any(e for k, e in enumerate(next(iter(lin))) if k != j):
            continue
        coeff = next(iter(lin.values()))
        rest = ring.from_dict({m: c for m, c in prime.terms() if m[j] == 0})
        sub_ring = poly_ring(tuple(p for p in params if p != name))
        value = {}
        for m, c in rest.terms():
            value[m[:j] + m[j + 1:]] = -c / coeff
        return name, sub_ring.from_dict(value) if value else sub_ring.zero
    raise UnsupportedValuation(f"{sstr(prime.as_expr())} is not linear in any parameter")


def _substitute(x, var, value, residue: FieldDescriptor):
    """Reduce a base fraction-field element by var -> value (polynomial)."""
    K = residue.frac
    names = [str(s) for s in x.field.symbols]
    j = names.index(var)
    gens = list(K.gens)
    subs = gens[:j] + [K(value) if value else K.zero] + gens[j:]
    num = _eval_poly(x.numer, subs, K)
    den = _eval_poly(x.denom, subs, K)
    if not den:
        raise ZeroElement("denominator vanishes at the place")
    return num / den


def _eval_poly(p, values, K):
    out = K.zero
    for monom, coeff in p.terms():
        term = K(coeff)
        for v, e in zip(values, monom):
            if e:
                term *= v ** e
        out += term
    return out


def _poly_val(p, prime) -> int:
    if not p:
        raise ZeroElement("valuation of zero")
    return multiplicity(p, prime)


def valuation_of(x: FieldElement, v: Valuation) -> int:
    """Order of vanishing of ``x`` at ``v``."""
    x = _coerce(x, v.field)
    if x.is_zero():
        raise ZeroElement("valuation of zero")

    def base_val(y):
        return _poly_val(y.numer, v.prime) - _poly_val(y.denom, v.prime)

    if v.ramified:
        vals = []
        if x.lo:
            vals.append(2 * base_val(x.lo))
        if x.hi:
            vals.append(2 * base_val(x.hi) + 1)
        return min(vals)
    vals = [base_val(y) for y in (x.lo, x.hi) if y]
    return min(vals)


def reduce_at(x: FieldElement, v: Valuation) -> FieldElement:
    """Image of a v-unit in the residue field."""
    x = _coerce(x, v.field)
    if x.is_zero() or valuation_of(x, v) != 0:
        raise ValueError(f"{x} is not a unit at {v}")
    R = v.residue_field
    if v.ramified:
        return FieldElement(R, _substitute(x.lo, v.variable, v.substitution, R.base))
    lo = _substitute(x.lo, v.variable, v.substitution, R.base) if x.lo else R.frac.zero
    hi = _substitute(x.hi, v.variable, v.substitution, R.base) if x.hi else R.frac.zero
    return FieldElement(R, lo, hi if R.ext is not None else None)
