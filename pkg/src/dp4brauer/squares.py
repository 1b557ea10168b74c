"""
Square classes K^x / K^x2 over a coprime ("GCD-free") atom basis.

An element of K is written, up to a constant, as a product of pairwise
coprime squarefree polynomials (atoms) with integer exponents; its square
class is the set of atoms with odd exponent plus, in gaussian mode, the
constant.  No irreducible factorization is used: a basis is grown by
splitting atoms along gcds until everything is pairwise coprime, which is
enough to decide squareness of any product of registered elements.
"""
from __future__ import annotations

import threading
from itertools import product

from sympy import sstr

from .field import (
    CYCLOTOMIC,
    FieldDescriptor,
    FieldElement,
    FieldMismatch,
    UnsupportedConstant,
    ZeroElement,
    constant_is_square,
    content_wrt,
    exact_quotient,
    fmt_constant,
    frac_is_square,
    frac_sqrt,
    gaussian_sqrt,
    poly_gcd,
    radical_chain,
    unit_normalize,
)
from .lattice import f2_kernel, f2_rref


class NotDescendable(ArithmeticError):
    """An element of K(sqrt d) is not a base element times a square."""


# --------------------------------------------------------------------------
# atom basis

class AtomBasis:
    """Append-only list of pairwise coprime, monic, squarefree polynomials.

    When a new element shares a proper factor with an existing atom the atom
    is retired and replaced by its two coprime pieces; ``children`` records
    the split so that classes built earlier stay valid.
    """

    def __init__(self, field: FieldDescriptor):
        self.field = field.base
        self.atoms = []          # every atom ever created, by index
        self.children = {}      # retired index -> list of child indices
        self._lock = threading.Lock()

    @property
    def ring(self):
        return self.field.ring

    def live(self):
        return [i for i in range(len(self.atoms)) if i not in self.children]

    def leaves(self, index):
        """Live atoms whose product is atom ``index``."""
        stack, out = [index], []
        while stack:
            i = stack.pop()
            if i in self.children:
                stack.extend(self.children[i])
            else:
                out.append(i)
        return out

    def atom_str(self, index) -> str:
        return sstr(self.atoms[index].as_expr())

    def __len__(self):
        return len(self.live())

    def __repr__(self):
        return "AtomBasis(" + ", ".join(self.atom_str(i) for i in self.live()) + ")"

    # -- growth ------------------------------------------------------------

    def _new_atom(self, p):
        self.atoms.append(p)
        return len(self.atoms) - 1

    def _split(self, index, g):
        a = self.atoms[index]
        kids = [self._new_atom(g), self._new_atom(exact_quotient(a, g))]
        self.children[index] = kids

    def factor(self, p):
        """Register polynomial ``p``; return (constant, {live atom: exponent})."""
        if not p:
            raise ZeroElement("zero has no square class")
        if p.ring != self.ring:
            raise FieldMismatch("polynomial from a different ring")
        lc, p = unit_normalize(p)
        exps = {}
        with self._lock:
            pieces = []
            for k, r in enumerate(radical_chain(p)):
                pieces.extend(_content_split(r))
            work = [(q, 1) for q in pieces]
            # radical_chain pieces R_1 | R_2 ... each carry exponent 1
            while work:
                q, e = work.pop()
                if q.is_ground:
                    continue
                for i in self.live():
                    a = self.atoms[i]
                    g = poly_gcd(q, a)
                    if g.is_ground:
                        continue
                    if g == a:
                        exps[i] = exps.get(i, 0) + e
                        work.append((exact_quotient(q, a), e))
                    else:
                        self._split(i, g)
                        # redistribute exponents already assigned to the retired atom
                        if i in exps:
                            e_old = exps.pop(i)
                            for kid in self.children[i]:
                                exps[kid] = exps.get(kid, 0) + e_old
                        work.append((q, e))
                    break
                else:
                    exps[self._new_atom(unit_normalize(q)[1])] = e
        # a later split within this call may have retired atoms we recorded
        flat = {}
        for i, e in exps.items():
            for leaf in self.leaves(i):
                flat[leaf] = flat.get(leaf, 0) + e
        return lc, {i: e for i, e in flat.items() if e}

    def class_of(self, x, field: FieldDescriptor | None = None) -> "SquareClass":
        """Square class of a base-layer element (in ``field``, default the base)."""
        if isinstance(x, FieldElement):
            if not x.in_base:
                x = descend(x)
            x = x.lo
        x = self.field.frac(x)
        if not x:
            raise ZeroElement("zero has no square class")
        cn, en = self.factor(x.numer)
        cd, ed = self.factor(x.denom)
        odd = set()
        for i, e in list(en.items()) + list(ed.items()):
            if e % 2:
                odd ^= {i}
        const = None if self.field.constants == CYCLOTOMIC else _const_rep(cn / cd)
        return SquareClass(self, frozenset(odd), const, field or self.field)


def _tdeg(p) -> int:
    return max((sum(m) for m in p.monoms()), default=0)


def _content_split(r):
    """Split squarefree ``r`` along contents w.r.t. each variable."""
    out, stack = [], [unit_normalize(r)[1]]
    while stack:
        q = stack.pop()
        if q.is_ground:
            continue
        for j in range(q.ring.ngens):
            low = min(m[j] for m in q.monoms())
            if low and _tdeg(q) > 1:
                x = q.ring.gens[j]
                stack.extend([x, exact_quotient(q, x ** low)])
                break
            c = content_wrt(q, j)
            if not c.is_ground and _tdeg(c) < _tdeg(q):
                stack.extend([c, unit_normalize(exact_quotient(q, c))[1]])
                break
        else:
            out.append(q)
    return out


def _const_rep(c):
    """Canonical small representative of a Q(i) constant modulo obvious squares."""
    r = gaussian_sqrt(c)
    return c.parent().one if r is not None else c


# --------------------------------------------------------------------------
# square classes

class SquareClass:
    """A class in F^x / F^x2 for F = K or K(sqrt d), stored over an atom basis.

    ``odd`` holds atom indices with odd exponent; ``const`` is the constant
    part (None in cyclotomic mode, where every constant is a square).  In an
    extension field, classes are compared modulo the class of d.
    """

    __slots__ = ("basis", "odd", "const", "field")

    def __init__(self, basis: AtomBasis, odd, const, field: FieldDescriptor):
        self.basis = basis
        self.odd = frozenset(odd)
        self.const = const
        self.field = field

    def leaf_vector(self):
        out = set()
        for i in self.odd:
            for leaf in self.basis.leaves(i):
                out ^= {leaf}
        return frozenset(out)

    def _check(self, other):
        if not isinstance(other, SquareClass) or other.basis is not self.basis:
            raise FieldMismatch("square classes over different atom bases")
        if other.field != self.field:
            raise FieldMismatch("square classes over different fields")

    def __mul__(self, other):
        self._check(other)
        const = None
        if self.const is not None:
            const = _const_rep(self.const * other.const)
        return SquareClass(self.basis, self.leaf_vector() ^ other.leaf_vector(), const, self.field)

    def base_class(self):
        return SquareClass(self.basis, self.odd, self.const, self.field.base)

    def in_field(self, field: FieldDescriptor):
        return SquareClass(self.basis, self.odd, self.const, field)

    def _ext_class(self):
        return self.basis.class_of(self.field.ext) if self.field.has_ext else None

    def _trivial_in_base(self):
        if self.leaf_vector():
            return False
        return self.const is None or constant_is_square(self.const, self.field.constants)

    def is_trivial(self) -> bool:
        if self._trivial_in_base():
            return True
        d = self._ext_class()
        return d is not None and (self.base_class() * d)._trivial_in_base()

    def __eq__(self, other):
        if not isinstance(other, SquareClass):
            return NotImplemented
        self._check(other)
        return (self * other).is_trivial()

    def __hash__(self):
        return hash(self.representative().leaf_vector())

    def representative(self) -> "SquareClass":
        """Canonical representative: in K(sqrt d), the smaller of x and x*d."""
        d = self._ext_class()
        base = self.base_class()
        if d is None:
            return self
        alt = base * d
        key = lambda s: (len(s.leaf_vector()), sorted(self.basis.atom_str(i) for i in s.leaf_vector()))
        best = min((base, alt), key=key)
        return best.in_field(self.field)

    def atoms(self):
        rep = self.representative()
        return sorted((rep.basis.atoms[i] for i in rep.leaf_vector()),
                      key=lambda p: (_tdeg(p), len(p.terms()), sstr(p.as_expr())))

    def __str__(self):
        rep = self.representative()
        parts = []
        if rep.const is not None and not constant_is_square(rep.const, self.field.constants):
            parts.append(f"({fmt_constant(rep.const)})")
        for p in self.atoms():
            s = sstr(p.as_expr())
            parts.append(s if len(p.terms()) == 1 and _tdeg(p) == 1 else f"({s})")
        return "*".join(parts) if parts else "1"

    def __repr__(self):
        return f"SquareClass({self} in {self.field})"


# --------------------------------------------------------------------------
# operations

def refine(elements, basis: AtomBasis | None = None, field: FieldDescriptor | None = None):
    """Register ``elements`` in a (new or given) basis; return (basis, classes)."""
    elements = list(elements)
    if basis is None:
        if field is None:
            if not elements or not isinstance(elements[0], FieldElement):
                raise ValueError("need a field descriptor or FieldElement inputs")
            field = elements[0].field
        basis = AtomBasis(field)
    F = field or basis.field
    for x in elements:
        if (x.is_zero() if isinstance(x, FieldElement) else not x):
            raise ZeroElement("zero has no square class")
    classes = [basis.class_of(x, F) for x in elements]
    return basis, classes


def is_square(x: FieldElement, F: FieldDescriptor | None = None) -> bool:
    """Exact squareness of ``x`` in ``F`` (default: the field of ``x``)."""
    F = F or x.field
    if x.is_zero():
        raise ZeroElement("zero has no square class")
    mode = F.constants
    x = x.lift(F)
    if x.in_base:
        if frac_is_square(x.lo, mode):
            return True
        return F.has_ext and frac_is_square(x.lo * F.ext, mode)
    w = _descent_value(x)
    if w is None:
        return False
    return frac_is_square(w, mode) or frac_is_square(w * F.ext, mode)


def _descent_value(x: FieldElement):
    """For x = lo + hi*sqrt(d) with hi != 0: (lo + n)/2 where n^2 = N(x), or None.

    x lies in K * (K(sqrt d))^2 iff N(x) is a square n^2; then x and
    (lo + n)/2 have the same class modulo squares and d.
    """
    F = x.field
    N = x.lo ** 2 - F.ext * x.hi ** 2
    if not frac_is_square(N, F.constants):
        return None
    n = frac_sqrt(N)
    if n is None:
        raise UnsupportedConstant("norm is a square only after adjoining a constant root")
    w = (x.lo + n) / 2
    if not w:
        w = (x.lo - n) / 2
    return w


def descend(x: FieldElement) -> FieldElement:
    """A base element y with x in y * (K(sqrt d))^2."""
    if x.in_base:
        return FieldElement(x.field.base, x.lo)
    w = _descent_value(x)
    if w is None:
        raise NotDescendable(f"{x} is not a base element times a square")
    return FieldElement(x.field.base, w)


def class_in_extension(x, F: FieldDescriptor, basis: AtomBasis | None = None) -> SquareClass:
    """Class of a base element (or class) in F = K(sqrt d), canonical representative."""
    if isinstance(x, SquareClass):
        return x.in_field(F).representative()
    if basis is None:
        basis = AtomBasis(F)
    return basis.class_of(x, F).representative()


def relation_lattice(classes, field: FieldDescriptor | None = None):
    """Basis of {e in F2^n : prod classes_i^e_i is a square}.

    Over K(sqrt d) a product is a square iff it is a square or d times a
    square in K, so d is added as an auxiliary column and projected away.
    """
    classes = list(classes)
    n = len(classes)
    if n == 0:
        return []
    basis = classes[0].basis
    F = field or classes[0].field
    for c in classes:
        if c.basis is not basis:
            raise FieldMismatch("square classes over different atom bases")
    cols = [c.base_class() for c in classes]
    if F.has_ext:
        cols.append(basis.class_of(F.ext))
    leaves = sorted(set().union(*(c.leaf_vector() for c in cols)))
    m = len(cols)
    rows = [[int(leaf in c.leaf_vector()) for c in cols] for leaf in leaves]
    kernel = f2_kernel(rows, m)
    if F.constants != CYCLOTOMIC:
        kernel = _constant_filter(kernel, cols, m, F.constants)
    projected = [v[:n] for v in kernel]
    return f2_rref(projected, n)[0]


def _constant_filter(kernel, cols, m, mode):
    keep = []
    for coeffs in product((0, 1), repeat=len(kernel)):
        v = [0] * m
        for c, r in zip(coeffs, kernel):
            if c:
                v = [x ^ y for x, y in zip(v, r)]
        const = cols[0].basis.field.frac.domain.one
        for c, bit in zip(cols, v):
            if bit and c.const is not None:
                const *= c.const
        if constant_is_square(const, mode):
            keep.append(v)
    return f2_rref(keep, m)[0]
