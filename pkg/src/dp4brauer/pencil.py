"""
Pencils of quadrics in P^4: characteristic form, degeneracy locus, per-point
rank-4 quadrics, discriminant classes, tangent sections and the subschemes
that satisfy the norm/non-square condition used to build cyclic algebras.

Quadrics use the Gram convention q(x) = x^T A x, so diag(a, b, 1, 0, c) is
a x0^2 + b x1^2 + x2^2 + c x4^2.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from itertools import combinations

from sympy import QQ, QQ_I, grlex
from sympy.polys.rings import PolyRing

from .field import (
    FieldDescriptor,
    FieldElement,
    FieldMismatch,
    TowerTooDeep,
    UnsupportedConstant,
    field_sqrt,
    frac_is_square,
    frac_sqrt,
    gaussian_sqrt,
    poly_gcd,
    radical_chain,
    unit_normalize,
)
from .squares import AtomBasis, NotDescendable, SquareClass

N = 5
LAM, MU = "_lam", "_mu"


class PencilError(ValueError):
    pass


class ZeroForm(PencilError):
    pass


class NotSquarefree(PencilError):
    pass


class UnsupportedFactorDegree(PencilError):
    pass


class UnexpectedRank(PencilError):
    pass


class WrongRank(UnexpectedRank):
    pass


class VertexOnHyperplane(PencilError):
    pass


class NotOnQuadric(PencilError):
    pass


class SingularPoint(PencilError):
    pass


class RankNotTwo(PencilError):
    pass


class UnsupportedDegree(PencilError):
    pass


# --------------------------------------------------------------------------
# small exact linear algebra over a field descriptor

def _echelon(rows):
    """Row-reduce a copy of ``rows`` (lists of FieldElement); return (rows, pivots)."""
    rows = [list(r) for r in rows]
    ncols = len(rows[0]) if rows else 0
    pivots, r = [], 0
    for j in range(ncols):
        p = next((i for i in range(r, len(rows)) if not rows[i][j].is_zero()), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = rows[r][j].inverse()
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][j].is_zero():
                f = rows[i][j]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(j)
        r += 1
    return rows, pivots


def det(M):
    """Determinant by fraction-field Gaussian elimination."""
    M = [list(r) for r in M]
    n = len(M)
    out = M[0][0].field.one
    for j in range(n):
        p = next((i for i in range(j, n) if not M[i][j].is_zero()), None)
        if p is None:
            return M[0][0].field.zero
        if p != j:
            M[j], M[p] = M[p], M[j]
            out = -out
        piv = M[j][j]
        out = out * piv
        inv = piv.inverse()
        for i in range(j + 1, n):
            if not M[i][j].is_zero():
                f = M[i][j] * inv
                M[i] = [x - f * y for x, y in zip(M[i], M[j])]
    return out


def rank(M) -> int:
    return len(_echelon(M)[1])


def kernel(M):
    """Basis of the right kernel of M."""
    R, pivots = _echelon(M)
    ncols = len(M[0])
    F = M[0][0].field
    out = []
    for f in (j for j in range(ncols) if j not in pivots):
        v = [F.zero] * ncols
        v[f] = F.one
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        out.append(v)
    return out


def normalize_point(P):
    """Scale a projective point so that its first nonzero coordinate is 1."""
    P = list(P)
    lead = next(x for x in P if not x.is_zero())
    inv = lead.inverse()
    return tuple(x * inv for x in P)


def fmt_point(P) -> str:
    return "[" + " : ".join(str(x) for x in P) + "]"


# --------------------------------------------------------------------------
# value types

class QuadricMatrix:
    """Symmetric 5x5 matrix of a quadratic form x^T A x."""

    __slots__ = ("field", "rows")

    def __init__(self, rows, field: FieldDescriptor | None = None):
        if len(rows) != N or any(len(r) != N for r in rows):
            raise PencilError("a quadric in P^4 needs a 5x5 matrix")
        if field is None:
            field = next((x.field for r in rows for x in r if isinstance(x, FieldElement)), None)
            if field is None:
                raise PencilError("cannot infer the field of an all-integer matrix")
        rows = tuple(tuple(field(x) for x in r) for r in rows)
        for i in range(N):
            for j in range(i + 1, N):
                if rows[i][j] != rows[j][i]:
                    raise PencilError(f"matrix is not symmetric at ({i},{j})")
        if all(x.is_zero() for r in rows for x in r):
            raise PencilError("zero quadric")
        self.field = field
        self.rows = rows

    @classmethod
    def diagonal(cls, entries, field: FieldDescriptor):
        rows = [[entries[i] if i == j else 0 for j in range(N)] for i in range(N)]
        return cls(rows, field)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, QuadricMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def lift(self, F: FieldDescriptor) -> "QuadricMatrix":
        return QuadricMatrix([[x.lift(F) for x in r] for r in self.rows], F)

    def value(self, P):
        P = [self.field(x) if not isinstance(x, FieldElement) else x for x in P]
        return sum((P[i] * self.rows[i][j] * P[j] for i in range(N) for j in range(N)),
                   P[0].field.zero)

    def apply(self, P):
        return [sum((self.rows[i][j] * P[j] for j in range(N)), P[0].field.zero)
                for i in range(N)]

    def rank(self) -> int:
        return rank(self.rows)

    def polynomial_str(self) -> str:
        terms = []
        for i in range(N):
            for j in range(i, N):
                c = self.rows[i][j] * (1 if i == j else 2)
                if c.is_zero():
                    continue
                mon = f"x{i}^2" if i == j else f"x{i}*x{j}"
                terms.append(mon if c == c.field.one else f"({c})*{mon}")
        return " + ".join(terms)

    def __str__(self):
        return "[" + "; ".join(", ".join(str(x) for x in r) for r in self.rows) + "]"


class BinaryForm:
    """f(lam, mu) = sum_j coeffs[j] * lam^j * mu^(deg-j)."""

    __slots__ = ("field", "coeffs")

    def __init__(self, coeffs, field: FieldDescriptor):
        self.field = field
        self.coeffs = tuple(field(c) for c in coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def __call__(self, lam, mu):
        d = self.degree
        return sum((c * lam ** j * mu ** (d - j) for j, c in enumerate(self.coeffs)),
                   self.field.zero)

    def __mul__(self, other):
        out = [self.field.zero] * (self.degree + other.degree + 1)
        for i, x in enumerate(self.coeffs):
            for j, y in enumerate(other.coeffs):
                out[i + j] = out[i + j] + x * y
        return BinaryForm(out, self.field)

    def __eq__(self, other):
        return isinstance(other, BinaryForm) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __str__(self):
        d = self.degree
        terms = []
        for j in range(d, -1, -1):
            c = self.coeffs[j]
            if c.is_zero():
                continue
            mon = "*".join(s for s in (
                "lam" if j == 1 else f"lam^{j}" if j else "",
                "mu" if d - j == 1 else f"mu^{d - j}" if d - j else "") if s)
            cs = str(c)
            if not mon:
                terms.append(f"({cs})")
            elif c == self.field.one:
                terms.append(mon)
            else:
                terms.append(f"({cs})*{mon}")
        return " + ".join(terms) if terms else "0"


@dataclass(frozen=True)
class ClosedPoint:
    """A closed point of the degeneracy locus in P^1.

    ``coords`` lie in ``residue_field``; ``factor`` is the defining binary
    form over the base field (linear or irreducible quadratic).
    """

    index: int
    coords: tuple
    residue_field: FieldDescriptor
    degree: int
    factor: BinaryForm = dc_field(compare=False)

    @property
    def label(self) -> str:
        return f"T{self.index}"

    def __str__(self):
        return fmt_point(self.coords)


class LinearForm:
    """sum_i coeffs[i] * x_i."""

    __slots__ = ("field", "coeffs")

    def __init__(self, coeffs, field: FieldDescriptor | None = None):
        if field is None:
            field = next(c.field for c in coeffs if isinstance(c, FieldElement))
        self.field = field
        self.coeffs = tuple(field(c) for c in coeffs)
        if len(self.coeffs) != N:
            raise PencilError("linear forms on P^4 have 5 coefficients")

    def is_zero(self):
        return all(c.is_zero() for c in self.coeffs)

    def __call__(self, P):
        return sum((c * x for c, x in zip(self.coeffs, P)), self.field.zero)

    def lift(self, F):
        return LinearForm([c.lift(F) for c in self.coeffs], F)

    def conjugate(self):
        return LinearForm([c.conjugate() for c in self.coeffs], self.field)

    def scale(self, s):
        return LinearForm([c * s for c in self.coeffs], self.field)

    def __add__(self, other):
        return LinearForm([x + y for x, y in zip(self.coeffs, other.coeffs)], self.field)

    def __sub__(self, other):
        return LinearForm([x - y for x, y in zip(self.coeffs, other.coeffs)], self.field)

    def __eq__(self, other):
        return isinstance(other, LinearForm) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __str__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            terms.append(f"x{i}" if c == self.field.one else f"({c})*x{i}")
        return " + ".join(terms) if terms else "0"


# --------------------------------------------------------------------------
# characteristic form and smoothness

def pencil_member(A: QuadricMatrix, A2: QuadricMatrix, lam, mu) -> list:
    return [[lam * A[i, j] + mu * A2[i, j] for j in range(N)] for i in range(N)]


def char_form(A: QuadricMatrix, A2: QuadricMatrix) -> BinaryForm:
    """det(lam*A + mu*A2) as a binary quintic, by exact interpolation at mu = 1."""
    if A.field != A2.field:
        raise FieldMismatch("quadrics over different fields")
    F = A.field
    xs = [F(n) for n in range(N + 1)]
    ys = [det(pencil_member(A, A2, x, F.one)) for x in xs]
    return BinaryForm(_interpolate(xs, ys, F), F)


def _interpolate(xs, ys, F):
    """Coefficients (low degree first) of the polynomial through (xs, ys)."""
    n = len(xs)
    coeffs = [F.zero] * n
    for i in range(n):
        # basis polynomial prod_{j != i} (t - x_j) / (x_i - x_j)
        basis = [F.one]
        denom = F.one
        for j in range(n):
            if j == i:
                continue
            basis = [F.zero] + basis
            for k in range(len(basis) - 1):
                basis[k] = basis[k] - xs[j] * basis[k + 1]
            denom = denom * (xs[i] - xs[j])
        scale = ys[i] / denom
        for k in range(n):
            coeffs[k] = coeffs[k] + scale * basis[k]
    return coeffs


def _lam_derivative(f: BinaryForm) -> BinaryForm:
    return BinaryForm([f.coeffs[j] * j for j in range(1, len(f.coeffs))], f.field)


@lru_cache(maxsize=None)
def _binary_ring(params: tuple, domain):
    return PolyRing(tuple(params) + (LAM, MU), domain, grlex)


def _to_poly(f: BinaryForm, domain=QQ_I):
    """Clear denominators: return a polynomial in params, lam, mu."""
    F = f.field
    for c in f.coeffs:
        if not c.in_base:
            raise TowerTooDeep("binary forms with coefficients in an extension layer are unsupported")
    dens = F.ring.one
    for c in f.coeffs:
        dens = dens * c.lo.denom.exquo(poly_gcd(dens, c.lo.denom))
    R = _binary_ring(F.params, domain)
    d = f.degree
    out = {}
    for j, c in enumerate(f.coeffs):
        if c.is_zero():
            continue
        p = c.lo.numer * dens.exquo(c.lo.denom)
        for monom, coeff in p.terms():
            out[monom + (j, d - j)] = domain.convert_from(coeff, QQ_I) if domain != QQ_I else coeff
    return R.from_dict(out)


def _from_poly(p, F: FieldDescriptor) -> BinaryForm:
    """Inverse of _to_poly for a homogeneous factor."""
    npar = len(F.params)
    d = max(m[npar] + m[npar + 1] for m in p.monoms())
    parts = [{} for _ in range(d + 1)]
    for monom, coeff in p.terms():
        parts[monom[npar]][monom[:npar]] = QQ_I.convert(coeff) if p.ring.domain != QQ_I else coeff
    coeffs = [FieldElement(F, F.frac(F.ring.from_dict(part))) if part else F.zero
              for part in parts]
    return BinaryForm(coeffs, F)


def _factor(f: BinaryForm):
    """Irreducible factors over Q(i)(params) with multiplicities, as binary forms."""
    F = f.field
    real = all(not coeff.y for c in f.coeffs if not c.is_zero()
               for q in (c.lo.numer, c.lo.denom) for coeff in q.coeffs())
    npar = len(F.params)
    out = []
    if real:
        _, facs = _to_poly(f, QQ).factor_list()
        for g, e in facs:
            dl = max(m[npar] + m[npar + 1] for m in g.monoms())
            if dl >= 2:
                gi = _binary_ring(F.params, QQ_I).from_dict(
                    {m: QQ_I.convert_from(c, QQ) for m, c in g.terms()})
                for h, e2 in gi.factor_list()[1]:
                    out.append((h, e * e2))
            else:
                out.append((g, e))
    else:
        out = list(_to_poly(f).factor_list()[1])
    result = []
    for g, e in out:
        if max(m[npar] + m[npar + 1] for m in g.monoms()) == 0:
            continue
        result.append((_from_poly(g, F), e))
    return result


def is_smooth_pencil(f: BinaryForm) -> bool:
    """True iff f is squarefree as a binary form."""
    if f.is_zero():
        raise ZeroForm("characteristic form vanishes identically")
    if f.degree != N:
        raise PencilError("expected a binary quintic")
    return all(e == 1 for _, e in _factor(f))


# --------------------------------------------------------------------------
# degeneracy locus

def degeneracy_locus(f: BinaryForm) -> list:
    """Closed points of V(f) in P^1 of degree 1 and 2, in a canonical order."""
    if f.is_zero():
        raise ZeroForm("characteristic form vanishes identically")
    F = f.field
    points = []
    total = 0
    for g, e in _factor(f):
        if e > 1:
            raise NotSquarefree(f"repeated factor {g}")
        d = g.degree
        total += d
        if d == 1:
            alpha, beta = g.coeffs[1], g.coeffs[0]    # alpha*lam + beta*mu
            coords = _primitive_coords((-beta, alpha), F)
            points.append((coords, F, 1, g))
        elif d == 2:
            points.append(_quadratic_point(g, F))
        else:
            raise UnsupportedFactorDegree(f"irreducible factor of degree {d}: {g}")
    if total != f.degree:
        raise PencilError("factorization lost degree")
    points.sort(key=_point_key)
    return [ClosedPoint(i, c, K, d, g) for i, (c, K, d, g) in enumerate(points)]


def _primitive_coords(coords, F):
    """Projective coordinates over K scaled to coprime polynomials, first unit monic."""
    coords = [F(c) for c in coords]
    nonzero = [c for c in coords if not c.is_zero()]
    den = F.ring.one
    for c in nonzero:
        den = den * c.lo.denom.exquo(poly_gcd(den, c.lo.denom))
    nums = [c.lo.numer * den.exquo(c.lo.denom) if not c.is_zero() else F.ring.zero for c in coords]
    g = F.ring.zero
    for p in nums:
        g = poly_gcd(g, p)
    nums = [p.exquo(g) for p in nums]
    lead = next(p for p in nums if p)
    lc = lead.LC
    return tuple(FieldElement(F, F.frac(p.quo_ground(lc))) for p in nums)


def squarefree_kernel(x):
    """Representative of the class of x with no repeated polynomial factors.

    The constant is kept unless it is a square in Q(i).
    """
    K = x.field
    out = K.one
    consts = []
    for part, sign in ((x.numer, 1), (x.denom, -1)):
        lc, m = unit_normalize(part)
        consts.append(lc if sign > 0 else 1 / lc)
        chain = radical_chain(m) + [m.ring.one]
        for k in range(0, len(chain) - 1, 2):
            out *= K(chain[k].exquo(chain[k + 1]))
    c = consts[0] * consts[1]
    if gaussian_sqrt(c) is None:
        out *= K(c)
    return out


def _quadratic_point(g: BinaryForm, F: FieldDescriptor):
    if F.has_ext:
        raise TowerTooDeep("degree-2 points over a field that already has a quadratic layer")
    g = BinaryForm([x / g.coeffs[2] for x in g.coeffs], F)
    gamma, beta, alpha = g.coeffs          # alpha lam^2 + beta lam mu + gamma mu^2
    disc = (beta * beta - alpha * gamma * 4).lo
    if frac_is_square(disc, F.constants):
        # splits over Q^cycl but not over Q(i): would need another constant
        raise UnsupportedConstant(f"quadratic factor {g} splits only after adjoining a constant root")
    d = squarefree_kernel(disc)
    r = frac_sqrt(disc / d)
    K = F.extend(d)
    theta = K.sqrt_ext
    lam0 = (-K(beta) + K(FieldElement(F, r)) * theta) / (K(alpha) * 2)
    return ((lam0, K.one), K, 2, g)


def _point_key(item):
    coords, K, d, g = item
    lam, mu = coords
    cls = 0 if mu.is_zero() else 1 if lam.is_zero() else 2
    tdeg = sum(max((sum(m) for m in x.lo.numer.monoms()), default=0) for x in g.coeffs if not x.is_zero())
    return (d, cls, tdeg, str(g))


# --------------------------------------------------------------------------
# per-point data

def quadric_at(T: ClosedPoint, A: QuadricMatrix, A2: QuadricMatrix) -> QuadricMatrix:
    K = T.residue_field
    lam, mu = T.coords
    M = QuadricMatrix(pencil_member(A.lift(K), A2.lift(K), lam, mu), K)
    r = M.rank()
    if r != 4:
        raise UnexpectedRank(f"pencil member at {T.label} has rank {r}, expected 4")
    return M


def vertex_of(Q: QuadricMatrix):
    ker = kernel(Q.rows)
    if len(ker) != 1:
        raise WrongRank(f"quadric has rank {N - len(ker)}, expected 4")
    return normalize_point(ker[0])


def coordinate_hyperplane(j: int, F: FieldDescriptor) -> LinearForm:
    return LinearForm([F.one if i == j else F.zero for i in range(N)], F)


def default_hyperplane(Q: QuadricMatrix) -> LinearForm:
    """First coordinate hyperplane V(x_j) missing the vertex."""
    v = vertex_of(Q)
    j = next(i for i, x in enumerate(v) if not x.is_zero())
    return coordinate_hyperplane(j, Q.field)


def restriction_matrix(H: LinearForm, pivot: int | None = None):
    """5x4 matrix M with H(M y) = 0, eliminating the pivot variable."""
    F = H.field
    if pivot is None:
        pivot = max(i for i, c in enumerate(H.coeffs) if not c.is_zero())
    hp = H.coeffs[pivot]
    free = [i for i in range(N) if i != pivot]
    M = [[F.zero] * (N - 1) for _ in range(N)]
    for col, i in enumerate(free):
        M[i][col] = F.one
        M[pivot][col] = -H.coeffs[i] / hp
    return M, free


def restrict(Q: QuadricMatrix, H: LinearForm, pivot: int | None = None):
    """Gram matrix of Q on the hyperplane H = 0 (coordinates: the free variables)."""
    H = H.lift(Q.field) if H.field != Q.field else H
    M, free = restriction_matrix(H, pivot)
    QM = [[sum((Q[i, k] * M[k][c] for k in range(N)), Q.field.zero) for c in range(N - 1)]
          for i in range(N)]
    S = [[sum((M[k][r] * QM[k][c] for k in range(N)), Q.field.zero) for c in range(N - 1)]
         for r in range(N - 1)]
    return S, free


def discriminant_value(Q: QuadricMatrix, H: LinearForm | None = None) -> FieldElement:
    """det of Q restricted to H (a hyperplane missing the vertex)."""
    H = H or default_hyperplane(Q)
    v = vertex_of(Q)
    if H.lift(Q.field)(v).is_zero():
        raise VertexOnHyperplane(f"{H} contains the vertex {fmt_point(v)}")
    S, _ = restrict(Q, H)
    return det(S)


def discriminant_eps(Q: QuadricMatrix, H: LinearForm | None = None,
                     basis: AtomBasis | None = None, T: ClosedPoint | None = None) -> SquareClass:
    """Square class of the discriminant in the residue field of the point.

    For a degree-2 point the discriminant is descended to the base field
    (it must be a base element times a square there).
    """
    e = discriminant_value(Q, H)
    if basis is None:
        basis = AtomBasis(Q.field)
    try:
        return basis.class_of(e, Q.field)
    except NotDescendable:
        raise UnsupportedDegree(
            "discriminant at a degree-2 point is not a base element times a square; "
            "its Galois action is not modeled") from None


# --------------------------------------------------------------------------
# tangent sections

def tangent_form(Q: QuadricMatrix, P) -> LinearForm:
    """The linear form 2 P^T Q x, for a smooth point P of Q."""
    F = _common_field(Q, P)
    Q = Q.lift(F) if Q.field != F else Q
    P = [F(x) for x in P]
    if not Q.value(P).is_zero():
        raise NotOnQuadric(f"{fmt_point(P)} is not on the quadric")
    g = Q.apply(P)
    if all(x.is_zero() for x in g):
        raise SingularPoint(f"{fmt_point(P)} is the vertex of the quadric")
    return LinearForm([x * 2 for x in g], F)


def _common_field(Q, P):
    fields = {Q.field} | {x.field for x in P if isinstance(x, FieldElement)}
    ext = [F for F in fields if F.has_ext]
    if len({(F.ext, F.ext_label) for F in ext}) > 1:
        raise FieldMismatch("point and quadric live in different extension layers")
    return ext[0] if ext else Q.field


@dataclass(frozen=True)
class SplitSection:
    """Q restricted to a tangent hyperplane as d1 * (l1 - t*l2) * (l1 + t*l2), t^2 = radicand.

    When the radicand is a square in the field, ``forms`` holds the two
    linear factors explicitly; otherwise they live in field(sqrt radicand).
    """

    d1: FieldElement
    l1: LinearForm
    l2: LinearForm
    radicand: FieldElement
    pivot: int
    forms: tuple | None
    extension: FieldDescriptor | None

    def quadratic_check(self, S, free) -> bool:
        """d1*(l1^2 - radicand*l2^2) has Gram matrix S on the free variables."""
        for r, i in enumerate(free):
            for c, j in enumerate(free):
                v = self.d1 * (self.l1.coeffs[i] * self.l1.coeffs[j]
                               - self.radicand * self.l2.coeffs[i] * self.l2.coeffs[j])
                if v != S[r][c]:
                    return False
        return True


def split_tangent_section(Q: QuadricMatrix, P, eps: SquareClass | None = None) -> SplitSection:
    """Write the rank-2 restriction of Q to its tangent hyperplane at P as a product."""
    l = tangent_form(Q, P)
    F = l.field
    Q = Q.lift(F) if Q.field != F else Q
    S, free = restrict(Q, l)
    if rank(S) != 2:
        raise RankNotTwo(f"tangent section has rank {rank(S)}, expected 2")
    d1, v1, rest = _split_off_square(S)
    d2, v2, rest = _split_off_square(rest)
    if any(not x.is_zero() for r in rest for x in r):
        raise RankNotTwo("residual form after two squares")

    def embed(v):
        c = [F.zero] * N
        for k, i in enumerate(free):
            c[i] = v[k]
        return LinearForm(c, F)

    l1, l2 = embed(v1), embed(v2)
    radicand = -d2 / d1
    t = field_sqrt(radicand)
    section = SplitSection(d1, l1, l2, radicand, max(i for i in range(N) if i not in free),
                           None, None)
    forms, ext = None, None
    if t is not None:
        forms = (l1 - l2.scale(t), l1 + l2.scale(t))
    elif not F.has_ext:
        ext = F.extend(radicand.lo)
        t = ext.sqrt_ext
        L1, L2 = l1.lift(ext), l2.lift(ext)
        forms = (L1 - L2.scale(t), L1 + L2.scale(t))
    section = SplitSection(d1, l1, l2, radicand, section.pivot, forms, ext)
    if not section.quadratic_check(S, free):
        raise RankNotTwo("diagonalization check failed")
    if eps is not None:
        basis = eps.basis
        if basis.class_of(radicand, F) != eps.in_field(F):
            raise RankNotTwo("radicand class differs from the discriminant class")
    return section


def _split_off_square(S):
    """S = d * v v^T + rest with d != 0; returns (d, v, rest)."""
    n = len(S)
    F = S[0][0].field
    vec = None
    for i in range(n):
        if not S[i][i].is_zero():
            vec = [F.one if k == i else F.zero for k in range(n)]
            break
    if vec is None:
        for i in range(n):
            for j in range(i + 1, n):
                if not S[i][j].is_zero():
                    vec = [F.one if k in (i, j) else F.zero for k in range(n)]
                    break
            if vec:
                break
    if vec is None:
        raise RankNotTwo("form vanishes")
    Sv = [sum((S[r][c] * vec[c] for c in range(n)), F.zero) for r in range(n)]
    q = sum((vec[r] * Sv[r] for r in range(n)), F.zero)
    d = q.inverse()
    rest = [[S[r][c] - Sv[r] * Sv[c] * d for c in range(n)] for r in range(n)]
    # rescale so the linear form has leading coefficient 1
    lead = next(x for x in Sv if not x.is_zero())
    return d * lead * lead, [x / lead for x in Sv], rest


# --------------------------------------------------------------------------
# condition (*)

def norm_class(T: ClosedPoint, eps: SquareClass, F: FieldDescriptor) -> SquareClass:
    """Class of N_{K(T)/K}(eps_T) in F."""
    if T.degree == 1:
        return eps.in_field(F)
    # eps is the class of a base element e0 (descended), so N(e0) = e0^2
    return (eps.base_class() * eps.base_class()).in_field(F)


def star_clauses(subset, locus, eps, F: FieldDescriptor) -> dict:
    pts = [locus[i] for i in subset]
    degree = sum(T.degree for T in pts)
    prod = None
    for T in pts:
        n = norm_class(T, eps[T.index], F)
        prod = n if prod is None else prod * n
    return {
        "degree_two": degree == 2,
        "norm_product_square": prod is not None and prod.is_trivial(),
        "each_nonsquare": all(not eps[T.index].in_field(_point_field(T, F)).is_trivial()
                              for T in pts),
    }


def _point_field(T: ClosedPoint, F: FieldDescriptor):
    return F if T.degree == 1 else T.residue_field


def star_subschemes(locus, eps, F: FieldDescriptor | None = None) -> list:
    """Degree-2 subschemes satisfying all three clauses, as tuples of point indices."""
    if len(eps) != len(locus):
        raise PencilError("eps list must be aligned with the locus")
    F = F or (eps[0].field if eps else None)
    candidates = [(T.index,) for T in locus if T.degree == 2]
    ones = [T.index for T in locus if T.degree == 1]
    candidates += list(combinations(ones, 2))
    out = [s for s in candidates if all(star_clauses(s, locus, eps, F).values())]
    return sorted(out, key=lambda s: (len(s), s))
