"""
First cohomology of a finite group acting on the Picard lattice.

Three independent routes:

* ``h1_two_torsion``: (Pic/2Pic)^G / (Pic^G / 2) mapped to cocycles by
  D -> (g -> (d - g d)/2);
* ``h1_cyclic``: ker N / im(1 - s) for a cyclic action, via Smith form;
* ``h1_full``: Z^1 / B^1 on inhomogeneous cochains C^0 -> C^1 -> C^2.

Cocycles satisfy a(gh) = a(g) + g a(h); coboundaries are g -> g m - m.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .lattice import (
    coordinates,
    f2_in_span,
    f2_rref,
    identity,
    integer_kernel,
    matmul,
    matvec,
    smith_normal_form,
    solve_integer,
)
from .picard import (
    H,
    IDENTITY,
    RANK,
    GaloisImage,
    GammaElement,
    PicVector,
    action_matrix,
    fixed_sublattice,
    fixed_mod2_quotient,
)
from .squares import relation_lattice

MAX_ORDER = 64


class CohomologyError(ArithmeticError):
    pass


class NonIntegralLift(CohomologyError):
    pass


class CocycleConditionFailed(CohomologyError):
    pass


class NotFiniteOrder(CohomologyError):
    pass


class GroupTooLarge(CohomologyError):
    pass


class NotASubgroupImage(CohomologyError):
    pass


class StarViolated(CohomologyError):
    pass


@dataclass
class Cocycle:
    """Values of a 1-cocycle on the elements of a finite group.

    ``act`` maps a group element to its action matrix on the module.
    """

    values: dict
    act: object = field(default=action_matrix, repr=False)

    def __call__(self, g):
        return self.values[g]

    def is_cocycle(self) -> bool:
        for g, ag in self.values.items():
            Mg = self.act(g)
            for h, ah in self.values.items():
                gh = _mul(g, h)
                if gh not in self.values:
                    return False
                lhs = self.values[gh]
                rhs = [x + y for x, y in zip(ag, matvec(Mg, list(ah)))]
                if list(lhs) != rhs:
                    return False
        return True

    def __add__(self, other):
        return Cocycle({g: _vec(v) + _vec(other.values[g]) for g, v in self.values.items()},
                       self.act)

    def __neg__(self):
        return Cocycle({g: -_vec(v) for g, v in self.values.items()}, self.act)

    def is_zero(self) -> bool:
        return all(not any(v) for v in self.values.values())

    def items(self):
        return self.values.items()


def _vec(v):
    return PicVector(v) if len(v) == RANK else _IntVec(v)


class FiniteAction:
    """A finite group acting on Z^n by integer matrices, for lattices other than Pic.

    Elements only need to be hashable and composable by ``_mul``.
    """

    def __init__(self, elements, act, rank: int):
        self.elements = list(elements)
        self.generators = self.elements
        self.act = act
        self.rank = rank

    @classmethod
    def cyclic(cls, M) -> "FiniteAction":
        """The cyclic group generated by the integer matrix M."""
        M = [list(r) for r in M]
        k = _order(M)
        powers = [identity(len(M))]
        for _ in range(1, k):
            powers.append(matmul(M, powers[-1]))
        return cls([_Power.make(j, k) for j in range(k)], lambda p: powers[int(p)], len(M))

    @property
    def order(self) -> int:
        return len(self.elements)


class _IntVec(tuple):
    def __new__(cls, v):
        return super().__new__(cls, (int(x) for x in v))

    def __add__(self, other):
        return _IntVec(x + y for x, y in zip(self, other))

    def __neg__(self):
        return _IntVec(-x for x in self)


def _mul(g, h):
    if isinstance(g, GammaElement):
        return g * h
    return g @ h


@dataclass
class CohomologyGroup:
    """Finite abelian group given by invariant factors d_1 | d_2 | ..., with cocycle generators."""

    invariant_factors: list
    generators: list
    route: str = ""
    representatives: list = field(default_factory=list)

    @property
    def order(self) -> int:
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    @property
    def two_rank(self) -> int:
        return sum(1 for d in self.invariant_factors if d % 2 == 0)

    def __str__(self):
        if not self.invariant_factors:
            return "0"
        return " + ".join(f"Z/{d}" for d in self.invariant_factors)


def is_coboundary(alpha: Cocycle, elements=None, act=None) -> PicVector | None:
    """An m with alpha(g) = g m - m for all g, or None."""
    act = act or alpha.act
    elements = list(elements) if elements is not None else list(alpha.values)
    rows, rhs = [], []
    n = None
    for g in elements:
        M = act(g)
        n = len(M)
        for r in range(n):
            rows.append([M[r][c] - int(r == c) for c in range(n)])
        rhs.extend(alpha.values[g])
    if n is None:
        return None
    m = solve_integer(rows, rhs, n)
    return None if m is None else _vec(m)


# --------------------------------------------------------------------------
# route 1: 2-torsion via fixed vectors mod 2

def two_torsion_cocycle(d, G: GaloisImage) -> Cocycle:
    values = {}
    for g in G.elements:
        gd = matvec(G.act(g), list(d))
        diff = [x - y for x, y in zip(d, gd)]
        if any(x % 2 for x in diff):
            raise NonIntegralLift(f"(d - g d)/2 is not integral for g = {g}")
        values[g] = _vec([x // 2 for x in diff])
    alpha = Cocycle(values, G.act)
    if not alpha.is_cocycle():
        raise CocycleConditionFailed("two-torsion map produced a non-cocycle")
    return alpha


def h1_two_torsion(G: GaloisImage) -> CohomologyGroup:
    """The 2-torsion subgroup of H^1(G, Pic)."""
    reps = fixed_mod2_quotient(G)
    gens = [two_torsion_cocycle(D, G) for D in reps]
    return CohomologyGroup([2] * len(gens), gens, "two-torsion", list(reps))


# --------------------------------------------------------------------------
# route 2: cyclic groups

def _order(M, bound=1000):
    n = len(M)
    I = identity(n)
    P = M
    for k in range(1, bound + 1):
        if P == I:
            return k
        P = matmul(P, M)
    raise NotFiniteOrder("action has no finite order below the search bound")


def h1_cyclic(sigma, basis=None) -> CohomologyGroup:
    """ker(1 + s + ... + s^(n-1)) / im(1 - s) for a single automorphism s.

    ``sigma`` is a square integer matrix or a GammaElement.  With ``basis``
    (a list of PicVectors spanning an s-stable sublattice) the computation
    runs on that sublattice and generators are reported in Pic coordinates.
    """
    if isinstance(sigma, GammaElement):
        g = sigma
        Mfull = action_matrix(g)
    else:
        g, Mfull = None, [list(r) for r in sigma]
    if basis is not None:
        B = [list(b) for b in basis]
        M = []
        images = [matvec(Mfull, b) for b in B]
        cols = []
        for img in images:
            c = coordinates(B, img)
            if c is None:
                raise CohomologyError("sublattice is not stable under the action")
            cols.append(c)
        M = [[cols[j][i] for j in range(len(B))] for i in range(len(B))]
    else:
        B, M = None, Mfull
    n = len(M)
    k = _order(M)
    Nrm = [[0] * n for _ in range(n)]
    P = identity(n)
    for _ in range(k):
        Nrm = [[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(Nrm, P)]
        P = matmul(P, M)
    Kb = integer_kernel(Nrm, n)
    one_minus = [[int(r == c) - M[r][c] for c in range(n)] for r in range(n)]
    image_cols = [[one_minus[r][c] for r in range(n)] for c in range(n)]
    factors, reps = _quotient(Kb, image_cols)

    def to_pic(v):
        if B is None:
            return v
        return [sum(v[i] * B[i][j] for i in range(len(B))) for j in range(len(B[0]))]

    gens = []
    for D in reps:
        if g is not None:
            gens.append(_cyclic_cocycle(g, to_pic(D), k))
        else:
            gens.append(_cyclic_cocycle_matrix(M, D, k))
    return CohomologyGroup(factors, gens, "cyclic", [to_pic(D) for D in reps])


def _cyclic_cocycle(g: GammaElement, D, k) -> Cocycle:
    values = {IDENTITY: PicVector([0] * RANK)}
    power, acc = IDENTITY, PicVector([0] * RANK)
    for _ in range(1, k):
        acc = acc + PicVector(matvec(action_matrix(power), list(D)))
        power = g * power
        values[power] = acc
    alpha = Cocycle(values)
    if not alpha.is_cocycle():
        raise CocycleConditionFailed("cyclic cocycle failed the cocycle condition")
    return alpha


class _Power(int):
    """Exponent j standing for s^j in a cyclic group of known order."""

    order = 1

    def __matmul__(self, other):
        return _Power.make((int(self) + int(other)) % self.order, self.order)

    @classmethod
    def make(cls, j, order):
        p = cls(j)
        p.order = order
        return p


def _cyclic_cocycle_matrix(M, D, k) -> Cocycle:
    powers = [identity(len(M))]
    for _ in range(1, k):
        powers.append(matmul(M, powers[-1]))
    values, acc = {}, [0] * len(M)
    for j in range(k):
        values[_Power.make(j, k)] = _IntVec(acc)
        acc = [x + y for x, y in zip(acc, matvec(powers[j], D))]
    alpha = Cocycle(values, act=lambda p: powers[int(p)])
    if not alpha.is_cocycle():
        raise CocycleConditionFailed("cyclic cocycle failed the cocycle condition")
    return alpha


def _quotient(Kb, image_cols):
    """Invariant factors (> 1) and representatives of span(Kb) / span(image_cols)."""
    r = len(Kb)
    if r == 0:
        return [], []
    rel = []
    for v in image_cols:
        if not any(v):
            continue
        c = coordinates(Kb, v)
        if c is None:
            raise CohomologyError("coboundaries not contained in cocycles")
        rel.append(c)
    # relation matrix R (r x #rel): columns are relations in Kb coordinates
    ncols = len(rel)
    R = [[rel[j][i] for j in range(ncols)] for i in range(r)]
    if ncols == 0:
        raise CohomologyError("H^1 has a free part; the group action is not of finite order")
    D, U, V, Uinv = smith_normal_form(R, r, ncols)
    factors, reps = [], []
    for i in range(r):
        d = D[i][i] if i < ncols else 0
        if d == 0:
            raise CohomologyError("H^1 has a free part; the group action is not of finite order")
        if d > 1:
            coeffs = [Uinv[j][i] for j in range(r)]
            vec = [sum(coeffs[j] * Kb[j][t] for j in range(r)) for t in range(len(Kb[0]))]
            factors.append(d)
            reps.append(_reduce_rep(vec, image_cols))
    return factors, reps


def _reduce_rep(vec, image_cols):
    """Cosmetic: shorten a representative by subtracting coboundaries greedily."""
    best = list(vec)
    improved = True
    cols = [c for c in image_cols if any(c)]
    while improved:
        improved = False
        for c in cols:
            for s in (1, -1):
                cand = [x - s * y for x, y in zip(best, c)]
                if sum(map(abs, cand)) < sum(map(abs, best)):
                    best, improved = cand, True
    return best


# --------------------------------------------------------------------------
# route 3: full inhomogeneous cochain complex

def h1_full(G: GaloisImage, max_order: int = MAX_ORDER) -> CohomologyGroup:
    elems = list(G.elements)
    n = len(elems)
    if n > max_order:
        raise GroupTooLarge(f"|G| = {n} exceeds the bound {max_order}")
    idx = {g: i for i, g in enumerate(elems)}
    mats = [G.act(g) for g in elems]
    r = G.rank
    ncols = r * n
    # d1: alpha -> (g alpha(h) - alpha(gh) + alpha(g))_{g,h}
    d1 = []
    for gi, g in enumerate(elems):
        Mg = mats[gi]
        for hi, h in enumerate(elems):
            ghi = idx[_mul(g, h)]
            for row in range(r):
                line = [0] * ncols
                for c in range(r):
                    line[hi * r + c] += Mg[row][c]
                line[ghi * r + row] -= 1
                line[gi * r + row] += 1
                d1.append(line)
    Z = integer_kernel(d1, ncols)
    # d0: m -> (g m - m)_g ; its columns span B^1
    d0_cols = []
    for c in range(r):
        col = []
        for gi in range(n):
            col.extend(mats[gi][row][c] - int(row == c) for row in range(r))
        d0_cols.append(col)
    factors, reps = _quotient(Z, d0_cols)
    gens = []
    for rep in reps:
        values = {g: _vec(rep[i * r:(i + 1) * r]) for i, g in enumerate(elems)}
        alpha = Cocycle(values, G.act)
        if not alpha.is_cocycle():
            raise CocycleConditionFailed("bar-complex generator is not a cocycle")
        gens.append(alpha)
    return CohomologyGroup(factors, gens, "bar complex", reps)


# --------------------------------------------------------------------------
# restriction and the cocycle attached to a subscheme

@dataclass
class Restriction:
    cocycle: Cocycle
    trivial: bool
    witness: PicVector | None


def restriction_map(G: GaloisImage, Hsub: GaloisImage, alpha: Cocycle) -> Restriction:
    """Restrict a cocycle on G to the subgroup image Hsub and test triviality."""
    members = set(G.elements)
    for h in Hsub.elements:
        if h not in members:
            raise NotASubgroupImage(f"{h} is not an element of the ambient image")
    res = Cocycle({h: alpha.values[h] for h in Hsub.elements})
    m = is_coboundary(res)
    return Restriction(res, m is not None, m)


@dataclass
class SubschemeCocycle:
    subset: tuple
    divisor: PicVector
    cocycle: Cocycle
    inside: list
    coboundary_trivial: bool
    mod2_trivial: bool
    eps_criterion_trivial: bool
    witnesses: list

    @property
    def trivial(self) -> bool:
        return self.coboundary_trivial

    @property
    def consistent(self) -> bool:
        return self.coboundary_trivial == self.mod2_trivial == self.eps_criterion_trivial


def character_of(G: GaloisImage, classes, target) -> dict:
    """chi(target) for every element, expressing target in the generating classes."""
    n = len(classes)
    rel = relation_lattice(list(classes) + [target], target.field)
    combo = next((v for v in rel if v[n]), None)
    if combo is None:
        raise CohomologyError(f"{target} is not in the group generated by the image classes")
    return {g: sum(a & b for a, b in zip(chi, combo[:n])) & 1 for g, chi in G.characters.items()}


def geometric_slots(locus):
    slots, geo = {}, 0
    for T in locus:
        slots[T.index] = list(range(geo, geo + T.degree))
        geo += T.degree
    return slots


def subscheme_cocycle(subset, eps_class, G: GaloisImage, classes, locus, eps, F) -> SubschemeCocycle:
    """The cocycle g -> -H + sum_{t in subset} C_t off G_{K(sqrt eps)}, 0 on it.

    ``classes`` are the square classes generating the image (aligned with
    the character vectors of G).  Triviality is decided three ways: integer
    coboundary solving, membership of sum C_t in 2Pic + Pic^G, and the
    discriminant criterion (some point outside the subset has a non-square
    discriminant iff the class is nontrivial).
    """
    from .pencil import star_clauses, _point_field

    clauses = star_clauses(subset, locus, eps, F)
    if not all(clauses.values()):
        bad = [k for k, v in clauses.items() if not v]
        raise StarViolated(f"subset {subset} fails: {', '.join(bad)}")
    chi = character_of(G, classes, eps_class)
    slots = geometric_slots(locus)
    cs = PicVector.zero()
    for i in subset:
        for s in slots[i]:
            cs = cs + PicVector.C(s)
    D = -H + cs
    values, inside = {}, []
    for g in G.elements:
        if chi[g]:
            values[g] = D
        else:
            values[g] = PicVector.zero()
            inside.append(g)
    alpha = Cocycle(values)
    if not alpha.is_cocycle():
        raise CocycleConditionFailed("subscheme map is not a cocycle")
    cob = is_coboundary(alpha) is not None
    W = [list(v.mod2()) for v in fixed_sublattice(G)]
    mod2 = f2_in_span(list(cs.mod2()), f2_rref(W, RANK)[0], RANK)
    witnesses = [T.label for T in locus if T.index not in subset
                 and not eps[T.index].in_field(_point_field(T, F)).is_trivial()]
    return SubschemeCocycle(tuple(subset), D, alpha, inside, cob, mod2, not witnesses, witnesses)
