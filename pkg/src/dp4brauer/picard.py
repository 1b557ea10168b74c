"""
The rank-6 Picard lattice of a degree-4 del Pezzo surface in the conic basis
(E, C0, ..., C4) with E = (H + sum C_i)/2, and the action of the group
(Z/2)^5 x| S5 that permutes the five conic pairs {C_i, H - C_i} and exchanges
members of a pair.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations, product

from .lattice import (
    f2_in_span,
    f2_kernel,
    f2_rref,
    f2_span,
    identity,
    integer_kernel,
    matmul,
    matvec,
)
from .squares import relation_lattice

RANK = 6
NPAIRS = 5

# intersection pairing in the basis (E, C0..C4)
GRAM = [[11, 3, 3, 3, 3, 3]] + [[3] + [0 if i == j else 1 for j in range(5)] for i in range(5)]


class OddExchangeSet(ValueError):
    pass


class ExchangeParityError(ValueError):
    """Square-class data would force an odd number of exchanges.

    ``companion`` is the product of classes that the data is missing as a
    square relation (given as a 0/1 vector over the generators).
    """

    def __init__(self, message, companion=None):
        super().__init__(message)
        self.companion = companion


class UnsupportedDegree(ValueError):
    pass


class PicVector(tuple):
    """Integer coordinates in the basis (E, C0, ..., C4)."""

    def __new__(cls, coords):
        coords = tuple(int(x) for x in coords)
        if len(coords) != RANK:
            raise ValueError("Picard vectors have 6 coordinates")
        return super().__new__(cls, coords)

    @classmethod
    def C(cls, i):
        return cls([int(k == i + 1) for k in range(RANK)])

    @classmethod
    def zero(cls):
        return cls([0] * RANK)

    def __add__(self, other):
        return PicVector(x + y for x, y in zip(self, other))

    def __sub__(self, other):
        return PicVector(x - y for x, y in zip(self, other))

    def __neg__(self):
        return PicVector(-x for x in self)

    def __mul__(self, k):
        return PicVector(k * x for x in self)

    __rmul__ = __mul__

    def dot(self, other) -> int:
        return pairing(self, other)

    def mod2(self):
        return tuple(x % 2 for x in self)

    def __str__(self):
        e, cs = self[0], self[1:]
        terms = []
        if e % 2 == 0:
            h = e // 2
            if h:
                terms.append(_coef(h, "H"))
            coeffs = [c + h for c in cs]
        else:
            terms.append(_coef(e, "E"))
            coeffs = list(cs)
        for i, c in enumerate(coeffs):
            if c:
                terms.append(_coef(c, f"C{i}"))
        if not terms:
            return "0"
        s = " + ".join(terms).replace("+ -", "- ")
        return s

    def __repr__(self):
        return f"PicVector({tuple(self)})"


def _coef(c, name):
    return name if c == 1 else f"-{name}" if c == -1 else f"{c}{name}"


H = PicVector([2, -1, -1, -1, -1, -1])
E = PicVector([1, 0, 0, 0, 0, 0])


def pairing(u, v) -> int:
    return sum(u[i] * GRAM[i][j] * v[j] for i in range(RANK) for j in range(RANK))


# --------------------------------------------------------------------------
# the group

@dataclass(frozen=True)
class GammaElement:
    """x -> pi(sigma_I(x)): first exchange the pairs in I, then permute by pi."""

    exchanges: frozenset = frozenset()
    perm: tuple = tuple(range(NPAIRS))

    def __post_init__(self):
        object.__setattr__(self, "exchanges", frozenset(self.exchanges))
        object.__setattr__(self, "perm", tuple(self.perm))
        if sorted(self.perm) != list(range(NPAIRS)):
            raise ValueError(f"{self.perm} is not a permutation of 0..4")

    @property
    def is_even(self) -> bool:
        return len(self.exchanges) % 2 == 0

    def compose(self, other: "GammaElement") -> "GammaElement":
        """self o other."""
        inv = {other.perm[i]: i for i in range(NPAIRS)}
        pulled = {inv[j] for j in self.exchanges}
        perm = tuple(self.perm[other.perm[i]] for i in range(NPAIRS))
        return GammaElement(other.exchanges ^ pulled, perm)

    __mul__ = compose

    def inverse(self) -> "GammaElement":
        inv = [0] * NPAIRS
        for i, j in enumerate(self.perm):
            inv[j] = i
        return GammaElement(frozenset(self.perm[i] for i in self.exchanges), tuple(inv))

    def act(self, v) -> PicVector:
        return PicVector(matvec(action_matrix(self), list(v)))

    def __str__(self):
        parts = []
        if self.exchanges:
            parts.append("x{" + ",".join(map(str, sorted(self.exchanges))) + "}")
        if self.perm != tuple(range(NPAIRS)):
            parts.append("p" + "".join(map(str, self.perm)))
        return "*".join(parts) if parts else "id"

    def sort_key(self):
        return (len(self.exchanges), sorted(self.exchanges), self.perm)


IDENTITY = GammaElement()


def action_matrix(g: GammaElement):
    """6x6 integer matrix of g; column k is the image of basis vector k."""
    if not g.is_even:
        raise OddExchangeSet(f"{g} exchanges an odd number of pairs; E has no integral image")
    cols = []
    k = len(g.exchanges)
    moved = {g.perm[i] for i in g.exchanges}
    cols.append([1 + k] + [-(1 + k // 2) if j in moved else -(k // 2) for j in range(NPAIRS)])
    for i in range(NPAIRS):
        j = g.perm[i]
        if i in g.exchanges:
            cols.append(list(H - PicVector.C(j)))
        else:
            cols.append(list(PicVector.C(j)))
    return [[cols[c][r] for c in range(RANK)] for r in range(RANK)]


def even_exchange_group():
    """All 16 pure exchanges with |I| even (the subgroup with trivial permutation)."""
    out = []
    for bits in product((0, 1), repeat=NPAIRS):
        if sum(bits) % 2 == 0:
            out.append(GammaElement(frozenset(i for i in range(NPAIRS) if bits[i])))
    return sorted(out, key=GammaElement.sort_key)


def even_group():
    """The index-2 subgroup of (Z/2)^5 x| S5 with even exchange sets (1920 elements)."""
    return [GammaElement(I.exchanges, p) for I in even_exchange_group()
            for p in permutations(range(NPAIRS))]


def closure(generators):
    elems = {IDENTITY}
    frontier = [IDENTITY]
    gens = list(generators)
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = g * x
                if y not in elems:
                    elems.add(y)
                    new.append(y)
        frontier = new
    return sorted(elems, key=GammaElement.sort_key)


# --------------------------------------------------------------------------
# Galois image

@dataclass
class GaloisImage:
    """Image of the absolute Galois group in the even-exchange group.

    ``characters`` gives, per element, the values of the corresponding
    character on ``class_labels`` (the square classes that generate the
    relevant multiquadratic extension).
    """

    elements: list
    generators: list
    class_labels: list
    characters: dict
    classes: list = field(default_factory=list)

    def __post_init__(self):
        self.elements = sorted(set(self.elements), key=GammaElement.sort_key)
        index = set(self.elements)
        for g in self.elements:
            if not g.is_even:
                raise ExchangeParityError(f"{g} has an odd exchange set")
            for h in self.generators:
                if g * h not in index:
                    raise ValueError("element set is not closed under composition")
        if IDENTITY not in index:
            raise ValueError("image lacks the identity")

    @classmethod
    def from_elements(cls, elements):
        elements = closure(elements)
        return cls(elements, [g for g in elements if g != IDENTITY], [], {})

    @property
    def order(self) -> int:
        return len(self.elements)

    rank = RANK

    @staticmethod
    def act(g):
        return action_matrix(g)

    def matrices(self):
        return {g: action_matrix(g) for g in self.elements}

    def contains(self, g) -> bool:
        return g in set(self.elements)

    def subgroup(self, predicate) -> "GaloisImage":
        elems = [g for g in self.elements if predicate(g)]
        chars = {g: self.characters[g] for g in elems if g in self.characters}
        return GaloisImage(elems, [g for g in elems if g != IDENTITY], self.class_labels, chars,
                           self.classes)

    def __str__(self):
        return "{" + ", ".join(str(g) for g in self.elements) + "}"


def galois_image(locus, eps, F) -> GaloisImage:
    """Compute the image from the locus and discriminant classes over F.

    Generators of the relevant multiquadratic extension: eps_T for degree-1
    points; for a degree-2 point the residue-field class delta_T and the
    descended discriminant e_T.  A character chi of the group generated by
    these classes acts by exchanging C_t <-> C_t' wherever chi(eps_T) = 1
    and by swapping the two geometric points of T wherever chi(delta_T) = 1.
    """
    if len(eps) != len(locus):
        raise ValueError("eps list must be aligned with the locus")
    gens, labels, slots = [], [], []
    geo = 0
    basis = eps[0].basis if eps else None
    for T, e in zip(locus, eps):
        if T.degree == 1:
            slots.append(("point", geo, len(gens)))
            gens.append(e.in_field(F))
            labels.append(f"eps_{T.label}")
            geo += 1
        elif T.degree == 2:
            if F.has_ext:
                raise UnsupportedDegree("degree-2 points over a field with a quadratic layer")
            delta = basis.class_of(T.residue_field.ext, F)
            rep = e.in_field(T.residue_field).representative()
            slots.append(("pair", geo, len(gens), len(gens) + 1))
            gens.append(delta)
            gens.append(rep.in_field(F))
            labels += [f"delta_{T.label}", f"eps_{T.label}"]
            geo += 2
        else:
            raise UnsupportedDegree(f"closed point of degree {T.degree}")
    if geo != NPAIRS:
        raise ValueError("locus does not have total degree 5")
    n = len(gens)
    relations = relation_lattice(gens, F)
    chars = f2_kernel(relations, n)
    elements, characters = [], {}
    for chi in sorted(map(tuple, f2_span(chars, n))):
        g = _element_for(chi, slots)
        if not g.is_even:
            companion = [0] * n
            for s in slots:
                if s[0] == "point":
                    companion[s[2]] = 1
            raise ExchangeParityError(
                "square-class data allows an odd number of exchanges; the product of the "
                "degree-1 discriminants is expected to be a square", companion)
        elements.append(g)
        characters[g] = chi
    generators = [_element_for(tuple(c), slots) for c in chars]
    return GaloisImage(elements, generators, labels, characters, gens)


def _element_for(chi, slots) -> GammaElement:
    exch, perm = set(), list(range(NPAIRS))
    for s in slots:
        if s[0] == "point":
            _, i, k = s
            if chi[k]:
                exch.add(i)
        else:
            _, i, kd, ke = s
            if chi[ke]:
                exch |= {i, i + 1}
            if chi[kd]:
                perm[i], perm[i + 1] = i + 1, i
    return GammaElement(frozenset(exch), tuple(perm))


# --------------------------------------------------------------------------
# fixed lattices

def _stacked(G, elements=None):
    n = G.rank
    rows = []
    for g in elements or G.generators or G.elements:
        M = G.act(g)
        for r in range(n):
            rows.append([M[r][c] - int(r == c) for c in range(n)])
    return rows


def _lattice_vector(v):
    v = tuple(v)
    return PicVector(v) if len(v) == RANK else v


def fixed_sublattice(G: GaloisImage):
    """Basis of Pic^G (integer kernel of the stacked M_g - 1)."""
    return [_lattice_vector(v) for v in integer_kernel(_stacked(G), G.rank)]


def fixed_mod2(G: GaloisImage):
    """Basis of (Pic/2Pic)^G."""
    return [tuple(v) for v in f2_kernel(_stacked(G), G.rank)]


def fixed_mod2_quotient(G: GaloisImage):
    """Representatives of a basis of (Pic/2Pic)^G modulo the image of Pic^G.

    Representatives are chosen greedily by minimal weight, so the output is
    canonical for a given image.
    """
    n = G.rank
    V = fixed_mod2(G)
    W = [[x % 2 for x in v] for v in fixed_sublattice(G)]
    W = f2_rref(W, n)[0]
    chosen = []
    for v in sorted(f2_span(V, n), key=lambda v: (sum(v), v)):
        if not any(v):
            continue
        if not f2_in_span(list(v), W + chosen, n):
            chosen.append(list(v))
    return [_lattice_vector(v) for v in chosen]


def preserves_pairing(M) -> bool:
    MT = [list(r) for r in zip(*M)]
    return matmul(matmul(MT, GRAM), M) == GRAM


def is_identity(M) -> bool:
    return M == identity(len(M))
