from fractions import Fraction
from itertools import product

import pytest

from dp4brauer.field import FieldDescriptor
from dp4brauer.pencil import BinaryForm, ClosedPoint
from dp4brauer.picard import (
    E,
    GRAM,
    H,
    IDENTITY,
    ExchangeParityError,
    GaloisImage,
    GammaElement,
    OddExchangeSet,
    PicVector,
    action_matrix,
    even_exchange_group,
    fixed_mod2,
    fixed_mod2_quotient,
    fixed_sublattice,
    galois_image,
    pairing,
    preserves_pairing,
)
from dp4brauer.squares import AtomBasis


def exchange(*I):
    return GammaElement(frozenset(I))


def expected_image_of_E(I):
    """sigma_I(E) from E = (H + sum C_i)/2 with C_i -> H - C_i for i in I, in (E, C) coords."""
    # work in rational coordinates (h, c_0..c_4) for h*H + sum c_i C_i
    h = Fraction(1, 2) + Fraction(len(I), 2)
    c = [Fraction(-1, 2) if i in I else Fraction(1, 2) for i in range(5)]
    # H = 2E - sum C_i
    return PicVector([int(2 * h)] + [int(ci - h) for ci in c])


def column(M, j):
    return PicVector([M[i][j] for i in range(6)])


def test_identity_matrix():
    M = action_matrix(IDENTITY)
    assert M == [[int(i == j) for j in range(6)] for i in range(6)]


def test_exchange_01_matrix():
    M = action_matrix(exchange(0, 1))
    assert column(M, 1) == H - PicVector.C(0)
    assert column(M, 2) == H - PicVector.C(1)
    assert column(M, 3) == PicVector.C(2)
    assert column(M, 0) == expected_image_of_E({0, 1})
    assert column(M, 0) == PicVector([3, -2, -2, -1, -1, -1])


@pytest.mark.parametrize("I", [(0, 1), (2, 4), (0, 1, 2, 3)])
def test_exchange_matrices_against_expansion(I):
    M = action_matrix(exchange(*I))
    assert column(M, 0) == expected_image_of_E(set(I))
    assert preserves_pairing(M)
    assert [sum(M[i][j] * H[j] for j in range(6)) for i in range(6)] == list(H)


@pytest.mark.parametrize("I", [(0,), (1, 2, 3), (0, 1, 2, 3, 4)])
def test_odd_exchange_rejected(I):
    with pytest.raises(OddExchangeSet):
        action_matrix(exchange(*I))


def test_pairing_values():
    assert pairing(H, H) == 4
    assert pairing(H, PicVector.C(0)) == 2
    assert pairing(PicVector.C(0), PicVector.C(0)) == 0
    assert pairing(PicVector.C(0), PicVector.C(3)) == 1
    assert pairing(E, E) == GRAM[0][0]


def test_image_over_k_matches_orthogonal_complement(surface):
    G = galois_image(surface.locus, surface.eps, surface.k)
    assert G.order == 8
    rel = [(1, 1, 0, 0, 0), (0, 0, 1, 1, 1)]
    oracle = {v for v in product((0, 1), repeat=5)
              if all(sum(a * b for a, b in zip(v, r)) % 2 == 0 for r in rel)}
    got = {tuple(int(i in g.exchanges) for i in range(5)) for g in G.elements}
    assert got == oracle
    assert all(g.perm == tuple(range(5)) for g in G.elements)
    assert all(len(g.exchanges) % 2 == 0 for g in G.elements)


def test_image_over_L(surface):
    G = galois_image(surface.locus, surface.eps_L, surface.L)
    Gk = galois_image(surface.locus, surface.eps, surface.k)
    assert set(G.elements) == set(Gk.elements)


def test_trivial_image():
    F = FieldDescriptor(("t",))
    B = AtomBasis(F)
    one = B.class_of(F.one)
    locus = [ClosedPoint(i, (F.one, F(i)), F, 1, BinaryForm([0, 1], F)) for i in range(5)]
    G = galois_image(locus, [one] * 5, F)
    assert G.elements == [IDENTITY]
    assert len(fixed_sublattice(G)) == 6
    assert fixed_mod2_quotient(G) == []


def test_odd_exchange_diagnostic():
    F = FieldDescriptor(("t",))
    B = AtomBasis(F)
    one, t = B.class_of(F.one), B.class_of(F.gen("t"))
    locus = [ClosedPoint(i, (F.one, F(i)), F, 1, BinaryForm([0, 1], F)) for i in range(5)]
    with pytest.raises(ExchangeParityError) as err:
        galois_image(locus, [one, one, t, one, one], F)
    assert err.value.companion is not None


def test_fixed_sublattice(surface):
    for eps, F in ((surface.eps, surface.k), (surface.eps_L, surface.L)):
        G = galois_image(surface.locus, eps, F)
        assert [str(v) for v in fixed_sublattice(G)] == ["H"]
        assert [str(v) for v in fixed_mod2_quotient(G)] == ["C0 + C1"]
        span = {tuple(x % 2 for x in v) for v in fixed_mod2(G)}
        assert tuple(x % 2 for x in H) in _f2_span(span)
        assert tuple(x % 2 for x in PicVector.C(0) + PicVector.C(1)) in _f2_span(span)
        assert len(_f2_span(span)) == 4


def _f2_span(vectors):
    vectors = list(vectors)
    out = set()
    for coeffs in product((0, 1), repeat=len(vectors)):
        out.add(tuple(sum(c * v[i] for c, v in zip(coeffs, vectors)) % 2 for i in range(6)))
    return out


def test_full_even_exchange_quotient_trivial():
    G = GaloisImage.from_elements(even_exchange_group())
    assert G.order == 16
    # oracle: vectors mod 2 fixed by every matrix mod 2
    mats = [action_matrix(g) for g in G.elements]
    fixed = [v for v in product((0, 1), repeat=6)
             if all(all(sum(M[i][j] * v[j] for j in range(6)) % 2 == v[i] for i in range(6)) for M in mats)]
    assert {tuple(v) for v in fixed} == _f2_span([tuple(x % 2 for x in H)])
    assert fixed_mod2_quotient(G) == []
