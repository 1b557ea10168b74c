import pytest

from dp4brauer import FIXTURES
from dp4brauer.field import I, FieldDescriptor
from dp4brauer.pencil import (
    QuadricMatrix,
    char_form,
    degeneracy_locus,
    discriminant_eps,
    quadric_at,
    tangent_form,
)
from dp4brauer.squares import AtomBasis


class Surface:
    """The diagonal pencil Q, Q2 over Q^cycl(a,b,c) and its data over k and L = k(sqrt a)."""

    def __init__(self):
        k = FieldDescriptor(("a", "b", "c"))
        a, b, c = (k.gen(s) for s in "abc")
        self.k, self.a, self.b, self.c = k, a, b, c
        self.L = k.extend(a, "sqrt(a)")
        self.A = QuadricMatrix.diagonal([a, b, 1, 0, c], k)
        self.A2 = QuadricMatrix.diagonal([b * c, 1, 1, a, 0], k)
        self.f = char_form(self.A, self.A2)
        self.locus = degeneracy_locus(self.f)
        self.quadrics = [quadric_at(T, self.A, self.A2) for T in self.locus]
        self.basis = AtomBasis(k)
        self.eps = [discriminant_eps(Q, basis=self.basis, T=T)
                    for Q, T in zip(self.quadrics, self.locus)]
        self.eps_L = [e.in_field(self.L) for e in self.eps]
        L = self.L
        self.i = L(k.frac(I))
        self.sqrt_a = L.sqrt_ext
        self.P0 = [self.i, L.zero, self.sqrt_a, L.zero, L.zero]
        self.P1 = [L.zero, self.i, L.one, L.zero, L.zero]
        self.l0 = tangent_form(self.quadrics[0].lift(L), self.P0)
        self.l1 = tangent_form(self.quadrics[1].lift(L), self.P1)


@pytest.fixture(scope="session")
def surface():
    return Surface()


@pytest.fixture(scope="session")
def fixture_path():
    return lambda name: FIXTURES / name
