import pytest
from sympy import factor_list, symbols, sympify

from dp4brauer.field import GAUSSIAN, FieldDescriptor, ZeroElement, poly_gcd
from dp4brauer.squares import AtomBasis, class_in_extension, is_square, refine, relation_lattice


@pytest.fixture
def k():
    return FieldDescriptor(("a", "b", "c"))


def abc(F):
    return [F.gen(s) for s in "abc"]


def atom_set(basis):
    return {basis.atom_str(i) for i in basis.live()}


def reconstruct(basis, x):
    lc, exps = basis.factor(x.lo.numer)
    out = basis.ring(lc)
    for i, e in exps.items():
        out *= basis.atoms[i] ** e
    return out


def test_refine_ab_ac(k):
    a, b, c = abc(k)
    B, cls = refine([a * b, a * c])
    assert atom_set(B) == {"a", "b", "c"}
    idx = {B.atom_str(i): i for i in B.live()}
    assert cls[0].leaf_vector() == {idx["a"], idx["b"]}
    assert cls[1].leaf_vector() == {idx["a"], idx["c"]}
    # pairwise coprime and each input rebuilt exactly
    live = B.live()
    for i in live:
        for j in live:
            if i < j:
                assert poly_gcd(B.atoms[i], B.atoms[j]).is_ground
    for x in (a * b, a * c):
        assert reconstruct(B, x) == x.lo.numer


def test_refine_drops_squares(k):
    a, b, c = abc(k)
    B, (cl,) = refine([a * a * b])
    assert str(cl) == "b"


def test_refine_discriminant_table(surface):
    B = surface.basis
    assert atom_set(B) == {"a", "b", "c", "b - 1", "-a + b*c", "-a + b**2*c"}
    # independent oracle: irreducible factors of the product via sympy
    a, b, c = symbols("a b c")
    prod = a * b * c * a * c * (b - 1) * (a - b * c) * (1 - b) * (a - b ** 2 * c) * b * (b ** 2 * c - a)
    irreducible = [f.expand() for f, _ in factor_list(prod)[1]]
    atoms = {sympify(s) for s in atom_set(B)}
    assert len(irreducible) == len(atoms)
    for f in irreducible:
        assert f in atoms or (-f).expand() in atoms


def test_zero_has_no_class(k):
    with pytest.raises(ZeroElement):
        refine([k.zero])


def test_is_square(k):
    a, b, c = abc(k)
    L = k.extend(a)
    assert is_square(a * a * b * b * c * c)
    assert not is_square(b * c, L)
    assert not is_square(a * b * c, L)
    assert is_square(a, L)
    assert is_square(k(-7))
    assert str(class_in_extension(a * b * c, L)) == "b*c"


def test_is_square_gaussian():
    g = FieldDescriptor(("a",), GAUSSIAN)
    a = g.gen("a")
    assert not is_square(g(2) * a * a)
    assert is_square(g(-4) * a * a)      # -4 = (2i)^2
    assert not is_square(g(2))


def test_is_square_extension_elements(k):
    a, b, c = abc(k)
    L = k.extend(a)
    s = L.sqrt_ext
    assert is_square((s + b) ** 2)
    assert not is_square((s + b) ** 2 * (b + c))


def test_relation_lattice_table(surface):
    rel = relation_lattice(surface.eps)
    assert sorted(map(tuple, rel)) == [(0, 0, 1, 1, 1), (1, 1, 0, 0, 0)]
    # the second relation: eps_T2 eps_T3 eps_T4 multiplies out to a square
    e = [surface.a * surface.b * surface.c, None,
         surface.a * surface.c * (surface.b - 1) * (surface.a - surface.b * surface.c),
         surface.a * surface.b * surface.c * (1 - surface.b) * (surface.a - surface.b ** 2 * surface.c),
         surface.b * (surface.b ** 2 * surface.c - surface.a) * (surface.b * surface.c - surface.a)]
    assert is_square(e[2] * e[3] * e[4])
    relL = relation_lattice(surface.eps_L, surface.L)
    assert sorted(map(tuple, relL)) == [(0, 0, 1, 1, 1), (1, 1, 0, 0, 0)]


def test_relation_lattice_trivial_cases(k):
    a, b, c = abc(k)
    B, cls = refine([a * b, a * b])
    assert [tuple(v) for v in relation_lattice(cls)] == [(1, 1)]
    B, cls = refine([a, b])
    assert relation_lattice(cls) == []


def test_atom_basis_growth_keeps_old_classes(k):
    a, b, c = abc(k)
    B = AtomBasis(k)
    x = B.class_of(a * b + a)          # atoms a, b+1
    y = B.class_of(b + 1)
    assert not x.is_trivial()
    assert str(x * y) == "a"
