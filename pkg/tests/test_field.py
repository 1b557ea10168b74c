import pytest
from sympy import Poly, gcd as sympy_gcd, symbols

from dp4brauer.field import (
    GAUSSIAN,
    FieldDescriptor,
    FieldMismatch,
    NoExtensionLayer,
    TowerTooDeep,
    UnsupportedValuation,
    Valuation,
    ZeroElement,
    conjugate,
    field_sqrt,
    fmt_constant,
    norm,
    poly_gcd,
    valuation_of,
    reduce_at,
)


@pytest.fixture
def k():
    return FieldDescriptor(("a", "b", "c"))


def gens(F):
    return [F.gen(s) for s in F.params]


def test_gcd_with_zero_normalizes(k):
    a, b, c = k.ring.gens
    p = -(a * b) + 3 * a
    g = poly_gcd(p, k.ring.zero)
    assert g == poly_gcd(g, g)
    assert g.LC == k.ring.domain.one
    assert p.div(g)[1] == 0


def test_gcd_manifest_factorization(k):
    a, b, c = k.ring.gens
    assert poly_gcd(a ** 2 - b ** 2, a - b) == a - b


def test_gcd_exact_division_oracle(k):
    a, b, c = k.ring.gens
    p, q = a * b, a * c
    g = poly_gcd(p, q)
    assert g == a
    qp, rp = p.div(g)
    qq, rq = q.div(g)
    assert rp == 0 and rq == 0
    x, y, z = symbols("a b c")
    # quotients coprime, checked by sympy's own gcd on expressions
    assert sympy_gcd(Poly(qp.as_expr(), x, y, z), Poly(qq.as_expr(), x, y, z)).is_one


def test_conjugate_and_norm(k):
    a, b, c = gens(k)
    L = k.extend(a)
    s = L.sqrt_ext
    assert conjugate(s) == -s
    assert conjugate(L(b + c)) == L(b + c)
    assert norm(s) == -a
    assert norm(1 + s) == 1 - a
    x = L(b) * 2 + s * c
    assert conjugate(conjugate(x)) == x


def test_conjugate_tangent_coefficients(surface):
    # 2ai x0 + 2 sqrt(a) x2  ->  2ai x0 - 2 sqrt(a) x2
    l0 = surface.l0
    conj = [conjugate(c) for c in l0.coeffs]
    assert conj[0] == l0.coeffs[0]
    assert conj[2] == -l0.coeffs[2]
    assert str(l0.conjugate()) == "(2*I*a)*x0 + (-2*sqrt(a))*x2"


def test_no_extension_layer(k):
    with pytest.raises(NoExtensionLayer):
        conjugate(k.gen("a"))
    with pytest.raises(NoExtensionLayer):
        norm(k.gen("a"))


def test_single_layer_only(k):
    L = k.extend(k.gen("a"))
    with pytest.raises(TowerTooDeep):
        L.extend(L.gen("b"))


def test_extension_must_be_nonsquare(k):
    a = k.gen("a")
    with pytest.raises(ValueError):
        k.extend(a * a)
    with pytest.raises(ValueError):
        k.extend(k(2))  # every constant is a square in cyclotomic mode
    g = FieldDescriptor(("a",), GAUSSIAN)
    assert g.extend(g(2)).has_ext


def test_valuations(k):
    a, b, c = gens(k)
    L = k.extend(a)
    v = Valuation.at(L, L.sqrt_ext)
    assert valuation_of(a, v) == 2
    assert valuation_of(b, v) == 0 and valuation_of(c, v) == 0
    assert valuation_of(L.sqrt_ext, v) == 1
    vc = Valuation.at(k, c)
    assert valuation_of(b ** 3 * c ** 2, vc) == 2
    assert valuation_of(b / c, vc) == -1
    with pytest.raises(ZeroElement):
        valuation_of(k.zero, vc)


def test_residue_fields(k):
    a, b, c = gens(k)
    vc = Valuation.at(k, c)
    assert vc.residue_field.params == ("a", "b")
    assert reduce_at(b + c, vc) == vc.residue_field.gen("b")
    vb = Valuation.at(k, b - 1)
    assert reduce_at(a * b, vb) == vb.residue_field.gen("a")
    with pytest.raises(ValueError):
        reduce_at(c, vc)
    with pytest.raises(UnsupportedValuation):
        Valuation.at(k, a * b)


def test_string_coercion(k):
    a, b, c = gens(k)
    assert k("a*b - c^2") == a * b - c * c
    L = k.extend(a)
    assert L("sqrt(a)*2") == L.sqrt_ext * 2


def test_field_sqrt(k):
    a, b, c = gens(k)
    assert field_sqrt(a * a * b * b * 4) ** 2 == a * a * b * b * 4
    assert field_sqrt(a) is None
    L = k.extend(a)
    r = field_sqrt(L(a))
    assert r is not None and r * r == L(a)
    x = (L.sqrt_ext + b) ** 2
    assert field_sqrt(x) ** 2 == x


def test_fmt_constant():
    from sympy import QQ_I
    assert fmt_constant(QQ_I(2, 0)) == "2"
    assert fmt_constant(QQ_I(0, 1)) == "I"
    assert fmt_constant(QQ_I(0, -1)) == "-I"


def test_mismatched_fields(k):
    g = FieldDescriptor(("t",))
    with pytest.raises((FieldMismatch, TypeError)):
        k.gen("a") + g.gen("t")
