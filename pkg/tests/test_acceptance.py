"""One test per acceptance criterion.  Zero tolerance: exact equality of normalized objects."""
import random
import re
import subprocess
import sys
import time
from pathlib import Path

from sympy import expand, symbols, sympify

from dp4brauer import FIXTURES
from dp4brauer.cohomology import (
    h1_cyclic,
    h1_full,
    h1_two_torsion,
    is_coboundary,
    restriction_map,
    subscheme_cocycle,
)
from dp4brauer.field import FieldDescriptor, Valuation
from dp4brauer.forms import RatFunc
from dp4brauer.parsing import parse_pencil, parse_point, parse_ratfunc
from dp4brauer.pencil import (
    LinearForm,
    QuadricMatrix,
    char_form,
    degeneracy_locus,
    discriminant_eps,
    is_smooth_pencil,
    normalize_point,
    quadric_at,
    star_clauses,
    star_subschemes,
)
from dp4brauer.picard import GaloisImage, closure, even_exchange_group, galois_image
from dp4brauer.pipeline import analyze
from dp4brauer.squares import AtomBasis, is_square
from dp4brauer.symbols import QuaternionSymbol, build_algebra, specialize, tame_residue

ROOT = Path(__file__).resolve().parent


def fresh_surface():
    k = FieldDescriptor(("a", "b", "c"))
    a, b, c = (k.gen(s) for s in "abc")
    A = QuadricMatrix.diagonal([a, b, 1, 0, c], k)
    A2 = QuadricMatrix.diagonal([b * c, 1, 1, a, 0], k)
    return k, (a, b, c), A, A2


def test_criterion_1_char_form_and_smoothness():
    t = time.perf_counter()
    k, (a, b, c), A, A2 = fresh_surface()
    f = char_form(A, A2)
    smooth = is_smooth_pencil(f)
    elapsed = time.perf_counter() - t
    lam, mu, sa, sb, sc = symbols("lam mu a b c")
    got = expand(sum(sympify(str(x)) * lam ** j * mu ** (f.degree - j) for j, x in enumerate(f.coeffs)))
    expected = expand(32 * mu * lam * (lam + mu) * (sb * lam + mu) * (sa * lam + sb * sc * mu))
    assert smooth
    assert elapsed < 1.0
    assert got == expected


def test_criterion_2_locus_and_eps_table():
    t = time.perf_counter()
    k, (a, b, c), A, A2 = fresh_surface()
    locus = degeneracy_locus(char_form(A, A2))
    basis = AtomBasis(k)
    eps = [discriminant_eps(quadric_at(T, A, A2), basis=basis, T=T) for T in locus]
    elapsed = time.perf_counter() - t
    expected_points = [normalize_point(parse_point(p, k))
                       for p in ("[1:0]", "[0:1]", "[1:-1]", "[1:-b]", "[b*c:-a]")]
    def same(P, Q):
        return P[0] * Q[1] == P[1] * Q[0]

    assert len(locus) == 5 and all(T.degree == 1 for T in locus)
    match = [next(i for i, T in enumerate(locus) if same(T.coords, P)) for P in expected_points]
    assert sorted(match) == [0, 1, 2, 3, 4]
    one = k.one
    expected_eps = [a * b * c, a * b * c, a * c * (b - one) * (a - b * c),
                    a * b * c * (one - b) * (a - b * b * c), b * (b * b * c - a) * (b * c - a)]
    for i, e in zip(match, expected_eps):
        assert eps[i] == basis.class_of(e)
    assert elapsed < 1.0


def test_criterion_3_star_subschemes(surface):
    t = time.perf_counter()
    over_L = star_subschemes(surface.locus, surface.eps_L, surface.L)
    over_k = star_subschemes(surface.locus, surface.eps, surface.k)
    clauses = [star_clauses((0, 1), surface.locus, e, F)
               for e, F in ((surface.eps_L, surface.L), (surface.eps, surface.k))]
    elapsed = time.perf_counter() - t
    assert over_L == [(0, 1)] and over_k == [(0, 1)]
    assert all(all(c.values()) for c in clauses)
    assert elapsed < 1.0


def test_criterion_4_h1_and_restriction(surface):
    Gk = galois_image(surface.locus, surface.eps, surface.k)
    GL = galois_image(surface.locus, surface.eps_L, surface.L)
    assert Gk.order == 8
    for G in (Gk, GL):
        assert h1_two_torsion(G).invariant_factors == [2]
        t = time.perf_counter()
        full = h1_full(G)
        assert time.perf_counter() - t < 30
        assert full.invariant_factors == [2]
    (alpha,) = h1_two_torsion(Gk).generators
    (beta,) = h1_two_torsion(GL).generators
    res = restriction_map(Gk, GL, alpha)
    assert not res.trivial
    diff = res.cocycle + (-beta)
    assert is_coboundary(diff) is not None


def test_criterion_5_subscheme_cocycle(surface):
    for eps, F in ((surface.eps, surface.k), (surface.eps_L, surface.L)):
        G = galois_image(surface.locus, eps, F)
        sc = subscheme_cocycle((0, 1), eps[0], G, G.classes, surface.locus, eps, F)
        assert not sc.trivial
        assert sc.consistent
        assert "T2" in sc.witnesses
        assert not eps[2].in_field(F).is_trivial()


def test_criterion_6_algebra_and_certificate_chain(surface):
    t = time.perf_counter()
    L = surface.L
    l = LinearForm([1, 1, 0, 0, 0], L)
    A = build_algebra((0, 1), {0: surface.l0, 1: surface.l1}, l, surface.eps_L[0], L,
                      locus=surface.locus, eps_all=surface.eps_L)
    expected_u = RatFunc.coerce(surface.b * surface.c, L)
    expected_f = parse_ratfunc("(2*a*I*x0 + 2*sqrt(a)*x2)*(2*I*x1 + 2*x2)/(x0 + x1)^2", L)
    (u, f), = A.pairs
    # constant slot: equal mod squares; function slot: exact equality (ratio 1, a square)
    assert is_square(u.constant_value() / expected_u.constant_value(), L)
    assert f.num * expected_f.den == expected_f.num * f.den
    report = analyze(parse_pencil(FIXTURES / "dp4-L.pencil"), stop_after="trace")
    elapsed = time.perf_counter() - t
    assert report.stage("trace").get("accepted") is True
    assert str(report.data["verification"].final) == "(c, b)"
    assert elapsed < 5.0


def test_criterion_7_residues(surface):
    k, L = surface.k, surface.L
    r = tame_residue(QuaternionSymbol([(surface.c, surface.b)], k), Valuation.at(k, surface.c))
    R = Valuation.at(k, surface.c).residue_field
    assert r.square_class == r.square_class.basis.class_of(R.gen("b"))
    assert not r.trivial
    final = analyze(parse_pencil(FIXTURES / "dp4-L.pencil"), stop_after="trace").data["verification"].final
    vs = Valuation.at(L, L.sqrt_ext)
    assert tame_residue(final, vs).trivial
    sp = specialize(final, vs)
    r2 = tame_residue(sp, Valuation.at(sp.field, sp.field.gen("c")))
    assert str(r2) == "b" and not r2.trivial
    assert str(Valuation.at(sp.field, sp.field.gen("c")).residue_field) == "Q^cycl(b)"


def test_criterion_8_property_suites():
    # routes agree on at least ten distinct randomized subgroups
    rng = random.Random(8)
    E = sorted(even_exchange_group(), key=lambda g: g.sort_key())
    seen = set()
    while len(seen) < 10:
        els = frozenset(closure(rng.sample(E, rng.randint(1, 3))))
        if els in seen:
            continue
        seen.add(els)
        G = GaloisImage.from_elements(list(els))
        full, two = h1_full(G), h1_two_torsion(G)
        assert full.invariant_factors == two.invariant_factors
        if len(els) == 2:
            g = max(els, key=lambda e: e.sort_key())
            assert h1_cyclic(g).invariant_factors == full.invariant_factors
    t = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", str(ROOT / "test_properties.py"), "-q",
                           "-p", "no:cacheprovider", "--hypothesis-show-statistics"],
                          capture_output=True, text=True, cwd=ROOT.parent)
    elapsed = time.perf_counter() - t
    assert proc.returncode == 0, proc.stdout[-2000:]
    counts = [int(n) for n in re.findall(r"- (\d+) passing examples", proc.stdout)]
    assert len(counts) >= 11
    assert min(counts) >= 100
    assert elapsed < 60
