"""
End-to-end analysis of a pencil spec: locus, discriminants, (*) subschemes,
Galois image, H^1 by three routes, the generating algebra, the certificate
trace and tame residues.  Every claim records the operation that produced it.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field

from .cohomology import (
    h1_cyclic,
    h1_full,
    h1_two_torsion,
    restriction_map,
    subscheme_cocycle,
)
from .field import Valuation
from .forms import XPoly
from .parsing import (
    PencilSpec,
    ValidationError,
    parse_field_element,
    parse_locus_key,
    parse_point,
    parse_ratfunc,
    parse_symbol,
)
from .pencil import (
    LinearForm,
    PencilError,
    char_form,
    degeneracy_locus,
    discriminant_eps,
    fmt_point,
    is_smooth_pencil,
    normalize_point,
    quadric_at,
    restrict,
    split_tangent_section,
    star_clauses,
    star_subschemes,
    tangent_form,
    vertex_of,
)
from .picard import GaloisImage, PicVector, fixed_mod2_quotient, fixed_sublattice, galois_image
from .squares import AtomBasis
from .symbols import (
    QuaternionSymbol,
    RewriteStep,
    build_algebra,
    conjugate_symbol,
    specialize,
    tame_residue,
    verify_simplification,
)

SCHEMA_VERSION = "dp4brauer.report/1"
COMPUTED, CHECK, CITED = "computed", "check", "cited"


class StageError(RuntimeError):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage}: {type(cause).__name__}: {cause}")


@dataclass
class Claim:
    id: str
    value: object
    operation: str
    kind: str = COMPUTED
    note: str = ""

    def as_dict(self):
        d = {"id": self.id, "value": self.value,
             "provenance": {"operation": self.operation, "kind": self.kind}}
        if self.note:
            d["provenance"]["note"] = self.note
        return d


@dataclass
class Stage:
    name: str
    claims: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    skipped: bool = False

    def add(self, id, value, operation, kind=COMPUTED, note=""):
        self.claims.append(Claim(id, value, operation, kind, note))

    def get(self, id):
        return next(c.value for c in self.claims if c.id == id)


@dataclass
class AnalysisReport:
    source: str
    field: str
    stages: list = field(default_factory=list)
    data: dict = field(default_factory=dict)   # live objects, not serialized

    @property
    def checks(self):
        return [(f"{s.name}.{c.id}", c.value) for s in self.stages for c in s.claims
                if c.kind == CHECK]

    @property
    def ok(self) -> bool:
        return all(v is True for _, v in self.checks)

    def stage(self, name) -> Stage:
        return next(s for s in self.stages if s.name == name)

    def to_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "source": self.source,
            "field": self.field,
            "ok": self.ok,
            "stages": [
                {"stage": s.name, "skipped": s.skipped, "notes": list(s.notes),
                 "claims": [c.as_dict() for c in s.claims]}
                for s in self.stages
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        out = [f"analysis of {self.source} over {self.field}"]
        for s in self.stages:
            out.append("")
            out.append(f"== {s.name} ==" + (" (skipped)" if s.skipped else ""))
            for n in s.notes:
                out.append(f"  note: {n}")
            for c in s.claims:
                tag = {COMPUTED: "", CHECK: "[check] ", CITED: "[cited] "}[c.kind]
                text = _text_value(c.value)
                sep = "" if text.startswith("\n") else " "
                out.append(f"  {tag}{c.id}:{sep}{text}")
                if c.note:
                    out.append(f"      ({c.note})")
        out.append("")
        out.append("all checks passed" if self.ok else
                   "FAILED checks: " + ", ".join(n for n, v in self.checks if v is not True))
        return "\n".join(out) + "\n"


def _text_value(v):
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, list):
        if v and all(isinstance(x, dict) for x in v):
            return "\n" + "\n".join("      " + ", ".join(f"{k}={x[k]}" for k in x) for x in v)
        return "[" + ", ".join(str(x) for x in v) + "]"
    if isinstance(v, dict):
        return ", ".join(f"{k}={x}" for k, x in v.items())
    return str(v)


def thread_count(threads=None) -> int:
    if threads is None:
        env = os.environ.get("DP4_THREADS", "")
        threads = int(env) if env.strip().isdigit() else 1
    return max(1, int(threads))


# --------------------------------------------------------------------------
# stages

class _Stop(Exception):
    pass


class _Run:
    def __init__(self, report: AnalysisReport, stop_after=None):
        self.report = report
        self.stop_after = stop_after

    @contextmanager
    def stage(self, name):
        st = Stage(name)
        self.report.stages.append(st)
        try:
            yield st
        except (StageError, ValidationError):
            raise
        except Exception as exc:  # every stage failure is reported with its label
            raise StageError(name, exc) from exc
        if name == self.stop_after:
            raise _Stop


def _subset_label(subset, locus):
    return "{" + ",".join(locus[i].label for i in subset) + "}"


def _point_field(T, F):
    return F if T.degree == 1 else T.residue_field


def _match_points(spec: PencilSpec, locus, F):
    """locus index -> (coords, line) for user-supplied smooth points."""
    out = {}
    for entry in spec.points:
        if entry.key.startswith("T"):
            idx = int(entry.key[1:])
            if idx >= len(locus):
                raise ValidationError(f"no locus point {entry.key}", entry.line)
        else:
            key = parse_locus_key(entry.key, spec.field, entry.line)
            idx = next((T.index for T in locus if T.degree == 1
                        and normalize_point(T.coords) == key), None)
            if idx is None:
                raise ValidationError(f"{entry.key} is not a degree-1 locus point", entry.line)
        T = locus[idx]
        pf = _point_field(T, F)
        if T.degree == 2 and F.has_ext:
            raise ValidationError("points at degree-2 locus points need the base analysis field",
                                  entry.line)
        coords = parse_point(entry.coords, pf, entry.line)
        if len(coords) != 5:
            raise ValidationError("a point of P^4 has 5 coordinates", entry.line)
        out[idx] = (coords, entry.line)
    return out


STAGES = ("pencil", "locus", "star", "galois", "h1", "cocycles", "algebra", "trace",
          "residues", "verdict")


def analyze(spec: PencilSpec, which: str | None = None, threads=None,
            stop_after: str | None = None) -> AnalysisReport:
    """Run the chain over the selected field ('k' or 'L'), optionally stopping early."""
    if stop_after is not None and stop_after not in STAGES:
        raise ValueError(f"unknown stage {stop_after!r}")
    F = spec.analysis_field(which)
    report = AnalysisReport(spec.source, str(F))
    try:
        _analyze(spec, F, report, _Run(report, stop_after), threads)
    except _Stop:
        pass
    return report


def _analyze(spec, F, report, run, threads):
    k = spec.field
    data = report.data
    A, A2 = spec.Q, spec.Q2
    nthreads = thread_count(threads)

    with run.stage("pencil") as st:
        f = char_form(A, A2)
        smooth = is_smooth_pencil(f)
        st.add("char_form", str(f), "char_form")
        st.add("smooth", smooth, "is_smooth_pencil", CHECK)
        data["char_form"] = f
        if not smooth:
            raise PencilError("the pencil is not smooth (characteristic form has a repeated factor)")

    with run.stage("locus") as st:
        locus = degeneracy_locus(f)
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            quadrics = list(pool.map(lambda T: quadric_at(T, A, A2), locus))
            vertices = list(pool.map(vertex_of, quadrics))
        basis = AtomBasis(k)
        # atom registration stays on this thread
        eps = [discriminant_eps(Q, basis=basis, T=T) for Q, T in zip(quadrics, locus)]
        epsF = eps if F == k else [e.in_field(F) for e in eps]
        rows = []
        for T, Q, v, e, eF in zip(locus, quadrics, vertices, eps, epsF):
            row = {"point": T.label, "coords": str(T), "degree": T.degree,
                   "vertex": fmt_point(v), "eps": str(e)}
            if F != k:
                row["eps_F"] = str(eF)
            rows.append(row)
        st.add("points", rows, "degeneracy_locus, quadric_at, vertex_of, discriminant_eps")
        st.add("total_degree", sum(T.degree for T in locus), "degeneracy_locus")
        st.add("atoms", [basis.atom_str(i) for i in basis.live()], "refine")
        data.update(locus=locus, quadrics=quadrics, eps=eps, eps_F=epsF, basis=basis)

    with run.stage("star") as st:
        subsets = star_subschemes(locus, epsF, F)
        st.add("subschemes", [_subset_label(s, locus) for s in subsets], "star_subschemes")
        recheck = all(all(star_clauses(s, locus, epsF, F).values()) for s in subsets)
        st.add("clauses_recheck", recheck, "star_clauses", CHECK)
        data["subsets"] = subsets

    with run.stage("galois") as st:
        G = galois_image(locus, epsF, F)
        st.add("order", G.order, "galois_image")
        st.add("elements", [str(g) for g in G.elements], "galois_image")
        st.add("fixed_sublattice", [str(v) for v in fixed_sublattice(G)], "fixed_sublattice")
        st.add("fixed_mod2_quotient", [str(v) for v in fixed_mod2_quotient(G)], "fixed_mod2_quotient")
        data["G"] = G

    with run.stage("h1") as st:
        two = h1_two_torsion(G)
        full = h1_full(G)
        st.add("two_torsion", str(two), "h1_two_torsion")
        st.add("full", str(full), "h1_full")
        for j, alpha in enumerate(two.generators):
            st.add(f"two_torsion_generator_{j}", _cocycle_dict(alpha), "h1_two_torsion")
        cyc = _cyclic_route(G, locus, epsF, F, subsets)
        orders = [two.order, full.order]
        if cyc is not None:
            group, how = cyc
            st.add("cyclic", str(group), "h1_cyclic", note=how)
            st.add("cyclic_representatives", [str(PicVector(r)) for r in group.representatives],
                   "h1_cyclic")
            orders.append(group.order)
        else:
            st.notes.append("cyclic route not applicable: image is not cyclic and no (*) subscheme")
        st.add("routes_agree", len(set(orders)) == 1, "h1_two_torsion, h1_full, h1_cyclic", CHECK)
        st.add("two_torsion_matches_full", two.order == 2 ** full.two_rank,
               "h1_two_torsion, h1_full", CHECK)
        data.update(h1_two=two, h1_full=full, h1_cyclic=cyc)
        if F.has_ext:
            Gk = galois_image(locus, eps, k)
            twok = h1_two_torsion(Gk)
            st.add("base_field_two_torsion", str(twok), "h1_two_torsion")
            if twok.generators:
                res = [restriction_map(Gk, G, a) for a in twok.generators]
                st.add("restriction_nontrivial", [not r.trivial for r in res], "restriction_map")
                st.add("restriction_isomorphism",
                       twok.order == two.order and all(not r.trivial for r in res)
                       and len(res) == 1, "restriction_map",
                       note="single generator carried to a nontrivial class of a group of equal order")
            data.update(G_k=Gk, h1_two_k=twok)

    with run.stage("cocycles") as st:
        cocycles = []
        if not subsets:
            st.skipped = True
            st.notes.append("no (*) subscheme")
        for s in subsets:
            sc = subscheme_cocycle(s, epsF[s[0]], G, G.classes, locus, epsF, F)
            lab = _subset_label(s, locus)
            st.add(f"{lab}.divisor", str(sc.divisor), "subscheme_cocycle")
            st.add(f"{lab}.trivial", sc.trivial, "subscheme_cocycle")
            st.add(f"{lab}.witnesses", sc.witnesses, "subscheme_cocycle")
            st.add(f"{lab}.three_tests_agree", sc.consistent, "subscheme_cocycle", CHECK)
            cocycles.append(sc)
        data["cocycles"] = cocycles

    algebra = None
    with run.stage("algebra") as st:
        declared_over_ext = spec.extension is not None and not F.has_ext
        points = {} if declared_over_ext else _match_points(spec, locus, F)
        usable = [s for s in subsets if all(i in points for i in s)]
        if not subsets:
            st.skipped = True
            st.notes.append("no (*) subscheme, so no generating algebra")
        elif declared_over_ext and spec.points:
            st.skipped = True
            st.notes.append("smooth points are declared over the extension field; "
                            "analyse with the extension to build the algebra")
        elif not usable or spec.l is None:
            st.skipped = True
            st.notes.append("no smooth points supplied for a (*) subscheme "
                            "(points and a linear form l are needed to build the algebra)")
        else:
            s = usable[0]
            forms = {}
            for i in s:
                T = locus[i]
                coords, line = points[i]
                Q = quadrics[i]
                Q = Q.lift(_point_field(T, F)) if Q.field != _point_field(T, F) else Q
                lt = tangent_form(Q, coords)
                forms[i] = lt
                st.add(f"{T.label}.point", fmt_point(coords), "parse_point")
                st.add(f"{T.label}.tangent_form", str(lt), "tangent_form")
                sec = split_tangent_section(Q, coords, epsF[i].in_field(lt.field))
                S, free = restrict(Q.lift(lt.field) if Q.field != lt.field else Q, lt)
                st.add(f"{T.label}.section", _section_text(sec), "split_tangent_section")
                st.add(f"{T.label}.section_product", sec.quadratic_check(S, free),
                       "split_tangent_section", CHECK)
            l = LinearForm(_linear_coeffs(parse_ratfunc(spec.l[0], F, spec.l[1]), spec.l[1]), F)
            algebra = build_algebra(s, forms, l, epsF[s[0]], F, locus=locus, eps_all=epsF)
            st.add("subscheme", _subset_label(s, locus), "star_subschemes")
            st.add("l", str(l), "parse")
            st.add("symbol", str(algebra), "build_algebra")
        data["algebra"] = algebra

    final = None
    with run.stage("trace") as st:
        if not spec.certificates:
            st.skipped = True
            st.notes.append("no certificate chain supplied")
        elif algebra is None:
            st.skipped = True
            st.notes.append("certificates need the generating algebra")
        else:
            start = algebra + conjugate_symbol(algebra) if F.has_ext else algebra
            steps = [_step(c, F) for c in spec.certificates]
            rel = {"Q": XPoly.from_quadric(A), "Q2": XPoly.from_quadric(A2)}
            ver = verify_simplification(start, steps, rel)
            st.add("start", str(start), "build_algebra, conjugate_symbol",
                   note="A - sigma(A), written additively mod 2" if F.has_ext else "")
            st.add("steps", [{"step": t.index, "rule": t.rule,
                              "witnesses": ", ".join(f"{a}={b}" for a, b in t.witnesses.items()),
                              "after": t.after} for t in ver.trace], "verify_simplification")
            st.add("final", str(ver.final), "verify_simplification")
            st.add("accepted", True, "verify_simplification", CHECK)
            final = ver.final
            data["verification"] = ver


    with run.stage("residues") as st:
        residues = []
        if final is None or not spec.residues:
            st.skipped = True
            st.notes.append("residues need a verified constant symbol and [residues] entries")
        else:
            for chain, line in spec.residues:
                r, fld = residue_chain(final, chain, line)
                st.add(" -> ".join(chain), {"class": str(r), "trivial": r.trivial,
                                            "residue_field": str(fld)}, "specialize, tame_residue")
                residues.append((chain, r))
        data["residues"] = residues

    with run.stage("verdict") as st:
        st.add("h1", str(full), "h1_full, h1_two_torsion, h1_cyclic")
        if F.has_ext and "h1_two_k" in data:
            st.add("h1_base_field", str(data["h1_two_k"]), "h1_two_torsion")
        if final is not None:
            st.add("algebra_difference", str(final), "verify_simplification")
        ram = [r for _, r in data.get("residues", []) if not r.trivial]
        if final is not None and ram:
            st.add("Br X / Br k trivial", True, "none", CITED,
                   note="quantifies over all of Br L and is not machine-checked; "
                        "supporting evidence: the residue table above")


def _cyclic_route(G: GaloisImage, locus, eps, F, subsets):
    """H^1 by the cyclic formula, when the image or a (*) quotient is cyclic."""
    if G.order <= 2 or _cyclic_generator(G) is not None:
        gen = _cyclic_generator(G)
        return h1_cyclic(gen), f"image is cyclic, generated by {gen}"
    if not subsets:
        return None
    s = subsets[0]
    sc = subscheme_cocycle(s, eps[s[0]], G, G.classes, locus, eps, F)
    inside = GaloisImage.from_elements(sc.inside)
    sigma = next(g for g in G.elements if g not in set(sc.inside))
    M = fixed_sublattice(inside)
    return (h1_cyclic(sigma, M),
            f"quotient by the stabilizer of the (*) field of {_subset_label(s, locus)}, sigma = {sigma}")


def _cyclic_generator(G: GaloisImage):
    from .picard import IDENTITY, closure
    if G.order == 1:
        return IDENTITY
    for g in G.elements:
        if len(closure([g])) == G.order:
            return g
    return None


def _cocycle_dict(alpha):
    return {str(g): str(PicVector(v)) for g, v in alpha.items()}


def _section_text(sec):
    return (f"{sec.d1}*(({sec.l1})^2 - ({sec.radicand})*({sec.l2})^2)"
            + ("" if sec.forms is None else f" = {sec.d1}*({sec.forms[0]})*({sec.forms[1]})"))


def _linear_coeffs(r, line):
    if not r.den.is_constant() or r.num.degree() != 1:
        raise ValidationError("l must be a nonzero linear form", line)
    c = r.den.constant_value()
    coeffs = [r.num.field.zero] * 5
    for m, v in r.num.terms():
        if sum(m) != 1:
            raise ValidationError("l must be homogeneous linear", line)
        coeffs[m.index(1)] = v / c
    return coeffs


def _step(c, F) -> RewriteStep:
    wit = {}
    for name, text in c.witnesses.items():
        if name == "Q":
            wit[name] = text.strip()
        else:
            wit[name] = parse_ratfunc(text, F, c.line)
    step = RewriteStep(c.rule, parse_symbol(c.after, F, c.line), wit, line=c.line)
    return step


def residue_chain(symbol: QuaternionSymbol, chain, line=None):
    """Specialize along all but the last uniformizer, then take the residue at the last."""
    cur = symbol
    for u in chain[:-1]:
        v = Valuation.at(cur.field, parse_field_element(u, cur.field, line))
        cur = specialize(cur, v)
    v = Valuation.at(cur.field, parse_field_element(chain[-1], cur.field, line))
    return tame_residue(cur, v), v.residue_field
