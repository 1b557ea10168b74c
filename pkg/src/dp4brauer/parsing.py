"""
Reader for the line-oriented ``.pencil`` input format.

    [field]
    constants = cyclotomic          # or gaussian
    params = a, b, c
    extension = a                   # optional: analysis field K(sqrt a)

    [quadric.Q]                     # five comma-separated rows, x^T A x
    a, 0, 0, 0, 0
    ...

    [quadric.Q2]
    diag = b*c, 1, 1, a, 0          # shorthand for a diagonal matrix

    [points]
    [1:0] = [I : 0 : sqrt(a) : 0 : 0]
    l = x0 + x1

    [certificates]
    bilinearity => (b*c, ...)
    killSquare(w = 1/(x0 + x1)) => (b*c, b)

    [residues]
    sqrt(a)
    sqrt(a) -> c                    # specialize at sqrt(a), then residue at c

Expressions are plain infix with ``^`` or ``**`` for powers, ``I`` (or
``i``) for a square root of -1, and ``sqrt(d)`` for the declared extension
generator only.
"""
from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field
from pathlib import Path

from .field import CYCLOTOMIC, GAUSSIAN, FieldDescriptor, FieldElement, I
from .forms import XVARS, RatFunc, XPoly

SECTIONS = ("field", "quadric.Q", "quadric.Q2", "points", "certificates", "residues")
RESERVED = {"i", "I", "sqrt", *XVARS}


class ParseError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class ValidationError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


# --------------------------------------------------------------------------
# expressions

_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)


def _prepare(text: str) -> str:
    return text.strip().replace("^", "**")


def _parse_expr(text: str, line=None) -> ast.AST:
    try:
        return ast.parse(_prepare(text), mode="eval").body
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text.strip()!r}: {exc.msg}", line) from None


def _int_exponent(node, line):
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return node.value
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return -_int_exponent(node.operand, line)
    raise ParseError("exponents must be integer literals", line)


class _Evaluator:
    """Evaluate an expression tree into FieldElements, or RatFuncs when x0..x4 are allowed."""

    def __init__(self, F: FieldDescriptor, xvars: bool, line=None):
        self.F = F
        self.xvars = xvars
        self.line = line

    def leaf(self, value):
        return RatFunc.coerce(value, self.F) if self.xvars else value

    def __call__(self, node):
        F, line = self.F, self.line
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, int):
                raise ParseError(f"unsupported literal {node.value!r}", line)
            return self.leaf(F(node.value))
        if isinstance(node, ast.Name):
            name = node.id
            if name in ("i", "I"):
                return self.leaf(F(F.frac(I)))
            if name in F.params:
                return self.leaf(F.gen(name))
            if name in XVARS:
                if not self.xvars:
                    raise ParseError(f"coordinate {name} not allowed here", line)
                return RatFunc(XPoly.var(F, XVARS.index(name)))
            raise ParseError(f"unknown name {name!r}", line)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = self(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
            if isinstance(node.op, ast.Pow):
                base, n = self(node.left), _int_exponent(node.right, line)
                if n < 0 and not self.xvars:
                    return base.inverse() ** (-n)
                return base ** n
            x, y = self(node.left), self(node.right)
            try:
                if isinstance(node.op, ast.Add):
                    return x + y
                if isinstance(node.op, ast.Sub):
                    return x - y
                if isinstance(node.op, ast.Mult):
                    return x * y
                return x / y
            except ZeroDivisionError:
                raise ParseError("division by zero", line) from None
            except ArithmeticError as exc:
                raise ParseError(str(exc), line) from None
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "sqrt":
            if len(node.args) != 1 or node.keywords:
                raise ParseError("sqrt takes one argument", line)
            if not F.has_ext:
                raise ParseError("sqrt(...) used but no extension is declared", line)
            arg = _Evaluator(F.base, False, line)(node.args[0])
            if arg.lo != F.ext:
                raise ParseError(f"sqrt({arg}) is not the declared extension generator", line)
            return self.leaf(F.sqrt_ext)
        raise ParseError(f"unsupported syntax: {ast.dump(node)[:60]}", line)


def parse_field_element(text: str, F: FieldDescriptor, line=None) -> FieldElement:
    """Parse an infix expression in the parameters, I, and sqrt(d)."""
    return _Evaluator(F, False, line)(_parse_expr(text, line))


def parse_ratfunc(text: str, F: FieldDescriptor, line=None) -> RatFunc:
    """Parse a rational function in x0..x4 with coefficients in F."""
    out = _Evaluator(F, True, line)(_parse_expr(text, line))
    return RatFunc.coerce(out, F)


def parse_symbol(text: str, F: FieldDescriptor, line=None):
    """'(u, f) + (v, g)' or '0' as a QuaternionSymbol."""
    from .symbols import QuaternionSymbol, SymbolError

    node = _parse_expr(text, line)
    pairs = []

    def walk(n):
        if isinstance(n, ast.BinOp) and isinstance(n.op, ast.Add):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, ast.Tuple) and len(n.elts) == 2:
            ev = _Evaluator(F, True, line)
            pairs.append(tuple(RatFunc.coerce(ev(e), F) for e in n.elts))
        elif isinstance(n, ast.Constant) and n.value == 0:
            pass
        else:
            raise ParseError("a symbol is a sum of pairs (u, f)", line)

    walk(node)
    try:
        return QuaternionSymbol(pairs, F)
    except SymbolError as exc:
        raise ParseError(str(exc), line) from None


def _split_top(text: str, sep: str):
    """Split on ``sep`` outside parentheses and brackets."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def parse_point(text: str, F: FieldDescriptor, line=None) -> list:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ParseError(f"expected a projective point [x0 : ... ], got {text!r}", line)
    return [parse_field_element(c, F, line) for c in _split_top(text[1:-1], ":")]


# --------------------------------------------------------------------------
# file format

@dataclass
class PointEntry:
    key: str            # "[1:0]" or "T0"
    coords: str
    line: int


@dataclass
class CertificateEntry:
    rule: str
    witnesses: dict     # name -> (text, line)
    after: str
    line: int


@dataclass
class PencilSpec:
    field: FieldDescriptor
    Q: object
    Q2: object
    extension: object = None          # base fraction-field element d, or None
    extension_label: str | None = None
    points: list = field(default_factory=list)
    l: tuple | None = None            # (text, line)
    certificates: list = field(default_factory=list)
    residues: list = field(default_factory=list)   # (chain of uniformizer texts, line)
    source: str = ""

    def analysis_field(self, which: str | None = None) -> FieldDescriptor:
        """'k' for the base field, 'L' for the declared extension (default when present)."""
        if which is None:
            which = "L" if self.extension is not None else "k"
        if which == "k":
            return self.field
        if which == "L":
            if self.extension is None:
                raise ValidationError("--field L requested but no extension is declared")
            return self.field.extend(self.extension, self.extension_label)
        raise ValidationError(f"unknown field selector {which!r}")


_CERT_RE = re.compile(r"^\s*([A-Za-z]+)\s*(\((.*)\))?\s*=>\s*(.+)$")


def _kv(line_text, lineno):
    if "=" not in line_text:
        raise ParseError(f"expected 'key = value', got {line_text.strip()!r}", lineno)
    k, v = line_text.split("=", 1)
    return k.strip(), v.strip()


def _matrix(rows, F, name):
    from .pencil import QuadricMatrix

    if len(rows) == 1 and rows[0][0].startswith("diag"):
        text, lineno = rows[0]
        _, v = _kv(text, lineno)
        entries = [parse_field_element(x, F, lineno) for x in _split_top(v, ",")]
        if len(entries) != 5:
            raise ValidationError(f"{name}: diag needs 5 entries, got {len(entries)}", lineno)
        return QuadricMatrix.diagonal(entries, F)
    if len(rows) != 5:
        line = rows[-1][1] if rows else None
        raise ValidationError(f"{name}: expected 5 rows, got {len(rows)}", line)
    M = []
    for text, lineno in rows:
        entries = [parse_field_element(x, F, lineno) for x in _split_top(text, ",")]
        if len(entries) != 5:
            raise ValidationError(f"{name}: expected 5 entries per row, got {len(entries)}", lineno)
        M.append(entries)
    for i in range(5):
        for j in range(i + 1, 5):
            if M[i][j] != M[j][i]:
                raise ValidationError(f"{name} is not symmetric at ({i},{j})", rows[i][1])
    if all(x.is_zero() for r in M for x in r):
        raise ValidationError(f"{name} is identically zero", rows[0][1])
    return QuadricMatrix(M, F)


def parse_pencil_text(text: str, source: str = "<string>") -> PencilSpec:
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        m = re.fullmatch(r"\s*\[([A-Za-z0-9_.]+)\]\s*", body)
        if m and m.group(1) in SECTIONS:
            current = m.group(1)
            if current in sections:
                raise ParseError(f"duplicate section [{current}]", lineno)
            sections[current] = []
            continue
        if m:
            raise ParseError(f"unknown section [{m.group(1)}]", lineno)
        if current is None:
            raise ParseError("content before the first section header", lineno)
        sections[current].append((body.strip(), lineno))

    for required in ("field", "quadric.Q", "quadric.Q2"):
        if required not in sections:
            raise ParseError(f"missing section [{required}]")

    opts = {}
    for body, lineno in sections["field"]:
        k, v = _kv(body, lineno)
        if k not in ("constants", "params", "extension", "extension_label"):
            raise ParseError(f"unknown [field] key {k!r}", lineno)
        opts[k] = (v, lineno)
    constants = opts.get("constants", (CYCLOTOMIC, None))
    if constants[0] not in (CYCLOTOMIC, GAUSSIAN):
        raise ValidationError(f"constants must be {CYCLOTOMIC} or {GAUSSIAN}", constants[1])
    params_text, params_line = opts.get("params", ("", None))
    params = tuple(p.strip() for p in params_text.split(",") if p.strip())
    for p in params:
        if not p.isidentifier() or p in RESERVED:
            raise ValidationError(f"invalid parameter name {p!r}", params_line)
    if len(set(params)) != len(params):
        raise ValidationError("repeated parameter name", params_line)
    F = FieldDescriptor(params, constants[0])

    ext = label = None
    if "extension" in opts:
        etext, eline = opts["extension"]
        d = parse_field_element(etext, F, eline)
        if d.is_zero():
            raise ValidationError("extension generator is zero", eline)
        try:
            F.extend(d)
        except ValueError as exc:
            raise ValidationError(str(exc), eline) from None
        ext = d.lo
        label = opts.get("extension_label", (f"sqrt({etext})", None))[0]

    spec = PencilSpec(F, _matrix(sections["quadric.Q"], F, "Q"),
                      _matrix(sections["quadric.Q2"], F, "Q2"), ext, label, source=source)

    for body, lineno in sections.get("points", []):
        k, v = _kv(body, lineno)
        if k == "l":
            spec.l = (v, lineno)
            continue
        if not (re.fullmatch(r"T\d+", k) or (k.startswith("[") and k.endswith("]"))):
            raise ParseError(f"point key must be [lam:mu] or T<n>, got {k!r}", lineno)
        _parse_expr(v.strip()[1:-1].replace(":", ","), lineno)
        spec.points.append(PointEntry(k, v, lineno))

    from .symbols import RULES
    for body, lineno in sections.get("certificates", []):
        m = _CERT_RE.match(body)
        if not m:
            raise ParseError("expected 'rule(name = value, ...) => symbol'", lineno)
        rule, args, after = m.group(1), m.group(3), m.group(4)
        if rule not in RULES:
            raise ParseError(f"unknown rewrite rule {rule!r}", lineno)
        witnesses = {}
        for part in _split_top(args, ",") if args and args.strip() else []:
            k, v = _kv(part, lineno)
            witnesses[k] = v
        _parse_expr(after, lineno)
        spec.certificates.append(CertificateEntry(rule, witnesses, after, lineno))

    for body, lineno in sections.get("residues", []):
        chain = [p.strip() for p in body.split("->")]
        for p in chain:
            _parse_expr(p, lineno)
        spec.residues.append((chain, lineno))
    return spec


def parse_pencil(path) -> PencilSpec:
    """Read and validate a .pencil file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {p}: {exc.strerror}") from None
    return parse_pencil_text(text, source=p.name)


def parse_locus_key(key: str, F: FieldDescriptor, line=None):
    """Normalized coordinates of a point key '[lam:mu]'."""
    from .pencil import normalize_point

    return normalize_point(parse_point(key, F, line))
