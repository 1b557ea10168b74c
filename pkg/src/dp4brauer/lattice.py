"""Exact integer and GF(2) linear algebra on small dense matrices (lists of lists)."""
from __future__ import annotations

from fractions import Fraction
from itertools import product


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(A, ncols=None):
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*A)]


def matmul(A, B):
    Bt = transpose(B, len(B[0]) if B else 0)
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def matvec(A, v):
    return [sum(a * b for a, b in zip(row, v)) for row in A]


def xgcd(a, b):
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        x, y, g = -x, -y, -g
    return x, y, g


# --------------------------------------------------------------------------
# integer matrices

def row_echelon(A, ncols):
    """Integer row echelon form (Hermite-style, reduced above pivots).

    Returns the nonzero rows. Row operations are unimodular, so the row
    lattice and the right kernel are preserved.
    """
    rows = [list(r) for r in A if any(r)]
    out = []
    for j in range(ncols):
        live = [r for r in rows if r[j]]
        if not live:
            continue
        rest = [r for r in rows if not r[j]]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[j]))
            pivot = live[0]
            reduced = [pivot]
            for r in live[1:]:
                q = r[j] // pivot[j]
                r = [x - q * y for x, y in zip(r, pivot)]
                if r[j]:
                    reduced.append(r)
                elif any(r):
                    rest.append(r)
            live = reduced
        pivot = live[0]
        if pivot[j] < 0:
            pivot = [-x for x in pivot]
        for k, r in enumerate(out):
            q = r[j] // pivot[j]
            if q:
                out[k] = [x - q * y for x, y in zip(r, pivot)]
        out.append(pivot)
        rows = rest
    return out


def integer_kernel(A, ncols):
    """Basis (list of vectors) of {x in Z^n : A x = 0}; saturated.

    Column operations on A are mirrored on an identity matrix; the columns
    that end up zero give the kernel, and the transform is unimodular.
    """
    E = row_echelon(A, ncols)
    # column-reduce E while tracking the transform V (E V stays column-equivalent)
    cols = [[E[i][j] for i in range(len(E))] for j in range(ncols)]
    V = identity(ncols)
    pairs = list(zip(cols, V))
    kernel = []
    work = pairs
    for i in range(len(E)):
        live = [(c, v) for c, v in work if c[i]]
        rest = [(c, v) for c, v in work if not c[i]]
        while len(live) > 1:
            live.sort(key=lambda cv: abs(cv[0][i]))
            pc, pv = live[0]
            reduced = [live[0]]
            for c, v in live[1:]:
                q = c[i] // pc[i]
                c = [x - q * y for x, y in zip(c, pc)]
                v = [x - q * y for x, y in zip(v, pv)]
                if c[i]:
                    reduced.append((c, v))
                else:
                    rest.append((c, v))
            live = reduced
        work = rest
    for c, v in work:
        if not any(c):
            kernel.append(v)
    return hermite_basis(kernel, ncols)


def hermite_basis(vectors, ncols):
    """Canonical basis of the lattice spanned by ``vectors`` (row HNF)."""
    return row_echelon(vectors, ncols)


def solve_rational(B, z):
    """Solve sum_k y_k B[k] = z over Q; B is a list of basis vectors. None if no solution."""
    n = len(B)
    if n == 0:
        return [] if not any(z) else None
    m = len(z)
    # augmented system: columns are the basis vectors
    M = [[Fraction(B[k][i]) for k in range(n)] + [Fraction(z[i])] for i in range(m)]
    piv_cols = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if M[i][c]), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(m):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        piv_cols.append(c)
        r += 1
    if any(M[i][n] for i in range(r, m)):
        return None
    y = [Fraction(0)] * n
    for i, c in enumerate(piv_cols):
        y[c] = M[i][n]
    return y


def coordinates(B, z):
    """Integer coordinates of z in the basis B (list of vectors), or None."""
    y = solve_rational(B, z)
    if y is None or any(x.denominator != 1 for x in y):
        return None
    return [int(x) for x in y]


def smith_normal_form(A, nrows, ncols):
    """Return (D, U, V, Uinv) with U A V = D diagonal and D[i][i] | D[i+1][i+1].

    U and V are unimodular; Uinv = U^-1 is kept for changing bases in the codomain.
    """
    D = [list(r) for r in A] if nrows else []
    U = identity(nrows)
    Uinv = identity(nrows)
    V = identity(ncols)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]
        for r in Uinv:
            r[i], r[j] = r[j], r[i]

    def swap_cols(i, j):
        for r in D:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def row_combo(i, j, a, b, c, d):
        # (row_i, row_j) <- (a row_i + b row_j, c row_i + d row_j), ad - bc = 1
        for M in (D, U):
            ri, rj = M[i], M[j]
            M[i] = [a * x + b * y for x, y in zip(ri, rj)]
            M[j] = [c * x + d * y for x, y in zip(ri, rj)]
        # inverse acts on columns of Uinv: cols (i, j) <- (d col_i - c col_j, -b col_i + a col_j)
        for r in Uinv:
            x, y = r[i], r[j]
            r[i], r[j] = d * x - c * y, -b * x + a * y

    def col_combo(i, j, a, b, c, d):
        for M in (D, V):
            for r in M:
                x, y = r[i], r[j]
                r[i], r[j] = a * x + b * y, c * x + d * y

    t = 0
    while t < min(nrows, ncols):
        # choose the smallest nonzero entry in the trailing block as pivot
        best = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                if D[i][j] and (best is None or abs(D[i][j]) < abs(D[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            changed = False
            for i in range(t + 1, nrows):
                if D[i][t]:
                    a, b = D[t][t], D[i][t]
                    if b % a == 0:
                        row_combo(t, i, 1, 0, -(b // a), 1)
                    else:
                        x, y, g = xgcd(a, b)
                        row_combo(t, i, x, y, -b // g, a // g)
                    changed = True
            for j in range(t + 1, ncols):
                if D[t][j]:
                    a, b = D[t][t], D[t][j]
                    if b % a == 0:
                        col_combo(t, j, 1, 0, -(b // a), 1)
                    else:
                        x, y, g = xgcd(a, b)
                        col_combo(t, j, x, y, -b // g, a // g)
                    changed = True
            if changed:
                continue
            # divisibility: pivot must divide the whole trailing block
            bad = next(((i, j) for i in range(t + 1, nrows) for j in range(t + 1, ncols)
                        if D[i][j] % D[t][t]), None)
            if bad is None:
                break
            row_combo(t, bad[0], 1, 1, 0, 1)
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
            for r in Uinv:
                r[t] = -r[t]
        t += 1
    return D, U, V, Uinv


def invariant_factors(A, nrows, ncols):
    D = smith_normal_form(A, nrows, ncols)[0]
    return [D[i][i] for i in range(min(nrows, ncols)) if D[i][i]]


def solve_integer(A, b, ncols):
    """An integer x with A x = b, or None."""
    nrows = len(A)
    D, U, V, _ = smith_normal_form(A, nrows, ncols)
    c = matvec(U, b)
    y = [0] * ncols
    for i in range(nrows):
        d = D[i][i] if i < ncols else 0
        if d:
            if c[i] % d:
                return None
            y[i] = c[i] // d
        elif c[i]:
            return None
    return matvec(V, y)


# --------------------------------------------------------------------------
# GF(2)

def f2_rref(rows, ncols):
    """Reduced row echelon form over GF(2); returns (rows, pivot columns)."""
    rows = [[x & 1 for x in r] for r in rows]
    out, pivots = [], []
    for j in range(ncols):
        p = next((k for k, r in enumerate(rows) if r[j]), None)
        if p is None:
            continue
        pivot = rows.pop(p)
        rows = [[x ^ y for x, y in zip(r, pivot)] if r[j] else r for r in rows]
        out = [[x ^ y for x, y in zip(r, pivot)] if r[j] else r for r in out]
        out.append(pivot)
        pivots.append(j)
    return out, pivots


def f2_rank(rows, ncols):
    return len(f2_rref(rows, ncols)[0])


def f2_kernel(rows, ncols):
    """Basis of {x in GF(2)^ncols : rows . x = 0}, in reduced form."""
    R, pivots = f2_rref(rows, ncols)
    free = [j for j in range(ncols) if j not in pivots]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for r, p in zip(R, pivots):
            if r[f]:
                v[p] = 1
        basis.append(v)
    return f2_rref(basis, ncols)[0]


def f2_in_span(v, rows, ncols):
    return f2_rank(list(rows) + [v], ncols) == f2_rank(rows, ncols)


def f2_span(rows, ncols):
    """All vectors of the span (for small dimensions)."""
    basis = f2_rref(rows, ncols)[0]
    out = []
    for coeffs in product((0, 1), repeat=len(basis)):
        v = [0] * ncols
        for c, r in zip(coeffs, basis):
            if c:
                v = [x ^ y for x, y in zip(v, r)]
        out.append(v)
    return out


def f2_dot(u, v):
    return sum(x & y for x, y in zip(u, v)) & 1
