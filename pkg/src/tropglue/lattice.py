"""Exact integer-lattice arithmetic.

Matrices are lists of rows of ints, vectors are tuples of ints. Everything is
exact; no floats appear anywhere in this module.
"""

from fractions import Fraction

from .errors import DimensionMismatch, NotFullDimensional, OriginNotInterior, TorsionQuotient


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def matmul(a, b):
    if not a or not b:
        return []
    if len(a[0]) != len(b):
        raise DimensionMismatch(f"cannot multiply {len(a)}x{len(a[0])} by {len(b)}x{len(b[0])}")
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(a, v):
    if a and len(a[0]) != len(v):
        raise DimensionMismatch(f"matrix has {len(a[0])} columns, vector has {len(v)}")
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def transpose(a):
    return [list(col) for col in zip(*a)] if a else []


def vec_sub(u, v):
    if len(u) != len(v):
        raise DimensionMismatch("vector lengths differ")
    return tuple(x - y for x, y in zip(u, v))


def vec_add(u, v):
    if len(u) != len(v):
        raise DimensionMismatch("vector lengths differ")
    return tuple(x + y for x, y in zip(u, v))


def dot(u, v):
    if len(u) != len(v):
        raise DimensionMismatch("vector lengths differ")
    return sum(x * y for x, y in zip(u, v))


def det(a):
    """Determinant of a square integer matrix by fraction-free elimination."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(row) for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            pivot = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if pivot is None:
                return 0
            m[k], m[pivot] = m[pivot], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[-1][-1]


def smith_decompose(a):
    """Smith normal form with transforms.

    Args:
        a: integer matrix (list of rows), possibly non-square.

    Returns:
        (u, d, v) with u*a*v = d, d diagonal with nonnegative entries
        satisfying d[0] | d[1] | ..., and u, v unimodular.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    d = [[int(x) for x in row] for row in a]
    u = identity(m)
    v = identity(n)

    def add_row(i, j, q):
        d[i] = [x + q * y for x, y in zip(d[i], d[j])]
        u[i] = [x + q * y for x, y in zip(u[i], u[j])]

    def add_col(i, j, q):
        for row in d:
            row[i] += q * row[j]
        for row in v:
            row[i] += q * row[j]

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in d:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    t = 0
    while True:
        entries = [(abs(d[i][j]), i, j) for i in range(t, m) for j in range(t, n) if d[i][j]]
        if not entries:
            break
        _, pi, pj = min(entries)
        swap_rows(t, pi)
        swap_cols(t, pj)
        while True:
            dirty = False
            for i in range(t + 1, m):
                if d[i][t]:
                    q = d[i][t] // d[t][t]
                    add_row(i, t, -q)
                    if d[i][t]:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, n):
                if d[t][j]:
                    q = d[t][j] // d[t][t]
                    add_col(j, t, -q)
                    if d[t][j]:
                        swap_cols(t, j)
                        dirty = True
            if dirty:
                continue
            bad = next(
                ((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                 if d[i][j] % d[t][t]),
                None,
            )
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
        t += 1

    assert matmul(matmul(u, [list(row) for row in a]), v) == d
    return u, d, v


def invert_unimodular(a):
    """Exact inverse of a unimodular integer matrix, returned over the integers."""
    inv = fraction_inverse(a)
    out = []
    for row in inv:
        assert all(x.denominator == 1 for x in row), "matrix is not unimodular"
        out.append([int(x) for x in row])
    return out


def fraction_inverse(a):
    """Gauss-Jordan inverse over the rationals; raises on singular input."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(a)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if m[i][col]), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        m[col], m[pivot] = m[pivot], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for i in range(n):
            if i != col and m[i][col]:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[col])]
    return [row[n:] for row in m]


def solve_int(a, b):
    """One integer solution x of a*x = b, or None if no integral solution exists."""
    u, d, v = smith_decompose(a)
    ub = matvec(u, tuple(b))
    n = len(a[0]) if a else 0
    y = [0] * n
    for i, val in enumerate(ub):
        di = d[i][i] if i < min(len(d), n) else 0
        if di == 0:
            if val != 0:
                return None
        else:
            if val % di:
                return None
            y[i] = val // di
    return matvec(v, tuple(y))


class Quotient:
    """A torsion-free quotient lattice Z^n / span(gens).

    proj is a (n-k) x n integer matrix, section an n x (n-k) one, with
    proj * section = Id and proj * g = 0 for every generator g.
    """

    __slots__ = ("ambient_rank", "rank", "proj", "section")

    def __init__(self, ambient_rank, rank, proj, section):
        self.ambient_rank = ambient_rank
        self.rank = rank
        self.proj = proj
        self.section = section

    def project(self, v):
        return matvec(self.proj, v)

    def lift(self, q):
        return matvec(self.section, q)

    def copull(self, m):
        """Pull a functional on the quotient back to the ambient lattice (proj transpose)."""
        return matvec(transpose(self.proj), m)

    def copush(self, m):
        """Push an ambient functional to the quotient along the section (section transpose)."""
        return matvec(transpose(self.section), m)


def quotient_lattice(gens, ambient_rank, saturate=False):
    """Quotient of Z^ambient_rank by the span of gens, with a fixed projection/section pair.

    With saturate=False, raises TorsionQuotient when the quotient has torsion
    (some invariant factor exceeds 1); with saturate=True the quotient is
    taken by the saturation of the span instead, which is always torsion-free.
    """
    for g in gens:
        if len(g) != ambient_rank:
            raise DimensionMismatch(f"generator {g} not of length {ambient_rank}")
    if not gens:
        return Quotient(ambient_rank, ambient_rank, identity(ambient_rank), identity(ambient_rank))
    cols = transpose([list(g) for g in gens])
    u, d, _ = smith_decompose(cols)
    k = 0
    for i in range(min(len(d), len(d[0]) if d else 0)):
        if d[i][i] == 0:
            break
        if d[i][i] != 1 and not saturate:
            raise TorsionQuotient(f"invariant factor {d[i][i]} in quotient by {gens}")
        k += 1
    rank = ambient_rank - k
    proj = [u[i] for i in range(k, ambient_rank)]
    uinv = invert_unimodular(u)
    section = [[uinv[i][j] for j in range(k, ambient_rank)] for i in range(ambient_rank)]
    q = Quotient(ambient_rank, rank, proj, section)
    assert matmul(proj, section) == identity(rank)
    assert all(q.project(g) == (0,) * rank for g in gens)
    return q


def right_inverse(p, ncols=None):
    """An integer right inverse of a surjective integer matrix.

    ncols is only consulted for empty matrices, whose column count cannot be
    recovered from the row list.
    """
    if not p:
        return [[] for _ in range(ncols or 0)]
    u, d, v = smith_decompose(p)
    rows, cols = len(p), len(p[0])
    if any(d[i][i] != 1 for i in range(rows)):
        raise DimensionMismatch(f"matrix with invariant factors {[d[i][i] for i in range(rows)]} is not surjective")
    dplus = [[1 if i == j else 0 for j in range(rows)] for i in range(cols)]
    out = matmul(matmul(v, dplus), u)
    assert matmul(p, out) == identity(rows)
    return out


def dual_cone_member(m, gens):
    """Whether the functional m pairs nonnegatively with every generator of the cone."""
    return all(dot(m, g) >= 0 for g in gens)


def perp_member(m, gens):
    """Whether the functional m annihilates every generator of the cone."""
    return all(dot(m, g) == 0 for g in gens)


def primitive(v):
    """The primitive integer vector on the ray of v (v itself if zero)."""
    from math import gcd
    g = 0
    for x in v:
        g = gcd(g, abs(x))
    if g <= 1:
        return tuple(v)
    return tuple(x // g for x in v)


def _solve_unique_rational(cols, x):
    """Rational solution of cols * lam = x for independent columns, or None."""
    m = [[Fraction(c[i]) for c in cols] + [Fraction(x[i])] for i in range(len(x))]
    row = 0
    for col in range(len(cols)):
        pivot = next((i for i in range(row, len(m)) if m[i][col]), None)
        if pivot is None:
            return None
        m[row], m[pivot] = m[pivot], m[row]
        pv = m[row][col]
        m[row] = [val / pv for val in m[row]]
        for i in range(len(m)):
            if i != row and m[i][col]:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[row])]
        row += 1
    if any(m[i][-1] for i in range(row, len(m))):
        return None
    return [m[i][-1] for i in range(len(cols))]


def cone_contains(gens, x):
    """Whether x lies in the cone generated by gens, decided exactly.

    Every member lies in a simplicial subcone spanned by independent
    generators, so checking those subsets is complete.
    """
    from itertools import combinations
    x = tuple(x)
    if all(v == 0 for v in x):
        return True
    gens = [tuple(g) for g in gens if any(g)]
    if not gens:
        return False
    r = _rank(gens)
    for size in range(1, r + 1):
        for subset in combinations(gens, size):
            if _rank(subset) != size:
                continue
            lam = _solve_unique_rational(subset, x)
            if lam is not None and all(v >= 0 for v in lam):
                return True
    return False


def cone_is_salient(gens):
    """Whether the cone generated by gens contains no line.

    A line exists iff some nontrivial nonnegative relation holds among the
    generators; minimal relations are circuits, so subsets of size up to
    rank+1 with a one-dimensional kernel decide the question.
    """
    from itertools import combinations
    gens = [tuple(g) for g in gens if any(g)]
    r = _rank(gens)
    for size in range(2, r + 2):
        for subset in combinations(gens, size):
            if _rank(subset) != size - 1:
                continue
            kern = _kernel_basis([list(row) for row in zip(*subset)])
            if len(kern) != 1:
                continue
            k = kern[0]
            if all(v >= 0 for v in k) or all(v <= 0 for v in k):
                return False
    return True


def _rank(vectors):
    if not vectors:
        return 0
    _, d, _ = smith_decompose([list(v) for v in vectors])
    return sum(1 for i in range(min(len(d), len(d[0]))) if d[i][i])


def _kernel_basis(rows):
    """Integer basis of the kernel of the matrix with the given rows."""
    if not rows:
        return []
    n = len(rows[0])
    u, d, v = smith_decompose([list(r) for r in rows])
    k = sum(1 for i in range(min(len(d), n)) if d[i][i])
    return [tuple(v[i][j] for i in range(n)) for j in range(k, n)]


class FaceLattice:
    """Proper faces of a full-dimensional lattice polytope with interior origin.

    faces: tuples of vertex indices, sorted by (dim, indices).
    facet_normals: for each facet, the primitive outward normal u and the
    offset c > 0 with <u, x> = c on the facet and <u, x> <= c on the polytope.
    """

    __slots__ = ("vertices", "faces", "dims", "facet_normals")

    def __init__(self, vertices, faces, dims, facet_normals):
        self.vertices = vertices
        self.faces = faces
        self.dims = dims
        self.facet_normals = facet_normals

    def facets(self):
        top = max(self.dims.values())
        return [f for f in self.faces if self.dims[f] == top]


def face_lattice(vertices):
    """Proper faces of conv(vertices), which must be full-dimensional with 0 interior.

    Args:
        vertices: list of integer points (the polytope's vertex set).

    Returns:
        a FaceLattice.
    """
    verts = [tuple(int(x) for x in v) for v in vertices]
    if not verts:
        raise NotFullDimensional("no vertices")
    n = len(verts[0])
    diffs = [vec_sub(v, verts[0]) for v in verts[1:]]
    if _rank(diffs) != n:
        raise NotFullDimensional(f"vertices span a {_rank(diffs)}-dimensional affine space in rank {n}")

    from itertools import combinations
    facet_sets = {}
    for subset in combinations(range(len(verts)), n):
        base = verts[subset[0]]
        rows = [vec_sub(verts[i], base) for i in subset[1:]]
        kern = _kernel_basis(rows)
        if len(kern) != 1:
            continue
        normal = primitive(kern[0])
        c = dot(normal, base)
        vals = [dot(normal, v) for v in verts]
        if all(x <= c for x in vals):
            pass
        elif all(x >= c for x in vals):
            normal = tuple(-x for x in normal)
            c = -c
            vals = [-x for x in vals]
        else:
            continue
        eq = tuple(i for i, x in enumerate(vals) if x == c)
        facet_sets[eq] = (normal, c)
    for _, c in facet_sets.values():
        if c <= 0:
            raise OriginNotInterior("a supporting hyperplane does not separate the origin strictly")

    current = set(facet_sets)
    while True:
        fresh = set()
        for a in current:
            for b in current:
                meet = tuple(sorted(set(a) & set(b)))
                if meet and meet not in current and meet not in fresh:
                    fresh.add(meet)
        if not fresh:
            break
        current |= fresh

    dims = {}
    for f in current:
        pts = [verts[i] for i in f]
        dims[f] = _rank([vec_sub(p, pts[0]) for p in pts[1:]])
    faces = sorted(current, key=lambda f: (dims[f], f))
    return FaceLattice(verts, faces, dims, facet_sets)
