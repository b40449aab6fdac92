"""Sparse matrices with single-monomial entries over a chart cone."""

from fractions import Fraction
from itertools import permutations

from .errors import ExponentClash, IndexMismatch, SingularFrame, WellDefinednessFailure
from .lattice import dot, vec_add, vec_sub

__all__ = ["MonomialMatrix", "pull_exponents"]


def _coeff(c):
    if isinstance(c, int):
        c = Fraction(c)
    if not isinstance(c, Fraction):
        raise IndexMismatch(f"coefficient {c!r} is not rational")
    return c


class MonomialMatrix:
    """A matrix whose entries are c·z^e, regular on a fixed chart cone.

    Entries are stored sparsely; an absent key is a structural zero. Every
    stored exponent must pair nonnegatively with the chart generators, which
    is the regularity the support conditions grant. Products collapse the
    middle index by exponent cancellation; middle terms with distinct total
    exponents certify inconsistent input and raise instead of merging.
    """

    __slots__ = ("rows", "cols", "entries", "chart", "exp_len")

    def __init__(self, rows, cols, entries, chart, exp_len):
        self.rows = tuple(rows)
        self.cols = tuple(cols)
        self.chart = tuple(tuple(g) for g in chart)
        self.exp_len = exp_len
        if len(set(self.rows)) != len(self.rows) or len(set(self.cols)) != len(self.cols):
            raise IndexMismatch("duplicate row or column labels")
        for g in self.chart:
            if len(g) != exp_len:
                raise IndexMismatch("chart generator length differs from exponent length")
        rowset, colset = set(self.rows), set(self.cols)
        clean = {}
        for (i, j), (c, e) in entries.items():
            if i not in rowset or j not in colset:
                raise IndexMismatch(f"entry label {(i, j)} outside the frame")
            c = _coeff(c)
            e = tuple(e)
            if len(e) != exp_len:
                raise IndexMismatch(f"exponent {e} has wrong length at {(i, j)}")
            if c == 0:
                continue
            if any(dot(e, g) < 0 for g in self.chart):
                raise WellDefinednessFailure(
                    f"entry {(i, j)} has exponent {e} outside the chart dual cone")
            clean[(i, j)] = (c, e)
        self.entries = clean

    @classmethod
    def identity(cls, labels, chart, exp_len):
        zero = (0,) * exp_len
        return cls(labels, labels, {(a, a): (Fraction(1), zero) for a in labels},
                   chart, exp_len)

    @classmethod
    def block_diag(cls, blocks):
        if not blocks:
            raise IndexMismatch("no blocks to sum")
        chart, exp_len = blocks[0].chart, blocks[0].exp_len
        rows, cols, entries = [], [], {}
        for b in blocks:
            if b.chart != chart or b.exp_len != exp_len:
                raise IndexMismatch("blocks live on different charts")
            rows.extend(b.rows)
            cols.extend(b.cols)
            entries.update(b.entries)
        return cls(rows, cols, entries, chart, exp_len)

    def entry(self, i, j):
        return self.entries.get((i, j))

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise IndexMismatch("inner labels do not match")
        if self.chart != other.chart or self.exp_len != other.exp_len:
            raise IndexMismatch("factors live on different charts")
        entries = {}
        for i in self.rows:
            for k in other.cols:
                terms = {}
                for j in self.cols:
                    a = self.entries.get((i, j))
                    b = other.entries.get((j, k))
                    if a is None or b is None:
                        continue
                    e = vec_add(a[1], b[1])
                    terms[e] = terms.get(e, Fraction(0)) + a[0] * b[0]
                if len(terms) > 1:
                    raise ExponentClash(
                        f"entry {(i, k)} mixes exponents {sorted(terms)}")
                for e, c in terms.items():
                    if c != 0:
                        entries[(i, k)] = (c, e)
        return MonomialMatrix(self.rows, other.cols, entries, self.chart, self.exp_len)

    def restrict(self, chart):
        """Drop entries that stop being regular on a smaller chart."""
        chart = tuple(tuple(g) for g in chart)
        kept = {key: (c, e) for key, (c, e) in self.entries.items()
                if all(dot(e, g) >= 0 for g in chart)}
        return MonomialMatrix(self.rows, self.cols, kept, chart, self.exp_len)

    def map_entries(self, fn):
        """Rescale coefficients by fn(row, col, coeff, exp); zero results drop."""
        entries = {}
        for (i, j), (c, e) in self.entries.items():
            c2 = fn(i, j, c, e)
            if c2 != 0:
                entries[(i, j)] = (_coeff(c2), e)
        return MonomialMatrix(self.rows, self.cols, entries, self.chart, self.exp_len)

    def det(self):
        """Determinant as a map from total exponents to coefficients."""
        if len(self.rows) != len(self.cols):
            raise IndexMismatch("determinant of a non-square matrix")
        out = {}
        n = len(self.rows)
        for perm in permutations(range(n)):
            coeff = Fraction(1)
            exp = (0,) * self.exp_len
            ok = True
            for i in range(n):
                ent = self.entries.get((self.rows[i], self.cols[perm[i]]))
                if ent is None:
                    ok = False
                    break
                coeff *= ent[0]
                exp = vec_add(exp, ent[1])
            if not ok:
                continue
            inversions = sum(1 for a in range(n) for b in range(a + 1, n)
                             if perm[a] > perm[b])
            out[exp] = out.get(exp, Fraction(0)) + (-coeff if inversions % 2 else coeff)
        return {e: c for e, c in out.items() if c != 0}

    def constant_det(self):
        """The determinant when it is a nonzero constant, else None."""
        d = self.det()
        zero = (0,) * self.exp_len
        if set(d) == {zero}:
            return d[zero]
        return None

    def inverse(self):
        d = self.det()
        if not d:
            raise SingularFrame("matrix has zero determinant")
        if len(d) > 1:
            raise ExponentClash(f"determinant mixes exponents {sorted(d)}")
        ((det_exp, det_c),) = d.items()
        n = len(self.rows)
        entries = {}
        for i in range(n):
            for j in range(n):
                sub_rows = [r for k, r in enumerate(self.rows) if k != i]
                sub_cols = [c for k, c in enumerate(self.cols) if k != j]
                kept = {(a, b): v for (a, b), v in self.entries.items()
                        if a in sub_rows and b in sub_cols}
                minor = MonomialMatrix(sub_rows, sub_cols, kept, self.chart,
                                       self.exp_len).det()
                if not minor:
                    continue
                if len(minor) > 1:
                    raise ExponentClash(
                        f"cofactor {(i, j)} mixes exponents {sorted(minor)}")
                ((m_exp, m_c),) = minor.items()
                c = m_c / det_c if (i + j) % 2 == 0 else -m_c / det_c
                entries[(self.cols[j], self.rows[i])] = (c, vec_sub(m_exp, det_exp))
        return MonomialMatrix(self.cols, self.rows, entries, self.chart, self.exp_len)

    def __eq__(self, other):
        return (isinstance(other, MonomialMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.chart == other.chart
                and self.exp_len == other.exp_len and self.entries == other.entries)

    def __repr__(self):
        body = ", ".join(f"{k}: {c}*z^{e}" for k, (c, e) in sorted(self.entries.items(),
                                                                   key=repr))
        return f"MonomialMatrix({len(self.rows)}x{len(self.cols)}, {{{body}}})"


def pull_exponents(mm, p, chart):
    """Reindex exponents along a quotient projection onto a finer lattice."""
    ncols = len(p[0]) if p else (len(chart[0]) if chart else 0)
    entries = {}
    for (i, j), (c, e) in mm.entries.items():
        pulled = tuple(sum(e[k] * p[k][t] for k in range(len(e))) for t in range(ncols))
        entries[(i, j)] = (c, pulled)
    return MonomialMatrix(mm.rows, mm.cols, entries, chart, ncols)
