"""The multiplicative group of nonzero rationals, and exact linear algebra over it.

A nonzero rational is stored as a sign together with its prime exponent
vector, so that products, powers and equality tests never leave exact
arithmetic. Multiplicative linear systems (products of unknown rationals
matching given rationals) reduce to one integer system per occurring prime
plus one GF(2) system for the signs.

>>> qx(Fraction(4, 9)) * qx(Fraction(3, 2))
QX(2/3)
>>> qx(6).inv()
QX(1/6)
"""

from fractions import Fraction

try:
    from sympy import factorint
except ImportError:  # pragma: no cover
    from sympy.ntheory import factorint

from .lattice import solve_int


class QX:
    """A nonzero rational in multiplicative coordinates."""

    __slots__ = ("sign", "powers")

    def __init__(self, sign, powers):
        assert sign in (1, -1)
        self.sign = sign
        self.powers = {p: e for p, e in powers.items() if e}

    @classmethod
    def from_fraction(cls, f):
        f = Fraction(f)
        if f == 0:
            raise ZeroDivisionError("0 has no multiplicative representation")
        sign = 1 if f > 0 else -1
        powers = dict(factorint(abs(f.numerator)))
        for p, e in factorint(f.denominator).items():
            powers[p] = powers.get(p, 0) - e
        return cls(sign, powers)

    def to_fraction(self):
        num, den = 1, 1
        for p, e in self.powers.items():
            if e > 0:
                num *= p ** e
            else:
                den *= p ** (-e)
        return Fraction(self.sign * num, den)

    def __mul__(self, other):
        powers = dict(self.powers)
        for p, e in other.powers.items():
            powers[p] = powers.get(p, 0) + e
        return QX(self.sign * other.sign, powers)

    def __truediv__(self, other):
        return self * other.inv()

    def inv(self):
        return QX(self.sign, {p: -e for p, e in self.powers.items()})

    def __pow__(self, k):
        if k == 0:
            return ONE
        return QX(self.sign if k % 2 else 1, {p: e * k for p, e in self.powers.items()})

    def is_one(self):
        return self.sign == 1 and not self.powers

    def __eq__(self, other):
        return isinstance(other, QX) and self.sign == other.sign and self.powers == other.powers

    def __hash__(self):
        return hash((self.sign, tuple(sorted(self.powers.items()))))

    def __repr__(self):
        return f"QX({self.to_fraction()})"


ONE = QX(1, {})


def qx(x):
    """Coerce an int, Fraction, fraction string, or QX into a QX."""
    if isinstance(x, QX):
        return x
    if isinstance(x, str):
        return QX.from_fraction(Fraction(x))
    return QX.from_fraction(Fraction(x))


def prod(values):
    out = ONE
    for v in values:
        out = out * v
    return out


def eval_twist(components, functional):
    """Evaluate an element of Q x Q^x (one QX per basis vector) on an integer functional.

    The element is the homomorphism m |-> prod components[i] ** m[i] from the
    dual lattice to the nonzero rationals.
    """
    assert len(components) == len(functional)
    return prod(c ** m for c, m in zip(components, functional))


def _solve_gf2(rows, rhs):
    m = len(rows)
    n = len(rows[0]) if rows else 0
    aug = [[x % 2 for x in row] + [b % 2] for row, b in zip(rows, rhs)]
    pivots = []
    rank = 0
    for col in range(n):
        piv = next((i for i in range(rank, m) if aug[i][col]), None)
        if piv is None:
            continue
        aug[rank], aug[piv] = aug[piv], aug[rank]
        for i in range(m):
            if i != rank and aug[i][col]:
                aug[i] = [x ^ y for x, y in zip(aug[i], aug[rank])]
        pivots.append(col)
        rank += 1
    if any(aug[i][n] for i in range(rank, m)):
        return None
    x = [0] * n
    for r, col in enumerate(pivots):
        x[col] = aug[r][n]
    return x


def solve_mult(rows, rhs, nvars):
    """Solve prod_j x_j ** rows[i][j] = rhs[i] for nonzero rationals x_j.

    Unknowns hit by a unit coefficient are eliminated by exact pivoting
    first; the leftover core goes through a per-prime integer solve plus a
    mod-2 sign solve.

    Args:
        rows: integer coefficient rows, one per equation.
        rhs: one QX per equation.
        nvars: number of unknowns.

    Returns:
        a list of QX solving the system, or None when no rational solution
        exists. Free coordinates are set to 1.
    """
    assert all(len(r) == nvars for r in rows)
    assert len(rows) == len(rhs)
    rows = [list(r) for r in rows]
    rhs = [qx(v) for v in rhs]
    pivots = {}
    used = set()
    while True:
        progress = False
        for ri in range(len(rows)):
            if ri in used:
                continue
            vi = next((j for j, c in enumerate(rows[ri]) if abs(c) == 1 and j not in pivots), None)
            if vi is None:
                continue
            if rows[ri][vi] == -1:
                rows[ri] = [-c for c in rows[ri]]
                rhs[ri] = rhs[ri].inv()
            for rj in range(len(rows)):
                if rj == ri:
                    continue
                k = rows[rj][vi]
                if k:
                    rows[rj] = [a - k * b for a, b in zip(rows[rj], rows[ri])]
                    rhs[rj] = rhs[rj] * rhs[ri] ** (-k)
            pivots[vi] = ri
            used.add(ri)
            progress = True
        if not progress:
            break
    core_vars = [j for j in range(nvars) if j not in pivots]
    core_rows, core_rhs = [], []
    for ri in range(len(rows)):
        if ri in used:
            continue
        core = [rows[ri][j] for j in core_vars]
        if not any(core):
            if not rhs[ri].is_one():
                return None
            continue
        core_rows.append(core)
        core_rhs.append(rhs[ri])
    core_sol = _solve_dense(core_rows, core_rhs, len(core_vars))
    if core_sol is None:
        return None
    out = [ONE] * nvars
    for j, v in zip(core_vars, core_sol):
        out[j] = v
    for vi, ri in pivots.items():
        val = rhs[ri]
        for j, c in enumerate(rows[ri]):
            if j != vi and c:
                val = val * out[j] ** (-c)
        out[vi] = val
    return out


def _solve_dense(rows, rhs, nvars):
    if nvars == 0:
        return [] if all(v.is_one() for v in rhs) else None
    primes = sorted({p for v in rhs for p in v.powers})
    exponents = [[0] * len(rhs) for _ in primes]
    for idx, p in enumerate(primes):
        for i, v in enumerate(rhs):
            exponents[idx][i] = v.powers.get(p, 0)
    solution_powers = [dict() for _ in range(nvars)]
    mat = [list(r) for r in rows]
    for idx, p in enumerate(primes):
        sol = solve_int(mat, exponents[idx]) if rows else ([0] * nvars if not any(exponents[idx]) else None)
        if sol is None:
            return None
        for j, e in enumerate(sol):
            if e:
                solution_powers[j][p] = e
    sign_rhs = [0 if v.sign == 1 else 1 for v in rhs]
    signs = _solve_gf2(mat, sign_rhs) if rows else ([0] * nvars if not any(sign_rhs) else None)
    if signs is None:
        return None
    return [QX(-1 if signs[j] else 1, solution_powers[j]) for j in range(nvars)]
