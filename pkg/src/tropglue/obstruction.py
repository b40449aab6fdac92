"""Cech cochains on the lift poset and the gluability obstruction.

The open cover indexed by lifts has nonempty intersections exactly on
comparable families, so its nerve is the order complex of the lift poset.
Cochains take values in the multiplicative group of nonzero rationals; the
degree-2 obstruction cochain of a slope table against closed gluing data is
a coboundary precisely when transition multipliers exist.
"""

from .cover import MultiSection, build_L
from .errors import IndexMismatch, NotClosed, WellDefinednessFailure
from .ratmult import ONE, eval_twist, qx, solve_mult

__all__ = ["Nerve", "CechCochain", "build_nerve", "obstruction_cochain",
           "cech_differential", "solve_coboundary", "obstruction_hom_check",
           "representative_shift_check"]


class Nerve:
    """The order complex of a poset: simplices are flags of strictly nested names."""

    __slots__ = ("names", "lt")

    def __init__(self, names, lt):
        self.names = tuple(sorted(names))
        self.lt = frozenset(lt)
        for (x, y) in self.lt:
            if x not in self.names or y not in self.names or x == y:
                raise IndexMismatch(f"bad order pair {(x, y)}")

    def chains(self, d):
        """All flags of d+1 strictly increasing names, lexicographically ordered."""
        level = [(x,) for x in self.names]
        for _ in range(d):
            level = [ch + (y,) for ch in level for y in self.names
                     if (ch[-1], y) in self.lt]
        return tuple(level)

    def __eq__(self, other):
        return (isinstance(other, Nerve) and self.names == other.names
                and self.lt == other.lt)


def build_nerve(cover):
    poset = build_L(cover)
    return Nerve(poset.names, poset.lt)


class CechCochain:
    """One nonzero rational per flag of a fixed length of the nerve."""

    __slots__ = ("nerve", "degree", "values")

    def __init__(self, nerve, degree, values):
        self.nerve = nerve
        self.degree = degree
        flags = set(nerve.chains(degree))
        self.values = {flag: qx(v) for flag, v in values.items()}
        if set(self.values) != flags:
            missing = flags - set(self.values)
            extra = set(self.values) - flags
            raise IndexMismatch(f"cochain support mismatch (missing {sorted(missing)[:3]},"
                                f" extra {sorted(extra)[:3]})")

    @classmethod
    def ones(cls, nerve, degree):
        return cls(nerve, degree, {flag: ONE for flag in nerve.chains(degree)})

    def value(self, flag):
        try:
            return self.values[flag]
        except KeyError:
            raise IndexMismatch(f"{flag} is not a flag of degree {self.degree}") from None

    def __mul__(self, other):
        if self.nerve != other.nerve or self.degree != other.degree:
            raise IndexMismatch("cochains live on different complexes")
        return CechCochain(self.nerve, self.degree,
                           {flag: v * other.values[flag] for flag, v in self.values.items()})

    def inv(self):
        return CechCochain(self.nerve, self.degree,
                           {flag: v.inv() for flag, v in self.values.items()})

    def is_one(self):
        return all(v.is_one() for v in self.values.values())

    def __eq__(self, other):
        return (isinstance(other, CechCochain) and self.nerve == other.nerve
                and self.degree == other.degree and self.values == other.values)

    def __repr__(self):
        body = ", ".join(f"{flag}: {v.to_fraction()}" for flag, v in sorted(self.values.items()))
        return f"CechCochain({self.degree}, {{{body}}})"


def cech_differential(c):
    """The alternating multiplicative differential, one degree up."""
    out = {}
    for flag in c.nerve.chains(c.degree + 1):
        v = ONE
        for i in range(len(flag)):
            face = c.values[flag[:i] + flag[i + 1:]]
            v = v * (face if i % 2 == 0 else face.inv())
        out[flag] = v
    return CechCochain(c.nerve, c.degree + 1, out)


def obstruction_cochain(ms, sbar):
    """The degree-2 obstruction of a slope table against closed gluing data.

    Each flag value is the telescoped gluing-data evaluation at the slopes of
    its upper lifts, computed from a maximal lift above the flag; agreement
    over every admissible maximal lift is asserted, so a disagreement
    certifies invalid input rather than a nontrivial class.
    """
    cover = ms.cover
    if sbar.base is not ms.base:
        raise IndexMismatch("gluing data belongs to a different base complex")
    nerve = build_nerve(cover)
    values = {}
    for flag in nerve.chains(2):
        x1, x2, x3 = flag
        t1 = cover.cell_of[x1]
        t2 = cover.cell_of[x2]
        t3 = cover.cell_of[x3]
        seen = None
        for s in cover.maximal_lifts_above(x3):
            v = (eval_twist(sbar.value(t1, t2), ms.slope(x2, s))
                 * eval_twist(sbar.value(t2, t3), ms.slope(x3, s))
                 * eval_twist(sbar.value(t1, t3), ms.slope(x3, s)).inv())
            if seen is None:
                seen = (s, v)
            elif v != seen[1]:
                raise WellDefinednessFailure(
                    f"flag {flag}: chart {seen[0]} gives {seen[1].to_fraction()}"
                    f" but chart {s} gives {v.to_fraction()}")
        values[flag] = seen[1]
    return CechCochain(nerve, 2, values)


def solve_coboundary(c):
    """A cochain one degree down whose differential is c, or None.

    Existence over the nonzero rationals is decided exactly: the prime
    exponents give one integer linear system per occurring prime and the
    signs one system over GF(2).
    """
    if c.degree < 1:
        raise IndexMismatch("degree-0 cochains have no potential")
    if not cech_differential(c).is_one():
        raise NotClosed(f"cochain of degree {c.degree} is not closed")
    faces = c.nerve.chains(c.degree - 1)
    index = {flag: i for i, flag in enumerate(faces)}
    rows, rhs = [], []
    for flag, v in sorted(c.values.items()):
        row = [0] * len(index)
        for i in range(len(flag)):
            row[index[flag[:i] + flag[i + 1:]]] += 1 if i % 2 == 0 else -1
        rows.append(row)
        rhs.append(v)
    sol = solve_mult(rows, rhs, len(index))
    if sol is None:
        return None
    out = CechCochain(c.nerve, c.degree - 1, {flag: sol[i] for flag, i in index.items()})
    assert cech_differential(out) == c
    return out


def obstruction_hom_check(ms, sbar1, sbar2):
    """Whether the obstruction of a product is the product of obstructions."""
    product = obstruction_cochain(ms, sbar1 * sbar2)
    return product == obstruction_cochain(ms, sbar1) * obstruction_cochain(ms, sbar2)


def representative_shift_check(ms, sbar, f):
    """Whether shifting local representatives moves the obstruction by an exact coboundary.

    f maps lifts to integral functionals on their cell's quotient lattice;
    missing lifts shift by zero. The predicted potential evaluates the gluing
    data of each flag's cell pair at the shift of the upper lift.
    """
    cover = ms.cover
    shifted = {}
    for (x, s), m in ms.slopes.items():
        d = f.get(x)
        if d is None:
            shifted[(x, s)] = m
            continue
        if len(d) != len(m):
            raise IndexMismatch(f"shift at {x} has length {len(d)}, expected {len(m)}")
        shifted[(x, s)] = tuple(a + b for a, b in zip(m, d))
    old = obstruction_cochain(ms, sbar)
    new = obstruction_cochain(MultiSection(ms.base, cover, shifted), sbar)
    kvals = {}
    for (x, y) in old.nerve.chains(1):
        d = f.get(y)
        kvals[(x, y)] = ONE if d is None else eval_twist(
            sbar.value(cover.cell_of[x], cover.cell_of[y]), d)
    k = CechCochain(old.nerve, 1, kvals)
    return new * old.inv() == cech_differential(k)
