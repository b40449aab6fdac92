"""Scalar transition families over a cover: validation, monomial matrices, twists."""

from fractions import Fraction
from itertools import product

from .cover import build_L
from .errors import IndexMismatch, NotACocycle
from .lattice import dual_cone_member, perp_member, vec_sub
from .monomial import MonomialMatrix

__all__ = ["KaneyamaG", "KaneyamaH", "frame_labels", "chart_labels",
           "matched_identity_G", "identity_H", "validate_G", "validate_H",
           "build_G_matrices", "equivariant_weights", "twist_by_local_system"]


def frame_labels(cover, x, sigma):
    """Ordered (lift, copy) labels of the sigma-chart frame above a lift x."""
    out = []
    for s in sorted(cover.fiber(x, sigma)):
        out.extend((s, i) for i in range(cover.mult[s]))
    return tuple(out)


def chart_labels(cover, sigma):
    out = []
    for s in sorted(cover.lifts[sigma]):
        out.extend((s, i) for i in range(cover.mult[s]))
    return tuple(out)


def _normalize(families):
    out = {}
    for key, fam in families.items():
        clean = {}
        for pair, c in fam.items():
            c = Fraction(c)
            if c != 0:
                clean[pair] = c
        out[key] = clean
    return out


def _cone(base, a, b):
    return () if a == b else base.cone_of(a, b)


class KaneyamaG:
    """Per stratum lift and ordered chart pair, a square scalar family.

    Keys are (lift, chart cell, chart cell); values map (row label, column
    label) pairs to nonzero rationals. Diagonal chart pairs may be omitted
    and then read as the identity.
    """

    __slots__ = ("cover", "entries")

    def __init__(self, cover, entries):
        self.cover = cover
        self.entries = _normalize(entries)

    def family(self, t, s1, s2):
        fam = self.entries.get((t, s1, s2))
        if fam is None and s1 == s2:
            return {(a, a): Fraction(1) for a in frame_labels(self.cover, t, s1)}
        return fam


class KaneyamaH:
    """Per cell morphism and chart, a full-rank scalar family.

    Keys are (source cell, target cell, maximal chart cell); identity
    morphisms may be omitted and then read as the identity family.
    """

    __slots__ = ("cover", "entries")

    def __init__(self, cover, entries):
        self.cover = cover
        self.entries = _normalize(entries)

    def family(self, t1, t2, s):
        fam = self.entries.get((t1, t2, s))
        if fam is None and t1 == t2:
            return {(a, a): Fraction(1) for a in chart_labels(self.cover, s)}
        return fam


def matched_identity_G(cover):
    """The positional identity: pair the k-th frame labels of the two charts."""
    base = cover.base
    entries = {}
    for t in cover.all_lifts():
        tau = cover.cell_of[t]
        charts = base.maximal_above(tau)
        labels = {s: frame_labels(cover, t, s) for s in charts}
        for s1 in charts:
            for s2 in charts:
                if s1 == s2:
                    continue
                entries[(t, s1, s2)] = {(a, b): Fraction(1)
                                        for a, b in zip(labels[s1], labels[s2])}
    return KaneyamaG(cover, entries)


def identity_H(cover):
    base = cover.base
    entries = {}
    for (t1, t2) in base.lt:
        for s in base.maximal_above(t2):
            entries[(t1, t2, s)] = {(a, a): Fraction(1)
                                    for a in chart_labels(cover, s)}
    return KaneyamaH(cover, entries)


def g_cell(ms, gd, tau, s1, s2, a, b):
    """The stratum-level scalar: zero without a common lift below both labels."""
    cover = gd.cover
    ta = cover.restrict(tau, a[0])
    if ta != cover.restrict(tau, b[0]):
        return Fraction(0)
    return gd.family(ta, s1, s2).get((a, b), Fraction(0))


def _nonsingular(fam, rows, cols):
    n = len(rows)
    if len(cols) != n:
        return False
    m = [[Fraction(fam.get((a, b), 0)) for b in cols] for a in rows]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            return False
        m[col], m[piv] = m[piv], m[col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            if f:
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return True


def validate_G(ms, gd):
    cover = gd.cover
    base = cover.base
    if ms.cover is not cover:
        raise IndexMismatch("slope table and transition data use different covers")
    expected = set()
    for t in cover.all_lifts():
        tau = cover.cell_of[t]
        for s1 in base.maximal_above(tau):
            for s2 in base.maximal_above(tau):
                if s1 != s2:
                    expected.add((t, s1, s2))
    for (t, s1, s2) in gd.entries:
        if t not in cover.cell_of:
            raise IndexMismatch(f"{t} is not a lift")
        charts = base.maximal_above(cover.cell_of[t])
        if s1 not in charts or s2 not in charts:
            raise IndexMismatch(f"chart pair {(s1, s2)} does not contain the stratum of {t}")
    missing = expected - set(gd.entries)
    if missing:
        raise IndexMismatch(f"missing transition families: {sorted(missing)[:3]}")
    report = []
    for t in sorted(cover.all_lifts()):
        tau = cover.cell_of[t]
        charts = base.maximal_above(tau)
        labels = {s: frame_labels(cover, t, s) for s in charts}
        for s1 in charts:
            for s2 in charts:
                fam = gd.family(t, s1, s2)
                for (a, b) in fam:
                    if a not in labels[s1] or b not in labels[s2]:
                        raise IndexMismatch(f"label pair {(a, b)} outside the {t} frame")
                if s1 == s2:
                    eye = {(a, a): Fraction(1) for a in labels[s1]}
                    if fam != eye:
                        report.append({"kind": "identity", "severity": "error",
                                       "stratum": t, "chart": s1})
                    continue
                gens = _cone(base, tau, base.meet(s1, s2))
                for (a, b), c in sorted(fam.items()):
                    diff = vec_sub(ms.slope(t, a[0]), ms.slope(t, b[0]))
                    if not dual_cone_member(diff, gens):
                        report.append({"kind": "support", "severity": "error",
                                       "stratum": t, "pair": (s1, s2),
                                       "entry": (a, b), "exponent": diff})
                if not _nonsingular(fam, labels[s1], labels[s2]):
                    report.append({"kind": "invertibility", "severity": "error",
                                   "stratum": t, "pair": (s1, s2)})
        for s1, s2, s3 in product(charts, repeat=3):
            f12 = gd.family(t, s1, s2)
            f23 = gd.family(t, s2, s3)
            f13 = gd.family(t, s1, s3)
            for a in labels[s1]:
                for c in labels[s3]:
                    lhs = sum(f12.get((a, b), 0) * f23.get((b, c), 0)
                              for b in labels[s2])
                    rhs = f13.get((a, c), Fraction(0))
                    if lhs != rhs:
                        report.append({"kind": "cocycle", "severity": "error",
                                       "stratum": t, "triple": (s1, s2, s3),
                                       "entry": (a, c), "lhs": lhs, "rhs": rhs})
    return report


def validate_H(ms, gd, hd):
    cover = hd.cover
    base = cover.base
    if gd.cover is not cover or ms.cover is not cover:
        raise IndexMismatch("component data use different covers")
    expected = {(t1, t2, s) for (t1, t2) in base.lt for s in base.maximal_above(t2)}
    for (t1, t2, s) in hd.entries:
        if t1 == t2:
            if t1 not in base.dims or s not in base.maximal_above(t1):
                raise IndexMismatch(f"bad identity family key {(t1, t2, s)}")
            continue
        if (t1, t2) not in base.lt or s not in base.maximal_above(t2):
            raise IndexMismatch(f"bad family key {(t1, t2, s)}")
    missing = expected - set(hd.entries)
    if missing:
        raise IndexMismatch(f"missing families: {sorted(missing)[:3]}")
    labels = {s: chart_labels(cover, s) for s in base.maximal}
    report = []

    def slope_at(t1, label):
        below = cover.restrict(t1, label[0])
        return below, ms.slope(below, label[0])

    for (t1, t2, s) in sorted(hd.entries):
        fam = hd.entries[(t1, t2, s)]
        gens_sigma = _cone(base, t1, s)
        gens_perp = _cone(base, t1, t2)
        for (a, b), c in sorted(fam.items()):
            if a not in labels[s] or b not in labels[s]:
                raise IndexMismatch(f"label pair {(a, b)} outside the {s} chart")
            ra, ma = slope_at(t1, a)
            rb, mb = slope_at(t1, b)
            if ra != rb:
                report.append({"kind": "support", "severity": "error",
                               "morphism": (t1, t2), "chart": s, "entry": (a, b),
                               "reason": "no common lift"})
                continue
            diff = vec_sub(ma, mb)
            if not dual_cone_member(diff, gens_sigma) or not perp_member(diff, gens_perp):
                report.append({"kind": "support", "severity": "error",
                               "morphism": (t1, t2), "chart": s, "entry": (a, b),
                               "exponent": diff})
        if not _nonsingular(fam, labels[s], labels[s]):
            report.append({"kind": "invertibility", "severity": "error",
                           "morphism": (t1, t2), "chart": s})

    for (t1, t2) in sorted(base.lt):
        charts = base.maximal_above(t2)
        gens_perp = _cone(base, t1, t2)
        for s1 in charts:
            for s2 in charts:
                if s1 == s2:
                    continue
                gens = _cone(base, t1, base.meet(s1, s2))
                left_h = hd.family(t1, t2, s1)
                right_h = hd.family(t1, t2, s2)
                for a in labels[s1]:
                    ra, ma = slope_at(t1, a)
                    for c in labels[s2]:
                        rc, mc = slope_at(t1, c)
                        lhs = sum(left_h.get((a, b), 0) * g_cell(ms, gd, t1, s1, s2, b, c)
                                  for b in labels[s1])
                        rhs = sum(g_cell(ms, gd, t2, s1, s2, a, b) * right_h.get((b, c), 0)
                                  for b in labels[s2])
                        if lhs == rhs:
                            continue
                        diff = vec_sub(ma, mc)
                        qualifies = (dual_cone_member(diff, gens)
                                     and perp_member(diff, gens_perp))
                        report.append({"kind": "intertwine",
                                       "severity": "error" if qualifies else "warning",
                                       "morphism": (t1, t2), "charts": (s1, s2),
                                       "entry": (a, c), "lhs": lhs, "rhs": rhs})

    chains = [(t1, t2, t3) for (t1, t2) in base.lt for (u, t3) in base.lt if u == t2]
    for (t1, t2, t3) in sorted(chains):
        gens_perp = _cone(base, t1, t3)
        for s in base.maximal_above(t3):
            gens = _cone(base, t1, s)
            h1 = hd.family(t1, t2, s)
            h2 = hd.family(t2, t3, s)
            h3 = hd.family(t1, t3, s)
            for a in labels[s]:
                ra, ma = slope_at(t1, a)
                for c in labels[s]:
                    rc, mc = slope_at(t1, c)
                    lhs = sum(h2.get((a, b), 0) * h1.get((b, c), 0) for b in labels[s])
                    rhs = h3.get((a, c), Fraction(0))
                    if lhs == rhs:
                        continue
                    diff = vec_sub(ma, mc)
                    qualifies = (dual_cone_member(diff, gens)
                                 and perp_member(diff, gens_perp))
                    report.append({"kind": "composite",
                                   "severity": "error" if qualifies else "warning",
                                   "flag": (t1, t2, t3), "chart": s,
                                   "entry": (a, c), "lhs": lhs, "rhs": rhs})
    return report


def build_G_matrices(ms, gd, tau):
    """Monomial transitions of the tau stratum, one per ordered chart pair."""
    cover = gd.cover
    base = cover.base
    if tau not in base.dims:
        raise IndexMismatch(f"{tau} is not a cell")
    charts = base.maximal_above(tau)
    qr = base.qranks[tau]
    out = {}
    for s1 in charts:
        for s2 in charts:
            rows = chart_labels(cover, s1)
            cols = chart_labels(cover, s2)
            cone = _cone(base, tau, base.meet(s1, s2))
            entries = {}
            for a in rows:
                ta = cover.restrict(tau, a[0])
                for b in cols:
                    if cover.restrict(tau, b[0]) != ta:
                        continue
                    c = gd.family(ta, s1, s2).get((a, b), Fraction(0))
                    if c == 0:
                        continue
                    exp = vec_sub(ms.slope(ta, a[0]), ms.slope(ta, b[0]))
                    entries[(a, b)] = (c, exp)
            out[(s1, s2)] = MonomialMatrix(rows, cols, entries, cone, qr)
    return out


def equivariant_weights(ms, x):
    """The torus weights of the frame above a lift: its stored slopes."""
    cover = ms.cover
    out = {}
    for s in sorted(cover.maximal_lifts_above(x)):
        for i in range(cover.mult[s]):
            out[(s, i)] = ms.slope(x, s)
    return out


def twist_by_local_system(hd, f):
    """Multiply each family by the specialization scalar of its row-side flag."""
    cover = hd.cover
    poset = build_L(cover)
    vals = {}
    for key, v in f.items():
        v = Fraction(v)
        if v == 0:
            raise IndexMismatch(f"specialization at {key} is zero")
        vals[key] = v
    for pair in poset.lt:
        if pair not in vals:
            raise IndexMismatch(f"missing specialization for {pair}")
    for (x, y) in poset.lt:
        for z in poset.names:
            if (y, z) in poset.lt and vals[(x, y)] * vals[(y, z)] != vals[(x, z)]:
                raise NotACocycle(f"chain {(x, y, z)} breaks the specialization cocycle")
    entries = {}
    for (t1, t2, s), fam in hd.entries.items():
        twisted = {}
        for (a, b), c in fam.items():
            if t1 == t2:
                factor = Fraction(1)
            else:
                chain = (cover.restrict(t1, a[0]), cover.restrict(t2, a[0]))
                factor = vals[chain]
            twisted[(a, b)] = c * factor
        entries[(t1, t2, s)] = twisted
    return KaneyamaH(cover, entries)
