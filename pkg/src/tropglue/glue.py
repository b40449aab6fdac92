"""Corrected stratum embeddings, their cocycle, glued frames, and the assembled sheaf."""

from fractions import Fraction

from .cover import build_L, validate_slopes
from .errors import (CocycleFailure, ExponentClash, IndexMismatch,
                     SingularFrame, WellDefinednessFailure)
from .kaneyama import (build_G_matrices, chart_labels, validate_G, validate_H)
from .lattice import matvec, perp_member, right_inverse, transpose, vec_sub
from .monomial import MonomialMatrix, pull_exponents
from .obstruction import (CechCochain, build_nerve, cech_differential,
                          obstruction_cochain)
from .ratmult import ONE, qx, eval_twist
from .base import validate_closed_gluing

__all__ = ["BraneData", "SheafDescriptor", "validate_brane",
           "witness_from_potential", "pullback_matrix", "build_H_matrices",
           "check_H_cocycle", "build_global_frames", "assemble_sheaf"]


def _cone(base, a, b):
    return () if a == b else base.cone_of(a, b)


def _kval(k, x, y):
    return ONE if x == y else k.value((x, y))


def _express(base, a, b, vec, cache):
    """Coordinates in the b-quotient of a functional given on the a-quotient.

    The functional must lie in the image of the pullback along a <= b;
    otherwise it carries no meaning on the b-stratum and we refuse.
    """
    vec = tuple(vec)
    if a == b:
        return vec
    if base.qranks[b] == 0:
        if any(vec):
            raise ExponentClash(f"exponent {vec} on {a} does not descend to {b}")
        return ()
    if (a, b) not in cache:
        p = [list(row) for row in base.projection(a, b)]
        cache[(a, b)] = (p, right_inverse(p))
    p, r = cache[(a, b)]
    out = matvec(transpose(r), vec)
    if matvec(transpose(p), out) != vec:
        raise ExponentClash(f"exponent {vec} on {a} does not descend to {b}")
    return out


class BraneData:
    """Transition scalars, embedding scalars, a splitting cochain, gluing data.

    The heavy identities (component validations and the splitting matching
    the twisting cochain) are checked by validate_brane; the constructor
    only ties the pieces to one cover and one lift poset.
    """

    __slots__ = ("g", "h", "k", "sbar", "cover")

    def __init__(self, g, h, k, sbar):
        if h.cover is not g.cover:
            raise IndexMismatch("transition and embedding families use different covers")
        if sbar.base is not g.cover.base:
            raise IndexMismatch("gluing data lives on a different base complex")
        if k.degree != 1 or k.nerve != build_nerve(g.cover):
            raise IndexMismatch("splitting cochain does not match the lift poset")
        self.g = g
        self.h = h
        self.k = k
        self.sbar = sbar
        self.cover = g.cover


def validate_brane(ms, d):
    """Every violated component identity, with the splitting checked last."""
    if ms.cover is not d.cover:
        raise IndexMismatch("slope table and brane data use different covers")
    report = []
    violations, _ = validate_slopes(ms)
    report.extend(violations)
    report.extend(validate_closed_gluing(ms.base, d.sbar))
    report.extend(validate_G(ms, d.g))
    report.extend(validate_H(ms, d.g, d.h))
    if any(item["severity"] == "error" for item in report):
        return report
    try:
        target = obstruction_cochain(ms, d.sbar)
    except WellDefinednessFailure as err:
        report.append({"kind": "obstruction", "severity": "error", "reason": str(err)})
        return report
    delta = cech_differential(d.k)
    for flag in sorted(target.values):
        got, want = delta.value(flag), target.value(flag)
        if got != want:
            report.append({"kind": "splitting", "severity": "error", "flag": flag,
                           "lhs": got.to_fraction(), "rhs": want.to_fraction()})
    return report


def witness_from_potential(ms, potential):
    """The splitting cochain induced by one character per cell.

    Pairs with the gluing data obtained as the coboundary of the same
    potential: the resulting splitting always matches the twisting cochain.
    """
    cover = ms.cover
    nerve = build_nerve(cover)
    _, corrections = validate_slopes(ms)
    values = {}
    for (x, y) in nerve.chains(1):
        t = tuple(qx(v) for v in potential[cover.cell_of[x]])
        values[(x, y)] = eval_twist(t, corrections[(x, y)])
    return CechCochain(nerve, 1, values)


def pullback_matrix(ms, sbar, cell, g, mm):
    """Entrywise pullback of a matrix along the twisted embedding of g.

    Exponents of mm are read on the quotient of `cell`; entries whose
    exponents do not vanish on the tangent directions of the g-target
    restrict to zero there, the rest pick up the gluing-data character.
    """
    base = ms.base
    t1, t2 = g
    gens = _cone(base, cell, t2)
    twist = sbar.value(t1, t2)
    cache = {}

    def act(i, j, c, e):
        if not perp_member(e, gens):
            return Fraction(0)
        factor = eval_twist(twist, _express(base, cell, t2, e, cache))
        return c * factor.to_fraction()

    return mm.map_entries(act)


def build_H_matrices(ms, d, g):
    """The corrected embedding for a cell pair g, one matrix per chart.

    Rows and columns are the chart labels; each row carries the splitting
    scalar of its restricted lift pair, and the gluing-data character
    rescales each entry by its exponent and by the inverse weight of the
    row branch.
    """
    cover = d.cover
    base = cover.base
    if ms.cover is not cover:
        raise IndexMismatch("slope table and brane data use different covers")
    t1, t2 = g
    if t1 != t2 and (t1, t2) not in base.lt:
        raise IndexMismatch(f"{(t1, t2)} is not a cell containment")
    twist = d.sbar.value(t1, t2)
    cache = {}
    out = {}
    for s in base.maximal_above(t2):
        labels = chart_labels(cover, s)
        fam = d.h.family(t1, t2, s)
        if fam is None:
            raise IndexMismatch(f"no embedding family for {(t1, t2, s)}")
        entries = {}
        for (a, b), c in fam.items():
            xa = cover.restrict(t1, a[0])
            xb = cover.restrict(t1, b[0])
            exp = vec_sub(ms.slope(xa, a[0]), ms.slope(xb, b[0]))
            num = eval_twist(twist, _express(base, t1, t2, exp, cache))
            den = eval_twist(twist, ms.slope(cover.restrict(t2, a[0]), a[0]))
            kk = _kval(d.k, xa, cover.restrict(t2, a[0]))
            coeff = Fraction(c) * (num * kk / den).to_fraction()
            entries[(a, b)] = (coeff, exp)
        out[s] = MonomialMatrix(labels, labels, entries, _cone(base, t1, s),
                                base.qranks[t1])
    return out


def check_H_cocycle(ms, d):
    """Composability of the corrected embeddings along every cell chain.

    Returns one report item per mismatched matrix entry, located by the
    chain of cells, the chart, and the label pair; an empty report means
    the embeddings glue.
    """
    base = ms.base
    built = {}

    def mats(g):
        if g not in built:
            built[g] = build_H_matrices(ms, d, g)
        return built[g]

    report = []
    pairs = sorted(base.lt)
    for (t1, t2) in pairs:
        for (u, t3) in pairs:
            if u != t2:
                continue
            for s in base.maximal_above(t3):
                chart = _cone(base, t1, s)
                first = pullback_matrix(ms, d.sbar, t1, (t2, t3), mats((t1, t2))[s])
                second = pull_exponents(mats((t2, t3))[s], base.projection(t1, t2), chart)
                got = second @ first
                want = mats((t1, t3))[s]
                if got == want:
                    continue
                for a in got.rows:
                    for b in got.cols:
                        le, re = got.entry(a, b), want.entry(a, b)
                        if le != re:
                            report.append({"kind": "cocycle", "severity": "error",
                                           "flag": (t1, t2, t3), "chart": s,
                                           "entry": (a, b), "lhs": le, "rhs": re})
    return report


def build_global_frames(ms, d):
    """Invertible change to the glued frame, per chart and cell below it.

    Keys are (cell, chart); the matrix expands the glued frame in the
    chart frame of the cell's stratum. Compatibility along every vertex
    containment is asserted against the corrected embeddings.
    """
    cover = d.cover
    base = cover.base
    frames = {}
    for s_cell in base.maximal:
        labels = chart_labels(cover, s_cell)
        for tau in base.below(s_cell):
            fam = d.h.family(tau, s_cell, s_cell)
            if fam is None:
                raise IndexMismatch(f"no embedding family for {(tau, s_cell, s_cell)}")
            entries = {}
            for (a, b), c in fam.items():
                xa = cover.restrict(tau, a[0])
                xb = cover.restrict(tau, b[0])
                exp = vec_sub(ms.slope(xa, a[0]), ms.slope(xb, b[0]))
                kk = _kval(d.k, xa, a[0])
                entries[(a, b)] = (Fraction(c) * kk.to_fraction(), exp)
            mat = MonomialMatrix(labels, labels, entries, _cone(base, tau, s_cell),
                                 base.qranks[tau])
            det = mat.det()
            if not det or len(det) != 1:
                raise SingularFrame(f"glued frame on chart {s_cell} over {tau}"
                                    f" has determinant {det}")
            frames[(tau, s_cell)] = mat

    built = {}

    def mats(g):
        if g not in built:
            built[g] = build_H_matrices(ms, d, g)
        return built[g]

    for (tau, s_cell) in sorted(frames):
        for v in base.vertices_of(tau):
            if v == tau:
                continue
            chart = _cone(base, v, s_cell)
            got = pull_exponents(frames[(tau, s_cell)], base.projection(v, tau),
                                 chart) @ mats((v, tau))[s_cell]
            want = pullback_matrix(ms, d.sbar, v, (v, tau), frames[(v, s_cell)])
            if got != want:
                raise CocycleFailure(f"glued frame over {tau} on chart {s_cell} is"
                                     f" incompatible with the embedding from {v}")
    return frames


class SheafDescriptor:
    """Glued transitions between chart frames, anchored at shared vertices.

    Carries everything the downstream reconstruction reads: the rank, the
    ordered frame of every chart, one transition matrix per meeting chart
    pair and shared vertex, per cell the frame weights and the finest
    transition-stable partition, and the closed vertex twist the gluing
    used.
    """

    __slots__ = ("base", "cover", "rank", "frames", "transitions", "weights",
                 "blocks", "sbar")

    def __init__(self, base, cover, rank, frames, transitions, weights, blocks,
                 sbar):
        self.base = base
        self.cover = cover
        self.rank = rank
        self.frames = frames
        self.transitions = transitions
        self.weights = weights
        self.blocks = blocks
        self.sbar = sbar

    def transition(self, s1, s2):
        """The transition for a meeting chart pair at its least shared vertex."""
        anchors = self.transitions[(s1, s2)]
        return anchors[min(anchors)]


def _partition(labels, links):
    parent = {lab: lab for lab in labels}

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for a, b in links:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups = {}
    for lab in labels:
        groups.setdefault(find(lab), []).append(lab)
    return tuple(tuple(sorted(g)) for g in sorted(groups.values()))


def assemble_sheaf(ms, d):
    """Transitions of the glued sheaf through the glued frames.

    Conjugates every stratum transition into the glued frames at each
    shared vertex, checks the triple identity on every vertex-sharing
    chart triple, and packages the result with per-cell weights and
    block structure.
    """
    cover = d.cover
    base = cover.base
    frames = build_global_frames(ms, d)
    gmats = {tau: build_G_matrices(ms, d.g, tau) for tau in base.cells()}

    transitions = {}
    for s1 in base.maximal:
        for s2 in base.maximal:
            mu = base.meet(s1, s2)
            if mu is None:
                continue
            anchors = {}
            for v in base.vertices_of(mu):
                chart = _cone(base, v, mu)
                c1 = frames[(v, s1)].restrict(chart)
                c2 = frames[(v, s2)].restrict(chart)
                t = c1 @ gmats[v][(s1, s2)] @ c2.inverse()
                det = t.det()
                if len(det) != 1 or not any(det.values()):
                    raise SingularFrame(f"transition {(s1, s2)} at {v} has"
                                        f" determinant {det}")
                if s1 == s2 and t != MonomialMatrix.identity(
                        t.rows, chart, base.qranks[v]):
                    raise CocycleFailure(f"self transition of {s1} at {v} is not"
                                         f" the identity")
                anchors[v] = t
            transitions[(s1, s2)] = anchors

    for s1 in base.maximal:
        for s2 in base.maximal:
            if s2 == s1 or base.meet(s1, s2) is None:
                continue
            for s3 in base.maximal:
                if s3 == s2 or base.meet(s2, s3) is None:
                    continue
                mu = base.meet(base.meet(s1, s2), s3)
                if mu is None:
                    continue
                v = min(base.vertices_of(mu))
                chart = _cone(base, v, mu)
                got = (transitions[(s1, s2)][v].restrict(chart)
                       @ transitions[(s2, s3)][v].restrict(chart))
                want = transitions[(s1, s3)][v].restrict(chart)
                if got != want:
                    raise CocycleFailure(f"transition triple {(s1, s2, s3)} fails"
                                         f" at {v}")

    weights = {}
    blocks = {}
    for tau in base.cells():
        table = {}
        labels = []
        for s_cell in base.maximal_above(tau):
            for lab in chart_labels(cover, s_cell):
                labels.append(lab)
                table[lab] = ms.slope(cover.restrict(tau, lab[0]), lab[0])
        links = [pair for mm in gmats[tau].values() for pair in mm.entries]
        weights[tau] = table
        blocks[tau] = _partition(labels, links)

    return SheafDescriptor(base, cover, cover.degree(),
                           {s: chart_labels(cover, s) for s in base.maximal},
                           transitions, weights, blocks, d.sbar)
