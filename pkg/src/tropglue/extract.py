"""Recovering a multi-section from a glued sheaf of chart frames.

Assembly turns covering data with gluing scalars into one monomial
transition per meeting chart pair.  This module walks back: it certifies
that the transitions split into weight-equivariant blocks, reads the
blocks as the lifts of a new covering, equips them with slopes and
scalar data that reassemble the descriptor verbatim, and folds the
block lifts onto the source cover.  Restricting an equivariant bundle
over a complete fan to the boundary of its polytope lands in the image
of assembly and lives here too.
"""

from fractions import Fraction

from .base import build_base_from_polytope, trivial_closed
from .cover import (CoveringData, MultiSection, check_covering_morphism,
                    validate_covering, validate_slopes)
from .errors import IndexMismatch, NotEquivariant, WellDefinednessFailure
from .glue import BraneData, _partition, assemble_sheaf
from .kaneyama import KaneyamaG, KaneyamaH, identity_H, validate_G, validate_H
from .lattice import perp_member, vec_sub
from .obstruction import CechCochain, build_nerve, obstruction_cochain, solve_coboundary
from .ratmult import eval_twist

__all__ = ["TropicalStructureCert", "validate_tropical_structure",
           "block_decompose", "associated_multisection", "roundtrip_check",
           "check_covering_morphism_to_source", "descriptor_gauge",
           "restrict_toric_bundle"]


def _cone(base, a, b):
    return () if a == b else base.cone_of(a, b)


def _star_labels(sd, tau):
    out = []
    for s in sd.base.maximal_above(tau):
        out.extend(sd.frames[s])
    return out


def block_decompose(sd, tau):
    """The finest partition of the frame labels over a cell that every
    transition surviving restriction to the cell preserves.

    A transition entry links its two labels when its exponent vanishes on
    the tangent directions of the cell inside the anchor stratum; linking
    is taken over every anchor vertex of the cell and every chart pair
    whose meet contains it.
    """
    base = sd.base
    links = []
    for (s1, s2), anchors in sd.transitions.items():
        mu = base.meet(s1, s2)
        if mu is None or not base.leq(tau, mu):
            continue
        for v in base.vertices_of(tau):
            gens = _cone(base, v, tau)
            for pair, (_, e) in anchors[v].entries.items():
                if perp_member(e, gens):
                    links.append(pair)
    return _partition(_star_labels(sd, tau), links)


class TropicalStructureCert:
    """Witness that a descriptor's transitions are weight-equivariant.

    blocks[tau] is the transition-stable label partition over tau.  For a
    strict cell pair (t1, t2) and a block P over t2, parent[(t1, t2, P)]
    is the single block over t1 containing P and chi[(t1, t2, P)] the
    common difference between pulled-back upper weights and lower ones.
    ranks[(tau, P)] counts the labels P takes from each chart.
    """

    __slots__ = ("blocks", "parent", "chi", "ranks")

    def __init__(self, blocks, parent, chi, ranks):
        self.blocks = blocks
        self.parent = parent
        self.chi = chi
        self.ranks = ranks


def validate_tropical_structure(sd):
    """Certify the block splitting of a descriptor or raise NotEquivariant.

    Every anchored entry must carry exactly the weight difference of its
    labels as exponent, every block must meet each chart of its cell in
    the same number of labels, and restriction must send blocks into
    blocks shifting all weights by one common character.
    """
    base = sd.base
    for (s1, s2), anchors in sd.transitions.items():
        for v, mm in anchors.items():
            for (a, b), (_, e) in mm.entries.items():
                want = vec_sub(sd.weights[v][a], sd.weights[v][b])
                if e != want:
                    raise NotEquivariant(
                        f"transition {(s1, s2)} at {v} carries exponent {e} on"
                        f" {(a, b)} but the weights differ by {want}")
    blocks = {tau: block_decompose(sd, tau) for tau in base.cells()}
    chart_of = {lab: s for s in base.maximal for lab in sd.frames[s]}
    ranks = {}
    for tau in base.cells():
        for P in blocks[tau]:
            counts = {s: 0 for s in base.maximal_above(tau)}
            for lab in P:
                counts[chart_of[lab]] += 1
            if len(set(counts.values())) != 1:
                raise NotEquivariant(
                    f"block {P} over {tau} meets its charts unevenly: {counts}")
            ranks[(tau, P)] = next(iter(counts.values()))
    parent = {}
    chi = {}
    for (t1, t2) in sorted(base.lt):
        block_of = {lab: P for P in blocks[t1] for lab in P}
        p = base.projection(t1, t2)
        q1 = base.qranks[t1]
        for P in blocks[t2]:
            parents = {block_of[lab] for lab in P}
            if len(parents) != 1:
                raise NotEquivariant(
                    f"block {P} over {t2} restricts into {len(parents)} blocks"
                    f" over {t1}")
            shifts = set()
            for lab in P:
                pulled = tuple(sum(w * row[j] for w, row in zip(sd.weights[t2][lab], p))
                               for j in range(q1))
                shifts.add(vec_sub(pulled, sd.weights[t1][lab]))
            if len(shifts) != 1:
                raise NotEquivariant(
                    f"block {P} shifts weights from {t2} to {t1} by more than"
                    f" one character: {sorted(shifts)}")
            parent[(t1, t2, P)] = parents.pop()
            chi[(t1, t2, P)] = shifts.pop()
    return TropicalStructureCert(blocks, parent, chi, ranks)


def _extraction(sd):
    """The block multi-section, gluing data reassembling sd, and the label
    bookkeeping tying extracted names to source labels."""
    cert = validate_tropical_structure(sd)
    base = sd.base
    blocks = cert.blocks
    name = {}
    for tau in base.cells():
        for i, P in enumerate(blocks[tau]):
            name[(tau, P)] = f"{tau}|{i:03d}"
    block_of = {tau: {lab: P for P in blocks[tau] for lab in P}
                for tau in base.cells()}
    lifts = {tau: tuple(name[(tau, P)] for P in blocks[tau]) for tau in base.cells()}
    down = {(t1, t2): {name[(t2, P)]: name[(t1, block_of[t1][P[0]])]
                       for P in blocks[t2]}
            for (t1, t2) in base.lt}
    mult = {name[(tau, P)]: cert.ranks[(tau, P)]
            for tau in base.cells() for P in blocks[tau]}
    cover = CoveringData(base, lifts, down, mult)
    sing = {lab: (name[(s, block_of[s][lab])], 0)
            for s in base.maximal for lab in sd.frames[s]}
    slopes = {}
    for tau in base.cells():
        for P in blocks[tau]:
            for lab in P:
                slopes[(name[(tau, P)], sing[lab][0])] = sd.weights[tau][lab]
    ms = MultiSection(base, cover, slopes)

    fams_g = {}
    for tau in base.cells():
        charts = base.maximal_above(tau)
        if len(charts) < 2:
            continue
        v = min(base.vertices_of(tau))
        gens = _cone(base, v, tau)
        twist = sd.sbar.value(v, tau)
        for P in blocks[tau]:
            members = set(P)
            x = name[(tau, P)]
            for s1 in charts:
                for s2 in charts:
                    if s1 == s2:
                        continue
                    fam = {}
                    for (a, b), (c, e) in sd.transitions[(s1, s2)][v].entries.items():
                        if a in members and b in members and perp_member(e, gens):
                            etau = vec_sub(sd.weights[tau][a], sd.weights[tau][b])
                            fam[(sing[a], sing[b])] = (
                                Fraction(c) * eval_twist(twist, etau).to_fraction())
                    fams_g[(x, s1, s2)] = fam
    g = KaneyamaG(cover, fams_g)

    k = solve_coboundary(obstruction_cochain(ms, sd.sbar))
    if k is None:
        raise WellDefinednessFailure(
            "the block multi-section admits no splitting witness")
    fams_h = {}
    for (t1, t2) in base.lt:
        for s in base.maximal_above(t2):
            fam = {}
            for lab in sd.frames[s]:
                x1 = name[(t1, block_of[t1][lab])]
                x2 = name[(t2, block_of[t2][lab])]
                den = eval_twist(sd.sbar.value(t1, t2), sd.weights[t2][lab])
                fam[(sing[lab], sing[lab])] = (den / k.value((x1, x2))).to_fraction()
            fams_h[(t1, t2, s)] = fam
    d = BraneData(g, KaneyamaH(cover, fams_h), k, sd.sbar)
    return cert, ms, d, name, sing


def associated_multisection(sd):
    """The multi-section whose lifts are the weight-equivariant blocks of a
    descriptor, with gluing data that reassembles the descriptor exactly."""
    _, ms, d, _, _ = _extraction(sd)
    return ms, d


def descriptor_gauge(sd1, sd2, match):
    """One scalar per chart frame element of sd1 rescaling its transitions
    into sd2's under a label correspondence, or None.

    match sends every chart label of sd1 to the corresponding label of
    sd2 over the same chart.  Entry supports and exponents must agree
    exactly; only coefficients may differ, by lambda(col) / lambda(row).
    """
    if sd1.base is not sd2.base:
        raise IndexMismatch("descriptors live over different base complexes")
    base = sd1.base
    edges = []
    for (s1, s2), anchors in sd1.transitions.items():
        if s1 == s2:
            continue
        for v, mm in anchors.items():
            other = sd2.transitions[(s1, s2)][v]
            moved = {(match[a], match[b]): ce for (a, b), ce in mm.entries.items()}
            if set(moved) != set(other.entries):
                return None
            for (a, b), (c1, e1) in mm.entries.items():
                c2, e2 = other.entries[(match[a], match[b])]
                if e1 != e2:
                    return None
                edges.append(((s1, a), (s2, b), Fraction(c2) / Fraction(c1)))
    lam = {}
    adj = {}
    for n1, n2, r in edges:
        adj.setdefault(n1, []).append((n2, r))
        adj.setdefault(n2, []).append((n1, 1 / r))
    for s in base.maximal:
        for lab in sd1.frames[s]:
            root = (s, lab)
            if root in lam:
                continue
            lam[root] = Fraction(1)
            queue = [root]
            while queue:
                node = queue.pop()
                for nxt, r in adj.get(node, ()):
                    if nxt not in lam:
                        lam[nxt] = lam[node] * r
                        queue.append(nxt)
    for n1, n2, r in edges:
        if lam[n2] != lam[n1] * r:
            return None
    return lam


def roundtrip_check(ms, d):
    """Assemble, extract, reassemble, and compare the two descriptors.

    The comparison solves for one scalar per extracted frame element and
    chart; the report records that gauge, whether the transitions already
    agree on the nose, and whether the weights carry over.
    """
    sd = assemble_sheaf(ms, d)
    _, ms2, d2, name, sing = _extraction(sd)
    sd2 = assemble_sheaf(ms2, d2)
    match = {sing[lab]: lab for s in sd.base.maximal for lab in sd.frames[s]}
    gauge = descriptor_gauge(sd2, sd, match)
    equal = all(
        {(match[a], match[b]): ce for (a, b), ce in mm.entries.items()}
        == sd.transitions[pair][v].entries
        for pair, anchors in sd2.transitions.items()
        for v, mm in anchors.items())
    weights_match = all(
        sd2.weights[tau][lab2] == sd.weights[tau][match[lab2]]
        for tau in sd.base.cells() for lab2 in sd2.weights[tau])
    return {"pass": gauge is not None and weights_match,
            "equal": equal, "weights_match": weights_match,
            "gauge": gauge, "rank": sd.rank,
            "lifts": {tau: len(ms2.cover.lifts[tau]) for tau in sd.base.cells()}}


def check_covering_morphism_to_source(ms, d):
    """The fold from the block lifts of the glued sheaf back onto the
    source lifts, with its covering-morphism report."""
    sd = assemble_sheaf(ms, d)
    cert, ms2, _, name, _ = _extraction(sd)
    fold = {}
    issues = []
    for tau in sd.base.cells():
        for P in cert.blocks[tau]:
            sources = {ms.cover.restrict(tau, lab[0]) for lab in P}
            if len(sources) != 1:
                issues.append({"kind": "source", "cell": tau, "block": P,
                               "sources": tuple(sorted(sources))})
                continue
            fold[name[(tau, P)]] = sources.pop()
    if not issues:
        issues = check_covering_morphism(fold, ms2, ms)
    return {"fold": fold if not issues else None, "issues": issues,
            "pass": not issues}


def _boundary_restriction(fan, fl):
    """The polytope-boundary base matching a fan's nonzero cells."""
    bd = build_base_from_polytope(fl)
    shared = set(bd.dims)
    if shared | {fan.origin} != set(fan.dims):
        raise IndexMismatch("the fan's cells do not match the polytope's faces")
    for tau in shared:
        if bd.qranks[tau] != fan.qranks[tau]:
            raise IndexMismatch(f"quotient ranks over {tau} disagree between"
                                f" the fan and the boundary")
    return bd


def restrict_toric_bundle(fl, cs, gd):
    """The glued boundary sheaf of an equivariant bundle over a complete fan.

    cs is a multi-section of the fan refining the normal fan of fl, gd a
    scalar family over it.  The fan-side data is validated first, with
    identity chart embeddings tying the families across cone containments;
    the boundary sheaf then glues the restricted cover and families with
    trivial vertex twists.
    """
    fan = cs.base
    if fan.mode != "fan":
        raise WellDefinednessFailure("bundle data must live over a fan-mode base")
    bad = validate_covering(cs.cover)
    if bad:
        raise WellDefinednessFailure(f"fan covering data fails: {bad[0]}")
    viol, _ = validate_slopes(cs)
    if viol:
        raise WellDefinednessFailure(f"fan slopes fail: {viol[0]}")
    bad = validate_G(cs, gd)
    if bad:
        raise WellDefinednessFailure(f"fan chart families fail: {bad[0]}")
    bad = [item for item in validate_H(cs, gd, identity_H(cs.cover))
           if item.get("severity") != "warning"]
    if bad:
        raise WellDefinednessFailure(f"fan families are incompatible across"
                                     f" cone containments: {bad[0]}")

    bd = _boundary_restriction(fan, fl)
    lifts = {tau: cs.cover.lifts[tau] for tau in bd.dims}
    down = {pair: dict(cs.cover.down[pair]) for pair in bd.lt}
    mult = {x: cs.cover.mult[x] for tau in bd.dims for x in lifts[tau]}
    cover = CoveringData(bd, lifts, down, mult)
    slopes = {(x, s): cs.slope(x, s) for x in cover.all_lifts()
              for s in cover.maximal_lifts_above(x)}
    ms = MultiSection(bd, cover, slopes)
    fams = {}
    for x in cover.all_lifts():
        charts = bd.maximal_above(cover.cell_of[x])
        for s1 in charts:
            for s2 in charts:
                if s1 != s2:
                    fams[(x, s1, s2)] = dict(gd.family(x, s1, s2))
    d = BraneData(KaneyamaG(cover, fams), identity_H(cover),
                  CechCochain.ones(build_nerve(cover), 1), trivial_closed(bd))
    sd = assemble_sheaf(ms, d)
    validate_tropical_structure(sd)
    return sd
