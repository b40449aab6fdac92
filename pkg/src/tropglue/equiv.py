"""Order and equivalence between branes over a shared base complex.

A covering morphism folds one multi-section onto another; its pushforward
carries gluing data along so that the glued sheaves agree frame element
by frame element.  One brane sits below another when some fold pushes its
data onto the other's up to a per-chart rescaling, and two branes are
combinatorially equivalent when a chain of common refinements connects
them.  Fold searches are exhaustive over chart assignments and budgeted.
"""

from fractions import Fraction
from itertools import product

from .cover import CoveringData, MultiSection, check_covering_morphism
from .errors import IndexMismatch, NoAdmissiblePreimage, SearchBudgetExceeded, TropglueError
from .extract import (associated_multisection, check_covering_morphism_to_source,
                      descriptor_gauge, roundtrip_check)
from .glue import BraneData, assemble_sheaf
from .kaneyama import KaneyamaG, KaneyamaH
from .obstruction import CechCochain, build_nerve, obstruction_cochain, solve_coboundary

__all__ = ["pushforward_data", "BraneOrderWitness", "check_leq",
           "check_combinatorial_equivalence", "correspondence_harness"]


def _transport(f, src, dst):
    """Frame labels of src sent to dst labels, fiberwise in source order."""
    tr = {}
    for s in src.base.maximal:
        for y in dst.lifts[s]:
            i = 0
            for x in sorted(xx for xx in src.lifts[s] if f[xx] == y):
                for j in range(src.mult[x]):
                    tr[(x, j)] = (y, i)
                    i += 1
    return tr


def pushforward_data(f, ms, d, dst):
    """Gluing data on dst whose glued sheaf carries the one of (ms, d)
    along the covering morphism f, frame element by frame element.

    Frame labels transport fiberwise in source order.  The splitting
    witness on dst is re-solved and the embedding scalars absorb the
    mismatch between the two witnesses row by row, so the assembled
    transitions transport verbatim.
    """
    issues = check_covering_morphism(f, ms, dst)
    if issues:
        raise NoAdmissiblePreimage(f"not a covering morphism: {issues[0]}")
    base = ms.base
    tr = _transport(f, ms.cover, dst.cover)

    fams_g = {}
    for y in dst.cover.all_lifts():
        tau = dst.cover.cell_of[y]
        charts = base.maximal_above(tau)
        pre = [x for x in ms.cover.lifts[tau] if f[x] == y]
        for s1 in charts:
            for s2 in charts:
                if s1 == s2:
                    continue
                fam = {}
                for x in pre:
                    for (a, b), v in d.g.family(x, s1, s2).items():
                        fam[(tr[a], tr[b])] = v
                fams_g[(y, s1, s2)] = fam

    k = solve_coboundary(obstruction_cochain(dst, d.sbar))
    if k is None:
        raise NoAdmissiblePreimage("the target multi-section admits no"
                                   " splitting witness for the vertex twist")
    fams_h = {}
    for (t1, t2) in base.lt:
        for s in base.maximal_above(t2):
            fam_src = d.h.family(t1, t2, s)
            if fam_src is None:
                raise IndexMismatch(f"no embedding family for {(t1, t2, s)}")
            fam = {}
            for (a, b), v in fam_src.items():
                x1 = ms.cover.restrict(t1, a[0])
                x2 = ms.cover.restrict(t2, a[0])
                rho = (d.k.value((x1, x2)) / k.value((f[x1], f[x2]))).to_fraction()
                fam[(tr[a], tr[b])] = Fraction(v) * rho
            fams_h[(t1, t2, s)] = fam
    return BraneData(KaneyamaG(dst.cover, fams_g),
                     KaneyamaH(dst.cover, fams_h), k, d.sbar)


class BraneOrderWitness:
    """A fold realizing one brane below another: the covering morphism,
    the pushed gluing data, and the gauge matching the glued sheaves."""

    __slots__ = ("fold", "pushed", "gauge")

    def __init__(self, fold, pushed, gauge):
        self.fold = fold
        self.pushed = pushed
        self.gauge = gauge


def _extend_fold(cov1, cov2, assign):
    """Chart-level assignments completed to all lifts, or None."""
    f = dict(assign)
    base = cov1.base
    tops = set(base.maximal)
    for tau in base.cells():
        if tau in tops:
            continue
        for x in cov1.lifts[tau]:
            images = set()
            for s in base.maximal_above(tau):
                for top in cov1.fiber(x, s):
                    images.add(cov2.restrict(tau, f[top]))
            if len(images) != 1:
                return None
            f[x] = images.pop()
    return f


def _chart_maps(cov1, cov2, s):
    """All multiplicity-preserving maps between the chart fibers of s."""
    l1, l2 = cov1.lifts[s], cov2.lifts[s]
    out = []
    for img in product(l2, repeat=len(l1)):
        m = dict(zip(l1, img))
        if all(sum(cov1.mult[x] for x in l1 if m[x] == y) == cov2.mult[y]
               for y in l2):
            out.append(m)
    return out


def check_leq(b1, b2, budget=100000):
    """A fold of the first brane onto the second matching their glued
    sheaves up to gauge, or None.

    Folds are enumerated chart by chart in label order, so the returned
    witness is deterministic; the number of examined folds is capped by
    `budget` and exceeding it raises SearchBudgetExceeded.
    """
    ms1, d1 = b1
    ms2, d2 = b2
    if ms1.base is not ms2.base:
        raise IndexMismatch("branes live over different base complexes")
    base = ms1.base
    if ms1.cover.degree() != ms2.cover.degree():
        return None
    try:
        sd2 = assemble_sheaf(ms2, d2)
    except TropglueError:
        return None
    match = {lab: lab for s in base.maximal for lab in sd2.frames[s]}
    per_cell = [_chart_maps(ms1.cover, ms2.cover, s) for s in base.maximal]
    if any(not maps for maps in per_cell):
        return None
    examined = 0
    for combo in product(*per_cell):
        examined += 1
        if examined > budget:
            raise SearchBudgetExceeded(
                f"fold search stopped after {budget} candidates", budget)
        assign = {}
        for m in combo:
            assign.update(m)
        f = _extend_fold(ms1.cover, ms2.cover, assign)
        if f is None or check_covering_morphism(f, ms1, ms2):
            continue
        try:
            pushed = pushforward_data(f, ms1, d1, ms2)
            sd = assemble_sheaf(ms2, pushed)
        except TropglueError:
            continue
        gauge = descriptor_gauge(sd, sd2, match)
        if gauge is not None:
            return BraneOrderWitness(f, pushed, gauge)
    return None


def _pullback_brane(d1, cover, proj):
    """d1 moved onto a relabeled copy of its cover along the bijection proj,
    which sends each new lift to the old one it renames."""
    rev = {old: new for new, old in proj.items()}
    tr = {(old, j): (new, j) for old, new in rev.items()
          for j in range(cover.mult[new])}
    fams_g = {(rev[t], s1, s2): {(tr[a], tr[b]): v for (a, b), v in fam.items()}
              for (t, s1, s2), fam in d1.g.entries.items()}
    fams_h = {(t1, t2, s): {(tr[a], tr[b]): v for (a, b), v in fam.items()}
              for (t1, t2, s), fam in d1.h.entries.items()}
    nerve = build_nerve(cover)
    kvals = {(x, y): d1.k.value((proj[x], proj[y])) for (x, y) in nerve.chains(1)}
    return BraneData(KaneyamaG(cover, fams_g), KaneyamaH(cover, fams_h),
                     CechCochain(nerve, 1, kvals), d1.sbar)


def _fiber_candidates(b1, b2):
    """Common-refinement branes from the slope-matched product of covers.

    Connected components that project one-to-one onto the first cover
    carry its data across; components failing the covering axioms or the
    projection are dropped.
    """
    ms1, d1 = b1
    ms2, d2 = b2
    base = ms1.base
    pairs = {}
    for tau in base.cells():
        keep = []
        for x1 in ms1.cover.lifts[tau]:
            for x2 in ms2.cover.lifts[tau]:
                ok = all(ms1.slope(x1, s1) == ms2.slope(x2, s2)
                         for s in base.maximal_above(tau)
                         for s1 in ms1.cover.fiber(x1, s)
                         for s2 in ms2.cover.fiber(x2, s))
                if ok:
                    keep.append((x1, x2))
        if not keep:
            return []
        pairs[tau] = keep
    index = {p: p for lst in pairs.values() for p in lst}

    def find(p):
        while index[p] != p:
            index[p] = index[index[p]]
            p = index[p]
        return p

    orphans = []
    for (t1, t2) in base.lt:
        for (y1, y2) in pairs[t2]:
            down = (ms1.cover.restrict(t1, y1), ms2.cover.restrict(t1, y2))
            if down not in index:
                orphans.append((y1, y2))
                continue
            ra, rb = find(down), find((y1, y2))
            if ra != rb:
                index[ra] = rb
    dead = {find(p) for p in orphans}
    components = {}
    for tau, lst in pairs.items():
        for p in lst:
            root = find(p)
            if root not in dead:
                components.setdefault(root, {}).setdefault(tau, []).append(p)
    out = []
    for comp in components.values():
        if set(comp) != set(base.dims):
            continue
        if any(len({p[0] for p in comp[tau]}) != len(comp[tau])
               or len(comp[tau]) != len(ms1.cover.lifts[tau])
               or any(ms2.cover.mult[p[1]] != 1 for p in comp[tau])
               for tau in comp):
            continue
        names = {p: f"{p[0]}&{p[1]}" for tau in comp for p in comp[tau]}
        lifts = {tau: tuple(names[p] for p in sorted(comp[tau])) for tau in comp}
        back = {names[p]: p for tau in comp for p in comp[tau]}
        down = {(t1, t2): {names[(y1, y2)]: names[(ms1.cover.restrict(t1, y1),
                                                   ms2.cover.restrict(t1, y2))]
                           for (y1, y2) in comp[t2]}
                for (t1, t2) in base.lt}
        mult = {names[p]: ms1.cover.mult[p[0]] * ms2.cover.mult[p[1]]
                for tau in comp for p in comp[tau]}
        try:
            cover = CoveringData(base, lifts, down, mult)
            slopes = {(x, s): ms1.slope(back[x][0], back[s][0])
                      for x in cover.all_lifts()
                      for s in cover.maximal_lifts_above(x)}
            ms = MultiSection(base, cover, slopes)
            proj = {x: back[x][0] for x in cover.all_lifts()}
            d = _pullback_brane(d1, cover, proj)
        except TropglueError:
            continue
        out.append((ms, d))
    return out


def _common_refinement(b1, b2, budget):
    """A candidate brane folding onto both, with its two witnesses."""
    for u in [b1, b2] + _fiber_candidates(b1, b2):
        w1 = check_leq(u, b1, budget)
        if w1 is None:
            continue
        w2 = check_leq(u, b2, budget)
        if w2 is not None:
            return (u, w1, w2)
    return None


def check_combinatorial_equivalence(b1, b2, depth=1, budget=100000):
    """A chain of common refinements connecting two branes, or None.

    Each step is (refinement, witness onto the left end, witness onto the
    right neighbour); depth bounds the number of steps.  None means no
    chain was found within the given depth, not that none exists.
    """
    step = _common_refinement(b1, b2, budget)
    if step is not None:
        return [step]
    if depth <= 1:
        return None
    for c in _fiber_candidates(b1, b2):
        first = _common_refinement(b1, c, budget)
        if first is None:
            continue
        rest = check_combinatorial_equivalence(c, b2, depth - 1, budget)
        if rest is not None:
            return [first] + rest
    return None


def correspondence_harness(branes, depth=1, budget=100000):
    """Round-trip, fold, and equivalence checks over a corpus of branes.

    Each entry is (name, multi-section, data); the report row records the
    round-trip comparison of the glued sheaf, the fold onto the source
    cover, and whether the extracted brane and the source are equivalent
    within the given depth.
    """
    rows = []
    for name, ms, d in branes:
        rt = roundtrip_check(ms, d)
        fold = check_covering_morphism_to_source(ms, d)
        extracted = associated_multisection(assemble_sheaf(ms, d))
        chain = check_combinatorial_equivalence(extracted, (ms, d), depth, budget)
        rows.append({"name": name, "roundtrip": bool(rt["pass"]),
                     "fold": bool(fold["pass"]),
                     "equivalent": chain is not None})
    return rows
