"""Branched covering data over a base complex and the slope calculus of multi-sections."""

from .errors import IndexMismatch, MissingSlope, NotACone, WellDefinednessFailure
from .lattice import dot, right_inverse

__all__ = [
    "CoveringData",
    "LiftPoset",
    "MultiSection",
    "ConeComplexSection",
    "identity_cover",
    "disjoint_cover",
    "validate_covering",
    "build_L",
    "slopes_from_weights",
    "validate_slopes",
    "fan_structure_at",
    "localize",
    "is_separable",
    "check_covering_morphism",
]


def _pullback(m, p, ncols):
    """A functional on the target of p, pulled back along p (row times matrix)."""
    return tuple(sum(mi * row[j] for mi, row in zip(m, p)) for j in range(ncols))


class CoveringData:
    """Lift sets, restriction surjections, and multiplicities over a base complex.

    lifts[cell] is the sorted tuple of lift names over that cell; lift names
    are globally unique. down[(a, b)], for a strict pair a < b of the base,
    maps each lift of b to the lift of a it restricts to. mult assigns every
    lift a positive integer.
    """

    __slots__ = ("base", "lifts", "down", "mult", "cell_of")

    def __init__(self, base, lifts, down, mult):
        if set(lifts) != set(base.dims):
            raise IndexMismatch("lift sets must be indexed by exactly the base cells")
        self.base = base
        self.lifts = {c: tuple(sorted(lifts[c])) for c in lifts}
        cell_of = {}
        for c in base.cells():
            for x in self.lifts[c]:
                if x in cell_of:
                    raise IndexMismatch(f"lift name {x} is used over both {cell_of[x]} and {c}")
                cell_of[x] = c
        self.cell_of = cell_of
        if set(down) != set(base.lt):
            raise IndexMismatch("restriction maps must be indexed by exactly the strict pairs of the base")
        self.down = {}
        for (a, b), f in down.items():
            if set(f) != set(self.lifts[b]):
                raise IndexMismatch(f"restriction for ({a}, {b}) is not defined on exactly the lifts of {b}")
            for y, x in f.items():
                if cell_of.get(x) != a:
                    raise IndexMismatch(f"restriction for ({a}, {b}) sends {y} to {x}, which is not a lift of {a}")
            self.down[(a, b)] = dict(f)
        if set(mult) != set(cell_of):
            raise IndexMismatch("multiplicity must be defined on exactly the lifts")
        for x, k in mult.items():
            if not isinstance(k, int) or k <= 0:
                raise IndexMismatch(f"multiplicity of {x} is {k!r}, not a positive integer")
        self.mult = dict(mult)

    def all_lifts(self):
        return tuple(x for c in self.base.cells() for x in self.lifts[c])

    def restrict(self, a, y):
        """The lift of the cell a below the lift y (y itself when over a)."""
        b = self.cell_of[y]
        if a == b:
            return y
        try:
            return self.down[(a, b)][y]
        except KeyError:
            raise IndexMismatch(f"no restriction from {b} to {a}") from None

    def lift_leq(self, x, y):
        a, b = self.cell_of[x], self.cell_of[y]
        if a == b:
            return x == y
        return (a, b) in self.base.lt and self.down[(a, b)][y] == x

    def fiber(self, x, b):
        """The lifts of the cell b lying above the lift x."""
        a = self.cell_of[x]
        if a == b:
            return (x,)
        return tuple(y for y in self.lifts[b] if self.down[(a, b)][y] == x)

    def star_lifts(self, x):
        """All lifts above x, including x, ordered by (cell dimension, name)."""
        out = []
        for b in self.base.above(self.cell_of[x]):
            out.extend(self.fiber(x, b))
        return tuple(out)

    def maximal_lifts_above(self, x):
        out = []
        for b in self.base.maximal_above(self.cell_of[x]):
            out.extend(self.fiber(x, b))
        return tuple(sorted(out))

    def degree(self):
        cells = self.base.cells()
        return sum(self.mult[x] for x in self.lifts[cells[0]])


def identity_cover(base):
    """The degree-one cover with a single lift per cell."""
    lifts = {c: (c + "^0",) for c in base.dims}
    down = {(a, b): {b + "^0": a + "^0"} for (a, b) in base.lt}
    mult = {c + "^0": 1 for c in base.dims}
    return CoveringData(base, lifts, down, mult)


def disjoint_cover(base, copies):
    """The split cover with `copies` full sheets and multiplicity one."""
    lifts = {c: tuple(f"{c}^{i}" for i in range(copies)) for c in base.dims}
    down = {(a, b): {f"{b}^{i}": f"{a}^{i}" for i in range(copies)} for (a, b) in base.lt}
    mult = {f"{c}^{i}": 1 for c in base.dims for i in range(copies)}
    return CoveringData(base, lifts, down, mult)


def validate_covering(c):
    """Surjectivity, composition, and degree checks for covering data.

    The star-degree check asks that the multiplicities above any lift x sum,
    cell by cell, to the multiplicity of x; total-degree constancy follows
    from it on connected bases but both are reported independently.
    """
    base = c.base
    out = []
    for a, b in base.strict_pairs():
        image = set(c.down[(a, b)].values())
        for x in c.lifts[a]:
            if x not in image:
                out.append({"kind": "surjectivity", "pair": (a, b), "lift": x})
    cells = base.cells()
    for a, b in base.strict_pairs():
        for cc in cells:
            if (b, cc) not in base.lt:
                continue
            for y in c.lifts[cc]:
                lhs = c.down[(a, b)][c.down[(b, cc)][y]]
                rhs = c.down[(a, cc)][y]
                if lhs != rhs:
                    out.append({"kind": "composition", "triple": (a, b, cc), "lift": y,
                                "lhs": lhs, "rhs": rhs})
    degrees = {a: sum(c.mult[x] for x in c.lifts[a]) for a in cells}
    seen = list(degrees.values())
    expected = max(set(seen), key=lambda d: (seen.count(d), -d))
    for a in cells:
        if degrees[a] != expected:
            out.append({"kind": "degree", "cell": a, "degree": degrees[a], "expected": expected})
    for a, b in base.strict_pairs():
        for x in c.lifts[a]:
            total = sum(c.mult[y] for y in c.fiber(x, b))
            if total != c.mult[x]:
                out.append({"kind": "star-degree", "pair": (a, b), "lift": x,
                            "degree": total, "expected": c.mult[x]})
    return out


class LiftPoset:
    """The cell poset of the total space of a cover, with stars and components."""

    __slots__ = ("cover", "names", "lt", "stars", "components")

    def __init__(self, cover, names, lt, stars, components):
        self.cover = cover
        self.names = names
        self.lt = lt
        self.stars = stars
        self.components = components

    def leq(self, x, y):
        return x == y or (x, y) in self.lt

    def star(self, x):
        return self.stars[x]


def build_L(c):
    """The poset of lifts under the induced order, as a LiftPoset.

    The order pairs come directly from the restriction maps; for covering
    data passing validate_covering they are already transitively closed.
    Components are those of the comparability graph.
    """
    names = c.all_lifts()
    lt = set()
    for f in c.down.values():
        for y, x in f.items():
            lt.add((x, y))
    stars = {x: c.star_lifts(x) for x in names}
    parent = {x: x for x in names}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x, y in lt:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)
    components = {x: find(x) for x in names}
    return LiftPoset(c, names, frozenset(lt), stars, components)


class MultiSection:
    """Covering data with one integral slope per (lift, maximal lift) flag.

    The slope at (x, s) is a functional on the quotient lattice of x's cell.
    Only slope differences carry invariant meaning; a global functional added
    to every slope over a fixed cell is a change of local representative.
    """

    __slots__ = ("base", "cover", "slopes")

    def __init__(self, base, cover, slopes):
        if cover.base is not base:
            raise IndexMismatch("covering data belongs to a different base complex")
        needed = set()
        for x in cover.all_lifts():
            for s in cover.maximal_lifts_above(x):
                needed.add((x, s))
        extra = set(slopes) - needed
        if extra:
            raise IndexMismatch(f"slopes given for unknown flags, e.g. {sorted(extra)[0]}")
        missing = needed - set(slopes)
        if missing:
            raise MissingSlope(f"no slope for flag {sorted(missing)[0]}")
        self.base = base
        self.cover = cover
        self.slopes = {}
        for key in needed:
            m = tuple(slopes[key])
            q = base.qranks[cover.cell_of[key[0]]]
            if len(m) != q or not all(isinstance(v, int) for v in m):
                raise IndexMismatch(f"slope for {key} must be an integer functional of length {q}")
            self.slopes[key] = m

    def slope(self, x, s):
        try:
            return self.slopes[(x, s)]
        except KeyError:
            raise MissingSlope(f"no slope for flag ({x}, {s})") from None


class ConeComplexSection(MultiSection):
    """A multi-section over a fan-mode base, the shape produced by localization."""

    __slots__ = ()

    def __init__(self, base, cover, slopes):
        if base.mode != "fan":
            raise WellDefinednessFailure("a cone-complex section needs a fan-mode base")
        super().__init__(base, cover, slopes)

    def origin_lift_below(self, x):
        return self.cover.restrict(self.base.origin, x)

    def ambient_slope(self, s):
        """The slope of the maximal lift s as a functional on the fan's lattice."""
        return self.slope(self.origin_lift_below(s), s)


def _section_of(base, tau):
    """An integral section of the projection from the ambient lattice to Q_tau."""
    if base.quot is not None:
        return base.quot[tau].section
    if base.mode == "fan":
        return right_inverse(base.projection(base.origin, tau), ncols=base.ambient_rank)
    raise IndexMismatch("the base carries no ambient lattice to take sections from")


def slopes_from_weights(base, cover, weights):
    """A full slope table from one ambient weight per maximal lift.

    The slope at (x, s) is the weight of s pulled back along the fixed
    section of x's cell, so affine compatibility holds by construction;
    continuity holds exactly when the weights satisfy it on shared walls.
    """
    slopes = {}
    for x in cover.all_lifts():
        tau = cover.cell_of[x]
        sec = _section_of(base, tau)
        for s in cover.maximal_lifts_above(x):
            slopes[(x, s)] = _pullback(weights[s], sec, base.qranks[tau])
    return slopes


def validate_slopes(ms):
    """Continuity across shared walls and affineness across lift containments.

    Returns (violations, corrections). corrections maps each strict lift pair
    (x, y) to the functional by which the pulled-back slope at y differs from
    the slope at x; it is None whenever violations were found.
    """
    base, cov = ms.base, ms.cover
    out = []
    for x in cov.all_lifts():
        tau = cov.cell_of[x]
        tops = cov.maximal_lifts_above(x)
        for i, s1 in enumerate(tops):
            for s2 in tops[i + 1:]:
                c1, c2 = cov.cell_of[s1], cov.cell_of[s2]
                delta = tuple(u - v for u, v in zip(ms.slope(x, s1), ms.slope(x, s2)))
                for rho in base.cells():
                    if base.qranks[rho] != 1 or not base.leq(tau, rho):
                        continue
                    if not (base.leq(rho, c1) and base.leq(rho, c2)):
                        continue
                    gens = base.cone_of(tau, rho)
                    if all(dot(delta, g) == 0 for g in gens):
                        continue
                    for rp in cov.lifts[rho]:
                        if cov.lift_leq(x, rp) and cov.lift_leq(rp, s1) and cov.lift_leq(rp, s2):
                            out.append({"kind": "continuity", "lift": x, "pair": (s1, s2),
                                        "wall": rp, "functional": delta})
    corrections = {}
    for x in cov.all_lifts():
        t1 = cov.cell_of[x]
        for y in cov.star_lifts(x):
            if y == x:
                continue
            t2 = cov.cell_of[y]
            p = base.projection(t1, t2)
            seen = {}
            for s in cov.maximal_lifts_above(y):
                pulled = _pullback(ms.slope(y, s), p, base.qranks[t1])
                d = tuple(u - v for u, v in zip(pulled, ms.slope(x, s)))
                seen.setdefault(d, s)
            if len(seen) > 1:
                ds = sorted(seen)
                out.append({"kind": "affine", "pair": (x, y),
                            "lifts": (seen[ds[0]], seen[ds[1]]), "differences": (ds[0], ds[1])})
            else:
                corrections[(x, y)] = next(iter(seen))
    return out, (None if out else corrections)


def fan_structure_at(ms, x):
    """The induced cone-complex section on the star of a lift.

    The base is the star fan of the lift's cell, the cover keeps exactly the
    lifts above x, and every kept flag keeps its stored slope.
    """
    cov = ms.cover
    if x not in cov.cell_of:
        raise IndexMismatch(f"{x} is not a lift")
    tau = cov.cell_of[x]
    star = ms.base.star(tau)
    lifts = {w: cov.fiber(x, w) for w in star.cells()}
    down = {pair: {y: cov.down[pair][y] for y in lifts[pair[1]]} for pair in star.lt}
    mult = {y: cov.mult[y] for ws in lifts.values() for y in ws}
    cover = CoveringData(star, lifts, down, mult)
    slopes = {}
    for w in star.cells():
        for y in lifts[w]:
            for s in cover.maximal_lifts_above(y):
                slopes[(y, s)] = ms.slopes[(y, s)]
    return ConeComplexSection(star, cover, slopes)


def localize(cs, x):
    """The localization of a fan section along a cone lift.

    The underlying complex is the star fan of the lift; the slopes on flags
    at the new origin are the ambient slopes pulled back along a fixed
    integral section of the quotient by the cone's span, and all other flags
    keep their stored slopes. The result is revalidated, which realizes the
    affineness statement localization is licensed by.
    """
    if not isinstance(cs, ConeComplexSection):
        cs = ConeComplexSection(cs.base, cs.cover, cs.slopes)
    cov = cs.cover
    if x not in cov.cell_of:
        raise NotACone(f"{x} is not a cone lift")
    tau = cov.cell_of[x]
    base = cs.base
    loc = fan_structure_at(cs, x)
    sec = right_inverse(base.projection(base.origin, tau), ncols=base.ambient_rank)
    slopes = dict(loc.slopes)
    for s in loc.cover.maximal_lifts_above(x):
        slopes[(x, s)] = _pullback(cs.ambient_slope(s), sec, base.qranks[tau])
    out = ConeComplexSection(loc.base, loc.cover, slopes)
    report, _ = validate_slopes(out)
    if report:
        raise WellDefinednessFailure(f"localized slopes are inconsistent: {report[0]}")
    return out


def _restriction_values(cs, x):
    """The values of the section's function on the generators of x's cone sheet."""
    base, cov = cs.base, cs.cover
    s = cov.maximal_lifts_above(x)[0]
    m = cs.ambient_slope(s)
    gens = base.cone_of(base.origin, cov.cell_of[x])
    return tuple(dot(m, g) for g in gens)


def is_separable(cs):
    """Whether distinct lifts of every cone restrict to distinct linear functions.

    Returns (True, None), or (False, (x, y)) for the first pair of lifts of a
    common cone whose functions agree on the span of that cone. Two lifts of
    the minimal cone always agree there, so a separable section is connected
    over the origin.
    """
    cov = cs.cover
    for w in cs.base.cells():
        names = cov.lifts[w]
        for i, x in enumerate(names):
            rx = _restriction_values(cs, x)
            for y in names[i + 1:]:
                if rx == _restriction_values(cs, y):
                    return False, (x, y)
    return True, None


def check_covering_morphism(f, src, dst):
    """Order preservation, multiplicity push-forward, and slope equality for a lift map.

    f maps source lifts to target lifts over the same base cells; violations
    of that indexing raise, everything else is reported.
    """
    if src.base is not dst.base:
        raise IndexMismatch("source and target live over different base complexes")
    cs, cd = src.cover, dst.cover
    if set(f) != set(cs.cell_of):
        raise IndexMismatch("the map must be defined on exactly the source lifts")
    for x, y in f.items():
        if cd.cell_of.get(y) != cs.cell_of[x]:
            raise IndexMismatch(f"{x} over {cs.cell_of[x]} maps to {y!r}, not a lift of the same cell")
    out = []
    for pair in src.base.strict_pairs():
        g = cs.down[pair]
        for y in sorted(g):
            if cd.down[pair][f[y]] != f[g[y]]:
                out.append({"kind": "order", "pair": (g[y], y), "image": (f[g[y]], f[y]),
                            "expected": cd.down[pair][f[y]]})
    for c in src.base.cells():
        for z in cd.lifts[c]:
            pushed = sum(cs.mult[x] for x in cs.lifts[c] if f[x] == z)
            if pushed != cd.mult[z]:
                out.append({"kind": "multiplicity", "lift": z, "pushed": pushed,
                            "expected": cd.mult[z]})
    for x, s in sorted(src.slopes):
        m = src.slopes[(x, s)]
        target = dst.slopes.get((f[x], f[s]))
        if target != m:
            out.append({"kind": "slope", "flag": (x, s), "image": (f[x], f[s]),
                        "lhs": m, "rhs": target})
    return out
