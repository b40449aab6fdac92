"""The gluing base: a finite cell poset with quotient lattices, local fans, and gluing data.

A complex stores, for every strict containment a < b, the integer projection
between the quotient lattices Q_a -> Q_b and the cone of b as seen from a.
Polytope mode derives all of it from the proper faces of a lattice polytope
with interior origin; abstract mode echoes user tables after checking the
same identities; fan mode is the star of a cell, reused for local models.

Gluing data live in Q ⊗ Q^x. Closed data assign one character value per
strict pair; open data assign a compatible family of character values over
the closure of the source cell.
"""

from .errors import IndexMismatch, NotACone, WellDefinednessFailure
from .lattice import (
    cone_contains,
    cone_is_salient,
    identity,
    matmul,
    matvec,
    primitive,
    quotient_lattice,
    _rank,
)
from .ratmult import ONE, prod, qx, solve_mult


def face_cell_name(dim, idxs):
    """Canonical cell name for a polytope face given by sorted vertex indices."""
    if dim == 0:
        return f"v{idxs[0]}"
    return f"c{dim}." + "-".join(str(i) for i in idxs)


def _transitive_closure(pairs):
    closed = set(pairs)
    while True:
        fresh = {(a, d) for (a, b) in closed for (c, d) in closed if b == c and a != d}
        if fresh <= closed:
            return closed
        closed |= fresh


def _cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def _extremal_pair(gens):
    """The counterclockwise extremal ray pair of a salient two-dimensional cone."""
    for u in gens:
        for v in gens:
            if _cross(u, v) <= 0:
                continue
            if all(_cross(u, w) >= 0 and _cross(w, v) >= 0 for w in gens):
                return u, v
    return None


class BaseComplex:
    """A cell poset with per-cell quotient lattices and per-pair projections and cones.

    dims and qranks map cell names to dimensions and quotient-lattice ranks.
    lt is the set of strict containments, transitively closed. proj[(a, b)]
    is the qranks[b] x qranks[a] integer matrix Q_a -> Q_b and cone[(a, b)]
    the tuple of primitive generators, inside Q_a, of the cone attached to b.
    A fan-mode complex has a unique minimal cell stored as origin; its cells
    play the role of the cones of a complete fan in Q_origin.
    """

    __slots__ = ("mode", "dims", "qranks", "lt", "proj", "cone", "maximal",
                 "origin", "ambient_rank", "quot", "polytope_vertices", "face_vertices")

    def __init__(self, mode, dims, qranks, lt, proj, cone, maximal, origin=None,
                 ambient_rank=None, quot=None, polytope_vertices=None, face_vertices=None):
        self.mode = mode
        self.dims = dict(dims)
        self.qranks = dict(qranks)
        self.lt = frozenset(lt)
        self.proj = {pair: [list(row) for row in m] for pair, m in proj.items()}
        self.cone = {pair: tuple(tuple(g) for g in gens) for pair, gens in cone.items()}
        self.maximal = tuple(sorted(maximal))
        self.origin = origin
        self.ambient_rank = ambient_rank
        self.quot = quot
        self.polytope_vertices = polytope_vertices
        self.face_vertices = face_vertices

    def cells(self):
        return sorted(self.dims, key=lambda c: (self.dims[c], c))

    def strict_pairs(self):
        return sorted(self.lt, key=lambda p: (self.dims[p[0]], p[0], self.dims[p[1]], p[1]))

    def leq(self, a, b):
        return a == b or (a, b) in self.lt

    def above(self, a, strict=False):
        out = [c for c in self.cells() if self.leq(a, c) and (not strict or c != a)]
        return tuple(out)

    def below(self, a, strict=False):
        out = [c for c in self.cells() if self.leq(c, a) and (not strict or c != a)]
        return tuple(out)

    def maximal_above(self, a):
        return tuple(c for c in self.maximal if self.leq(a, c))

    def vertices_of(self, a):
        return tuple(c for c in self.below(a) if self.dims[c] == min(self.dims[d] for d in self.below(a)))

    def projection(self, a, b):
        if a == b:
            return identity(self.qranks[a])
        try:
            return self.proj[(a, b)]
        except KeyError:
            raise IndexMismatch(f"no projection for pair ({a}, {b})") from None

    def push(self, a, b, v):
        return matvec(self.projection(a, b), v)

    def cone_of(self, a, b):
        if a == b:
            return ()
        try:
            return self.cone[(a, b)]
        except KeyError:
            raise IndexMismatch(f"no cone for pair ({a}, {b})") from None

    def meet(self, a, b):
        lows = [c for c in self.cells() if self.leq(c, a) and self.leq(c, b)]
        tops = [c for c in lows if not any(d != c and self.leq(c, d) for d in lows)]
        if not tops:
            return None
        if len(tops) > 1:
            raise WellDefinednessFailure(f"cells {a} and {b} meet in several cells: {tops}")
        return tops[0]

    def star(self, tau):
        """The fan-mode complex on the cells containing tau, with tau as origin."""
        names = set(self.above(tau))
        return BaseComplex(
            mode="fan",
            dims={c: self.dims[c] for c in names},
            qranks={c: self.qranks[c] for c in names},
            lt={p for p in self.lt if p[0] in names and p[1] in names},
            proj={p: m for p, m in self.proj.items() if p[0] in names and p[1] in names},
            cone={p: g for p, g in self.cone.items() if p[0] in names and p[1] in names},
            maximal=[c for c in self.maximal if c in names],
            origin=tau,
            ambient_rank=self.qranks[tau],
        )

    def violations(self):
        """All failed structural identities, as (category, message) pairs.

        Index problems are reported alone when present, because the later
        checks assume a complete key set.
        """
        out = []
        cells = set(self.dims)
        pairs = set(self.lt)
        for a, b in pairs:
            if a not in cells or b not in cells:
                out.append(("index", f"order pair ({a}, {b}) references an unknown cell"))
            elif a == b or (b, a) in pairs:
                out.append(("index", f"order pair ({a}, {b}) breaks antisymmetry"))
        for a, b in pairs:
            for c in cells:
                if (b, c) in pairs and (a, c) not in pairs:
                    out.append(("index", f"order is not transitive at {a} < {b} < {c}"))
        if set(self.qranks) != cells:
            out.append(("index", "qranks and dims disagree on the cell set"))
        if set(self.proj) != pairs:
            missing = pairs - set(self.proj)
            extra = set(self.proj) - pairs
            out.append(("index", f"projection keys mismatch (missing {sorted(missing)}, extra {sorted(extra)})"))
        if set(self.cone) != pairs:
            missing = pairs - set(self.cone)
            extra = set(self.cone) - pairs
            out.append(("index", f"cone keys mismatch (missing {sorted(missing)}, extra {sorted(extra)})"))
        top = {c for c in cells if not any(p[0] == c for p in pairs)}
        if set(self.maximal) != top:
            out.append(("index", f"maximal list {self.maximal} differs from cells without superiors {sorted(top)}"))
        if self.origin is not None:
            bottom = {c for c in cells if not any(p[1] == c for p in pairs)}
            if bottom != {self.origin}:
                out.append(("index", f"origin {self.origin} is not the unique minimal cell {sorted(bottom)}"))
        if out:
            return out

        for (a, b), m in sorted(self.proj.items()):
            if len(m) != self.qranks[b] or any(len(row) != self.qranks[a] for row in m):
                out.append(("index", f"projection for ({a}, {b}) is not {self.qranks[b]}x{self.qranks[a]}"))
        for (a, b), gens in sorted(self.cone.items()):
            if not gens:
                out.append(("cone", f"cone for ({a}, {b}) has no generators"))
                continue
            for g in gens:
                if len(g) != self.qranks[a]:
                    out.append(("index", f"cone generator {g} for ({a}, {b}) has wrong length"))
                elif not any(g):
                    out.append(("cone", f"cone for ({a}, {b}) contains the zero vector"))
                elif primitive(g) != g:
                    out.append(("cone", f"cone generator {g} for ({a}, {b}) is not primitive"))
        if out:
            return out

        for a, b in self.strict_pairs():
            if self.dims[a] >= self.dims[b]:
                out.append(("welldef", f"dimension does not increase along {a} < {b}"))
            if self.qranks[a] <= self.qranks[b]:
                out.append(("welldef", f"quotient rank does not decrease along {a} < {b}"))
        for c in self.maximal:
            if self.qranks[c] != 0:
                out.append(("welldef", f"maximal cell {c} has quotient rank {self.qranks[c]}"))
        if self.mode != "fan":
            bottom_dim = min(self.dims.values()) if self.dims else 0
            for c in self.cells():
                if not any(self.dims[d] == bottom_dim for d in self.below(c)):
                    out.append(("welldef", f"cell {c} has no minimal-dimension face"))
        for a in self.cells():
            for b in self.cells():
                if a < b:
                    lows = [c for c in self.cells() if self.leq(c, a) and self.leq(c, b)]
                    tops = [c for c in lows if not any(d != c and self.leq(c, d) for d in lows)]
                    if len(tops) > 1:
                        out.append(("welldef", f"cells {a} and {b} meet in several cells: {tops}"))

        for a, b in self.strict_pairs():
            for c in self.cells():
                if (b, c) in self.lt:
                    if matmul(self.proj[(b, c)], self.proj[(a, b)]) != self.proj[(a, c)]:
                        out.append(("welldef", f"projections are not functorial along {a} < {b} < {c}"))

        for (a, b), gens in sorted(self.cone.items()):
            if _rank(gens) != self.qranks[a] - self.qranks[b]:
                out.append(("cone", f"cone for ({a}, {b}) has rank {_rank(gens)}, expected {self.qranks[a] - self.qranks[b]}"))
            elif not cone_is_salient(gens):
                out.append(("cone", f"cone for ({a}, {b}) contains a line"))
        if out:
            return out

        for a, b in self.strict_pairs():
            p = self.proj[(a, b)]
            for c in self.cells():
                if (b, c) not in self.lt:
                    continue
                images = [primitive(matvec(p, g)) for g in self.cone[(a, c)]]
                images = [g for g in images if any(g)]
                target = self.cone[(b, c)]
                for g in images:
                    if not cone_contains(target, g):
                        out.append(("welldef", f"image of cone ({a}, {c}) escapes cone ({b}, {c}) at {g}"))
                for g in target:
                    if not cone_contains(images, g):
                        out.append(("welldef", f"cone ({b}, {c}) is not covered by the image of cone ({a}, {c}) at {g}"))

        for a in self.cells():
            if a in self.maximal:
                continue
            out.extend(("cone", msg) for msg in self._completeness_violations(a))
        return out

    def _completeness_violations(self, a):
        r = self.qranks[a]
        tops = self.maximal_above(a)
        if r == 1:
            rays = sorted(self.cone[(a, b)] for b in tops)
            if len(tops) != 2 or rays != [((-1,),), ((1,),)]:
                return [f"the local fan at {a} does not consist of the two rays of Z"]
            return []
        if r == 2:
            probs = []
            mids = [c for c in self.above(a, strict=True) if self.qranks[c] == 1]
            rays = {}
            for c in mids:
                gens = set(self.cone[(a, c)])
                if len(gens) != 1:
                    probs.append(f"cone ({a}, {c}) is a ray with several generators")
                    continue
                g = next(iter(gens))
                if g in rays:
                    probs.append(f"cells {rays[g]} and {c} give the same ray at {a}")
                rays[g] = c
            succ = {}
            for b in tops:
                pair = _extremal_pair(self.cone[(a, b)])
                if pair is None:
                    probs.append(f"cone ({a}, {b}) is not two-dimensional and salient")
                    continue
                u, v = pair
                if u in succ:
                    probs.append(f"two maximal cones at {a} start at ray {u}")
                succ[u] = (b, v)
                for w in (u, v):
                    if w not in rays:
                        probs.append(f"extremal ray {w} of cone ({a}, {b}) is not a cone of the fan at {a}")
            if probs:
                return probs
            if set(succ) != set(rays):
                return [f"rays and maximal cones of the fan at {a} do not match up"]
            start = next(iter(succ))
            cur, steps, winding = start, 0, 0
            e1 = (1, 0)
            while True:
                _, nxt = succ[cur]
                if _cross(cur, e1) >= 0 and _cross(e1, nxt) > 0:
                    winding += 1
                steps += 1
                cur = nxt
                if cur == start or steps > len(succ):
                    break
            if steps != len(succ) or winding != 1:
                return [f"the maximal cones at {a} do not tile the plane once around"]
            return []
        directions = [d for d in _grid_directions(r) if any(d)]
        for d in directions:
            if not any(cone_contains(self.cone[(a, b)], d) for b in tops):
                return [f"direction {d} misses every maximal cone of the fan at {a}"]
        return []

    def check(self):
        """Raise when any structural identity fails; silent on valid complexes."""
        probs = self.violations()
        if probs:
            kind = probs[0][0]
            exc = {"index": IndexMismatch, "cone": NotACone}.get(kind, WellDefinednessFailure)
            raise exc("; ".join(msg for _, msg in probs))


def _grid_directions(r):
    if r == 0:
        return []
    out = [()]
    for _ in range(r):
        out = [d + (x,) for d in out for x in (-2, -1, 0, 1, 2)]
    return out


def build_base_from_polytope(fl):
    """The boundary complex of a polytope, with quotient lattices and local fans.

    Args:
        fl: a FaceLattice from lattice.face_lattice.

    Returns:
        a BaseComplex in polytope-boundary mode whose cells are the proper
        faces, with Q_tau the quotient of the ambient lattice by the span of
        the cone over tau, projections induced by the identity of the
        ambient lattice, and K_(tau, sigma) the image of sigma's cone in
        Q_tau.
    """
    n = len(fl.vertices[0])
    names = {f: face_cell_name(fl.dims[f], f) for f in fl.faces}
    quot = {}
    dims, qranks = {}, {}
    face_vertices = {}
    for f in fl.faces:
        name = names[f]
        q = quotient_lattice([fl.vertices[i] for i in f], n, saturate=True)
        quot[name] = q
        dims[name] = fl.dims[f]
        qranks[name] = q.rank
        face_vertices[name] = tuple(f)
    lt = set()
    proj = {}
    cone = {}
    for f in fl.faces:
        for g in fl.faces:
            if f != g and set(f) <= set(g):
                a, b = names[f], names[g]
                lt.add((a, b))
                proj[(a, b)] = matmul(quot[b].proj, quot[a].section)
                images = {primitive(quot[a].project(fl.vertices[i])) for i in g}
                cone[(a, b)] = tuple(sorted(v for v in images if any(v)))
    top = max(fl.dims.values())
    maximal = [names[f] for f in fl.faces if fl.dims[f] == top]
    out = BaseComplex("polytope-boundary", dims, qranks, lt, proj, cone, maximal,
                      ambient_rank=n, quot=quot,
                      polytope_vertices=tuple(tuple(v) for v in fl.vertices),
                      face_vertices=face_vertices)
    out.check()
    return out


def build_fan_from_polytope(fl):
    """The face fan of a polytope: cones over the proper faces, plus the origin.

    Cells reuse the boundary-complex names, with "0" for the origin cone; the
    cone over a face keeps the face's quotient lattice, so the cells above the
    origin mirror build_base_from_polytope exactly.

    Args:
        fl: a FaceLattice from lattice.face_lattice.
    """
    n = len(fl.vertices[0])
    names = {f: face_cell_name(fl.dims[f], f) for f in fl.faces}
    quot = {"0": quotient_lattice([], n)}
    dims = {"0": 0}
    qranks = {"0": n}
    face_vertices = {"0": ()}
    for f in fl.faces:
        name = names[f]
        q = quotient_lattice([fl.vertices[i] for i in f], n, saturate=True)
        quot[name] = q
        dims[name] = fl.dims[f] + 1
        qranks[name] = q.rank
        face_vertices[name] = tuple(f)
    lt = set()
    proj = {}
    cone = {}
    for f in fl.faces:
        a = names[f]
        lt.add(("0", a))
        proj[("0", a)] = quot[a].proj
        images = {primitive(tuple(fl.vertices[i])) for i in f}
        cone[("0", a)] = tuple(sorted(v for v in images if any(v)))
        for g in fl.faces:
            if f != g and set(f) <= set(g):
                b = names[g]
                lt.add((a, b))
                proj[(a, b)] = matmul(quot[b].proj, quot[a].section)
                images = {primitive(quot[a].project(fl.vertices[i])) for i in g}
                cone[(a, b)] = tuple(sorted(v for v in images if any(v)))
    top = max(fl.dims.values())
    maximal = [names[f] for f in fl.faces if fl.dims[f] == top]
    out = BaseComplex("fan", dims, qranks, lt, proj, cone, maximal,
                      origin="0", ambient_rank=n, quot=quot,
                      polytope_vertices=tuple(tuple(v) for v in fl.vertices),
                      face_vertices=face_vertices)
    out.check()
    return out


def build_base_abstract(dims, qranks, order, proj, cone):
    """A BaseComplex from user-supplied tables, checked against all invariants.

    Args:
        dims: cell name -> dimension.
        qranks: cell name -> rank of Q_cell.
        order: iterable of strict containment pairs; closed transitively here.
        proj: strict pair -> integer matrix; required for every pair in the closure.
        cone: strict pair -> generator tuples; required for every pair in the closure.
    """
    lt = _transitive_closure(order)
    maximal = [c for c in dims if not any(p[0] == c for p in lt)]
    out = BaseComplex("abstract", dims, qranks, lt, proj, cone, maximal)
    out.check()
    return out


def push_character(p, vals):
    """Apply an integer matrix to a character value tuple, multiplicatively."""
    return tuple(prod([v ** e for v, e in zip(vals, row)]) for row in p)


def _character_fractions(vals):
    return tuple(v.to_fraction() for v in vals)


class ClosedGluingData:
    """One value of Q_b ⊗ Q^x for each strict pair a < b of the base."""

    __slots__ = ("base", "values")

    def __init__(self, base, values):
        if set(values) != set(base.lt):
            missing = set(base.lt) - set(values)
            extra = set(values) - set(base.lt)
            raise IndexMismatch(f"closed gluing keys mismatch (missing {sorted(missing)}, extra {sorted(extra)})")
        self.base = base
        self.values = {}
        for pair, vals in values.items():
            vals = tuple(qx(v) for v in vals)
            if len(vals) != base.qranks[pair[1]]:
                raise IndexMismatch(f"closed gluing value for {pair} has length {len(vals)}, expected {base.qranks[pair[1]]}")
            self.values[pair] = vals

    def value(self, a, b):
        if a == b:
            return (ONE,) * self.base.qranks[a]
        return self.values[(a, b)]

    def __mul__(self, other):
        return ClosedGluingData(self.base, {
            pair: tuple(x * y for x, y in zip(vals, other.values[pair]))
            for pair, vals in self.values.items()
        })

    def __eq__(self, other):
        return isinstance(other, ClosedGluingData) and self.values == other.values

    def __hash__(self):
        return hash(tuple(sorted(self.values.items())))


def trivial_closed(base):
    return ClosedGluingData(base, {pair: (ONE,) * base.qranks[pair[1]] for pair in base.lt})


def validate_closed_gluing(base, sbar):
    """Every violated closed cocycle identity, with both rational values."""
    report = []
    for a, b in base.strict_pairs():
        for c in base.cells():
            if (b, c) not in base.lt:
                continue
            lhs = sbar.value(a, c)
            pushed = push_character(base.projection(b, c), sbar.value(a, b))
            rhs = tuple(x * y for x, y in zip(pushed, sbar.value(b, c)))
            for j in range(base.qranks[c]):
                if lhs[j] != rhs[j]:
                    report.append({
                        "kind": "cocycle",
                        "triple": (a, b, c),
                        "index": j,
                        "lhs": lhs[j].to_fraction(),
                        "rhs": rhs[j].to_fraction(),
                    })
    return report


def closed_from_coboundary(base, t):
    """The closed gluing data with value push(t_a) / t_b on each pair a < b."""
    values = {}
    for a, b in base.lt:
        pushed = push_character(base.projection(a, b), tuple(qx(v) for v in t[a]))
        values[(a, b)] = tuple(x * qx(y).inv() for x, y in zip(pushed, t[b]))
    return ClosedGluingData(base, values)


def is_trivial_closed(base, sbar):
    """A witness t with sbar = push(t_a)/t_b on every pair, or None."""
    cells = base.cells()
    index = {}
    for c in cells:
        for i in range(base.qranks[c]):
            index[(c, i)] = len(index)
    rows, rhs = [], []
    for a, b in base.strict_pairs():
        p = base.projection(a, b)
        vals = sbar.value(a, b)
        for j in range(base.qranks[b]):
            row = [0] * len(index)
            for i in range(base.qranks[a]):
                row[index[(a, i)]] += p[j][i]
            row[index[(b, j)]] -= 1
            rows.append(row)
            rhs.append(vals[j])
    sol = solve_mult(rows, rhs, len(index))
    if sol is None:
        return None
    t = {c: tuple(sol[index[(c, i)]] for i in range(base.qranks[c])) for c in cells}
    assert closed_from_coboundary(base, t) == sbar
    return t


class OpenGluingData:
    """A compatible family of character values over the source cell, per strict pair.

    values[(a, b)][rho] is the component of s_(a -> b) on the face rho of a,
    an element of Q_rho ⊗ Q^x.
    """

    __slots__ = ("base", "values")

    def __init__(self, base, values):
        if set(values) != set(base.lt):
            missing = set(base.lt) - set(values)
            extra = set(values) - set(base.lt)
            raise IndexMismatch(f"open gluing keys mismatch (missing {sorted(missing)}, extra {sorted(extra)})")
        self.base = base
        self.values = {}
        for pair, family in values.items():
            faces = set(base.below(pair[0]))
            if set(family) != faces:
                raise IndexMismatch(f"open gluing family for {pair} covers {sorted(family)}, expected {sorted(faces)}")
            clean = {}
            for rho, vals in family.items():
                vals = tuple(qx(v) for v in vals)
                if len(vals) != base.qranks[rho]:
                    raise IndexMismatch(f"open gluing component for {pair} at {rho} has length {len(vals)}, expected {base.qranks[rho]}")
                clean[rho] = vals
            self.values[pair] = clean

    def component(self, a, b, rho):
        if a == b:
            return (ONE,) * self.base.qranks[rho]
        return self.values[(a, b)][rho]

    def __mul__(self, other):
        return OpenGluingData(self.base, {
            pair: {rho: tuple(x * y for x, y in zip(vals, other.values[pair][rho]))
                   for rho, vals in family.items()}
            for pair, family in self.values.items()
        })

    def __eq__(self, other):
        return isinstance(other, OpenGluingData) and self.values == other.values


def trivial_open(base):
    return OpenGluingData(base, {
        pair: {rho: (ONE,) * base.qranks[rho] for rho in base.below(pair[0])}
        for pair in base.lt
    })


def validate_open_gluing(base, s):
    """Every violated family-compatibility or cocycle identity of open gluing data."""
    report = []
    for a, b in base.strict_pairs():
        family = s.values[(a, b)]
        for r1 in base.below(a):
            for r2 in base.below(a):
                if (r1, r2) not in base.lt:
                    continue
                pushed = push_character(base.projection(r1, r2), family[r1])
                for j in range(base.qranks[r2]):
                    if pushed[j] != family[r2][j]:
                        report.append({
                            "kind": "compatibility",
                            "pair": (a, b),
                            "cells": (r1, r2),
                            "index": j,
                            "lhs": pushed[j].to_fraction(),
                            "rhs": family[r2][j].to_fraction(),
                        })
    for a, b in base.strict_pairs():
        for c in base.cells():
            if (b, c) not in base.lt:
                continue
            for rho in base.below(a):
                lhs = s.component(a, c, rho)
                rhs = tuple(x * y for x, y in zip(s.component(b, c, rho), s.component(a, b, rho)))
                for j in range(base.qranks[rho]):
                    if lhs[j] != rhs[j]:
                        report.append({
                            "kind": "cocycle",
                            "triple": (a, b, c),
                            "cell": rho,
                            "index": j,
                            "lhs": lhs[j].to_fraction(),
                            "rhs": rhs[j].to_fraction(),
                        })
    return report


def open_to_closed(base, s):
    """The closed gluing data induced by evaluating each s_e on its source cell and pushing."""
    return ClosedGluingData(base, {
        (a, b): push_character(base.projection(a, b), s.component(a, b, a))
        for a, b in base.lt
    })


def open_from_coboundary(base, t):
    """The open gluing data t_a * t_b^(-1) restricted to the source cell, per pair.

    t maps each cell sigma to a family {rho <= sigma: value in Q_rho ⊗ Q^x}.
    """
    values = {}
    for a, b in base.lt:
        values[(a, b)] = {
            rho: tuple(qx(x) * qx(y).inv() for x, y in zip(t[a][rho], t[b][rho]))
            for rho in base.below(a)
        }
    return OpenGluingData(base, values)


def is_trivial_gluing(base, s):
    """A witness t of cell families with s_e = t_a * t_b^(-1) on every pair, or None.

    Each unknown family is parametrized by its values at the vertices of the
    cell; family compatibility becomes part of the multiplicative system.
    """
    index = {}
    for sigma in base.cells():
        for v in base.vertices_of(sigma):
            for i in range(base.qranks[v]):
                index[(sigma, v, i)] = len(index)
    rows, rhs = [], []
    for sigma in base.cells():
        for rho in base.below(sigma):
            vs = base.vertices_of(rho)
            for w in vs[1:]:
                p0 = base.projection(vs[0], rho)
                pw = base.projection(w, rho)
                for j in range(base.qranks[rho]):
                    row = [0] * len(index)
                    for i in range(base.qranks[vs[0]]):
                        row[index[(sigma, vs[0], i)]] += p0[j][i]
                    for i in range(base.qranks[w]):
                        row[index[(sigma, w, i)]] -= pw[j][i]
                    rows.append(row)
                    rhs.append(ONE)
    for a, b in base.strict_pairs():
        for rho in base.below(a):
            v = base.vertices_of(rho)[0]
            p = base.projection(v, rho)
            vals = s.values[(a, b)][rho]
            for j in range(base.qranks[rho]):
                row = [0] * len(index)
                for i in range(base.qranks[v]):
                    row[index[(a, v, i)]] += p[j][i]
                    row[index[(b, v, i)]] -= p[j][i]
                rows.append(row)
                rhs.append(vals[j])
    sol = solve_mult(rows, rhs, len(index))
    if sol is None:
        return None
    t = {}
    for sigma in base.cells():
        t[sigma] = {}
        for rho in base.below(sigma):
            v = base.vertices_of(rho)[0]
            x = tuple(sol[index[(sigma, v, i)]] for i in range(base.qranks[v]))
            t[sigma][rho] = push_character(base.projection(v, rho), x)
    assert open_from_coboundary(base, t) == s
    return t
