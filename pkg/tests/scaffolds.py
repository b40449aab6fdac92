"""Shared builders for test scenarios: bases, covers, slope tables."""

from fractions import Fraction
from functools import lru_cache

from tropglue.base import build_base_from_polytope, build_fan_from_polytope
from tropglue.cover import CoveringData, MultiSection, identity_cover, slopes_from_weights
from tropglue.lattice import face_lattice

SQUARE = [(1, 1), (-1, 1), (-1, -1), (1, -1)]
TRIANGLE = [(1, 0), (0, 1), (-1, -1)]
CUBE = [(x, y, z) for x in (1, -1) for y in (1, -1) for z in (1, -1)]

EDGE_R, EDGE_T, EDGE_L, EDGE_B = "c1.0-3", "c1.0-1", "c1.1-2", "c1.2-3"


@lru_cache(maxsize=None)
def square_base():
    return build_base_from_polytope(face_lattice(SQUARE))


@lru_cache(maxsize=None)
def cube_base():
    return build_base_from_polytope(face_lattice(CUBE))


@lru_cache(maxsize=None)
def p2_fan():
    return build_fan_from_polytope(face_lattice(TRIANGLE))


@lru_cache(maxsize=None)
def cube_fan():
    return build_fan_from_polytope(face_lattice(CUBE))


@lru_cache(maxsize=None)
def square_fan():
    return build_fan_from_polytope(face_lattice(SQUARE))


def square_weights(a=1, b=1):
    """Ambient weights of the balanced degree-(a, b) function on the square."""
    return {EDGE_R: (0, 0), EDGE_T: (-a, a), EDGE_L: (-a - b, a - b), EDGE_B: (-b, -b)}


def facet_weight(base, name):
    """The constant coordinate of a cube facet, as a functional."""
    verts = [base.polytope_vertices[i] for i in base.face_vertices[name]]
    return tuple(1 if all(v[j] == 1 for v in verts)
                 else -1 if all(v[j] == -1 for v in verts) else 0
                 for j in range(len(verts[0])))


def identity_weights(base, table):
    return {s + "^0": table[s] for s in base.maximal}


def identity_section(base, table):
    cov = identity_cover(base)
    return MultiSection(base, cov, slopes_from_weights(
        base, cov, identity_weights(base, table)))


def square_section(a=1, b=1):
    return identity_section(square_base(), square_weights(a, b))


def cube_section():
    base = cube_base()
    return identity_section(base, {s: facet_weight(base, s) for s in base.maximal})


def fan_section():
    """Identity cover over the cube fan, sloped by the cube's support function."""
    fan = cube_fan()
    return identity_section(fan, {s: facet_weight(cube_base(), s) for s in fan.maximal})


def tagged_cover(base, sheets, degree):
    """A cover from per-cell sheet tags; '*' marks a lift absorbing all sheets."""
    lifts = {c: tuple(f"{c}^{t}" for t in sheets[c]) for c in base.dims}
    down = {}
    for (x, y) in base.lt:
        down[(x, y)] = {f"{y}^{t}": f"{x}^{t if t in sheets[x] else '*'}" for t in sheets[y]}
    mult = {f"{c}^{t}": degree // len(sheets[c]) for c in base.dims for t in sheets[c]}
    return CoveringData(base, lifts, down, mult)


RAMIFIED_SHEETS = {"0": ["*"], "v0": ["*"], "v1": ["*"], "v2": ["a", "b"],
                   "c1.0-1": ["*"], "c1.0-2": ["a", "b"], "c1.1-2": ["a", "b"]}
RAMIFIED_WEIGHTS = {"c1.1-2^a": (1, 0), "c1.1-2^b": (-1, 0), "c1.0-1^*": (0, 0),
                    "c1.0-2^a": (0, 1), "c1.0-2^b": (0, -1)}


@lru_cache(maxsize=None)
def ramified_p2():
    """A degree-2 cover of the plane fan ramified over one ray, with its slopes."""
    base = p2_fan()
    cov = tagged_cover(base, RAMIFIED_SHEETS, 2)
    ms = MultiSection(base, cov, slopes_from_weights(base, cov, RAMIFIED_WEIGHTS))
    return base, cov, ms


def thick_cover(base, mult=2):
    """One lift per cell carrying a uniform multiplicity."""
    lifts = {c: (c + "~",) for c in base.dims}
    down = {(a, b): {b + "~": a + "~"} for (a, b) in base.lt}
    return CoveringData(base, lifts, down, {c + "~": mult for c in base.dims})


def paired_section(base, table_p, table_q):
    """A two-sheet split cover sloped by one weight table per sheet."""
    cov = tagged_cover(base, {c: ["p", "q"] for c in base.dims}, 2)
    weights = {}
    for s in base.maximal:
        weights[s + "^p"] = table_p[s]
        weights[s + "^q"] = table_q[s]
    return MultiSection(base, cov, slopes_from_weights(base, cov, weights))


def lift_potential(cover, values):
    """A specialization cocycle from a potential on lifts: f(x, y) = v(y)/v(x)."""
    vals = {x: Fraction(v) for x, v in values.items()}
    out = {}
    for (a, b) in cover.base.lt:
        for y in cover.lifts[b]:
            x = cover.down[(a, b)][y]
            out[(x, y)] = vals[y] / vals[x]
    return out
