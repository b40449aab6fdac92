"""Cech complex on the lift poset, obstruction cochain, coboundary solver."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scaffolds import (
    cube_base,
    cube_section,
    facet_weight,
    fan_section,
    identity_section,
    square_section,
)
from tropglue.base import ClosedGluingData, closed_from_coboundary, trivial_closed
from tropglue.cover import MultiSection, identity_cover, validate_slopes
from tropglue.errors import IndexMismatch, NotClosed, WellDefinednessFailure
from tropglue.obstruction import (
    CechCochain,
    build_nerve,
    cech_differential,
    obstruction_cochain,
    obstruction_hom_check,
    representative_shift_check,
    solve_coboundary,
)
from tropglue.ratmult import ONE, eval_twist, prod, qx

F = Fraction

POOL = (F(2), F(1, 3), F(-5), F(7, 2), F(3), F(-1, 2), F(11, 4), F(-7, 3))


def cell_potential(base, offset=0):
    """A deterministic nonzero tuple per cell, sized by its quotient rank."""
    out = {}
    k = offset
    for c in base.cells():
        vals = []
        for _ in range(base.qranks[c]):
            vals.append(POOL[k % len(POOL)])
            k += 1
        out[c] = tuple(vals)
    return out


def test_nerve_flag_counts():
    cube = build_nerve(cube_section().cover)
    assert len(cube.chains(0)) == 26
    assert len(cube.chains(2)) == 48
    assert cube.chains(3) == ()
    square = build_nerve(square_section().cover)
    assert len(square.chains(1)) == 8
    assert square.chains(2) == ()
    fan = build_nerve(fan_section().cover)
    assert len(fan.chains(1)) == 98
    assert len(fan.chains(2)) == 120
    assert len(fan.chains(3)) == 48


def test_cochain_support_is_checked():
    nerve = build_nerve(square_section().cover)
    pairs = nerve.chains(1)
    with pytest.raises(IndexMismatch):
        CechCochain(nerve, 1, {flag: 1 for flag in pairs[1:]})
    values = {flag: 1 for flag in pairs}
    values[("v0^0", "v1^0")] = 2
    with pytest.raises(IndexMismatch):
        CechCochain(nerve, 1, values)
    c = CechCochain.ones(nerve, 1)
    with pytest.raises(IndexMismatch):
        c.value(("v0^0", "v1^0"))


def test_trivial_gluing_gives_identity_cochain():
    ms = cube_section()
    c = obstruction_cochain(ms, trivial_closed(ms.base))
    assert len(c.values) == 48
    assert c.is_one()


def test_zero_slopes_kill_any_gluing_data():
    base = cube_base()
    ms = identity_section(base, {s: (0, 0, 0) for s in base.maximal})
    junk = ClosedGluingData(base, {
        pair: (F(5, 3),) * base.qranks[pair[1]] for pair in base.lt})
    assert obstruction_cochain(ms, junk).is_one()


def test_flag_values_match_direct_evaluation():
    ms = fan_section()
    base = ms.base
    assert validate_slopes(ms)[0] == []
    sbar = closed_from_coboundary(base, cell_potential(base))
    c = obstruction_cochain(ms, sbar)
    cover = ms.cover
    for (x1, x2, x3), got in c.values.items():
        t1, t2, t3 = cover.cell_of[x1], cover.cell_of[x2], cover.cell_of[x3]
        for s in cover.maximal_lifts_above(x3):
            direct = (eval_twist(sbar.value(t1, t2), ms.slope(x2, s))
                      * eval_twist(sbar.value(t2, t3), ms.slope(x3, s))
                      * eval_twist(sbar.value(t1, t3), ms.slope(x3, s)).inv())
            assert direct == got


def test_coboundary_gluing_data_has_coboundary_obstruction():
    for ms in (cube_section(), fan_section()):
        base = ms.base
        t = cell_potential(base, offset=3)
        sbar = closed_from_coboundary(base, t)
        c = obstruction_cochain(ms, sbar)
        assert cech_differential(c).is_one()
        report, table = validate_slopes(ms)
        assert report == []
        cover = ms.cover
        witness = CechCochain(c.nerve, 1, {
            (x, y): eval_twist(tuple(qx(v) for v in t[cover.cell_of[x]]), table[(x, y)])
            for (x, y) in c.nerve.chains(1)})
        assert cech_differential(witness) == c
        solved = solve_coboundary(c)
        assert solved is not None
        assert cech_differential(solved) == c


@st.composite
def fan_one_cochain(draw):
    nerve = build_nerve(fan_section().cover)
    values = {flag: draw(st.sampled_from(POOL)) for flag in nerve.chains(1)}
    return CechCochain(nerve, 1, values)


@settings(max_examples=10, deadline=None)
@given(fan_one_cochain())
def test_differential_squares_to_one_and_solver_inverts_it(k):
    c = cech_differential(k)
    assert cech_differential(c).is_one()
    solved = solve_coboundary(c)
    assert solved is not None
    assert cech_differential(solved) == c


def test_not_closed_is_rejected():
    nerve = build_nerve(fan_section().cover)
    values = {flag: 1 for flag in nerve.chains(2)}
    values[nerve.chains(2)[0]] = 2
    with pytest.raises(NotClosed):
        solve_coboundary(CechCochain(nerve, 2, values))


def _det3(rows):
    (a, b, c), (d, e, f), (g, h, i) = rows
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def cube_orientation():
    """The fundamental 2-cocycle of the barycentric sphere, as flag signs."""
    base = cube_base()
    cover = identity_cover(base)
    centers = {}
    for c in base.cells():
        pts = [base.polytope_vertices[i] for i in base.face_vertices[c]]
        centers[c] = tuple(Fraction(sum(p[j] for p in pts), len(pts)) for j in range(3))
    nerve = build_nerve(cover)
    eps = {}
    for flag in nerve.chains(2):
        a, b, c = (centers[cover.cell_of[x]] for x in flag)
        n = facet_weight(base, cover.cell_of[flag[2]])
        d = _det3([tuple(p - q for p, q in zip(b, a)),
                   tuple(p - q for p, q in zip(c, a)), n])
        assert d != 0
        eps[flag] = 1 if d > 0 else -1
    return nerve, eps


def test_orientation_class_is_closed_but_not_a_coboundary():
    nerve, eps = cube_orientation()
    boundary = {}
    for flag, sign in eps.items():
        for i, inc in ((0, 1), (1, -1), (2, 1)):
            face = flag[:i] + flag[i + 1:]
            boundary[face] = boundary.get(face, 0) + inc * sign
    assert set(boundary.values()) == {0}
    c = CechCochain(nerve, 2, {flag: F(2) ** sign for flag, sign in eps.items()})
    assert cech_differential(c).is_one()
    assert solve_coboundary(c) is None
    pairing = prod(c.value(flag) ** eps[flag] for flag in eps)
    assert pairing == qx(2) ** len(eps)
    k = CechCochain(nerve, 1, {(x, y): POOL[(len(x) + 3 * len(y)) % len(POOL)]
                               for (x, y) in nerve.chains(1)})
    dk = cech_differential(k)
    assert prod(dk.value(flag) ** eps[flag] for flag in eps) == ONE


def test_obstruction_is_a_homomorphism():
    for ms in (cube_section(), fan_section()):
        base = ms.base
        s1 = closed_from_coboundary(base, cell_potential(base, offset=1))
        s2 = closed_from_coboundary(base, cell_potential(base, offset=5))
        assert obstruction_hom_check(ms, s1, s2)
        inverse = closed_from_coboundary(base, {
            c: tuple(ONE / qx(v) for v in vals)
            for c, vals in cell_potential(base, offset=1).items()})
        assert obstruction_cochain(ms, s1 * inverse).is_one()


def test_representative_shifts_move_by_a_coboundary():
    for ms in (cube_section(), fan_section()):
        base = ms.base
        sbar = closed_from_coboundary(base, cell_potential(base, offset=2))
        assert representative_shift_check(ms, sbar, {})
        shifts = {}
        for i, x in enumerate(sorted(ms.cover.all_lifts())):
            qr = base.qranks[ms.cover.cell_of[x]]
            shifts[x] = tuple((i + j) % 3 - 1 for j in range(qr))
        assert representative_shift_check(ms, sbar, shifts)
        old = solve_coboundary(obstruction_cochain(ms, sbar))
        shifted = {}
        for (x, s), m in ms.slopes.items():
            shifted[(x, s)] = tuple(a + b for a, b in zip(m, shifts[x]))
        new_ms = MultiSection(base, ms.cover, shifted)
        new = solve_coboundary(obstruction_cochain(new_ms, sbar))
        assert (old is None) == (new is None)


def test_square_nerve_carries_no_obstruction():
    ms = square_section()
    sbar = closed_from_coboundary(ms.base, cell_potential(ms.base, offset=4))
    c = obstruction_cochain(ms, sbar)
    assert c.values == {}
    assert c.is_one()
    solved = solve_coboundary(c)
    assert solved is not None and cech_differential(solved) == c


def test_disagreeing_charts_are_a_hard_error():
    ms = fan_section()
    sbar = trivial_closed(ms.base)
    sbar.values[("v0", "c1.0-1")] = (qx(3),)
    with pytest.raises(WellDefinednessFailure):
        obstruction_cochain(ms, sbar)
