"""Block decomposition, the extracted multi-section, and bundle restriction."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scaffolds import (
    SQUARE,
    cube_base,
    cube_section,
    fan_section,
    identity_section,
    paired_section,
    ramified_p2,
    square_base,
    square_fan,
    square_section,
    square_weights,
    thick_cover,
)
from tropglue.base import closed_from_coboundary, trivial_closed
from tropglue.cover import (
    MultiSection,
    fan_structure_at,
    identity_cover,
    is_separable,
    localize,
    slopes_from_weights,
    validate_covering,
)
from tropglue.errors import IndexMismatch, NotEquivariant, WellDefinednessFailure
from tropglue.extract import (
    associated_multisection,
    block_decompose,
    check_covering_morphism_to_source,
    descriptor_gauge,
    restrict_toric_bundle,
    roundtrip_check,
    validate_tropical_structure,
)
from tropglue.glue import (
    BraneData,
    SheafDescriptor,
    assemble_sheaf,
    validate_brane,
    witness_from_potential,
)
from tropglue.kaneyama import identity_H, matched_identity_G
from tropglue.lattice import dot, face_lattice, vec_add, vec_sub
from tropglue.obstruction import CechCochain, build_nerve

F = Fraction

POOL = (F(2), F(1, 3), F(-5), F(7, 2), F(3), F(-1, 2), F(11, 4), F(-7, 3))


def cell_potential(base, offset=0):
    out = {}
    k = offset
    for c in base.cells():
        vals = []
        for _ in range(base.qranks[c]):
            vals.append(POOL[k % len(POOL)])
            k += 1
        out[c] = tuple(vals)
    return out


def trivial_brane(ms):
    cov = ms.cover
    return BraneData(matched_identity_G(cov), identity_H(cov),
                     CechCochain.ones(build_nerve(cov), 1), trivial_closed(ms.base))


def potential_brane(ms, offset=0):
    t = cell_potential(ms.base, offset)
    return BraneData(matched_identity_G(ms.cover), identity_H(ms.cover),
                     witness_from_potential(ms, t),
                     closed_from_coboundary(ms.base, t))


def flat_square():
    base = square_base()
    return identity_section(base, {s: (0, 0) for s in base.maximal})


def thick_square_section():
    base = square_base()
    cov = thick_cover(base, 2)
    w = square_weights(1, 1)
    return MultiSection(base, cov, slopes_from_weights(
        base, cov, {s + "~": w[s] for s in base.maximal}))


def scenario(name):
    if name == "square":
        ms = square_section(2, 1)
        return ms, potential_brane(ms, 1)
    if name == "cube":
        ms = cube_section()
        return ms, potential_brane(ms, 2)
    if name == "fan":
        ms = fan_section()
        return ms, potential_brane(ms, 3)
    if name == "ramified":
        ms = ramified_p2()[2]
        return ms, potential_brane(ms, 4)
    ms = paired_section(square_base(), square_weights(2, 1), square_weights(0, 3))
    return ms, potential_brane(ms, 5)


SCENARIOS = ("square", "cube", "fan", "ramified", "pair")


def brute_blocks(sd, tau):
    """Partition by repeated pairwise merging, with dot-product survival."""
    base = sd.base
    labels = [lab for s in base.maximal_above(tau) for lab in sd.frames[s]]
    groups = [{lab} for lab in labels]
    changed = True
    while changed:
        changed = False
        for (s1, s2), anchors in sd.transitions.items():
            mu = base.meet(s1, s2)
            if mu is None or not base.leq(tau, mu):
                continue
            for v in base.vertices_of(tau):
                gens = base.cone_of(v, tau) if v != tau else ()
                for (a, b), (_, e) in anchors[v].entries.items():
                    if any(dot(e, g) != 0 for g in gens):
                        continue
                    ga = next(g for g in groups if a in g)
                    gb = next(g for g in groups if b in g)
                    if ga is not gb:
                        groups.remove(ga)
                        groups.remove(gb)
                        groups.append(ga | gb)
                        changed = True
    return {frozenset(g) for g in groups}


@pytest.mark.parametrize("name", SCENARIOS)
def test_block_decompose_matches_assembled_partition(name):
    ms, d = scenario(name)
    sd = assemble_sheaf(ms, d)
    for tau in sd.base.cells():
        parts = block_decompose(sd, tau)
        assert parts == sd.blocks[tau]
        assert parts == tuple(sorted(tuple(sorted(g))
                                     for g in brute_blocks(sd, tau)))


@pytest.mark.parametrize("name", SCENARIOS)
def test_certificate_covers_every_cell_and_pair(name):
    ms, d = scenario(name)
    sd = assemble_sheaf(ms, d)
    cert = validate_tropical_structure(sd)
    assert set(cert.blocks) == set(sd.base.cells())
    for tau, parts in cert.blocks.items():
        for P in parts:
            assert cert.ranks[(tau, P)] >= 1
    for (t1, t2) in sd.base.lt:
        for P in cert.blocks[t2]:
            parent = cert.parent[(t1, t2, P)]
            assert set(P) <= set(parent)
            chi = cert.chi[(t1, t2, P)]
            assert len(chi) == sd.base.qranks[t1]
            assert all(isinstance(c, int) for c in chi)


def test_characters_telescope_along_cell_chains():
    ms, d = scenario("cube")
    sd = assemble_sheaf(ms, d)
    cert = validate_tropical_structure(sd)
    base = sd.base
    block_of = {tau: {lab: P for P in cert.blocks[tau] for lab in P}
                for tau in base.cells()}
    for (t1, t2) in sorted(base.lt):
        for (u, t3) in sorted(base.lt):
            if u != t2:
                continue
            p = base.projection(t1, t2)
            for P in cert.blocks[t3]:
                mid = block_of[t2][P[0]]
                upper = cert.chi[(t2, t3, P)]
                pulled = tuple(sum(w * row[j] for w, row in zip(upper, p))
                               for j in range(base.qranks[t1]))
                assert cert.chi[(t1, t3, P)] == vec_add(
                    cert.chi[(t1, t2, mid)], pulled)


def test_perturbed_vertex_weight_is_rejected():
    ms, d = scenario("square")
    sd = assemble_sheaf(ms, d)
    tau = sorted(t for t in sd.base.cells() if sd.base.qranks[t] == 2)[0]
    lab = next(iter(sd.weights[tau]))
    weights = {t: dict(sd.weights[t]) for t in sd.weights}
    weights[tau][lab] = vec_add(weights[tau][lab], (1, 0))
    broken = SheafDescriptor(sd.base, sd.cover, sd.rank, sd.frames,
                             sd.transitions, weights, sd.blocks, sd.sbar)
    with pytest.raises(NotEquivariant):
        validate_tropical_structure(broken)


def test_non_constant_character_is_rejected():
    ms, d = scenario("cube")
    sd = assemble_sheaf(ms, d)
    base = sd.base
    edge = next(t for t in base.cells()
                if base.qranks[t] == 1 and len(base.maximal_above(t)) == 2)
    lab = next(iter(sd.weights[edge]))
    weights = {t: dict(sd.weights[t]) for t in sd.weights}
    weights[edge][lab] = vec_add(weights[edge][lab], (3,))
    broken = SheafDescriptor(base, sd.cover, sd.rank, sd.frames,
                             sd.transitions, weights, sd.blocks, sd.sbar)
    with pytest.raises(NotEquivariant, match="character"):
        validate_tropical_structure(broken)


def test_trivial_square_extracts_the_identity_section():
    ms = flat_square()
    sd = assemble_sheaf(ms, trivial_brane(ms))
    ms2, d2 = associated_multisection(sd)
    for tau in sd.base.cells():
        assert len(ms2.cover.lifts[tau]) == 1
        assert ms2.cover.mult[ms2.cover.lifts[tau][0]] == 1
    assert all(m == (0,) * len(m) for m in ms2.slopes.values())
    assert validate_brane(ms2, d2) == []
    report = roundtrip_check(ms, trivial_brane(ms))
    assert report["pass"] and report["equal"] and report["weights_match"]
    assert all(v == 1 for v in report["gauge"].values())


def test_direct_sum_extracts_the_double_cover():
    ms, d = scenario("pair")
    sd = assemble_sheaf(ms, d)
    assert sd.rank == 2
    ms2, _ = associated_multisection(sd)
    for tau in sd.base.cells():
        assert len(ms2.cover.lifts[tau]) == 2
        assert all(ms2.cover.mult[x] == 1 for x in ms2.cover.lifts[tau])
    fold = check_covering_morphism_to_source(ms, d)
    assert fold["pass"]
    tables = {}
    for (x, s), m in ms2.slopes.items():
        tables.setdefault(fold["fold"][x], set()).add(m)
    for src, ms_values in tables.items():
        assert len(ms_values) <= 2


def test_ramified_vertex_block_stays_irreducible():
    ms, d = scenario("ramified")
    sd = assemble_sheaf(ms, d)
    ms2, d2 = associated_multisection(sd)
    cov = ms.cover
    fold = check_covering_morphism_to_source(ms, d)
    assert fold["pass"]
    for tau in sd.base.cells():
        merged = [x for x in cov.lifts[tau] if cov.mult[x] == 2]
        for x in merged:
            above = [z for z in ms2.cover.lifts[tau] if fold["fold"][z] == x]
            assert len(above) == 1
            assert ms2.cover.mult[above[0]] == 2
    assert validate_brane(ms2, d2) == []


def test_thick_cover_extraction_folds_two_lifts_onto_one():
    ms = thick_square_section()
    d = potential_brane(ms, 6)
    sd = assemble_sheaf(ms, d)
    ms2, _ = associated_multisection(sd)
    fold = check_covering_morphism_to_source(ms, d)
    assert fold["pass"]
    for tau in sd.base.cells():
        assert len(ms2.cover.lifts[tau]) == 2
        images = {fold["fold"][x] for x in ms2.cover.lifts[tau]}
        assert len(images) == 1


@pytest.mark.parametrize("name", SCENARIOS)
def test_roundtrip_reproduces_the_descriptor_verbatim(name):
    ms, d = scenario(name)
    report = roundtrip_check(ms, d)
    assert report["pass"]
    assert report["equal"]
    assert report["weights_match"]
    assert all(v == 1 for v in report["gauge"].values())


@pytest.mark.parametrize("name", SCENARIOS)
def test_extraction_fold_is_a_covering_morphism(name):
    ms, d = scenario(name)
    report = check_covering_morphism_to_source(ms, d)
    assert report["pass"]
    assert report["issues"] == []
    assert set(report["fold"].values()) == set(ms.cover.all_lifts())


def test_rescaled_splitting_still_roundtrips():
    ms = square_section(1, 1)
    d = trivial_brane(ms)
    pair = sorted(d.k.values)[0]
    values = {f: (v * 3 if f == pair else v) for f, v in d.k.values.items()}
    d2 = BraneData(d.g, d.h, CechCochain(d.k.nerve, 1, values), d.sbar)
    assert validate_brane(ms, d2) == []
    report = roundtrip_check(ms, d2)
    assert report["pass"] and report["equal"]


@settings(max_examples=8, deadline=None)
@given(data=st.data())
def test_random_potentials_roundtrip(data):
    ms = cube_section()
    t = {c: tuple(data.draw(st.sampled_from(POOL))
                  for _ in range(ms.base.qranks[c])) for c in ms.base.cells()}
    d = BraneData(matched_identity_G(ms.cover), identity_H(ms.cover),
                  witness_from_potential(ms, t),
                  closed_from_coboundary(ms.base, t))
    report = roundtrip_check(ms, d)
    assert report["pass"] and report["equal"] and report["weights_match"]


def test_gauge_solver_recovers_a_frame_rescaling():
    ms, d = scenario("square")
    sd = assemble_sheaf(ms, d)
    target = next(iter(sd.frames[sd.base.maximal[0]]))

    def scale(lab):
        return F(5) if lab == target else F(1)

    moved = {}
    for pair, anchors in sd.transitions.items():
        moved[pair] = {v: mm.map_entries(lambda a, b, c, e: c * scale(a) / scale(b))
                       for v, mm in anchors.items()}
    other = SheafDescriptor(sd.base, sd.cover, sd.rank, sd.frames, moved,
                            sd.weights, sd.blocks, sd.sbar)
    match = {lab: lab for s in sd.base.maximal for lab in sd.frames[s]}
    gauge = descriptor_gauge(sd, other, match)
    assert gauge is not None
    for (s1, s2), anchors in sd.transitions.items():
        for v, mm in anchors.items():
            for (a, b), (c, _) in mm.entries.items():
                got = other.transitions[(s1, s2)][v].entries[(a, b)][0]
                assert got * gauge[(s1, a)] == c * gauge[(s2, b)]


def test_gauge_solver_rejects_different_weights():
    ms1 = square_section(1, 1)
    ms2 = square_section(2, 1)
    sd1 = assemble_sheaf(ms1, trivial_brane(ms1))
    sd2 = assemble_sheaf(ms2, trivial_brane(ms2))
    match = {lab: lab.__class__((lab[0].replace("^0", "^0"), lab[1]))
             for s in sd1.base.maximal for lab in sd1.frames[s]}
    match = {lab: lab for s in sd1.base.maximal for lab in sd1.frames[s]}
    assert descriptor_gauge(sd1, sd2, match) is None


def test_restricted_line_bundle_matches_the_direct_glue():
    fl = face_lattice(SQUARE)
    fan = square_fan()
    cov = identity_cover(fan)
    cs = MultiSection(fan, cov, slopes_from_weights(
        fan, cov, {s + "^0": square_weights(2, 1)[s] for s in fan.maximal}))
    sd = restrict_toric_bundle(fl, cs, matched_identity_G(cov))
    assert sd.rank == 1
    ms = square_section(2, 1)
    direct = assemble_sheaf(ms, trivial_brane(ms))

    def positional(entries):
        return {(a[1], b[1]): ce for (a, b), ce in entries.items()}

    assert set(sd.transitions) == set(direct.transitions)
    for pair, anchors in direct.transitions.items():
        for v, mm in anchors.items():
            assert positional(sd.transitions[pair][v].entries) == \
                positional(mm.entries)


def test_restricted_sum_extracts_both_summands():
    fl = face_lattice(SQUARE)
    fan = square_fan()
    cs = paired_section(fan, square_weights(2, 1), square_weights(0, 3))
    sd = restrict_toric_bundle(fl, cs, matched_identity_G(cs.cover))
    assert sd.rank == 2
    ms2, d2 = associated_multisection(sd)
    assert validate_brane(ms2, d2) == []
    for tau in sd.base.cells():
        assert len(ms2.cover.lifts[tau]) == 2
    seen = {ms2.slope(x, s) for (x, s) in ms2.slopes if sd.base.qranks[
        ms2.cover.cell_of[x]] == 2}
    want = set()
    for table in (square_weights(2, 1), square_weights(0, 3)):
        want.update(table.values())
    assert seen == want


def test_boundary_stars_localize_like_the_fan():
    fl = face_lattice(SQUARE)
    fan = square_fan()
    cs = paired_section(fan, square_weights(2, 1), square_weights(0, 3))
    sd = restrict_toric_bundle(fl, cs, matched_identity_G(cs.cover))
    ms2, _ = associated_multisection(sd)
    name = {}
    source = {}
    for tau in sd.base.cells():
        for i, P in enumerate(sd.blocks[tau]):
            x = f"{tau}|{i:03d}"
            name[(tau, P)] = x
            srcs = {sd.cover.restrict(tau, lab[0]) for lab in P}
            assert len(srcs) == 1
            source[x] = srcs.pop()
            for lab in P:
                source[f"{sd.base.maximal_above(tau)[0]}"] = source[x]
    for x in ms2.cover.all_lifts():
        local = fan_structure_at(ms2, x)
        fanlocal = localize(cs, source[x])
        assert set(local.base.cells()) == set(fanlocal.base.cells())
        assert local.base.lt == fanlocal.base.lt
        assert local.base.qranks == fanlocal.base.qranks
        for (a, b) in sorted(local.base.lt):
            assert local.base.cone_of(a, b) == fanlocal.base.cone_of(a, b)
        origin = local.base.origin
        tops = local.cover.maximal_lifts_above(x)
        for i, s1 in enumerate(tops):
            for s2 in tops[i + 1:]:
                lhs = vec_sub(local.slope(x, s1), local.slope(x, s2))
                rhs = vec_sub(fanlocal.slope(source[x], source[s1]),
                              fanlocal.slope(source[x], source[s2]))
                assert lhs == rhs
        for z in local.cover.all_lifts():
            if z == x:
                continue
            for s in local.cover.maximal_lifts_above(z):
                assert local.slope(z, s) == fanlocal.slope(source[z], source[s])


def test_separability_survives_localization():
    fan = square_fan()
    cs = paired_section(fan, square_weights(2, 1), square_weights(0, 3))
    ok, witness = is_separable(cs)
    assert ok, witness
    for x in cs.cover.all_lifts():
        good, pair = is_separable(localize(cs, x))
        assert good, (x, pair)


def test_restriction_rejects_inconsistent_fan_data():
    fl = face_lattice(SQUARE)
    fan = square_fan()
    cov = identity_cover(fan)
    broken = dict(square_weights(2, 1))
    broken["c1.0-1"] = (5, 5)
    cs = MultiSection(fan, cov, slopes_from_weights(
        fan, cov, {s + "^0": broken[s] for s in fan.maximal}))
    with pytest.raises(WellDefinednessFailure):
        restrict_toric_bundle(fl, cs, matched_identity_G(cov))


def test_restriction_rejects_a_mismatched_polytope():
    fan = square_fan()
    cov = identity_cover(fan)
    cs = MultiSection(fan, cov, slopes_from_weights(
        fan, cov, {s + "^0": square_weights(1, 1)[s] for s in fan.maximal}))
    with pytest.raises(IndexMismatch):
        restrict_toric_bundle(face_lattice([(1, 0), (0, 1), (-1, -1)]),
                              cs, matched_identity_G(cov))
