from fractions import Fraction

import pytest

from idemq.fields import QQ
from idemq.complexes import (
    ChainMap,
    check_chain_map,
    check_complex,
    cone,
    homology_data,
    homology_dim,
    homology_map_matrix,
    hom_complex,
    identity_map,
    ideal_resolution,
    k_strands,
    lift_chain_map,
    minimal_resolution,
    minimize,
    push_strand_vec,
    strand_basis,
    strand_matrix,
    RingStrands,
    tensor_complexes,
    tensor_maps,
    unit_complex,
)
from idemq.rings import LevelRing, RingSpec, VarInfo, make_level_ring

F0 = Fraction(0)


def _ring(a=3, level=0):
    spec = RingSpec(
        field=QQ,
        root_base=2,
        variables=(VarInfo("x", True),),
        truncations=((Fraction(a),),),
    )
    return make_level_ring(spec, level)


# ---------- minimal resolutions ----------


def test_resolution_of_k_is_periodic():
    # R = K[x]/x^3: ... -> R --x^2--> R --x--> R -> K, ranks all 1
    ring = _ring(a=3)
    res = minimal_resolution(ring, ((1,),), dmax=4, wmax=Fraction(8))
    check_complex(res)
    for d in range(5):
        assert res.rank(d) == 1
    assert res.diff[1][(0, 0)] == {(1,): 1}
    assert res.diff[2][(0, 0)] == {(2,): 1}
    assert res.diff[3][(0, 0)] == {(1,): 1}
    # generator weights 0, 1, 3, 4, 6
    assert [res.gens[d][0].weight for d in range(5)] == [0, 1, 3, 4, 6]


def test_resolution_is_acyclic_in_positive_degrees():
    ring = _ring(a=3)
    res = minimal_resolution(ring, ((1,),), dmax=3, wmax=Fraction(6))
    prov = RingStrands(ring)
    for d in (1, 2):
        for w in (F0, Fraction(1), Fraction(2), Fraction(3), Fraction(4)):
            assert homology_dim(res, d, w, prov) == 0
    # H_0 = K: dim 1 at weight 0, nothing above
    assert homology_dim(res, 0, F0, prov) == 1
    assert homology_dim(res, 0, Fraction(1), prov) == 0


def test_resolution_weight_truncation_is_exact_below_bound():
    ring = _ring(a=3)
    full = minimal_resolution(ring, ((1,),), dmax=4, wmax=Fraction(8))
    cut = minimal_resolution(ring, ((1,),), dmax=4, wmax=Fraction(3))
    # gens above weight 3 are dropped, the rest agree
    assert [g.weight for d in range(3) for g in cut.gens_at(d)] == [
        g.weight for d in range(3) for g in full.gens_at(d)
    ]
    assert cut.rank(3) == 0


def test_tor_of_k_against_k():
    # Tor_d(K, K) over K[x]/x^3 is K in every degree, in weights 0,1,3,4
    ring = _ring(a=3)
    res = minimal_resolution(ring, ((1,),), dmax=3, wmax=Fraction(6))
    ks = k_strands(ring)
    want = {0: F0, 1: Fraction(1), 2: Fraction(3), 3: Fraction(4)}
    for d, w in want.items():
        assert homology_dim(res, d, w, ks) == 1
        assert homology_dim(res, d, w + Fraction(1, 2), ks) == 0


def test_resolution_at_level_one():
    # level 1: same shape with x^(1/2) steps
    ring = _ring(a=2, level=1)
    res = minimal_resolution(ring, ((1,),), dmax=2, wmax=Fraction(4))
    check_complex(res)
    assert res.diff[1][(0, 0)] == {(1,): 1}
    # x^(1/2) * x^(3/2) = x^2 = 0
    assert res.diff[2][(0, 0)] == {(3,): 1}


def test_two_var_resolution_is_koszul_times_periodic():
    spec = RingSpec(
        field=QQ,
        root_base=2,
        variables=(VarInfo("x", True), VarInfo("y", True)),
        truncations=((Fraction(2), Fraction(0)), (Fraction(0), Fraction(2))),
    )
    ring = make_level_ring(spec, 0)
    res = minimal_resolution(ring, ((1, 0), (0, 1)), dmax=3, wmax=Fraction(6))
    check_complex(res)
    # Tor of K over K[x]/x^2 (x) K[y]/y^2: dims C(d+1, 1) by multiplicativity
    assert [res.rank(d) for d in range(4)] == [1, 2, 3, 4]


def test_ideal_resolution_shifts():
    ring = _ring(a=3)
    resi = ideal_resolution(ring, [(1,)], dmax=3, wmax=Fraction(8))
    check_complex(resi)
    assert resi.rank(0) == 1
    assert resi.aug == [{(1,): 1}]
    # first differential of the ideal resolution is x^2
    assert resi.diff[1][(0, 0)] == {(2,): 1}


# ---------- strand mechanics ----------


def test_strand_basis_and_matrix_shapes():
    ring = _ring(a=3)
    res = minimal_resolution(ring, ((1,),), dmax=2, wmax=Fraction(6))
    prov = RingStrands(ring)
    sb = strand_basis(res, 1, Fraction(2), prov)
    # degree 1 generator has weight 1; monomials of weight 1: x
    assert sb.pairs == [(0, (1,))]
    m = strand_matrix(res, 1, Fraction(2), prov)
    assert (m.nrows, m.ncols) == (1, 1)
    assert m.rows[0] == {0: 1}


# ---------- tensor products ----------


def test_tensor_squares_ranks_and_homology():
    ring = _ring(a=3)
    res = minimal_resolution(ring, ((1,),), dmax=3, wmax=Fraction(6))
    sq, info = tensor_complexes(res, res, dmax=3, wmax=Fraction(6))
    check_complex(sq)
    # ranks convolve: 1, 2, 3, 4
    assert [sq.rank(d) for d in range(4)] == [1, 2, 3, 4]
    # res (x) res resolves K (x)^L K: homology is Tor(K, K) again
    prov = RingStrands(ring)
    assert homology_dim(sq, 0, F0, prov) == 1
    assert homology_dim(sq, 1, Fraction(1), prov) == 1
    assert homology_dim(sq, 1, Fraction(2), prov) == 0
    assert homology_dim(sq, 2, Fraction(3), prov) == 1
    assert homology_dim(sq, 2, Fraction(2), prov) == 0


def test_tensor_unit_is_identity():
    ring = _ring(a=3)
    res = minimal_resolution(ring, ((1,),), dmax=3, wmax=Fraction(6))
    t, info = tensor_complexes(res, unit_complex(ring))
    assert [t.rank(d) for d in range(4)] == [res.rank(d) for d in range(4)]
    check_complex(t)


def test_tensor_weight_truncation_drops_heavy_gens():
    ring = _ring(a=3)
    res = minimal_resolution(ring, ((1,),), dmax=3, wmax=Fraction(6))
    t, _ = tensor_complexes(res, res, dmax=3, wmax=Fraction(2))
    # degree-2 pairs have weights 3+0, 1+1, 0+3: only weight 2 survives
    assert [g.weight for g in t.gens_at(2)] == [Fraction(2)]


# ---------- minimize ----------


def test_minimize_kills_contractible_cone():
    ring = _ring(a=3)
    res = minimal_resolution(ring, ((1,),), dmax=3, wmax=Fraction(6))
    c, _ = cone(identity_map(res))
    check_complex(c)
    small = minimize(c)
    assert small.total_rank() == 0


def test_minimize_is_noop_on_minimal_complex():
    ring = _ring(a=3)
    res = minimal_resolution(ring, ((1,),), dmax=3, wmax=Fraction(6))
    sq, _ = tensor_complexes(res, res, dmax=3, wmax=Fraction(6))
    small = minimize(sq)
    assert [small.rank(d) for d in range(4)] == [sq.rank(d) for d in range(4)]


def test_minimize_preserves_homology_and_aug():
    ring = _ring(a=3)
    res = minimal_resolution(ring, ((1,),), dmax=2, wmax=Fraction(4))
    # pad the resolution with a contractible summand: R --1--> R in
    # degrees 1, 0
    from idemq.complexes import FreeComplex, GenInfo

    padded = FreeComplex(
        ring=ring,
        gens={
            0: list(res.gens[0]) + [GenInfo(Fraction(1), "junk0")],
            1: list(res.gens[1]) + [GenInfo(Fraction(1), "junk1")],
            2: list(res.gens[2]),
        },
        diff={
            1: {**res.diff[1], (1, 1): {(0,): 1}},
            2: dict(res.diff[2]),
        },
        aug=[ring.one(), {}],
        aug_quotient=res.aug_quotient,
    )
    check_complex(padded)
    small = minimize(padded)
    check_complex(small)
    assert [small.rank(d) for d in range(3)] == [1, 1, 1]
    assert small.aug == [ring.one()]
    prov = RingStrands(ring)
    for d in (0, 1):
        for w in (F0, Fraction(1), Fraction(2)):
            assert homology_dim(small, d, w, prov) == homology_dim(
                padded, d, w, prov
            )


# ---------- cones ----------


def test_cone_of_augmentation():
    # cone(res(I) -> R) computes R/I derived: here R/(x) = K in degree 0
    ring = _ring(a=3)
    resi = ideal_resolution(ring, [(1,)], dmax=3, wmax=Fraction(8))
    eps = ChainMap(
        src=resi,
        dst=unit_complex(ring),
        entries={0: {(0, 0): dict(resi.aug[0])}},
    )
    check_chain_map(eps)
    c, _ = cone(eps)
    check_complex(c)
    prov = RingStrands(ring)
    assert homology_dim(c, 0, F0, prov) == 1
    assert homology_dim(c, 0, Fraction(1), prov) == 0
    assert homology_dim(c, 0, Fraction(2), prov) == 0
    # the multiplication I -> R is injective: H_1 vanishes
    for w in (F0, Fraction(1), Fraction(2), Fraction(3)):
        assert homology_dim(c, 1, w, prov) == 0


# ---------- chain map lifting ----------


def test_lift_along_level_inclusion():
    spec = _ring(a=2).spec
    r0 = make_level_ring(spec, 0)
    r1 = make_level_ring(spec, 1)
    res0 = minimal_resolution(r0, ((1,),), dmax=4, wmax=Fraction(8))
    # maximal ideal at level 1 is generated by x^(1/2), numerator 1
    res1 = minimal_resolution(r1, ((1,),), dmax=4, wmax=Fraction(8))
    lift = lift_chain_map(res0, res1, ring_map=r0.include_exp)
    check_chain_map(lift)
    # even degrees lift by a unit, odd degrees land in the maximal ideal
    for d in range(4):
        col = lift.column(d, 0)
        elem = col[0]
        if d % 2 == 0:
            assert elem == {(0,): 1}
        else:
            assert all(sum(e) > 0 for e in elem)


def test_lift_identity_is_solved_degreewise():
    ring = _ring(a=3)
    res = minimal_resolution(ring, ((1,),), dmax=3, wmax=Fraction(6))
    lift = lift_chain_map(res, res)
    check_chain_map(lift)
    for d in range(4):
        assert lift.column(d, 0)[0] == {(0,): 1} or lift.column(d, 0)[0] == {
            (0,): -1
        }


# ---------- homology maps ----------


def test_homology_map_of_identity():
    ring = _ring(a=3)
    res = minimal_resolution(ring, ((1,),), dmax=3, wmax=Fraction(6))
    sq, _ = tensor_complexes(res, res, dmax=3, wmax=Fraction(6))
    prov = RingStrands(ring)
    h = homology_data(sq, 1, Fraction(1), prov)
    assert h.dim == 1
    m = homology_map_matrix(identity_map(sq), 1, h, h, prov)
    assert m.rank() == 1
    assert m.to_dense() == [[1]]


def test_homology_data_reps_are_cycles():
    ring = _ring(a=3)
    res = minimal_resolution(ring, ((1,),), dmax=3, wmax=Fraction(6))
    sq, _ = tensor_complexes(res, res, dmax=3, wmax=Fraction(6))
    prov = RingStrands(ring)
    h = homology_data(sq, 2, Fraction(3), prov)
    assert h.dim == homology_dim(sq, 2, Fraction(3), prov) == 1
    out = strand_matrix(sq, 2, Fraction(3), prov, src=h.basis)
    for rep in h.reps:
        # matrix-vector product: rows of `out` dot rep
        for row in out.rows:
            s = sum(row.get(c, 0) * v for c, v in rep.items())
            assert s == 0


# ---------- tensor of maps ----------


def test_tensor_maps_square_of_lift():
    spec = _ring(a=2).spec
    r0 = make_level_ring(spec, 0)
    r1 = make_level_ring(spec, 1)
    res0 = minimal_resolution(r0, ((1,),), dmax=3, wmax=Fraction(6))
    res1 = minimal_resolution(r1, ((2,),), dmax=3, wmax=Fraction(6))
    lift = lift_chain_map(res0, res1, ring_map=r0.include_exp)
    sq0, i0 = tensor_complexes(res0, res0, dmax=3, wmax=Fraction(6))
    sq1, i1 = tensor_complexes(res1, res1, dmax=3, wmax=Fraction(6))
    sqmap = tensor_maps(lift, lift, sq0, i0, sq1, i1)
    check_chain_map(sqmap)


# ---------- hom complexes ----------


def test_hom_from_unit_is_the_complex():
    ring = _ring(a=3)
    res = minimal_resolution(ring, ((1,),), dmax=3, wmax=Fraction(6))
    h, _ = hom_complex(unit_complex(ring), res)
    check_complex(h)
    assert [h.rank(d) for d in range(4)] == [res.rank(d) for d in range(4)]


def test_hom_into_unit_dualizes():
    ring = _ring(a=3)
    res = minimal_resolution(ring, ((1,),), dmax=2, wmax=Fraction(4))
    h, _ = hom_complex(res, unit_complex(ring))
    check_complex(h)
    # degrees flip sign
    assert h.rank(0) == 1 and h.rank(-1) == 1 and h.rank(-2) == 1
    # generator weights flip sign
    assert h.gens_at(-1)[0].weight == -res.gens_at(1)[0].weight


def test_hom_complex_squares_to_zero():
    ring = _ring(a=3)
    res = minimal_resolution(ring, ((1,),), dmax=3, wmax=Fraction(6))
    h, _ = hom_complex(res, res)
    check_complex(h)
