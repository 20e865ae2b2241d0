import json
import random
from math import prod

import numpy as np
import pytest

from b0kit.groupkit import (
    CapExceeded,
    CentralProductSpec,
    GroupTable,
    Subgroup,
    abelian_coordinates,
    abelian_subgroups,
    abelianization,
    abelianized_quotient_invariants,
    bicyclic_subgroups,
    center,
    central_product,
    central_product_b0,
    closure_elements,
    commutator_set,
    commuting_pairs,
    derived_subgroup,
    enumerate_group,
    is_commutator_closed,
    is_normal,
    load_central_product_spec,
    make_subgroup,
    nilpotency_class,
    normal_closure,
    pc_abelianization_data,
    transgression_image,
)
from b0kit.pcgroup import PcGroup, PcError, catalog, parse_family_spec


def G_of(spec):
    return PcGroup(catalog(parse_family_spec(spec)))


def T_of(spec, cap=2**14):
    return GroupTable.from_pc(G_of(spec), cap)


D4 = "heisenberg(r=2,d=1)"


def test_enumerate_sizes_and_cap():
    assert T_of(D4).order == 8
    with pytest.raises(CapExceeded) as err:
        enumerate_group(G_of("phi15(p=5)"), cap=1000)
    assert err.value.required == 15625
    assert "15625" in str(err.value)


def test_table_duck_type_and_json_roundtrip():
    t = T_of(D4)
    blob = t.to_json()
    t2 = GroupTable.from_json(blob)
    assert t2.order == 8
    assert t2.multiply(1, t2.inverse(1)) == 0
    bad = json.loads(blob)
    bad["table"][3][4] = 0
    with pytest.raises(PcError):
        GroupTable.from_json(json.dumps(bad))


def test_center_and_derived_d4():
    t = T_of(D4)
    z = center(t)
    assert len(z) == 2
    der = derived_subgroup(t)
    assert len(der) == 2
    assert set(der) == {m for m in z.members} or len(set(der) & set(z.members)) == 2


def test_abelian_group_trivia():
    t = T_of("cyclic(6)")
    assert len(center(t)) == 6
    assert derived_subgroup(t) == [0]
    assert commutator_set(t) == {0}
    assert nilpotency_class(t) == 1
    assert is_commutator_closed(t)


def test_phi15_derived_subgroup_order_25():
    G = G_of("phi15(p=5)")
    der = derived_subgroup(G)
    assert len(der) == 25
    # generated by the two central b generators
    b1, b2 = G.gen(4), G.gen(5)
    assert set(closure_elements(G, [b1, b2])) == set(der)


def test_freest_special_not_commutator_closed():
    G = G_of("freest_special(4,2)")
    K = commutator_set(G)
    der = derived_subgroup(G)
    assert len(der) == 2**6
    assert len(K) < len(der)
    assert len(K) == 36  # 1 + number of rank-2 alternating 4x4 forms over F2
    assert not is_commutator_closed(G)


def test_freest_special_rank_shortcut_matches_scan():
    # membership in K(G) is rank <= 2 of the alternating form, checked
    # exhaustively at p = 2 before any use at p = 3
    G = G_of("freest_special(4,2)")
    K = commutator_set(G)
    rank_members = set()
    for w in closure_elements(G, [G.gen(i) for i in range(4, 10)]):
        mat = np.zeros((4, 4), dtype=np.int64)
        idx = 4
        for i in range(4):
            for j in range(i + 1, 4):
                mat[i, j] = w[idx] % 2
                mat[j, i] = mat[i, j]
                idx += 1
        # rank over F2
        m = mat.copy() % 2
        rank = 0
        for col in range(4):
            piv = next((r for r in range(rank, 4) if m[r, col]), None)
            if piv is None:
                continue
            m[[rank, piv]] = m[[piv, rank]]
            for r in range(4):
                if r != rank and m[r, col]:
                    m[r] = (m[r] + m[rank]) % 2
            rank += 1
        if rank <= 2:
            rank_members.add(w)
    assert rank_members == K


def test_bilinear_commutator_set_matches_direct_scan():
    from b0kit.groupkit import _commutator_set_bilinear, _pc_central_transversal

    for spec in [D4, "heisenberg(r=4,d=2)", "freest_special(3,2)", "phi15(p=5)"]:
        G = G_of(spec)
        reps = _pc_central_transversal(G, 10**7)
        fast = _commutator_set_bilinear(G, reps)
        if len(reps) <= 40:
            direct = {G.commutator(u, v) for u in reps for v in reps}
        else:
            rng = random.Random(1)
            direct = {G.commutator(G.random_element(rng), G.random_element(rng))
                      for _ in range(2000)}
        assert direct <= fast
        if len(reps) <= 40:
            assert direct == fast


def test_heisenberg_commutator_closed():
    for spec in ["heisenberg(r=2,d=1)", "heisenberg(r=4,d=2)", "heisenberg(r=6,d=2)"]:
        assert is_commutator_closed(G_of(spec))


def test_subgroup_closures_and_normality():
    t = T_of(D4)
    assert closure_elements(t, []) == [0]
    # closure of the central involution has order 2 and is normal
    G = G_of(D4)
    z = G.gen(2)
    tz = [i for i, key in enumerate(t.element_keys) if key == z][0]
    sub = closure_elements(t, [tz])
    assert len(sub) == 2
    assert is_normal(t, sub)
    K = commutator_set(t)
    assert set(normal_closure(t, sorted(K))) == set(derived_subgroup(t))


def test_lagrange_on_all_bicyclics():
    for spec in [D4, "cyclic(8)", "elementary_abelian(2,2)"]:
        t = T_of(spec)
        for sub in bicyclic_subgroups(t):
            assert t.order % len(sub) == 0


def test_commuting_pairs_d4_count():
    t = T_of(D4)
    pairs = list(commuting_pairs(t, "exhaustive"))
    assert len(pairs) == 40


def test_commuting_pairs_abelian_all():
    t = T_of("cyclic(4)*cyclic(2)")
    assert len(list(commuting_pairs(t, "exhaustive"))) == 64


def test_bilinear_pairs_agree_with_exhaustive():
    # fiber count: exhaustive = bilinear * |G'|^2 for class-2 groups
    for spec in [D4, "heisenberg(r=4,d=2)"]:
        G = G_of(spec)
        t = GroupTable.from_pc(G)
        exhaustive = sum(1 for _ in commuting_pairs(t, "exhaustive"))
        bilinear = sum(1 for _ in commuting_pairs(G, "bilinear"))
        der = len(derived_subgroup(G))
        assert exhaustive == bilinear * der * der


def test_bicyclic_subgroups_examples():
    klein = T_of("elementary_abelian(2,2)")
    subs = bicyclic_subgroups(klein)
    assert len(subs) == 5  # 1, three C2's, and the whole group
    assert max(len(s) for s in subs) == 4

    t = T_of(D4)
    subs = bicyclic_subgroups(t)
    sizes = sorted(len(s) for s in subs)
    assert 4 in sizes  # contains C4 and the Klein subgroups
    orders_4 = [s for s in subs if len(s) == 4]
    assert len(orders_4) == 3

    c8 = T_of("cyclic(8)")
    subs = bicyclic_subgroups(c8)
    assert max(len(s) for s in subs) == 8


def test_abelian_subgroups_counts():
    # (Z/2)^3 has 16 subgroups, all abelian
    t = T_of("elementary_abelian(2,3)")
    subs = abelian_subgroups(t)
    assert len(subs) == 16
    # D4: 1 + 5 cyclic (z, r^2? ...) + 3 of order 4 = 10 abelian subgroups
    t = T_of(D4)
    subs = abelian_subgroups(t)
    bic = bicyclic_subgroups(t)
    assert {s.mask for s in bic} <= {s.mask for s in subs}


def test_nilpotency_classes():
    assert nilpotency_class(G_of("phi15(p=5)")) == 2
    assert nilpotency_class(G_of("phi28(p=5)")) == 4
    assert nilpotency_class(G_of("phi29(p=7)")) == 4
    assert nilpotency_class(G_of("cyclic(12)")) == 1
    assert nilpotency_class(G_of(D4)) == 2
    assert nilpotency_class(G_of("freest_special(4,3)")) == 2


def test_abelianization_pc_and_table():
    G = G_of("phi15(p=5)")
    inv, images, data = abelianization(G)
    assert inv == (5, 5, 5, 5)
    # the map is a homomorphism onto the coordinates
    rng = random.Random(3)
    for _ in range(50):
        a, b = G.random_element(rng), G.random_element(rng)
        ca = data.coords(a)
        cb = data.coords(b)
        cab = data.coords(G.multiply(a, b))
        assert all((x + y - z) % d == 0 for x, y, z, d in zip(ca, cb, cab, data.diag))
    t = T_of(D4)
    inv_t, _, data_t = abelianization(t)
    assert inv_t == (2, 2)


def test_pc_abelianization_lift_roundtrip():
    for spec in ["phi15(p=5)", "phi28(p=5)", "heisenberg(r=4,d=2)"]:
        G = G_of(spec)
        data = pc_abelianization_data(G)
        import itertools
        for a in itertools.islice(itertools.product(*(range(d) for d in data.diag)), 100):
            x = G.collect(tuple((i, e) for i, e in enumerate(data.lift(a))))
            assert data.coords(x) == a


def test_abelian_coordinates_dlog():
    G = G_of("phi15(p=5)")
    der = derived_subgroup(G)
    co = abelian_coordinates(G, [G.gen(4), G.gen(5)])
    assert co.order == 25
    assert set(co.elements()) == set(der)
    assert co.nontrivial() == (5, 5)


def test_abelianized_quotient_invariants():
    t = T_of("cyclic(4)")
    one = t.element_keys.index((1,)) if t.element_keys else 1
    assert abelianized_quotient_invariants(t, [1]) == (4,)
    assert abelianized_quotient_invariants(t, [1], [2]) == (2,)
    assert abelianized_quotient_invariants(t, [1], [1]) == ()


# ---------------------------------------------------------------------------
# central products


def cp_spec(left, right, h1_words, n1_words, xi):
    H = G_of(left)
    N = G_of(right)
    return CentralProductSpec(
        H,
        N,
        [H.element_from_text(w) for w in h1_words],
        [N.element_from_text(w) for w in n1_words],
        [(H.element_from_text(a), N.element_from_text(b)) for a, b in xi],
    )


def test_central_product_direct_product_case():
    # trivial gluing gives the direct product
    H = G_of(D4)
    N = G_of("cyclic(2)")
    spec = CentralProductSpec(H, N, [], [], [])
    res = central_product(spec)
    assert res.table.order == 16
    t_direct = T_of("heisenberg(r=2,d=1)*cyclic(2)")
    assert sorted(res.table.element_order(i) for i in range(16)) == \
        sorted(t_direct.element_order(i) for i in range(16))


def test_central_product_d4_c4():
    spec = cp_spec(D4, "cyclic(4)", ["z"], ["a^2"], [("z", "a^2")])
    res = central_product(spec)
    assert res.table.order == 8 * 4 // 2
    # embeddings are homomorphisms
    H, N = spec.left, spec.right
    for a in [H.identity, H.gen(0), H.gen(1), H.gen(2)]:
        for b in [H.gen(0), H.gen(2)]:
            assert res.table.multiply(res.embed_left[a], res.embed_left[b]) == \
                res.embed_left[H.multiply(a, b)]


def test_central_product_rejects_bad_xi():
    with pytest.raises(PcError):
        # x is not central in D4
        central_product(cp_spec(D4, "cyclic(4)", ["x"], ["a^2"], [("x", "a^2")]))
    with pytest.raises(PcError):
        # not an isomorphism: z has order 2, a has order 4
        central_product(cp_spec(D4, "cyclic(4)", ["z"], ["a"], [("z", "a")]))


def test_heisenberg_glued_central_product():
    # H3 o H3 over the shared center is the five-generator group H5
    spec = cp_spec("heisenberg(r=2,d=1)", "heisenberg(r=2,d=1)", ["z"], ["z"], [("z", "z")])
    res = central_product(spec)
    assert res.table.order == 8 * 8 // 2
    t5 = T_of("heisenberg(r=2,d=1|1)")
    assert t5.order == res.table.order
    assert sorted(res.table.element_order(i) for i in range(32)) == \
        sorted(t5.element_order(i) for i in range(32))


def test_central_product_b0_trivial_gluings():
    spec = cp_spec(D4, "cyclic(2)", [], [], [])
    out = central_product_b0(spec, assume_trivial_b0=True)
    assert out.factors == ()
    spec = cp_spec("heisenberg(r=2,d=1)", "heisenberg(r=2,d=1)", ["z"], ["z"], [("z", "z")])
    out = central_product_b0(spec, hypothesis="xi_image_in_K", assume_trivial_b0=True)
    assert out.factors == ()
    assert out.checks["xi_image_in_K"] is True


def rai_spec():
    H = G_of("freest_special(4,2)")
    h1 = H.element_from_text("c12*c34")
    n1 = H.element_from_text("c12")
    return CentralProductSpec(H, H, [h1], [n1], [(h1, n1)])


def test_rai_central_product_b0_nontrivial():
    out = central_product_b0(rai_spec(), hypothesis="xi_image_in_K", assume_trivial_b0=True)
    assert out.factors == (2,)
    assert out.checks["xi_image_in_K"] is True


def test_rai_transgression_image():
    H = G_of("freest_special(4,2)")
    h1 = H.element_from_text("c12*c34")
    assert transgression_image(H, [h1]) == (2,)


def test_transgression_trivial_cases():
    t = T_of(D4)
    # N = G: K(G) generates G'
    assert transgression_image(t, list(range(t.order))) == ()
    # N = 1
    assert transgression_image(t, []) == ()
    # a non-normal subgroup is rejected
    non_normal = next(
        s for s in bicyclic_subgroups(t) if not is_normal(t, s.members)
    )
    with pytest.raises(PcError, match="not normal"):
        transgression_image(t, list(non_normal.gens))


def test_transgression_vanishes_when_intersection_in_K():
    # set-level check: N cap G' inside K(G) forces a trivial answer
    G = G_of("heisenberg(r=4,d=1)")
    z = G.gen(2)
    assert transgression_image(G, [z]) == ()


def test_load_central_product_spec(tmp_path):
    blob = {
        "left": "freest_special(4,2)",
        "right": "freest_special(4,2)",
        "H1_gens": ["c12*c34"],
        "N1_gens": ["c12"],
        "xi": [["c12*c34", "c12"]],
    }
    spec = load_central_product_spec(json.dumps(blob), base_dir=str(tmp_path))
    out = central_product_b0(spec, hypothesis="xi_image_in_K", assume_trivial_b0=True)
    assert out.factors == (2,)
