import itertools
import random
from math import prod

import pytest

from b0kit.pcgroup import (
    CatalogParams,
    InconsistentPresentation,
    PcGroup,
    PcParseError,
    PcStructureError,
    catalog,
    consistency_check,
    direct_product_presentation,
    emit_dsl,
    least_nonresidue,
    make_presentation,
    parse_family_spec,
    parse_pc,
    primitive_root,
)

HEIS_MOD5 = """
# Heisenberg shape mod 5
group H5 {
  gens x, y, z;
  order x = 5;
  order y = 5;
  order z = 5;
  comm [y, x] = z;
}
"""


def G_of(spec: str) -> PcGroup:
    return PcGroup(catalog(parse_family_spec(spec)))


def test_parse_basic():
    pres = parse_pc(HEIS_MOD5)
    assert pres.names == ("x", "y", "z")
    assert pres.orders == (5, 5, 5)
    assert pres.commutators == ((1, 0, ((2, 1),)),)
    assert pres.order == 125


def test_parse_phi28_emission_roundtrip():
    pres = catalog(CatalogParams("phi28", p=5))
    assert pres.ngens == 5
    assert pres.orders == (25, 5, 5, 5, 5)
    text = emit_dsl(pres)
    again = parse_pc(text)
    assert again.names == pres.names
    assert again.orders == pres.orders
    assert again.powers == pres.powers
    assert again.commutators == pres.commutators


def test_parse_errors():
    with pytest.raises(PcParseError, match="later, earlier"):
        parse_pc("group G { gens g1, g2, g3; order g1 = 5; order g2 = 5; order g3 = 5;"
                 " comm [g1, g2] = g3; }")
    with pytest.raises(PcParseError, match="duplicate generator"):
        parse_pc("group G { gens a, a; order a = 2; }")
    with pytest.raises(PcParseError, match="order 1 < 2"):
        parse_pc("group G { gens a; order a = 1; }")
    with pytest.raises(PcParseError, match="no order"):
        parse_pc("group G { gens a; }")
    with pytest.raises(PcParseError, match="strictly later"):
        parse_pc("group G { gens a, b; order a = 2; order b = 2; comm [b, a] = a; }")
    with pytest.raises(PcParseError, match="line 1"):
        parse_pc("group G %")


def test_parse_word_text():
    G = PcGroup(parse_pc(HEIS_MOD5))
    w = G.word_from_text("x^2*y*z^-1")
    assert w == ((0, 2), (1, 1), (2, -1))
    assert G.element_from_text("1") == G.identity
    assert G.element_to_text(G.collect(w)) == "x^2*y*z^4"


def test_collect_identity_and_inverses():
    G = PcGroup(parse_pc(HEIS_MOD5))
    assert G.collect(()) == G.identity
    rng = random.Random(0)
    for _ in range(200):
        a = G.random_element(rng)
        assert G.multiply(a, G.inverse(a)) == G.identity
        assert G.multiply(G.inverse(a), a) == G.identity


def test_collect_commutator_orientation():
    # [y, x] = z in the presentation means y^-1 x^-1 y x collects to z
    G = PcGroup(parse_pc(HEIS_MOD5))
    x, y, z = G.gens()
    assert G.commutator(y, x) == z
    assert G.commutator(x, y) == G.inverse(z)
    assert G.commutator(x, x) == G.identity


def test_phi28_defining_commutator():
    G = G_of("phi28(p=5)")
    a, a1, a2, a3, a4 = G.gens()
    # collect(a1^-1 a^-1 a1 a) = a2
    assert G.commutator(a1, a) == a2
    assert G.commutator(a2, a) == a3
    assert G.commutator(a3, a) == a4
    assert G.commutator(a1, a2) == a4


def test_phi28_paper_relations_verbatim():
    for p in (5, 7):
        G = G_of(f"phi28(p={p})")
        a, a1, a2, a3, a4 = G.gens()
        half = p * (p - 1) // 2
        assert G.multiply(G.power(a1, p), G.power(a2, half)) == a3
        assert G.power(a2, p) == a4
        assert G.power(a, p * p) == G.identity
        assert G.power(a3, p) == G.identity
        assert G.power(a4, p) == G.identity


def test_phi29_paper_relations_verbatim():
    for p in (5, 7):
        G = G_of(f"phi29(p={p})")
        nu = least_nonresidue(p)
        a, a1, a2, a3, a4 = G.gens()
        half = p * (p - 1) // 2
        assert G.power(a3, nu) == G.multiply(G.power(a1, p), G.power(a2, half))
        assert G.power(a4, nu) == G.power(a2, p)
        assert G.power(a, p * p) == G.identity


def test_phi15_relations_and_primitive_root():
    assert primitive_root(5) == 2
    assert least_nonresidue(5) == 2
    G = G_of("phi15(p=5)")
    a1, a2, a3, a4, b1, b2 = G.gens()
    assert G.commutator(a1, a2) == b1
    assert G.commutator(a3, a4) == b1
    assert G.commutator(a1, a3) == b2
    assert G.commutator(a2, a4) == G.power(b2, 2)  # g = 2 for p = 5
    for x in G.gens():
        assert G.power(x, 5) == G.identity


def test_heisenberg_relations():
    for r, ds in [(2, (1,)), (4, (1,)), (4, (2,)), (2, (1, 1)), (12, (2,)), (6, (2,))]:
        G = G_of(f"heisenberg(r={r},d={'|'.join(map(str, ds))})")
        n = len(ds)
        for i, d in enumerate(ds):
            xi = G.gen(i)
            yi = G.gen(n + i)
            z = G.gen(2 * n)
            assert G.commutator(xi, yi) == G.power(z, d)
        assert G.order == r ** (2 * n + 1)


def test_catalog_consistency_and_orders():
    cases = [
        ("phi15(p=5)", 5**6),
        ("phi15(p=7)", 7**6),
        ("phi15(p=11)", 11**6),
        ("phi28(p=5)", 5**6),
        ("phi28(p=7)", 7**6),
        ("phi28(p=11)", 11**6),
        ("phi29(p=5)", 5**6),
        ("phi29(p=7)", 7**6),
        ("phi29(p=11)", 11**6),
        ("heisenberg(r=2,d=1)", 8),
        ("heisenberg(r=4,d=1)", 64),
        ("heisenberg(r=4,d=2)", 64),
        ("freest_special(4,2)", 2**10),
        ("freest_special(4,3)", 3**10),
        ("cyclic(8)", 8),
        ("elementary_abelian(2,3)", 8),
    ]
    for spec, order in cases:
        pres = catalog(parse_family_spec(spec))  # raises if inconsistent
        assert pres.order == order
        assert consistency_check(pres).consistent


def test_catalog_rejects_bad_params():
    with pytest.raises(PcStructureError, match="p>3"):
        catalog(CatalogParams("phi28", p=3))
    with pytest.raises(PcStructureError, match="p>3"):
        catalog(CatalogParams("phi15", p=2))
    with pytest.raises(PcStructureError, match="invalid prime"):
        catalog(CatalogParams("phi29", p=6))
    with pytest.raises(PcStructureError, match="divisibility"):
        catalog(CatalogParams("heisenberg", r=4, ds=(3,)))
    with pytest.raises(PcStructureError, match="divisibility"):
        catalog(CatalogParams("heisenberg", r=8, ds=(2, 4, 8, 3)))


def test_broken_overlap_reported():
    # g2^3 = 1 with [g2, g1] = g3 of order 5 breaks the (g2^3)g1 overlap
    pres = make_presentation(
        ("g1", "g2", "g3"), (5, 3, 5), None, [(1, 0, ((2, 1),))], "broken"
    )
    report = consistency_check(pres)
    assert not report.consistent
    assert any("g2^3)g1" in f for f in report.failures)


def test_abelian_presentations_consistent():
    for orders in [(2, 2), (4, 6), (2, 3, 5)]:
        pres = make_presentation([f"e{i}" for i in range(len(orders))], orders)
        assert consistency_check(pres).consistent


def test_enumeration_vs_order():
    # distinct normal forms exhaust the exponent box for consistent groups
    for spec in ["heisenberg(r=2,d=1)", "heisenberg(r=4,d=1)", "cyclic(8)"]:
        G = G_of(spec)
        seen = set()
        for exps in itertools.product(*(range(m) for m in G.orders)):
            seen.add(G.collect(tuple((i, e) for i, e in enumerate(exps))))
        assert len(seen) == G.order


def naive_heisenberg_table():
    # independent oracle: exhaustive string rewriting for r=2, d=1
    rules = [("yx", "xyz"), ("zx", "xz"), ("zy", "yz"), ("xx", ""), ("yy", ""), ("zz", "")]

    def normalize(s):
        changed = True
        while changed:
            changed = False
            for lhs, rhs in rules:
                if lhs in s:
                    s = s.replace(lhs, rhs, 1)
                    changed = True
                    break
        return s

    forms = sorted({normalize("".join(w)) for k in range(7)
                    for w in itertools.product("xyz", repeat=k)}, key=lambda s: (len(s), s))
    assert len(forms) == 8
    table = {}
    for u in forms:
        for v in forms:
            table[(u, v)] = normalize(u + v)
    return forms, table


def test_heisenberg_mod2_table_matches_rewriter():
    G = G_of("heisenberg(r=2,d=1)")
    forms, table = naive_heisenberg_table()

    def to_elt(s):
        return G.collect(tuple(("xyz".index(ch), 1) for ch in s))

    elts = {s: to_elt(s) for s in forms}
    assert len(set(elts.values())) == 8
    for u in forms:
        for v in forms:
            assert G.multiply(elts[u], elts[v]) == elts[table[(u, v)]]


def test_associativity_fuzz():
    rng = random.Random(42)
    for spec in ["phi15(p=5)", "phi28(p=5)", "phi29(p=5)", "heisenberg(r=4,d=2)",
                 "freest_special(3,2)"]:
        G = G_of(spec)
        for _ in range(300):
            a, b, c = (G.random_element(rng) for _ in range(3))
            assert G.multiply(G.multiply(a, b), c) == G.multiply(a, G.multiply(b, c))


def test_commutator_word_identities():
    # [xy,z] = [x,z][x,z,y][y,z]; [x,yz] = [x,z][x,y][x,y,z];
    # [x^-1,y] = [x,y,x^-1]^-1 [x,y]^-1
    rng = random.Random(7)
    for spec in ["phi15(p=5)", "phi28(p=5)", "phi29(p=7)", "heisenberg(r=4,d=1)"]:
        G = G_of(spec)
        comm, mul, inv = G.commutator, G.multiply, G.inverse
        for _ in range(50):
            x, y, z = (G.random_element(rng) for _ in range(3))
            lhs = comm(mul(x, y), z)
            rhs = mul(mul(comm(x, z), comm(comm(x, z), y)), comm(y, z))
            assert lhs == rhs
            lhs = comm(x, mul(y, z))
            rhs = mul(mul(comm(x, z), comm(x, y)), comm(comm(x, y), z))
            assert lhs == rhs
            lhs = comm(inv(x), y)
            rhs = mul(inv(comm(comm(x, y), inv(x))), inv(comm(x, y)))
            assert lhs == rhs


def test_direct_product():
    a = catalog(CatalogParams("cyclic", n=4))
    b = catalog(CatalogParams("heisenberg", r=2, ds=(1,)))
    prod_pres = direct_product_presentation([a, b])
    assert prod_pres.order == 4 * 8
    assert consistency_check(prod_pres).consistent
    spec = parse_family_spec("cyclic(4)*heisenberg(r=2,d=1)")
    assert catalog(spec).order == 32


def test_unbounded_exponents():
    G = PcGroup(parse_pc(HEIS_MOD5))
    big = 10**6 + 3
    assert G.collect(((0, big),)) == G.collect(((0, big % 5),))
    assert G.collect(((0, -big),)) == G.collect(((0, (-big) % 5),))
