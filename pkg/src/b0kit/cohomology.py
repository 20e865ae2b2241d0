"""Brute-force oracle: the multiplier-dual from its cohomological definition.

Coefficients: Q/Z is replaced by Z/n for a multiple n of |G|.  The short
exact sequence 0 -> Z/n -> Q/Z -> Q/Z -> 0 makes H^2(G, Z/n) -> H^2(G, Q/Z)
onto with kernel the image of the connecting (Bockstein) map on
Hom(G, Q/Z), so H^2(G, Q/Z) is computed as (Z^2/B^2)/Bockstein.  A class
"vanishes on a subgroup A" when its restriction lands in
B^2(A) + Bockstein(A).

Normalized 2-cochains (c(1,.) = c(.,1) = 0) are stored as vectors indexed
by ordered pairs of non-identity elements.  The cocycle space is solved
through a generator-section parameterization: a normalized cochain is
determined by its values c(x, g) on generator columns via
c(x, y*g) = c(x, y) + c(x*y, g) - c(y, g), and the cocycle identity for
all triples follows from the generator-third-argument equations by the
simplicial identity for the coboundary of a 2-cochain.  This cuts the
unknown count from (|G|-1)^2 to (|G|-1)*s without changing the kernel.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from math import gcd

import numpy as np

from .groupkit import (
    GroupTable,
    CapExceeded,
    Subgroup,
    _table_abelianization,
    abelian_subgroups,
    bicyclic_subgroups,
)
from .pcgroup import PcError
from .zlattice import (
    HowellForm,
    kernel_mod,
    left_kernel_mod,
    quotient_invariants_mod,
)

ORACLE_CAP_DEFAULT = 72
ORACLE_CAP_MAX = 128


def oracle_cap() -> int:
    cap = int(os.environ.get("B0_ORACLE_CAP", ORACLE_CAP_DEFAULT))
    return min(cap, ORACLE_CAP_MAX)


def _check_cap(table: GroupTable, cap) -> None:
    cap = oracle_cap() if cap is None else min(int(cap), ORACLE_CAP_MAX)
    if table.order > cap:
        raise CapExceeded(
            f"oracle requires order {table.order} > cap {cap}", required=table.order
        )


def _pair_index(order: int):
    m = order - 1

    def idx(x, y):
        return (x - 1) * m + (y - 1)

    return m * m, idx


@dataclass
class Cocycle:
    """Normalized 2-cochain with values in Z/n over non-identity pairs."""

    table: GroupTable
    n: int
    vec: np.ndarray

    def value(self, x: int, y: int) -> int:
        if x == 0 or y == 0:
            return 0
        m = self.table.order - 1
        return int(self.vec[(x - 1) * m + (y - 1)])

    def is_cocycle(self) -> bool:
        t = self.table
        mul = t.mul
        for x in range(t.order):
            for y in range(t.order):
                for z in range(t.order):
                    lhs = self.value(x, y) + self.value(int(mul[x, y]), z)
                    rhs = self.value(y, z) + self.value(x, int(mul[y, z]))
                    if (lhs - rhs) % self.n:
                        return False
        return True


@dataclass
class H2Presentation:
    table: GroupTable
    n: int
    cocycle_basis: np.ndarray      # rows span Z^2 as a Z/n-module
    coboundaries: np.ndarray       # rows span B^2
    bockstein: np.ndarray          # rows of connecting-map images
    multiplier_dual: tuple[int, ...]  # invariants of (Z^2/B^2)/Bockstein


def _generator_section_rows(table: GroupTable, gens):
    """Expansion table R with R[x][y] the u-coefficients of c(x, y)."""
    N = table.order
    mul = table.mul
    s = len(gens)
    Vs = (N - 1) * s

    # BFS canonical parents: y = parent * g_t
    parent = {0: None}
    order_visit = []
    frontier = [0]
    while frontier:
        nxt = []
        for y in frontier:
            for t, g in enumerate(gens):
                z = int(mul[y, g])
                if z not in parent:
                    parent[z] = (y, t)
                    order_visit.append(z)
                    nxt.append(z)
        frontier = nxt
    if len(parent) != N:
        raise PcError("generating set does not generate the group")

    def uidx(x, t):
        return (x - 1) * s + t

    R = [None] * N
    for x in range(1, N):
        rows = np.zeros((N, Vs), dtype=np.int32)
        for y in order_visit:
            yp, t = parent[y]
            row = rows[yp].copy()
            xyp = int(mul[x, yp])
            if xyp != 0:
                row[uidx(xyp, t)] += 1
            if yp != 0:
                row[uidx(yp, t)] -= 1
            rows[y] = row
        R[x] = rows
    return R, parent, Vs


def z2_generators(table: GroupTable, n: int) -> np.ndarray:
    """Rows generating Z^2(G, Z/n) (normalized) as a Z/n-module."""
    N = table.order
    gens = table.generating_set()
    s = len(gens)
    R, parent, Vs = _generator_section_rows(table, gens)
    mul = table.mul

    H = HowellForm(Vs, n)
    for x in range(1, N):
        Rx = R[x]
        rows = []
        for t, g in enumerate(gens):
            yg = mul[1:, g]
            blk = (Rx[yg] - Rx[1:]).astype(np.int64)
            xy = mul[x, 1:]
            for pos, y in enumerate(range(1, N)):
                z = int(yg[pos])
                if parent[z] == (y, t):
                    blk[pos] = 0
                    continue
                blk[pos, (y - 1) * s + t] += 1
                xyv = int(xy[pos])
                if xyv != 0:
                    blk[pos, (xyv - 1) * s + t] -= 1
            rows.append(blk)
        block = np.vstack(rows) % n
        block = H.reduce_block(block)
        for row in block:
            if row.any():
                H.insert(row)

    kernel_u = kernel_mod(H.matrix(), n)
    V, pidx = _pair_index(N)
    out = np.zeros((kernel_u.shape[0], V), dtype=np.int64)
    for r, u in enumerate(kernel_u):
        for x in range(1, N):
            vals = (R[x][1:].astype(np.int64) @ u) % n
            out[r, (x - 1) * (N - 1):(x) * (N - 1)] = vals
    return out


def coboundary_generators(table: GroupTable, n: int) -> np.ndarray:
    """Rows d(e_a) for the indicator 1-cochains, generating B^2."""
    N = table.order
    m = N - 1
    V, _ = _pair_index(N)
    mul = table.mul
    rows = np.zeros((N - 1, V), dtype=np.int64)
    prod_flat = mul[1:, 1:].reshape(-1)
    for a in range(1, N):
        row = rows[a - 1]
        row[(a - 1) * m:(a - 1) * m + m] += 1        # c(a, y) terms
        row[(a - 1)::m] += 1                          # c(y, a) terms
        row[prod_flat == a] -= 1                      # -c(x, y) where xy = a
    return rows % n


def bockstein_generators(table: GroupTable, n: int) -> np.ndarray:
    """Connecting-map images of the dual generators of Hom(G, Q/Z)."""
    N = table.order
    V, pidx = _pair_index(N)
    ab = _table_abelianization(table, table.generating_set(), cap=ORACLE_CAP_MAX)
    diag = [d for d in ab.diag if d > 1]
    if not diag:
        return np.zeros((0, V), dtype=np.int64)
    nprime = diag[-1]
    for d in diag:
        assert nprime % d == 0
    cmap = {x: ab.coords(x) for x in range(N)}
    keep = [k for k, d in enumerate(ab.diag) if d > 1]
    rows = []
    mul = table.mul
    for k, d in zip(keep, diag):
        fhat = np.array([(cmap[x][k] * (nprime // d)) % nprime for x in range(N)],
                        dtype=np.int64)
        t = fhat[1:, None] + fhat[None, 1:] - fhat[mul[1:, 1:]]
        assert not (t % nprime).any()
        rows.append((t // nprime).reshape(-1) % n)
    return np.vstack(rows)


def h2_mod(table: GroupTable, n: int | None = None, cap: int | None = None) -> H2Presentation:
    """H^2(G, Q/Z) as (Z^2/B^2)/Bockstein over Z/n, |G| dividing n."""
    _check_cap(table, cap)
    n = 2 * table.order if n is None else int(n)
    if n % table.order:
        raise PcError(f"coefficient modulus {n} is not a multiple of |G| = {table.order}")
    z2 = z2_generators(table, n)
    cob = coboundary_generators(table, n)
    bock = bockstein_generators(table, n)
    wg = np.vstack([cob, bock]) if bock.size else cob
    dual = quotient_invariants_mod(z2, wg, n)
    return H2Presentation(table, n, z2, cob, bock, dual)


# ---------------------------------------------------------------------------
# restriction and the vanishing filter


def subgroup_table(table: GroupTable, sub: Subgroup) -> tuple[GroupTable, np.ndarray]:
    """Subtable on sorted members plus the pair-gather map into G's pairs."""
    members = list(sub.members)
    assert members[0] == 0
    local = {g: i for i, g in enumerate(members)}
    k = len(members)
    mul = np.zeros((k, k), dtype=np.int64)
    for i, a in enumerate(members):
        for j, b in enumerate(members):
            mul[i, j] = local[int(table.mul[a, b])]
    sub_t = GroupTable(mul, element_keys=members)
    m = table.order - 1
    gather = np.zeros((k - 1) * (k - 1), dtype=np.int64)
    pos = 0
    for a in members[1:]:
        base = (a - 1) * m
        for b in members[1:]:
            gather[pos] = base + (b - 1)
            pos += 1
    return sub_t, gather


def restrict_class(table: GroupTable, sub: Subgroup, c: Cocycle) -> Cocycle:
    sub_t, gather = subgroup_table(table, sub)
    return Cocycle(sub_t, c.n, c.vec[gather] % c.n)


def _vanishing_context(table: GroupTable, sub: Subgroup, n: int):
    sub_t, gather = subgroup_table(table, sub)
    cob = coboundary_generators(sub_t, n)
    bock = bockstein_generators(sub_t, n)
    W = np.vstack([cob, bock]) if bock.size else cob
    VA = (sub_t.order - 1) ** 2
    HW = HowellForm(VA, n)
    for row in W:
        HW.insert(row)
    return gather, HW


def _constrain_small(S: np.ndarray, RZ: np.ndarray, HW: HowellForm, n: int) -> np.ndarray:
    # lambda-space kernel: S rows whose restriction lies in span(W)
    k = S.shape[0]
    W = HW.matrix()
    stacked = np.vstack([RZ, W]) if W.size else RZ
    K = left_kernel_mod(stacked, n)
    lam = K[:, :k]
    if lam.size == 0:
        return np.zeros((0, S.shape[1]), dtype=np.int64)
    prodmax = lam.shape[1] * (n - 1) * (n - 1)
    assert prodmax < 2**53
    newS = (lam.astype(np.float64) @ S.astype(np.float64)) % n
    return newS.astype(np.int64)


def _constrain_large(S: np.ndarray, RZ: np.ndarray, HW: HowellForm, n: int) -> np.ndarray:
    # graph module {(res(c) mod W, c)}: rows with vanishing left half are
    # exactly the constrained submodule
    k, V = S.shape
    VA = RZ.shape[1]
    H = HowellForm(VA + V, n)
    W = HW.matrix()
    for row in W:
        aug = np.zeros(VA + V, dtype=np.int64)
        aug[:VA] = row
        H.insert(aug)
    for i in range(k):
        aug = np.zeros(VA + V, dtype=np.int64)
        aug[:VA] = RZ[i]
        aug[VA:] = S[i]
        H.insert(aug)
    rows = [row[VA:] for row in H.rows if not row[:VA].any()]
    if not rows:
        return np.zeros((0, V), dtype=np.int64)
    return np.vstack(rows)


def _compress(S: np.ndarray, n: int) -> np.ndarray:
    if S.shape[0] <= 1:
        return S
    H = HowellForm(S.shape[1], n)
    for row in S:
        H.insert(row)
    return H.matrix()


def b0_oracle(
    table: GroupTable,
    subgroup_mode: str = "bicyclic",
    n: int | None = None,
    cap: int | None = None,
) -> tuple[int, ...]:
    """Invariants of the classes vanishing on every subgroup in the family.

    subgroup_mode "abelian" is the defining family; "bicyclic" is the
    optimized family (two commuting generators), cross-checked against the
    reference by the mode-agreement tests.  A subgroup contained in an
    already-processed one is skipped: its constraint is implied because
    restriction towers compose and both coboundaries and Bockstein images
    restrict into the smaller group's versions.
    """
    _check_cap(table, cap)
    n = table.order if n is None else int(n)
    if n % table.order:
        raise PcError(f"coefficient modulus {n} is not a multiple of |G| = {table.order}")

    if subgroup_mode == "bicyclic":
        family = bicyclic_subgroups(table)
    elif subgroup_mode == "abelian":
        family = abelian_subgroups(table)
    else:
        raise PcError(f"unknown subgroup mode {subgroup_mode!r}")

    S = z2_generators(table, n)
    cob = coboundary_generators(table, n)
    bock = bockstein_generators(table, n)
    WG = np.vstack([cob, bock]) if bock.size else cob

    processed: list[int] = []
    for sub in family:
        if len(sub.members) == 1:
            continue
        if any(sub.mask & m == sub.mask for m in processed):
            continue
        processed.append(sub.mask)
        if S.shape[0] == 0:
            break
        gather, HW = _vanishing_context(table, sub, n)
        RZ = HW.reduce_block(S[:, gather])
        if not RZ.any():
            continue
        if RZ.shape[1] <= 600:
            S = _constrain_small(S, RZ, HW, n)
        else:
            S = _constrain_large(S, RZ, HW, n)
        S = _compress(S, n)

    if S.shape[0] == 0:
        return ()
    return quotient_invariants_mod(S, WG, n)
