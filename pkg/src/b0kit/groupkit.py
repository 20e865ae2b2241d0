"""Finite-group machinery: tables, subgroups, central products, transgression.

Functions here are generic over two element carriers: `PcGroup` elements
(exponent tuples) and `GroupTable` ids (ints).  Both expose `multiply`,
`inverse`, `identity`, `gens()`; closures and scans are written against
that duck type so the same code serves oracle-scale tables and the large
polycyclic groups that are never materialized.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import prod

import numpy as np

from .pcgroup import PcGroup, PcPresentation, PcError, parse_pc
from .zlattice import IntLattice, invariant_factors, smith_normal_form

DEFAULT_ENUM_CAP = 1 << 14


class CapExceeded(PcError):
    def __init__(self, msg, required=None):
        super().__init__(msg)
        self.required = required


# ---------------------------------------------------------------------------
# materialized groups


class GroupTable:
    """A finite group as ids 0..order-1 with 0 the identity."""

    def __init__(self, mul: np.ndarray, element_keys=None, label="T"):
        mul = np.asarray(mul, dtype=np.int64)
        if mul.ndim != 2 or mul.shape[0] != mul.shape[1]:
            raise PcError("multiplication table must be square")
        self.mul = mul
        self.order = mul.shape[0]
        self.label = label
        self.element_keys = element_keys
        if (mul[0] != np.arange(self.order)).any() or (mul[:, 0] != np.arange(self.order)).any():
            raise PcError("element 0 is not an identity")
        inv = np.full(self.order, -1, dtype=np.int64)
        rows, cols = np.nonzero(mul == 0)
        inv[rows] = cols
        if (inv < 0).any():
            raise PcError("table has an element without inverse")
        self.inv = inv
        self.identity = 0

    @classmethod
    def from_pc(cls, G: PcGroup, cap: int = DEFAULT_ENUM_CAP) -> "GroupTable":
        order = G.order
        if order > cap:
            raise CapExceeded(f"enumeration requires {order} > cap {cap}", required=order)
        elements = list(_pc_elements(G))
        index = {e: i for i, e in enumerate(elements)}
        mul = np.zeros((order, order), dtype=np.int64)
        for i, a in enumerate(elements):
            for j, b in enumerate(elements):
                mul[i, j] = index[G.multiply(a, b)]
        return cls(mul, element_keys=elements, label=G.pres.label)

    @classmethod
    def from_json(cls, obj) -> "GroupTable":
        if isinstance(obj, str):
            obj = json.loads(obj)
        order = int(obj["order"])
        table = obj["table"]
        if len(table) != order or any(len(row) != order for row in table):
            raise PcError("table dimensions do not match order")
        t = cls(np.asarray(table, dtype=np.int64), label=obj.get("label", "T"))
        t.validate_associativity()
        return t

    @classmethod
    def from_mul_function(cls, elements, fn, label="T") -> "GroupTable":
        index = {e: i for i, e in enumerate(elements)}
        n = len(elements)
        mul = np.zeros((n, n), dtype=np.int64)
        for i, a in enumerate(elements):
            for j, b in enumerate(elements):
                mul[i, j] = index[fn(a, b)]
        return cls(mul, element_keys=list(elements), label=label)

    def validate_associativity(self) -> None:
        m = self.mul
        if (m[m, :] != m[:, m]).any():
            raise PcError("multiplication table is not associative")

    # duck-typed element interface (ids)
    def multiply(self, a: int, b: int) -> int:
        return int(self.mul[a, b])

    def inverse(self, a: int) -> int:
        return int(self.inv[a])

    def commutator(self, a: int, b: int) -> int:
        m = self.mul
        return int(m[m[self.inv[a], self.inv[b]], m[a, b]])

    def gens(self) -> list[int]:
        return self.generating_set()

    def generating_set(self) -> list[int]:
        gens: list[int] = []
        have = {0}
        while len(have) < self.order:
            nxt = next(i for i in range(self.order) if i not in have)
            gens.append(nxt)
            have = set(closure_elements(self, gens))
        return gens

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = int(self.mul[x, a])
            k += 1
        return k

    def commuting_mask_matrix(self) -> np.ndarray:
        return self.mul == self.mul.T

    def to_json(self) -> str:
        return json.dumps({"order": self.order, "table": self.mul.tolist()})


def _pc_elements(G: PcGroup):
    # lexicographic exponent vectors; the zero vector (identity) comes first
    import itertools

    for exps in itertools.product(*(range(m) for m in G.orders)):
        yield exps


def enumerate_group(G: PcGroup, cap: int = DEFAULT_ENUM_CAP) -> GroupTable:
    return GroupTable.from_pc(G, cap)


# ---------------------------------------------------------------------------
# generic closures


def closure_elements(G, gens, cap: int | None = None) -> list:
    """Subgroup generated by `gens` as an element list (orbit of identity)."""
    gens = [g for g in gens if g != G.identity]
    members = [G.identity]
    seen = {G.identity}
    ptr = 0
    while ptr < len(members):
        x = members[ptr]
        ptr += 1
        for g in gens:
            y = G.multiply(x, g)
            if y not in seen:
                seen.add(y)
                members.append(y)
                if cap is not None and len(members) > cap:
                    raise CapExceeded(f"subgroup closure exceeds cap {cap}")
    return members


def subgroup_closure(G, gens, cap: int | None = None) -> list:
    return closure_elements(G, gens, cap)


def normal_closure(G, gens, cap: int | None = None) -> list:
    """Smallest normal subgroup containing gens (conjugate-and-close)."""
    ggens = G.gens()
    core = list(gens)
    while True:
        members = closure_elements(G, core, cap)
        member_set = set(members)
        new = []
        for x in core:
            for g in ggens:
                y = G.multiply(G.multiply(G.inverse(g), x), g)
                if y not in member_set:
                    new.append(y)
        if not new:
            return members
        core.extend(new)


def is_normal(G, members) -> bool:
    member_set = set(members)
    for x in members:
        for g in G.gens():
            if G.multiply(G.multiply(G.inverse(g), x), g) not in member_set:
                return False
    return True


# ---------------------------------------------------------------------------
# subgroups of materialized tables


@dataclass(frozen=True)
class Subgroup:
    members: tuple[int, ...]
    gens: tuple[int, ...]
    mask: int

    def __len__(self):
        return len(self.members)


def _orbit_mask(table: GroupTable, gens) -> tuple[int, tuple[int, ...]]:
    mul = table.mul
    members = [0]
    mask = 1
    ptr = 0
    gens = [g for g in gens if g]
    while ptr < len(members):
        x = members[ptr]
        ptr += 1
        row = mul[x]
        for g in gens:
            y = int(row[g])
            if not (mask >> y) & 1:
                mask |= 1 << y
                members.append(y)
    return mask, tuple(sorted(members))


def make_subgroup(table: GroupTable, gens) -> Subgroup:
    mask, members = _orbit_mask(table, gens)
    if table.order % len(members):
        raise PcError("subgroup order does not divide group order")
    return Subgroup(members, tuple(gens), mask)


def center(table: GroupTable) -> Subgroup:
    ids = np.nonzero((table.mul == table.mul.T).all(axis=1))[0]
    members = tuple(int(i) for i in ids)
    mask = 0
    for i in members:
        mask |= 1 << i
    return Subgroup(members, members, mask)


def commutator_table(table: GroupTable) -> np.ndarray:
    mul, inv = table.mul, table.inv
    q = mul[np.ix_(inv, inv)]
    return mul[q, mul]


def commutator_set(table_or_pc, cap: int = DEFAULT_ENUM_CAP):
    """The set K(G) of commutator values.

    For a table this is a direct scan over center-coset representatives;
    for a pc group the scan runs over the head box ahead of the central
    tail, valid because central shifts never change a commutator.  Class-2
    pc groups use the bilinear form of the commutator map, vectorized.
    """
    G = table_or_pc
    if isinstance(G, GroupTable):
        reps = _center_transversal(G)
        ct = commutator_table(G)
        return {int(ct[x, y]) for x in reps for y in reps}
    reps = _pc_central_transversal(G, cap)
    if len(reps) > 512 or len(reps) ** 2 > cap:
        if nilpotency_class(G) <= 2:
            return _commutator_set_bilinear(G, reps)
        raise CapExceeded(f"commutator scan over {len(reps)**2} pairs exceeds cap")
    return {G.commutator(u, v) for u in reps for v in reps}


def _commutator_set_bilinear(G: PcGroup, reps) -> set:
    # [u, v] = prod [g_i, g_j]^(e_i f_j) for class <= 2, so the scan is a
    # bilinear form over derived-subgroup coordinates
    n = G.n
    tvals = {}
    for i in range(n):
        for j in range(n):
            tvals[(i, j)] = G.commutator(G.gen(i), G.gen(j))
    dercoords = abelian_coordinates(G, sorted(set(tvals.values())))
    diag = dercoords.diag
    r = len(diag)
    M = np.zeros((r, n, n), dtype=np.int64)
    for (i, j), val in tvals.items():
        M[:, i, j] = dercoords.coords(val)
    E = np.array(reps, dtype=np.int64)
    coord_sets = []
    for k in range(r):
        vals = (E @ M[k] @ E.T) % diag[k]
        coord_sets.append(vals)
    stacked = np.stack(coord_sets, axis=-1).reshape(-1, r)
    uniq = {tuple(int(x) for x in row) for row in np.unique(stacked, axis=0)}
    by_coords = {}
    for elem in dercoords.elements():
        by_coords[dercoords.coords(elem)] = elem
    return {by_coords[c] for c in uniq}


def _center_transversal(table: GroupTable) -> list[int]:
    z = center(table)
    seen = set()
    reps = []
    for x in range(table.order):
        if x in seen:
            continue
        reps.append(x)
        seen.update(int(table.mul[x, c]) for c in z.members)
    return reps


def _pc_central_tail_index(G: PcGroup) -> int:
    gens = G.gens()
    t = G.n
    while t > 0:
        g = gens[t - 1]
        if all(G.commutator(g, h) == G.identity for h in gens):
            t -= 1
        else:
            break
    return t


def _pc_central_transversal(G: PcGroup, cap: int) -> list:
    import itertools

    t = _pc_central_tail_index(G)
    head = prod(G.orders[:t])
    if head > cap:
        raise CapExceeded(f"commutator scan needs {head} representatives > cap {cap}",
                          required=head)
    out = []
    for exps in itertools.product(*(range(m) for m in G.orders[:t])):
        out.append(tuple(exps) + (0,) * (G.n - t))
    return out


def derived_subgroup(G, cap: int = DEFAULT_ENUM_CAP) -> list:
    """G' as an element list (normal closure of the commutator values)."""
    K = commutator_set(G, cap)
    return normal_closure(G, sorted(K), cap)


def is_commutator_closed(G, cap: int = DEFAULT_ENUM_CAP) -> bool:
    K = commutator_set(G, cap)
    return K == set(derived_subgroup(G, cap))


def bicyclic_subgroups(table: GroupTable) -> list[Subgroup]:
    """All subgroups <x, y> with [x, y] = 1, deduplicated, largest first."""
    commute = table.commuting_mask_matrix()
    seen: dict[int, Subgroup] = {}
    for x in range(table.order):
        for y in range(x, table.order):
            if not commute[x, y]:
                continue
            mask, members = _orbit_mask(table, (x, y))
            if mask not in seen:
                seen[mask] = Subgroup(members, (x, y), mask)
    return sorted(seen.values(), key=lambda s: (-len(s.members), s.members))


def abelian_subgroups(table: GroupTable) -> list[Subgroup]:
    """All abelian subgroups, built by extending with commuting elements."""
    commute = table.commuting_mask_matrix()
    cent_mask = []
    for g in range(table.order):
        m = 0
        for h in np.nonzero(commute[g])[0]:
            m |= 1 << int(h)
        cent_mask.append(m)

    full = (1 << table.order) - 1
    found: dict[int, Subgroup] = {}
    trivial = Subgroup((0,), (), 1)
    found[1] = trivial
    frontier = [trivial]
    while frontier:
        nxt = []
        for sub in frontier:
            cm = full
            for m in sub.members:
                cm &= cent_mask[m]
            cands = cm & ~sub.mask
            while cands:
                low = cands & -cands
                x = low.bit_length() - 1
                cands ^= low
                ext = _abelian_extension(table, sub, x)
                if ext.mask not in found:
                    found[ext.mask] = ext
                    nxt.append(ext)
        frontier = nxt
    return sorted(found.values(), key=lambda s: (-len(s.members), s.members))


def _abelian_extension(table: GroupTable, sub: Subgroup, x: int) -> Subgroup:
    # <A, x> = A * <x> when x centralizes abelian A
    mul = table.mul
    members = set(sub.members)
    xs = []
    y = x
    while y:
        xs.append(y)
        y = int(mul[y, x])
    for a in sub.members:
        row = mul[a]
        members.update(int(row[p]) for p in xs)
    members = tuple(sorted(members))
    mask = 0
    for m in members:
        mask |= 1 << m
    return Subgroup(members, tuple(sub.gens) + (x,), mask)


def commuting_pairs(G, mode: str = "exhaustive", cap: int = DEFAULT_ENUM_CAP):
    """Ordered pairs with [x, y] = 1.

    exhaustive: scans a materialized table.  bilinear: for class <= 2 pc
    groups, enumerates the commutator form over the abelianization and
    yields canonical lifts; the two modes induce the same wedge relations.
    """
    if mode == "exhaustive":
        table = G if isinstance(G, GroupTable) else GroupTable.from_pc(G, cap)
        commute = table.commuting_mask_matrix()
        for x, y in zip(*np.nonzero(commute)):
            yield int(x), int(y)
        return
    if mode != "bilinear":
        raise PcError(f"unknown commuting_pairs mode {mode!r}")
    if not isinstance(G, PcGroup):
        raise PcError("bilinear mode needs a pc group")
    if nilpotency_class(G) > 2:
        raise PcError("bilinear mode needs nilpotency class <= 2")
    ab = pc_abelianization_data(G)
    import itertools

    boxes = [range(d) for d in ab.diag]
    for a in itertools.product(*boxes):
        u = ab.lift(a)
        for b in itertools.product(*boxes):
            v = ab.lift(b)
            if G.commutator(u, v) == G.identity:
                yield u, v


# ---------------------------------------------------------------------------
# nilpotency class and abelianization


def nilpotency_class(G, max_class: int = 12) -> int:
    """Exact class via normal generating sets of the lower central series."""
    ggens = [g for g in G.gens() if g != G.identity]
    if not ggens:
        return 0
    level = ggens
    seen_levels = 0
    current = set()
    for x in level:
        for g in ggens:
            c = G.commutator(x, g)
            if c != G.identity:
                current.add(c)
    if not current:
        return 1
    cls = 1
    while current:
        cls += 1
        if cls > max_class:
            raise PcError(f"nilpotency class exceeds {max_class} (or group not nilpotent)")
        nxt = set()
        for x in current:
            for g in ggens:
                c = G.commutator(x, g)
                if c != G.identity:
                    nxt.add(c)
        current = nxt
    return cls


def _int_matrix_inverse(M):
    from fractions import Fraction

    n = len(M)
    A = [[Fraction(M[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
         for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        pv = A[col][col]
        A[col] = [x / pv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    out = [[A[i][n + j] for j in range(n)] for i in range(n)]
    for row in out:
        for x in row:
            if x.denominator != 1:
                raise PcError("matrix is not unimodular")
    return [[int(x) for x in row] for row in out]


@dataclass
class PcAbelianization:
    """G_ab = prod Z/diag_k with coords(x) = (x . V) mod diag."""

    diag: tuple[int, ...]
    V: list
    Vinv: list

    def coords(self, elem) -> tuple[int, ...]:
        n = len(self.diag)
        out = []
        for k in range(n):
            s = sum(elem[i] * self.V[i][k] for i in range(n))
            out.append(s % self.diag[k])
        return tuple(out)

    def lift(self, coords) -> tuple[int, ...]:
        n = len(self.diag)
        return tuple(sum(coords[k] * self.Vinv[k][i] for k in range(n)) for i in range(n))

    def nontrivial(self) -> tuple[int, ...]:
        return tuple(sorted(d for d in self.diag if d > 1))


def pc_abelianization_data(G: PcGroup) -> PcAbelianization:
    n = G.n
    rows = []
    for i, w in enumerate(G.pres.powers):
        row = [0] * n
        row[i] = G.orders[i]
        for g, e in w:
            row[g] -= e
        rows.append(row)
    for j, i, w in G.pres.commutators:
        row = [0] * n
        for g, e in w:
            row[g] += e
        rows.append(row)
    _, D, V = smith_normal_form(rows)
    diag = [D[i][i] if i < len(D) else 0 for i in range(n)]
    for i, d in enumerate(diag):
        if d == 0:
            raise PcError("abelianization is infinite; presentation not full rank")
    Vrows = [list(r) for r in V]
    return PcAbelianization(tuple(diag), Vrows, _int_matrix_inverse(Vrows))


@dataclass
class AbelianCoordinates:
    """Discrete-log coordinates for a finite abelian group given by generators."""

    diag: tuple[int, ...]
    _coords: dict

    @property
    def order(self) -> int:
        return prod(d for d in self.diag if d > 1)

    def coords(self, elem) -> tuple[int, ...]:
        return self._coords[elem]

    def elements(self):
        return self._coords.keys()

    def nontrivial(self) -> tuple[int, ...]:
        return tuple(sorted(d for d in self.diag if d > 1))


def abelian_coordinates(G, gens, cap: int = DEFAULT_ENUM_CAP) -> AbelianCoordinates:
    """BFS words + Schreier relations + SNF; requires <gens> abelian."""
    gens = list(dict.fromkeys(g for g in gens if g != G.identity))
    for a in gens:
        for b in gens:
            if G.multiply(a, b) != G.multiply(b, a):
                raise PcError("abelian_coordinates needs commuting generators")
    k = len(gens)
    if k == 0:
        return AbelianCoordinates((), {G.identity: ()})
    words = {G.identity: (0,) * k}
    queue = [G.identity]
    rel = IntLattice(k)
    while queue:
        x = queue.pop()
        vx = words[x]
        for l, g in enumerate(gens):
            y = G.multiply(x, g)
            step = list(vx)
            step[l] += 1
            if y in words:
                rel.add([a - b for a, b in zip(step, words[y])])
            else:
                words[y] = tuple(step)
                queue.append(y)
                if len(words) > cap:
                    raise CapExceeded(f"abelian closure exceeds cap {cap}")
    _, D, V = smith_normal_form(rel.basis_matrix() if rel.rows else [[0] * k])
    diag = [D[i][i] if i < len(D) and i < len(D[0]) else 0 for i in range(k)]
    if any(d == 0 for d in diag):
        raise PcError("finite abelian subgroup produced a rank-deficient relation lattice")
    coords = {}
    for x, vx in words.items():
        coords[x] = tuple(sum(vx[i] * V[i][col] for i in range(k)) % diag[col]
                          for col in range(k))
    return AbelianCoordinates(tuple(diag), coords)


def abelianized_quotient_invariants(G, gens, rel_elems=(), cap: int = DEFAULT_ENUM_CAP):
    """Invariants of the abelianization of <gens>/<<rel_elems>>.

    Works for nonabelian <gens> too: Schreier relations abelianize to the
    relation lattice of the abelianization, and each rel element
    contributes its BFS word vector.
    """
    gens = list(dict.fromkeys(g for g in gens if g != G.identity))
    if not gens:
        return ()
    k = len(gens)
    words = {G.identity: (0,) * k}
    queue = [G.identity]
    rel = IntLattice(k)
    while queue:
        x = queue.pop()
        vx = words[x]
        for l, g in enumerate(gens):
            y = G.multiply(x, g)
            step = list(vx)
            step[l] += 1
            if y in words:
                rel.add([a - b for a, b in zip(step, words[y])])
            else:
                words[y] = tuple(step)
                queue.append(y)
                if len(words) > cap:
                    raise CapExceeded(f"closure exceeds cap {cap}")
    for y in rel_elems:
        if y not in words:
            raise PcError("relation element outside the generated subgroup")
        rel.add(list(words[y]))
    rows = rel.basis_matrix()
    if not rows:
        rows = [[0] * k]
    facs = invariant_factors(rows, ncols=k)
    if any(d == 0 for d in facs):
        raise PcError("quotient is infinite; generators do not close")
    return tuple(sorted(d for d in facs if d > 1))


def abelianization(G, cap: int = DEFAULT_ENUM_CAP):
    """Invariant factors of G_ab plus generator coordinate images."""
    if isinstance(G, PcGroup):
        data = pc_abelianization_data(G)
        images = [data.coords(g) for g in G.gens()]
        return data.nontrivial(), images, data
    gens = G.gens()
    data = _table_abelianization(G, gens, cap)
    images = [data.coords(g) for g in gens]
    return data.nontrivial(), images, data


def _table_abelianization(G, gens, cap) -> AbelianCoordinates:
    gens = list(dict.fromkeys(g for g in gens if g != G.identity))
    k = len(gens)
    if k == 0:
        return AbelianCoordinates((), {G.identity: ()})
    words = {G.identity: (0,) * k}
    queue = [G.identity]
    rel = IntLattice(k)
    while queue:
        x = queue.pop()
        vx = words[x]
        for l, g in enumerate(gens):
            y = G.multiply(x, g)
            step = list(vx)
            step[l] += 1
            if y in words:
                rel.add([a - b for a, b in zip(step, words[y])])
            else:
                words[y] = tuple(step)
                queue.append(y)
                if len(words) > cap:
                    raise CapExceeded(f"closure exceeds cap {cap}")
    rows = rel.basis_matrix() or [[0] * k]
    _, D, V = smith_normal_form(rows)
    diag = []
    for i in range(k):
        d = D[i][i] if i < len(D) and i < len(D[0]) else 0
        if d == 0:
            raise PcError("abelianization of a finite group came out infinite")
        diag.append(d)
    coords = {}
    for x, vx in words.items():
        coords[x] = tuple(sum(vx[i] * V[i][col] for i in range(k)) % diag[col]
                          for col in range(k))
    return AbelianCoordinates(tuple(diag), coords)


# ---------------------------------------------------------------------------
# central products


@dataclass
class CentralProductSpec:
    left: PcGroup | GroupTable
    right: PcGroup | GroupTable
    h1_gens: list
    n1_gens: list
    xi_pairs: list  # (element of H1, element of N1) generator images
    label: str = "central_product"


def load_central_product_spec(obj, base_dir=".") -> CentralProductSpec:
    """JSON layout: {"left": file-or-spec, "right": ..., "H1_gens": [words],
    "N1_gens": [words], "xi": [[h_word, n_word], ...]}"""
    import os

    from .pcgroup import catalog, parse_family_spec

    if isinstance(obj, str):
        obj = json.loads(obj)

    def load_side(ref):
        if isinstance(ref, dict):
            spec = parse_family_spec(ref["catalog"]) if "catalog" in ref else None
            if spec is None:
                raise PcError("group reference needs 'catalog' or a file path")
            return PcGroup(catalog(spec))
        path = ref if os.path.isabs(ref) else os.path.join(base_dir, ref)
        if os.path.exists(path):
            with open(path) as fh:
                return PcGroup(parse_pc(fh.read()))
        return PcGroup(catalog(parse_family_spec(ref)))

    left = load_side(obj["left"])
    right = load_side(obj["right"])
    h1 = [left.element_from_text(w) for w in obj["H1_gens"]]
    n1 = [right.element_from_text(w) for w in obj["N1_gens"]]
    xi = [(left.element_from_text(a), right.element_from_text(b)) for a, b in obj["xi"]]
    return CentralProductSpec(left, right, h1, n1, xi, obj.get("label", "central_product"))


def _extend_central_iso(H, N, h1_gens, n1_gens, xi_pairs, cap):
    """Extend generator images to an isomorphism H1 -> N1, validating."""
    h1_set = set(closure_elements(H, h1_gens, cap))
    gens = [a for a, _ in xi_pairs]
    imgs = [b for _, b in xi_pairs]
    if any(a not in h1_set for a in gens):
        raise PcError("xi domain generator outside H1")
    if set(closure_elements(H, gens, cap)) != h1_set:
        raise PcError("xi generators do not generate H1")
    images = {H.identity: N.identity}
    queue = [H.identity]
    while queue:
        x = queue.pop()
        for g, img in zip(gens, imgs):
            y = H.multiply(x, g)
            fy = N.multiply(images[x], img)
            if y in images:
                if images[y] != fy:
                    raise PcError("xi is not a well-defined homomorphism on H1")
            else:
                images[y] = fy
                queue.append(y)
    n1_set = set(closure_elements(N, n1_gens, cap))
    if set(images.values()) != n1_set or len(set(images.values())) != len(images):
        raise PcError("xi is not an isomorphism onto N1")
    for x in list(images):
        for g, img in zip(gens, imgs):
            if images[H.multiply(x, g)] != N.multiply(images[x], img):
                raise PcError("xi fails the homomorphism check")
    return images


def _check_central(G, elems) -> None:
    for z in elems:
        for g in G.gens():
            if G.commutator(z, g) != G.identity:
                raise PcError("claimed central subgroup is not central")


@dataclass
class CentralProductResult:
    table: GroupTable
    embed_left: dict
    embed_right: dict


def central_product(spec: CentralProductSpec, cap: int = DEFAULT_ENUM_CAP) -> CentralProductResult:
    """Materialize (H x N)/Z with Z = {(a, xi(a)^-1)}."""
    H, N = spec.left, spec.right
    _check_central(H, spec.h1_gens)
    _check_central(N, spec.n1_gens)
    xi = _extend_central_iso(H, N, spec.h1_gens, spec.n1_gens, spec.xi_pairs, cap)
    h1 = sorted(xi.keys())
    orderH = H.order
    orderN = N.order
    total = orderH * orderN // len(h1)
    if total > cap:
        raise CapExceeded(f"central product requires {total} > cap {cap}", required=total)

    z_shift = [(a, N.inverse(xi[a])) for a in h1]

    def canon(h, n):
        return min((H.multiply(h, a), N.multiply(n, zb)) for a, zb in z_shift)

    h_elems = list(_iter_elements(H))
    n_elems = list(_iter_elements(N))
    elems = sorted({canon(h, n) for h in h_elems for n in n_elems})
    ident = canon(H.identity, N.identity)
    elems.remove(ident)
    elems.insert(0, ident)
    table = GroupTable.from_mul_function(
        elems, lambda u, v: canon(H.multiply(u[0], v[0]), N.multiply(u[1], v[1])),
        label=spec.label,
    )
    index = {e: i for i, e in enumerate(elems)}
    embed_left = {h: index[canon(h, N.identity)] for h in h_elems}
    embed_right = {n: index[canon(H.identity, n)] for n in n_elems}
    assert len(elems) == total
    return CentralProductResult(table, embed_left, embed_right)


def _iter_elements(G):
    if isinstance(G, GroupTable):
        return range(G.order)
    return _pc_elements(G)


@dataclass
class CentralProductB0:
    factors: tuple[int, ...]
    hypothesis: str | None
    checks: dict = field(default_factory=dict)


def central_product_b0(
    spec: CentralProductSpec,
    *,
    hypothesis: str | None = None,
    b0_check=None,
    assume_trivial_b0: bool = False,
    cap: int = DEFAULT_ENUM_CAP,
) -> CentralProductB0:
    """Invariants of (Z cap (H' x N')) / <Z cap (K(H) x K(N))>.

    Valid whenever B0(H) = B0(N) = 0; never builds (H x N)/Z.  Everything
    is a scan over Z, which has |H1| elements.  `hypothesis` records which
    sufficient condition ("xi_image_in_K" or "eta_extension") the caller
    relies on for the quotient characterization; "xi_image_in_K" is
    verified set-wise.
    """
    H, N = spec.left, spec.right
    checks: dict = {}
    _check_central(H, spec.h1_gens)
    _check_central(N, spec.n1_gens)
    xi = _extend_central_iso(H, N, spec.h1_gens, spec.n1_gens, spec.xi_pairs, cap)
    h1 = sorted(xi.keys())
    checks["h1_order"] = len(h1)

    if b0_check is not None:
        left_b0 = tuple(b0_check(H))
        right_b0 = tuple(b0_check(N)) if N is not H else left_b0
        checks["b0_left"] = left_b0
        checks["b0_right"] = right_b0
        if left_b0 or right_b0:
            raise PcError("precondition failed: factors do not have trivial B0")
    elif not assume_trivial_b0:
        raise PcError("need b0_check or assume_trivial_b0=True for the precondition")

    KH = commutator_set(H, cap)
    KN = KH if N is H else commutator_set(N, cap)
    Hder = set(normal_closure(H, sorted(KH), cap))
    Nder = Hder if N is H else set(normal_closure(N, sorted(KN), cap))

    X = [a for a in h1 if a in Hder and N.inverse(xi[a]) in Nder]
    Y = [a for a in h1 if a in KH and N.inverse(xi[a]) in KN]
    checks["znhn_order"] = len(X) if X else 1

    if hypothesis == "xi_image_in_K":
        ok = all(xi[a] in KN for a in h1 if a in Hder)
        checks["xi_image_in_K"] = ok
        if not ok:
            raise PcError("hypothesis xi_image_in_K does not hold set-wise")
    elif hypothesis == "eta_extension":
        checks["eta_extension"] = "asserted by caller"
    elif hypothesis is not None:
        raise PcError(f"unknown hypothesis {hypothesis!r}")

    factors = abelianized_quotient_invariants(H, X, Y, cap) if X else ()
    return CentralProductB0(factors, hypothesis, checks)


# ---------------------------------------------------------------------------
# transgression term


def transgression_image(G, normal_gens, cap: int = DEFAULT_ENUM_CAP) -> tuple[int, ...]:
    """Invariants of (N cap G')/<N cap K(G)> for N normal in G.

    This group embeds into B0(G/N), so a nontrivial answer is a certified
    lower bound for |B0(G/N)|.
    """
    N = closure_elements(G, normal_gens, cap)
    if not is_normal(G, N):
        raise PcError("subgroup is not normal")
    K = commutator_set(G, cap)
    der = set(normal_closure(G, sorted(K), cap))
    nset = set(N)
    X = sorted(nset & der)
    Y = sorted(nset & K)
    if not X or X == [G.identity]:
        return ()
    return abelianized_quotient_invariants(G, X, Y, cap)
