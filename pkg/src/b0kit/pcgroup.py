"""Finite polycyclic groups: presentations, collection, consistency, catalog.

A presentation lists generators g_1 < ... < g_n with relative orders
m_i >= 2, power relations g_i^{m_i} = w and commutator relations
[g_j, g_i] = w for j > i, where every right-hand side w mentions only
generators strictly later than g_i.  Omitted commutator pairs commute and
omitted power tails are trivial.  Collection from the left rewrites any
word over the generators to the normal form g_1^{e_1} ... g_n^{e_n} with
0 <= e_i < m_i; normal forms are unique exactly when the presentation is
consistent, which `consistency_check` decides through the standard
overlap comparisons.

Commutators are oriented [x, y] = x^-1 y^-1 x y throughout.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import prod

Word = tuple[tuple[int, int], ...]
Element = tuple[int, ...]

_COLLECT_STEP_LIMIT = 50_000_000


class PcError(Exception):
    pass


class PcParseError(PcError):
    def __init__(self, msg, line=None, col=None):
        if line is not None:
            msg = f"{msg} (line {line}, column {col})"
        super().__init__(msg)
        self.line = line
        self.col = col


class PcStructureError(PcError):
    pass


class InconsistentPresentation(PcError):
    pass


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class PcPresentation:
    names: tuple[str, ...]
    orders: tuple[int, ...]
    powers: tuple[Word, ...]
    commutators: tuple[tuple[int, int, Word], ...]  # (j, i, rhs) with j > i
    label: str = "G"

    @property
    def ngens(self) -> int:
        return len(self.names)

    @property
    def order(self) -> int:
        return prod(self.orders)

    def comm_dict(self) -> dict[tuple[int, int], Word]:
        return {(j, i): w for j, i, w in self.commutators}


def _check_word(word, floor, ngens, what):
    for g, e in word:
        if not 0 <= g < ngens:
            raise PcStructureError(f"{what}: unknown generator index {g}")
        if g <= floor:
            raise PcStructureError(
                f"{what}: right-hand side mentions generator {g}, "
                f"which is not strictly later than generator {floor}"
            )
        if not isinstance(e, int):
            raise PcStructureError(f"{what}: non-integer exponent {e!r}")


def _clean_word(word) -> Word:
    return tuple((int(g), int(e)) for g, e in word if e)


def make_presentation(names, orders, powers=None, commutators=None, label="G") -> PcPresentation:
    names = tuple(names)
    n = len(names)
    if len(set(names)) != n:
        dup = next(nm for nm in names if names.count(nm) > 1)
        raise PcStructureError(f"duplicate generator {dup!r}")
    orders = tuple(int(m) for m in orders)
    if len(orders) != n:
        raise PcStructureError("orders/names length mismatch")
    for nm, m in zip(names, orders):
        if m < 2:
            raise PcStructureError(f"generator {nm!r} has relative order {m} < 2")
    powers = list(powers) if powers is not None else [()] * n
    if len(powers) != n:
        raise PcStructureError("powers/names length mismatch")
    pw = []
    for i, w in enumerate(powers):
        w = _clean_word(w)
        _check_word(w, i, n, f"power relation for {names[i]!r}")
        pw.append(w)
    comms = []
    seen = set()
    for j, i, w in commutators or ():
        if not (0 <= i < j < n):
            raise PcStructureError(
                f"commutator key ({j}, {i}) invalid: keys must be [later, earlier]"
            )
        if (j, i) in seen:
            raise PcStructureError(f"duplicate commutator relation for pair ({j}, {i})")
        seen.add((j, i))
        w = _clean_word(w)
        _check_word(w, i, n, f"commutator relation [{names[j]}, {names[i]}]")
        if w:
            comms.append((j, i, w))
    comms.sort()
    return PcPresentation(names, orders, tuple(pw), tuple(comms), label)


# ---------------------------------------------------------------------------
# the group: collection from the left


def _invert_word(word: Word) -> Word:
    return tuple((g, -e) for g, e in reversed(word))


class PcGroup:
    """Runtime wrapper: collection, multiplication, memoized conjugation.

    Instances are logically immutable; the memo dictionaries only cache
    values that are functions of the presentation, so concurrent readers
    always observe the same results.
    """

    def __init__(self, pres: PcPresentation):
        self.pres = pres
        self.n = pres.ngens
        self.orders = pres.orders
        self._pow_tail: list[Word] = list(pres.powers)
        self._inv_pow_tail = [_invert_word(w) for w in pres.powers]
        self._comm = pres.comm_dict()
        self.identity: Element = (0,) * self.n
        self._name_index = {nm: i for i, nm in enumerate(pres.names)}
        self._conj_pow: dict[tuple[int, int, int], Element] = {}
        self._conj_elem: dict[tuple[Element, int], Element] = {}
        self._elem_pow: dict[tuple[Element, int], Element] = {}

    # -- basic data ---------------------------------------------------------

    @property
    def order(self) -> int:
        return self.pres.order

    @property
    def names(self):
        return self.pres.names

    def gen(self, i: int) -> Element:
        e = [0] * self.n
        e[i] = 1
        return tuple(e)

    def gens(self) -> list[Element]:
        return [self.gen(i) for i in range(self.n)]

    def syllables(self, a: Element) -> Word:
        return tuple((i, e) for i, e in enumerate(a) if e)

    # -- collection ---------------------------------------------------------

    def collect(self, word) -> Element:
        n = self.n
        orders = self.orders
        c = [0] * n
        msup = -1
        stack = []
        for g, e in word:
            if isinstance(g, str):
                g = self._gen_index(g)
            if not 0 <= g < n:
                raise PcError(f"unknown generator index {g}")
            if e:
                stack.append((g, e))
        stack.reverse()
        steps = 0
        while stack:
            i, e = stack.pop()
            if not e:
                continue
            steps += 1
            if steps > _COLLECT_STEP_LIMIT:
                raise PcError("collection step limit exceeded")
            m = orders[i]
            if e < 0 or e >= m:
                q, e = divmod(e, m)
                tail = self._pow_tail[i]
                if tail:
                    tw = tail if q > 0 else self._inv_pow_tail[i]
                    pending = []
                    if e:
                        pending.append((i, e))
                    pending.extend(s for _ in range(abs(q)) for s in tw)
                    stack.extend(reversed(pending))
                    continue
                if not e:
                    continue
            if msup <= i:
                c[i] += e
                if c[i] >= m:
                    c[i] -= m
                    tail = self._pow_tail[i]
                    if tail:
                        stack.extend(reversed(tail))
                if c[i]:
                    if i > msup:
                        msup = i
                elif msup == i:
                    msup = max((t for t in range(i) if c[t]), default=-1)
            else:
                k = msup
                f = c[k]
                c[k] = 0
                msup = max((t for t in range(k) if c[t]), default=-1)
                conj = self._conj_power(k, i, e)
                if f != 1:
                    conj = self.power(conj, f)
                pending = [(i, e)]
                pending.extend(self.syllables(conj))
                stack.extend(reversed(pending))
        return tuple(c)

    def _gen_index(self, name: str) -> int:
        try:
            return self._name_index[name]
        except KeyError:
            raise PcError(f"unknown generator symbol {name!r}") from None

    def _conj_power(self, k: int, i: int, e: int) -> Element:
        """Normal form of g_k conjugated by g_i^e, 0 < e < m_i."""
        key = (k, i, e)
        hit = self._conj_pow.get(key)
        if hit is not None:
            return hit
        if (k, i) not in self._comm:
            res = self.gen(k)
            self._conj_pow[key] = res
            return res
        base = self._conj_pow.get((k, i, 1))
        if base is None:
            base = self.collect(((k, 1),) + self._comm[(k, i)])
            self._conj_pow[(k, i, 1)] = base
        res = base
        for t in range(2, e + 1):
            cached = self._conj_pow.get((k, i, t))
            if cached is not None:
                res = cached
                continue
            res = self._conj_elem_by_gen(res, i)
            self._conj_pow[(k, i, t)] = res
        return res

    def _conj_elem_by_gen(self, x: Element, i: int) -> Element:
        key = (x, i)
        hit = self._conj_elem.get(key)
        if hit is not None:
            return hit
        word = []
        for k, f in self.syllables(x):
            if (k, i) in self._comm:
                word.extend(self.syllables(self.power(self._conj_power(k, i, 1), f)))
            else:
                word.append((k, f))
        res = self.collect(word)
        self._conj_elem[key] = res
        return res

    # -- arithmetic ---------------------------------------------------------

    def multiply(self, a: Element, b: Element) -> Element:
        return self.collect(self.syllables(a) + self.syllables(b))

    def inverse(self, a: Element) -> Element:
        return self.collect(tuple((i, -e) for i, e in reversed(self.syllables(a))))

    def power(self, a: Element, k: int) -> Element:
        key = (a, k)
        hit = self._elem_pow.get(key)
        if hit is not None:
            return hit
        if k < 0:
            res = self.power(self.inverse(a), -k)
        elif k == 0:
            res = self.identity
        elif k == 1:
            res = a
        else:
            half = self.power(a, k // 2)
            res = self.multiply(half, half)
            if k & 1:
                res = self.multiply(res, a)
        self._elem_pow[key] = res
        return res

    def commutator(self, a: Element, b: Element) -> Element:
        word = (
            tuple((i, -e) for i, e in reversed(self.syllables(a)))
            + tuple((i, -e) for i, e in reversed(self.syllables(b)))
            + self.syllables(a)
            + self.syllables(b)
        )
        return self.collect(word)

    def conjugate(self, a: Element, b: Element) -> Element:
        """b^-1 a b."""
        word = (
            tuple((i, -e) for i, e in reversed(self.syllables(b)))
            + self.syllables(a)
            + self.syllables(b)
        )
        return self.collect(word)

    def element_order(self, a: Element) -> int:
        k = 1
        x = a
        while x != self.identity:
            x = self.multiply(x, a)
            k += 1
            if k > self.order:
                raise PcError("element order exceeds group order; inconsistent presentation?")
        return k

    def random_element(self, rng) -> Element:
        return tuple(rng.randrange(m) for m in self.orders)

    # -- words from text ----------------------------------------------------

    def word_from_text(self, text: str) -> Word:
        return tuple((self._gen_index(nm), e) for nm, e in _parse_word_text(text))

    def element_from_text(self, text: str) -> Element:
        return self.collect(self.word_from_text(text))

    def word_to_text(self, word: Word) -> str:
        if not word:
            return "1"
        parts = []
        for g, e in word:
            nm = self.pres.names[g]
            parts.append(nm if e == 1 else f"{nm}^{e}")
        return "*".join(parts)

    def element_to_text(self, a: Element) -> str:
        return self.word_to_text(self.syllables(a))


# ---------------------------------------------------------------------------
# consistency


@dataclass(frozen=True)
class ConsistencyReport:
    consistent: bool
    failures: tuple[str, ...] = ()

    def __bool__(self):
        return self.consistent


def consistency_check(group_or_pres) -> ConsistencyReport:
    """Compare the standard overlap collections both ways.

    Checks, for all applicable indices: g_k(g_j g_i) vs (g_k g_j)g_i,
    (g_j^{m_j})g_i vs g_j^{m_j-1}(g_j g_i), g_j(g_i^{m_i}) vs
    (g_j g_i)g_i^{m_i-1}, and the two associations of g_i^{m_i+1}.
    """
    G = group_or_pres if isinstance(group_or_pres, PcGroup) else PcGroup(group_or_pres)
    names = G.pres.names
    n = G.n
    mul = G.multiply
    failures = []

    gens = G.gens()
    powers = [G.collect(((i, G.orders[i]),)) for i in range(n)]
    powers_m1 = [G.collect(((i, G.orders[i] - 1),)) for i in range(n)]

    for i in range(n):
        lhs = mul(gens[i], powers[i])
        rhs = mul(powers[i], gens[i])
        if lhs != rhs:
            failures.append(f"overlap {names[i]}^{G.orders[i]+1}: {lhs} != {rhs}")
    for j in range(n):
        for i in range(j):
            lhs = mul(powers[j], gens[i])
            rhs = mul(powers_m1[j], mul(gens[j], gens[i]))
            if lhs != rhs:
                failures.append(f"overlap ({names[j]}^{G.orders[j]}){names[i]}: {lhs} != {rhs}")
            lhs = mul(gens[j], powers[i])
            rhs = mul(mul(gens[j], gens[i]), powers_m1[i])
            if lhs != rhs:
                failures.append(f"overlap {names[j]}({names[i]}^{G.orders[i]}): {lhs} != {rhs}")
    for k in range(n):
        for j in range(k):
            for i in range(j):
                lhs = mul(mul(gens[k], gens[j]), gens[i])
                rhs = mul(gens[k], mul(gens[j], gens[i]))
                if lhs != rhs:
                    failures.append(
                        f"overlap {names[k]}({names[j]}{names[i]}): {lhs} != {rhs}"
                    )
    return ConsistencyReport(not failures, tuple(failures))


def require_consistent(G: PcGroup) -> None:
    report = consistency_check(G)
    if not report:
        raise InconsistentPresentation(
            "presentation is inconsistent: " + "; ".join(report.failures[:3])
        )


# ---------------------------------------------------------------------------
# DSL parser / emitter
#
# file := "group" IDENT "{" stmt* "}"
# stmt := "gens" IDENT ("," IDENT)* ";"
#       | "order" IDENT "=" INT ";"
#       | "pow" IDENT "^" INT "=" word ";"
#       | "comm" "[" IDENT "," IDENT "]" "=" word ";"
# word := "1" | term ("*" term)*     term := IDENT ("^" SINT)?
# comments run from '#' to end of line


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>\#[^\n]*)
      | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<int>-?\d+)
      | (?P<sym>[{}\[\](),;=^*])""",
    re.VERBOSE,
)


def _tokenize(text):
    line, col = 1, 1
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise PcParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        val = m.group()
        if kind not in ("ws", "comment"):
            out.append((kind, val, line, col))
        nl = val.count("\n")
        if nl:
            line += nl
            col = len(val) - val.rfind("\n")
        else:
            col += len(val)
        pos = m.end()
    out.append(("eof", "", line, col))
    return out


def _parse_word_text(text: str) -> list[tuple[str, int]]:
    toks = _tokenize(text)
    word, idx = _parse_word(toks, 0)
    kind, val, line, col = toks[idx]
    if kind != "eof":
        raise PcParseError(f"trailing input {val!r} after word", line, col)
    return word


def _parse_word(toks, idx):
    kind, val, line, col = toks[idx]
    if kind == "int" and val == "1":
        return [], idx + 1
    word = []
    while True:
        kind, val, line, col = toks[idx]
        if kind != "ident":
            raise PcParseError(f"expected generator name, found {val!r}", line, col)
        name = val
        idx += 1
        exp = 1
        if toks[idx][0] == "sym" and toks[idx][1] == "^":
            idx += 1
            kind, val, line, col = toks[idx]
            if kind != "int":
                raise PcParseError(f"expected integer exponent, found {val!r}", line, col)
            exp = int(val)
            idx += 1
        word.append((name, exp))
        if toks[idx][0] == "sym" and toks[idx][1] == "*":
            idx += 1
            continue
        return word, idx


def parse_pc(text: str) -> PcPresentation:
    """Parse the group DSL into a structurally validated presentation.

    Consistency is not checked here; run `consistency_check` before
    computing in the group.
    """
    toks = _tokenize(text)
    idx = 0

    def expect(kind, val=None):
        nonlocal idx
        k, v, line, col = toks[idx]
        if k != kind or (val is not None and v != val):
            want = val if val is not None else kind
            raise PcParseError(f"expected {want!r}, found {v!r}", line, col)
        idx += 1
        return v

    expect("ident", "group")
    label = expect("ident")
    expect("sym", "{")

    names: list[str] = []
    name_pos: dict[str, int] = {}
    orders: dict[str, tuple[int, int, int]] = {}
    pows: dict[str, tuple[list, int, int]] = {}
    comms: dict[tuple[str, str], tuple[list, int, int]] = {}

    while True:
        k, v, line, col = toks[idx]
        if k == "sym" and v == "}":
            idx += 1
            break
        if k == "eof":
            raise PcParseError("unexpected end of input, missing '}'", line, col)
        if k != "ident":
            raise PcParseError(f"expected statement, found {v!r}", line, col)
        if v == "gens":
            idx += 1
            while True:
                nm = expect("ident")
                if nm in name_pos:
                    raise PcParseError(f"duplicate generator {nm!r}", line, col)
                name_pos[nm] = len(names)
                names.append(nm)
                if toks[idx][0] == "sym" and toks[idx][1] == ",":
                    idx += 1
                    continue
                break
            expect("sym", ";")
        elif v == "order":
            idx += 1
            nm = expect("ident")
            expect("sym", "=")
            m = int(expect("int"))
            if nm in orders:
                raise PcParseError(f"duplicate order for {nm!r}", line, col)
            orders[nm] = (m, line, col)
            expect("sym", ";")
        elif v == "pow":
            idx += 1
            nm = expect("ident")
            expect("sym", "^")
            m = int(expect("int"))
            expect("sym", "=")
            word, idx = _parse_word(toks, idx)
            expect("sym", ";")
            if nm in pows:
                raise PcParseError(f"duplicate pow relation for {nm!r}", line, col)
            pows[nm] = (word, m, line)
        elif v == "comm":
            idx += 1
            expect("sym", "[")
            a = expect("ident")
            expect("sym", ",")
            b = expect("ident")
            expect("sym", "]")
            expect("sym", "=")
            word, idx = _parse_word(toks, idx)
            expect("sym", ";")
            if (a, b) in comms:
                raise PcParseError(f"duplicate comm relation for [{a},{b}]", line, col)
            comms[(a, b)] = (word, line, col)
        else:
            raise PcParseError(f"unknown statement {v!r}", line, col)

    if toks[idx][0] != "eof":
        k, v, line, col = toks[idx]
        raise PcParseError(f"trailing input {v!r} after group body", line, col)
    if not names:
        raise PcParseError("group has no gens statement", 1, 1)

    def gen_of(nm, line, col):
        if nm not in name_pos:
            raise PcParseError(f"unknown generator {nm!r}", line, col)
        return name_pos[nm]

    order_list = []
    for nm in names:
        if nm not in orders:
            raise PcParseError(f"generator {nm!r} has no order statement", 1, 1)
        m, line, col = orders[nm]
        if m < 2:
            raise PcParseError(f"generator {nm!r} has relative order {m} < 2", line, col)
        order_list.append(m)

    def index_word(word, floor, what, line):
        out = []
        for nm, e in word:
            g = gen_of(nm, line, 1)
            if g <= floor:
                raise PcParseError(
                    f"{what}: right-hand side mentions {nm!r}, which is not "
                    f"strictly later than {names[floor]!r}",
                    line,
                    1,
                )
            out.append((g, e))
        return out

    power_words: list = [()] * len(names)
    for nm, (word, m, line) in pows.items():
        i = gen_of(nm, line, 1)
        if m != order_list[i]:
            raise PcParseError(
                f"pow exponent {m} for {nm!r} does not match its order {order_list[i]}", line, 1
            )
        power_words[i] = index_word(word, i, f"pow {nm}", line)

    comm_list = []
    for (a, b), (word, line, col) in comms.items():
        j = gen_of(a, line, col)
        i = gen_of(b, line, col)
        if j <= i:
            raise PcParseError(
                f"ordering violation in comm [{a},{b}]: commutator keys must be "
                "[later, earlier]",
                line,
                col,
            )
        comm_list.append((j, i, index_word(word, i, f"comm [{a},{b}]", line)))

    try:
        return make_presentation(names, order_list, power_words, comm_list, label)
    except PcStructureError as exc:  # pragma: no cover - parser pre-checks most
        raise PcParseError(str(exc)) from exc


def emit_dsl(pres: PcPresentation) -> str:
    """Render a presentation back into DSL text (stable ordering)."""
    def word_text(word):
        if not word:
            return "1"
        return "*".join(nm if e == 1 else f"{nm}^{e}" for nm, e in
                        ((pres.names[g], e) for g, e in word))

    lines = [f"group {pres.label} {{"]
    lines.append("  gens " + ", ".join(pres.names) + ";")
    for nm, m in zip(pres.names, pres.orders):
        lines.append(f"  order {nm} = {m};")
    for i, w in enumerate(pres.powers):
        if w:
            lines.append(f"  pow {pres.names[i]}^{pres.orders[i]} = {word_text(w)};")
    for j, i, w in pres.commutators:
        lines.append(f"  comm [{pres.names[j]}, {pres.names[i]}] = {word_text(w)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# number-theoretic helpers for the catalog

_SCAN_CAP = 10_000


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def primitive_root(p: int) -> int:
    """Least primitive root mod p (naive scan, p <= 10**4)."""
    if not is_prime(p) or p > _SCAN_CAP:
        raise PcStructureError(f"primitive root scan needs a prime <= {_SCAN_CAP}, got {p}")
    for g in range(2, p):
        seen = set()
        x = 1
        for _ in range(p - 1):
            x = x * g % p
            seen.add(x)
        if len(seen) == p - 1:
            return g
    raise PcStructureError(f"no primitive root found mod {p}")


def least_nonresidue(p: int) -> int:
    """Least positive quadratic non-residue mod p (naive scan, p <= 10**4)."""
    if not is_prime(p) or p > _SCAN_CAP:
        raise PcStructureError(f"non-residue scan needs a prime <= {_SCAN_CAP}, got {p}")
    residues = {x * x % p for x in range(1, p)}
    for v in range(2, p):
        if v not in residues:
            return v
    raise PcStructureError(f"no non-residue mod {p}")


# ---------------------------------------------------------------------------
# catalog


@dataclass(frozen=True)
class CatalogParams:
    family: str
    p: int | None = None
    r: int | None = None
    ds: tuple[int, ...] = ()
    rank: int | None = None
    n: int | None = None
    factors: tuple["CatalogParams", ...] = ()

    def describe(self) -> dict:
        out = {"family": self.family}
        if self.p is not None:
            out["p"] = self.p
        if self.r is not None:
            out["r"] = self.r
        if self.ds:
            out["d"] = list(self.ds)
        if self.rank is not None:
            out["rank"] = self.rank
        if self.n is not None:
            out["n"] = self.n
        if self.factors:
            out["factors"] = [f.describe() for f in self.factors]
        return out


def _require_phi_prime(p):
    if p is None or not is_prime(p):
        raise PcStructureError(f"invalid prime {p}")
    if p <= 3:
        raise PcStructureError(f"requires p>3, got p={p}")


def _phi15(p: int) -> PcPresentation:
    _require_phi_prime(p)
    g = primitive_root(p)
    names = ("a1", "a2", "a3", "a4", "b1", "b2")
    comms = [
        (1, 0, ((4, -1),)),       # [a2, a1] = b1^-1
        (3, 2, ((4, -1),)),       # [a4, a3] = b1^-1
        (2, 0, ((5, -1),)),       # [a3, a1] = b2^-1
        (3, 1, ((5, -g),)),       # [a4, a2] = b2^-g
    ]
    return make_presentation(names, (p,) * 6, None, comms, f"phi15_p{p}")


def _phi28(p: int) -> PcPresentation:
    _require_phi_prime(p)
    names = ("a", "a1", "a2", "a3", "a4")
    orders = (p * p, p, p, p, p)
    powers = [
        (),
        ((3, 1), (4, -(p - 1) // 2)),  # a1^p = a3 * a4^{-(p-1)/2}
        ((4, 1),),                     # a2^p = a4
        (),
        (),
    ]
    comms = [
        (1, 0, ((2, 1),)),   # [a1, a] = a2
        (2, 0, ((3, 1),)),   # [a2, a] = a3
        (3, 0, ((4, 1),)),   # [a3, a] = a4
        (2, 1, ((4, -1),)),  # [a2, a1] = a4^-1
    ]
    return make_presentation(names, orders, powers, comms, f"phi28_p{p}")


def _phi29(p: int) -> PcPresentation:
    _require_phi_prime(p)
    nu = least_nonresidue(p)
    names = ("a", "a1", "a2", "a3", "a4")
    orders = (p * p, p, p, p, p)
    powers = [
        (),
        ((3, nu), (4, -nu * (p - 1) // 2)),  # a1^p = a3^nu * a4^{-nu(p-1)/2}
        ((4, nu),),                          # a2^p = a4^nu
        (),
        (),
    ]
    comms = [
        (1, 0, ((2, 1),)),
        (2, 0, ((3, 1),)),
        (3, 0, ((4, 1),)),
        (2, 1, ((4, -1),)),
    ]
    return make_presentation(names, orders, powers, comms, f"phi29_p{p}")


def _heisenberg(r: int, ds: tuple[int, ...]) -> PcPresentation:
    if r is None or r < 2:
        raise PcStructureError(f"invalid modulus r={r}")
    if not ds:
        raise PcStructureError("heisenberg needs at least one d_i")
    chain = list(ds) + [r]
    for a, b in zip(chain, chain[1:]):
        if a < 1 or b % a:
            raise PcStructureError(f"divisibility chain violated: {'|'.join(map(str, chain))}")
    n = len(ds)
    names = tuple(f"x{i+1}" for i in range(n)) + tuple(f"y{i+1}" for i in range(n)) + ("z",)
    z = 2 * n
    comms = []
    for i, d in enumerate(ds):
        if d % r:
            comms.append((n + i, i, ((z, -d),)))  # [y_i, x_i] = z^{-d_i}
    label = f"heis{2*n+1}_r{r}_d{'_'.join(map(str, ds))}"
    return make_presentation(names, (r,) * (2 * n + 1), None, comms, label)


def _freest_special(rank: int, p: int) -> PcPresentation:
    # Generator p-th powers are taken to be trivial; the defining property
    # used downstream is only the linear independence of the commutators.
    if p is None or not is_prime(p):
        raise PcStructureError(f"invalid prime {p}")
    if rank is None or rank < 2:
        raise PcStructureError(f"rank {rank} < 2")
    names = [f"a{i+1}" for i in range(rank)]
    pair_index = {}
    for i in range(rank):
        for j in range(i + 1, rank):
            pair_index[(i, j)] = rank + len(pair_index)
            names.append(f"c{i+1}{j+1}")
    comms = []
    for (i, j), idx in pair_index.items():
        comms.append((j, i, ((idx, -1),)))  # [a_j, a_i] = c_ij^-1
    ngens = len(names)
    return make_presentation(names, (p,) * ngens, None, comms, f"fs{rank}_p{p}")


def _cyclic(nval: int) -> PcPresentation:
    if nval is None or nval < 2:
        raise PcStructureError(f"invalid cyclic order {nval}")
    return make_presentation(("a",), (nval,), None, None, f"c{nval}")


def _elementary_abelian(p: int, rank: int) -> PcPresentation:
    if p is None or not is_prime(p):
        raise PcStructureError(f"invalid prime {p}")
    if rank is None or rank < 1:
        raise PcStructureError(f"invalid rank {rank}")
    names = tuple(f"e{i+1}" for i in range(rank))
    return make_presentation(names, (p,) * rank, None, None, f"ea{p}_{rank}")


def direct_product_presentation(parts, label=None) -> PcPresentation:
    """Concatenate presentations with disjoint generators (no cross relations)."""
    names: list[str] = []
    orders: list[int] = []
    powers: list[Word] = []
    comms: list[tuple[int, int, Word]] = []
    used: set[str] = set()
    for pos, pres in enumerate(parts):
        off = len(names)
        for nm in pres.names:
            new = nm if nm not in used else f"f{pos}_{nm}"
            used.add(new)
            names.append(new)
        orders.extend(pres.orders)
        for w in pres.powers:
            powers.append(tuple((g + off, e) for g, e in w))
        for j, i, w in pres.commutators:
            comms.append((j + off, i + off, tuple((g + off, e) for g, e in w)))
    label = label or "x".join(p.label for p in parts)
    return make_presentation(names, orders, powers, comms, label)


def catalog(params: CatalogParams, *, check: bool = True) -> PcPresentation:
    """Build a catalog presentation; consistency-checked unless disabled."""
    fam = params.family
    if fam == "phi15":
        pres = _phi15(params.p)
    elif fam == "phi28":
        pres = _phi28(params.p)
    elif fam == "phi29":
        pres = _phi29(params.p)
    elif fam == "heisenberg":
        pres = _heisenberg(params.r, params.ds)
    elif fam == "freest_special":
        pres = _freest_special(params.rank, params.p)
    elif fam == "cyclic":
        pres = _cyclic(params.n)
    elif fam == "elementary_abelian":
        pres = _elementary_abelian(params.p, params.rank)
    elif fam == "direct_product":
        if not params.factors:
            raise PcStructureError("direct_product needs factors")
        pres = direct_product_presentation([catalog(f, check=False) for f in params.factors])
    else:
        raise PcStructureError(f"unknown catalog family {fam!r}")
    if check:
        report = consistency_check(pres)
        if not report:
            raise InconsistentPresentation(
                f"catalog produced an inconsistent presentation for {fam}: "
                + "; ".join(report.failures[:3])
            )
    return pres


_FAMILY_SPEC_RE = re.compile(r"^\s*([a-z_][a-z_0-9]*)\s*\(([^()]*)\)\s*$")


def parse_family_spec(text: str) -> CatalogParams:
    """Parse compact references like 'phi28(p=5)' or 'cyclic(8)*cyclic(2)'.

    Heisenberg d-chains are written d=1|2.  A '*'-joined list becomes a
    direct product.
    """
    parts = _split_product(text)
    if len(parts) > 1:
        return CatalogParams("direct_product", factors=tuple(parse_family_spec(s) for s in parts))
    m = _FAMILY_SPEC_RE.match(parts[0])
    if not m:
        raise PcStructureError(f"cannot parse family spec {text!r}")
    fam, body = m.group(1), m.group(2).strip()
    kw: dict[str, str] = {}
    pos: list[str] = []
    if body:
        for item in body.split(","):
            item = item.strip()
            if "=" in item:
                k, v = item.split("=", 1)
                kw[k.strip()] = v.strip()
            else:
                pos.append(item)
    def geti(key, default=None):
        return int(kw[key]) if key in kw else default
    if fam == "cyclic":
        nval = geti("n", int(pos[0]) if pos else None)
        return CatalogParams("cyclic", n=nval)
    if fam == "elementary_abelian":
        p = geti("p", int(pos[0]) if pos else None)
        rank = geti("rank", int(pos[1]) if len(pos) > 1 else None)
        return CatalogParams("elementary_abelian", p=p, rank=rank)
    if fam in ("phi15", "phi28", "phi29"):
        p = geti("p", int(pos[0]) if pos else None)
        return CatalogParams(fam, p=p)
    if fam == "heisenberg":
        r = geti("r", int(pos[0]) if pos else None)
        draw = kw.get("d", pos[1] if len(pos) > 1 else "1")
        ds = tuple(int(x) for x in str(draw).split("|"))
        return CatalogParams("heisenberg", r=r, ds=ds)
    if fam == "freest_special":
        rank = geti("rank", int(pos[0]) if pos else None)
        p = geti("p", int(pos[1]) if len(pos) > 1 else None)
        return CatalogParams("freest_special", rank=rank, p=p)
    raise PcStructureError(f"unknown catalog family {fam!r}")


def _split_product(text: str) -> list[str]:
    parts = []
    depth = 0
    cur = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "*" and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]
