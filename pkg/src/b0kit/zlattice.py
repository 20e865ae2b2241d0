"""Exact integer and Z/n linear algebra.

Two regimes live here:

* over Z: Smith normal form with transforms and a Hermite-style row
  lattice (`IntLattice`), all on Python's unbounded integers;
* over Z/n with composite n: a Howell-form accumulator (`HowellForm`).
  Z/n is not a field, so plain Gaussian elimination both loses solutions
  and reports wrong spans; the Howell form restores a canonical triangular
  generating set by closing the row module under annihilator multiples.

Everything is exact.  The mod-n fast paths use int64 numpy rows, which is
safe for n < 2**31 since every product formed is < n**2.
"""

from __future__ import annotations

from math import gcd, prod

import numpy as np

_N_CAP = 1 << 31


class LinalgError(Exception):
    pass


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with g = gcd(a, b) >= 0 and x*a + y*b = g."""
    x, nx = 1, 0
    y, ny = 0, 1
    g, ng = a, b
    while ng:
        q = g // ng
        x, nx = nx, x - q * nx
        y, ny = ny, y - q * ny
        g, ng = ng, g - q * ng
    if g < 0:
        x, y, g = -x, -y, -g
    return g, x, y


def modinv(a: int, n: int) -> int:
    g, x, _ = xgcd(a % n, n)
    if g != 1:
        raise LinalgError(f"{a} is not invertible mod {n}")
    return x % n


def unit_for(a: int, n: int) -> int:
    """A unit u mod n with (u*a) % n == gcd(a, n)."""
    a %= n
    if a == 0:
        return 1
    d = gcd(a, n)
    n1 = n // d
    u = modinv((a // d) % n1, n1) if n1 > 1 else 1
    while gcd(u, n) != 1:
        u += n1
    u %= n
    assert (u * a) % n == d
    return u


# ---------------------------------------------------------------------------
# Smith normal form over Z


def _identity(k):
    return [[int(i == j) for j in range(k)] for i in range(k)]


def smith_normal_form(mat) -> tuple[list, list, list]:
    """U, D, V with U*mat*V = D diagonal, U and V unimodular.

    D's nonzero diagonal entries are positive and form a divisibility
    chain.  Pivot selection is by minimal absolute value, which keeps
    coefficient growth tame on the dense small matrices this is used for.
    """
    A = [[int(v) for v in row] for row in mat]
    r = len(A)
    c = len(A[0]) if r else 0
    U = _identity(r)
    V = _identity(c)

    def row_op(i, j, q):  # row_i -= q*row_j
        Ai, Aj = A[i], A[j]
        for t in range(c):
            Ai[t] -= q * Aj[t]
        Ui, Uj = U[i], U[j]
        for t in range(r):
            Ui[t] -= q * Uj[t]

    def col_op(i, j, q):  # col_i -= q*col_j
        for row in A:
            row[i] -= q * row[j]
        for row in V:
            row[i] -= q * row[j]

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def col_swap(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    k = 0
    while k < min(r, c):
        # minimal nonzero pivot in the trailing block
        best = None
        for i in range(k, r):
            Ai = A[i]
            for j in range(k, c):
                v = Ai[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, pi, pj = best
        if pi != k:
            row_swap(k, pi)
        if pj != k:
            col_swap(k, pj)

        while True:
            dirty = False
            for i in range(k + 1, r):
                if A[i][k]:
                    q = A[i][k] // A[k][k]
                    row_op(i, k, q)
                    if A[i][k]:
                        row_swap(i, k)
                        dirty = True
            for j in range(k + 1, c):
                if A[k][j]:
                    q = A[k][j] // A[k][k]
                    col_op(j, k, q)
                    if A[k][j]:
                        col_swap(j, k)
                        dirty = True
            if dirty:
                continue
            # pivot must divide the trailing block for the chain property
            off = None
            for i in range(k + 1, r):
                Ai = A[i]
                for j in range(k + 1, c):
                    if Ai[j] % A[k][k]:
                        off = i
                        break
                if off is not None:
                    break
            if off is None:
                break
            row_op(k, off, -1)  # add offending row, redo
        if A[k][k] < 0:
            row_op(k, k, 2)  # negate row k: row_k -= 2*row_k
        k += 1

    D = [[A[i][j] if i == j else 0 for j in range(c)] for i in range(r)]
    for i in range(r):
        for j in range(c):
            if i != j and A[i][j]:
                raise LinalgError("SNF elimination left an off-diagonal entry")
    return U, D, V


def snf_diagonal(mat) -> list[int]:
    """Diagonal of the Smith form (nonnegative, divisibility chain)."""
    r = len(mat)
    c = len(mat[0]) if r else 0
    if r == 0 or c == 0:
        return []
    _, D, _ = smith_normal_form(mat)
    return [D[i][i] for i in range(min(r, c))]


def invariant_factors(mat, ncols=None) -> tuple[int, ...]:
    """Invariant factors of Z^ncols / rowspan(mat), 0 meaning a free factor."""
    rows = [list(r) for r in mat]
    if ncols is None:
        if not rows:
            raise LinalgError("ncols required for an empty relation matrix")
        ncols = len(rows[0])
    if not rows:
        return (0,) * ncols
    diag = snf_diagonal(rows)
    rank = sum(1 for d in diag if d)
    facs = [d for d in diag if d > 1]
    facs += [0] * (ncols - rank)
    return tuple(facs)


# ---------------------------------------------------------------------------
# Hermite-style integer row lattice


class IntLattice:
    """Row lattice in Z^dim kept in echelon form, exact arithmetic.

    Rows are stored sorted by pivot column with positive pivots.  `add`
    returns whether the lattice grew, `reduce` returns the canonical
    residue (zero iff member), `coords` solves x * basis = v exactly.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.rows: list[list[int]] = []
        self.pivot_cols: list[int] = []

    def __len__(self):
        return len(self.rows)

    def _lead(self, v):
        for j, x in enumerate(v):
            if x:
                return j
        return -1

    def reduce(self, vec) -> list[int]:
        v = [int(x) for x in vec]
        if len(v) != self.dim:
            raise LinalgError("dimension mismatch")
        for row, c in zip(self.rows, self.pivot_cols):
            if v[c]:
                q = v[c] // row[c]
                if q:
                    for t in range(c, self.dim):
                        v[t] -= q * row[t]
        return v

    def contains(self, vec) -> bool:
        return not any(self.reduce(vec))

    def add(self, vec) -> bool:
        v = [int(x) for x in vec]
        if len(v) != self.dim:
            raise LinalgError("dimension mismatch")
        grew = False
        while True:
            c = self._lead(v)
            if c < 0:
                return grew
            pos = None
            for idx, pc in enumerate(self.pivot_cols):
                if pc == c:
                    pos = idx
                    break
                if pc > c:
                    break
            if pos is None:
                if v[c] < 0:
                    v = [-x for x in v]
                at = sum(1 for pc in self.pivot_cols if pc < c)
                self.rows.insert(at, v)
                self.pivot_cols.insert(at, c)
                return True
            row = self.rows[pos]
            d, b = row[c], v[c]
            if b % d == 0:
                q = b // d
                for t in range(c, self.dim):
                    v[t] -= q * row[t]
            else:
                g, x, y = xgcd(d, b)
                new = [x * rt + y * vt for rt, vt in zip(row, v)]
                v = [(d // g) * vt - (b // g) * rt for rt, vt in zip(row, v)]
                self.rows[pos] = new
                grew = True

    def add_many(self, vectors) -> None:
        for v in vectors:
            self.add(v)

    def coords(self, vec):
        """x with x * basis == vec, or None if vec is outside the lattice."""
        v = [int(x) for x in vec]
        out = [0] * len(self.rows)
        for idx, (row, c) in enumerate(zip(self.rows, self.pivot_cols)):
            if v[c]:
                if v[c] % row[c]:
                    return None
                q = v[c] // row[c]
                out[idx] = q
                for t in range(c, self.dim):
                    v[t] -= q * row[t]
        if any(v):
            return None
        return out

    def filter_new(self, block: np.ndarray) -> np.ndarray:
        """Rows of `block` not already in the lattice (vectorized reduce)."""
        if len(block) == 0:
            return block
        B = np.array(block, dtype=np.int64, copy=True)
        for row, c in zip(self.rows, self.pivot_cols):
            q = B[:, c] // row[c]
            nz = q != 0
            if nz.any():
                B[nz] -= q[nz, None] * np.asarray(row, dtype=np.int64)
        keep = np.any(B != 0, axis=1)
        return np.asarray(block)[keep]

    def basis_matrix(self) -> list[list[int]]:
        return [list(r) for r in self.rows]


def lattice_quotient_invariants(num: IntLattice, den_rows) -> tuple[int, ...]:
    """Invariant factors of <num>/<den>; requires den inside num.

    Zeros in the result signal free factors (an infinite quotient).
    """
    k = len(num.rows)
    if k == 0:
        for row in den_rows:
            if any(row):
                raise LinalgError("denominator not inside numerator lattice")
        return ()
    coords = []
    for row in den_rows:
        x = num.coords(row)
        if x is None:
            raise LinalgError("denominator not inside numerator lattice")
        coords.append(x)
    if not coords:
        return (0,) * k
    facs = invariant_factors(coords, ncols=k)
    finite = sorted(d for d in facs if d > 1)
    return tuple(finite) + (0,) * sum(1 for d in facs if d == 0)


def subquotient_invariants(gens, rels, ambient_orders) -> tuple[int, ...]:
    """Invariants of (<gens>+<rels>)/<rels> inside prod Z/ambient_orders."""
    dim = len(ambient_orders)
    diag = [[ambient_orders[i] if j == i else 0 for j in range(dim)] for i in range(dim)]
    num = IntLattice(dim)
    for v in gens:
        if len(v) != dim:
            raise LinalgError("generator dimension mismatch")
        num.add(v)
    den_rows = []
    for v in rels:
        if len(v) != dim:
            raise LinalgError("relation dimension mismatch")
        num.add(v)
        den_rows.append([int(x) for x in v])
    for row in diag:
        num.add(row)
        den_rows.append(row)
    facs = lattice_quotient_invariants(num, den_rows)
    if any(d == 0 for d in facs):
        raise LinalgError("finite ambient produced an infinite subquotient")
    return facs


# ---------------------------------------------------------------------------
# Howell form over Z/n


class HowellForm:
    """Canonical triangular generating set of a row module in (Z/n)^width.

    Pivots are divisors of n; inserting a row also inserts the annihilator
    multiples needed so that the stored rows span the module's every
    "trailing-zero" section.  That span property is what makes
    reduce-to-zero a complete membership test and what makes the kernel
    extraction in `kernel_mod` complete.
    """

    def __init__(self, width: int, n: int):
        if n < 2 or n >= _N_CAP:
            raise LinalgError(f"modulus {n} out of supported range")
        self.n = n
        self.width = width
        self.rows: list[np.ndarray] = []
        self.pivots: dict[int, int] = {}  # column -> row index

    def __len__(self):
        return len(self.rows)

    def insert(self, vec) -> None:
        n = self.n
        queue = [np.asarray(vec, dtype=np.int64) % n]
        while queue:
            w = queue.pop()
            while True:
                nz = np.flatnonzero(w)
                if nz.size == 0:
                    break
                c = int(nz[0])
                hit = self.pivots.get(c)
                if hit is None:
                    u = unit_for(int(w[c]), n)
                    if u != 1:
                        w = (w * u) % n
                    d = int(w[c])
                    self.pivots[c] = len(self.rows)
                    self.rows.append(w)
                    ann = ((n // d) * w) % n
                    if ann.any():
                        queue.append(ann)
                    break
                row = self.rows[hit]
                d = int(row[c])
                b = int(w[c])
                if b % d == 0:
                    w = (w - (b // d) * row) % n
                    continue
                g, x, y = xgcd(d, b)
                new = (x * row + y * w) % n
                u = unit_for(int(new[c]), n)
                if u != 1:
                    new = (new * u) % n
                d2 = int(new[c])
                self.rows[hit] = new
                queue.append(((n // d2) * new) % n)
                w = ((d // g) * w - (b // g) * row) % n

    def insert_many(self, matrix) -> None:
        for row in np.atleast_2d(np.asarray(matrix, dtype=np.int64)):
            self.insert(row)

    def reduce(self, vec) -> np.ndarray:
        n = self.n
        v = np.asarray(vec, dtype=np.int64) % n
        for c in sorted(self.pivots):
            if v[c]:
                row = self.rows[self.pivots[c]]
                v = (v - (v[c] // row[c]) * row) % n
        return v

    def reduce_block(self, block: np.ndarray) -> np.ndarray:
        n = self.n
        B = np.asarray(block, dtype=np.int64) % n
        for c in sorted(self.pivots):
            row = self.rows[self.pivots[c]]
            q = B[:, c] // row[c]
            nz = q != 0
            if nz.any():
                B[nz] = (B[nz] - q[nz, None] * row) % n
        return B

    def contains(self, vec) -> bool:
        return not self.reduce(vec).any()

    def matrix(self) -> np.ndarray:
        if not self.rows:
            return np.zeros((0, self.width), dtype=np.int64)
        order = sorted(range(len(self.rows)), key=lambda i: int(np.flatnonzero(self.rows[i])[0]))
        return np.vstack([self.rows[i] for i in order])

    def module_order(self) -> int:
        return prod(self.n // gcd(int(r[np.flatnonzero(r)[0]]), self.n) for r in self.rows) if self.rows else 1


def howell_matrix(rows, n: int, width=None) -> np.ndarray:
    M = np.atleast_2d(np.asarray(rows, dtype=np.int64))
    if width is None:
        width = M.shape[1]
    H = HowellForm(width, n)
    for row in M:
        H.insert(row)
    return H.matrix()


def kernel_mod(mat, n: int) -> np.ndarray:
    """Generators of {x : mat @ x == 0 mod n} as rows of a matrix.

    The returned rows generate the kernel as a Z/n-module (not merely a
    maximal independent set), via a Howell form of the graph module
    {(mat @ t, t)}.
    """
    M = np.atleast_2d(np.asarray(mat, dtype=np.int64)) % n
    r, c = M.shape
    if c == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if r:
        M = howell_matrix(M, n)
        r = M.shape[0]
    H = HowellForm(r + c, n)
    for j in range(c):
        aug = np.zeros(r + c, dtype=np.int64)
        if r:
            aug[:r] = M[:, j]
        aug[r + j] = 1
        H.insert(aug)
    gens = [row[r:] for row in H.rows if not row[:r].any()]
    if not gens:
        return np.zeros((0, c), dtype=np.int64)
    return np.vstack(gens)


def left_kernel_mod(mat, n: int) -> np.ndarray:
    """Generators of {x : x @ mat == 0 mod n}."""
    M = np.atleast_2d(np.asarray(mat, dtype=np.int64))
    return kernel_mod(M.T, n)


def snf_mod(mat, n: int, ncols=None) -> list[int]:
    """Diagonal of a Smith-like form of `mat` over Z/n.

    Returns one divisor of n per column of the quotient (Z/n)^ncols /
    rowspan(mat): entry d means a Z/d factor (pivotless columns give n).
    """
    M = np.atleast_2d(np.asarray(mat, dtype=np.int64)) % n
    if ncols is None:
        ncols = M.shape[1]
    if M.size == 0 or not M.any():
        return [n] * ncols
    M = M.copy()
    r, c = M.shape
    diag = []
    k = 0
    while k < min(r, c):
        sub = M[k:, k:]
        nz = np.argwhere(sub != 0)
        if nz.size == 0:
            break
        # prefer a pivot whose gcd with n is smallest
        gcds = np.array([gcd(int(sub[i, j]), n) for i, j in nz])
        pi, pj = nz[int(np.argmin(gcds))]
        pi += k
        pj += k
        M[[k, pi]] = M[[pi, k]]
        M[:, [k, pj]] = M[:, [pj, k]]
        u = unit_for(int(M[k, k]), n)
        if u != 1:
            M[k] = (M[k] * u) % n
        while True:
            d = int(M[k, k])
            col = M[k + 1 :, k]
            bad = np.flatnonzero(col % d)
            if bad.size:
                i = int(bad[0]) + k + 1
                g, x, y = xgcd(d, int(M[i, k]))
                new = (x * M[k] + y * M[i]) % n
                u = unit_for(int(new[k]), n)
                M[i] = ((d // g) * M[i] - (int(M[i, k]) // g) * M[k]) % n
                M[k] = (new * u) % n
                continue
            q = col // d
            nzq = q != 0
            if nzq.any():
                M[k + 1 :][nzq] = (M[k + 1 :][nzq] - q[nzq, None] * M[k]) % n
            row = M[k, k + 1 :]
            badc = np.flatnonzero(row % d)
            if badc.size:
                j = int(badc[0]) + k + 1
                g, x, y = xgcd(d, int(M[k, j]))
                newcol = (x * M[:, k] + y * M[:, j]) % n
                M[:, j] = ((d // g) * M[:, j] - (int(M[k, j]) // g) * M[:, k]) % n
                M[:, k] = newcol
                u = unit_for(int(M[k, k]), n)
                if u != 1:
                    M[:, k] = (M[:, k] * u) % n
                continue
            qc = row // d
            nzc = qc != 0
            if nzc.any():
                M[:, k + 1 :][:, nzc] = (M[:, k + 1 :][:, nzc] - np.outer(M[:, k], qc[nzc])) % n
            if (M[k + 1 :, k] == 0).all() and (M[k, k + 1 :] == 0).all():
                break
        # enforce divisibility into the trailing block
        d = int(M[k, k])
        rest = M[k + 1 :, k + 1 :]
        off = np.argwhere(rest % d != 0)
        if off.size:
            i = int(off[0][0]) + k + 1
            M[k] = (M[k] + M[i]) % n
            continue
        diag.append(gcd(d, n))
        k += 1
    diag += [n] * (ncols - len(diag))
    out = []
    for d in diag:
        out.append(gcd(d, n))
    return out


def quotient_invariants_mod(gens, rels, n: int) -> tuple[int, ...]:
    """Invariants of (span(gens)+span(rels))/span(rels) inside (Z/n)^V."""
    S = np.atleast_2d(np.asarray(gens, dtype=np.int64)) % n
    if S.size == 0 or not S.any():
        return ()
    k, V = S.shape
    W = np.atleast_2d(np.asarray(rels, dtype=np.int64)) % n if len(rels) else np.zeros((0, V), dtype=np.int64)
    H = HowellForm(V + k, n)
    for row in W:
        aug = np.zeros(V + k, dtype=np.int64)
        aug[:V] = row
        H.insert(aug)
    for i in range(k):
        aug = np.zeros(V + k, dtype=np.int64)
        aug[:V] = S[i]
        aug[V + i] = 1
        H.insert(aug)
    lam = [row[V:] for row in H.rows if not row[:V].any()]
    rel = np.vstack(lam) if lam else np.zeros((0, k), dtype=np.int64)
    divisors = snf_mod(rel, n, ncols=k)
    return tuple(sorted(d for d in divisors if d > 1))


def merge_invariants(*factor_lists) -> tuple[int, ...]:
    """Invariant factors of the direct sum of the given abelian groups."""
    primary: dict[int, list[int]] = {}
    for facs in factor_lists:
        for d in facs:
            if d in (0, 1):
                if d == 0:
                    raise LinalgError("cannot merge an infinite factor")
                continue
            m = d
            p = 2
            while p * p <= m:
                if m % p == 0:
                    e = 0
                    while m % p == 0:
                        m //= p
                        e += 1
                    primary.setdefault(p, []).append(e)
                p += 1
            if m > 1:
                primary.setdefault(m, []).append(1)
    for exps in primary.values():
        exps.sort(reverse=True)
    width = max((len(v) for v in primary.values()), default=0)
    out = []
    for i in range(width):
        d = 1
        for p, exps in primary.items():
            if i < len(exps):
                d *= p ** exps[i]
        out.append(d)
    return tuple(sorted(out))
