"""Exact dense linear algebra over Z, Q, F_p and Z/p^N.

Matrices are plain lists of lists of Python ints (or Fractions for the
rational routines); no floating point anywhere.  Over the non-field ring
Z/p^N, row spans are canonicalized with a Howell-style normal form, which
is the basis for kernels, span membership and module enumeration.
"""

from __future__ import annotations

from fractions import Fraction

from .arith import int_val

# ---------------------------------------------------------------------------
# basic dense matrix operations


def identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def zero_matrix(r: int, c: int) -> list[list[int]]:
    return [[0] * c for _ in range(r)]


def mat_mod(a, mod: int) -> list[list[int]]:
    return [[x % mod for x in row] for row in a]


def mat_copy(a) -> list[list[int]]:
    return [list(row) for row in a]


def mat_eq(a, b) -> bool:
    return a == b


def mat_add(a, b, mod: int | None = None):
    n, m = len(a), len(a[0])
    if mod is None:
        return [[a[i][j] + b[i][j] for j in range(m)] for i in range(n)]
    return [[(a[i][j] + b[i][j]) % mod for j in range(m)] for i in range(n)]


def mat_sub(a, b, mod: int | None = None):
    n, m = len(a), len(a[0])
    if mod is None:
        return [[a[i][j] - b[i][j] for j in range(m)] for i in range(n)]
    return [[(a[i][j] - b[i][j]) % mod for j in range(m)] for i in range(n)]


def mat_scale(a, c, mod: int | None = None):
    if mod is None:
        return [[c * x for x in row] for row in a]
    return [[(c * x) % mod for x in row] for row in a]


def mat_mul(a, b, mod: int | None = None):
    n, k, m = len(a), len(b), len(b[0])
    bt = [[b[i][j] for i in range(k)] for j in range(m)]
    out = []
    for i in range(n):
        ai = a[i]
        row = []
        for j in range(m):
            bj = bt[j]
            s = 0
            for t in range(k):
                s += ai[t] * bj[t]
            row.append(s % mod if mod is not None else s)
        out.append(row)
    return out


def mat_vec(a, v, mod: int | None = None):
    out = []
    for row in a:
        s = 0
        for x, y in zip(row, v):
            s += x * y
        out.append(s % mod if mod is not None else s)
    return out


def mat_pow(a, k: int, mod: int | None = None):
    n = len(a)
    result = identity(n)
    base = mat_copy(a)
    while k:
        if k & 1:
            result = mat_mul(result, base, mod)
        base = mat_mul(base, base, mod) if k > 1 else base
        k >>= 1
    return result


def transpose(a):
    return [list(col) for col in zip(*a)]


def commute(a, b, mod: int | None = None) -> bool:
    return mat_mul(a, b, mod) == mat_mul(b, a, mod)


def vec_of(a) -> list[int]:
    """Flatten a matrix row-major (for span computations on matrices)."""
    return [x for row in a for x in row]


# ---------------------------------------------------------------------------
# characteristic polynomial (Berkowitz, division-free)


def charpoly(a, mod: int | None = None) -> list[int]:
    """Characteristic polynomial det(xI - a), coefficients low -> high, monic.

    Division-free, so it is exact over Z and over Z/mod alike.
    """
    n = len(a)
    if n == 0:
        return [1]
    red = (lambda x: x % mod) if mod is not None else (lambda x: x)
    # vec holds coefficients high -> low for the leading principal minor
    vec = [1, red(-a[0][0])]
    for k in range(2, n + 1):
        # submatrix A_{k-1}, border row R, column S, corner a_kk
        akk = a[k - 1][k - 1]
        R = a[k - 1][: k - 1]
        S = [a[i][k - 1] for i in range(k - 1)]
        # items = [1, -a_kk, -(R S), -(R A S), -(R A^2 S), ...], length k+1
        items = [1, red(-akk)]
        w = S
        sub = [row[: k - 1] for row in a[: k - 1]]
        for _ in range(k - 1):
            s = 0
            for x, y in zip(R, w):
                s += x * y
            items.append(red(-s))
            w = mat_vec(sub, w, mod)
        new = [0] * (k + 1)
        for i in range(k + 1):
            s = 0
            for j in range(min(i, len(vec) - 1) + 1):
                if i - j < len(items):
                    s += items[i - j] * vec[j]
            new[i] = red(s)
        vec = new
    vec.reverse()
    return vec


# ---------------------------------------------------------------------------
# elimination over the prime field F_p


def inv_mod(a: int, m: int) -> int:
    return pow(a, -1, m)


class SpanFp:
    """Incremental row span over F_p with reduced-echelon bookkeeping."""

    def __init__(self, p: int, width: int):
        self.p = p
        self.width = width
        self.rows: list[list[int]] = []
        self.pivots: list[int] = []

    def reduce(self, vec) -> list[int]:
        p = self.p
        v = [x % p for x in vec]
        for row, piv in zip(self.rows, self.pivots):
            c = v[piv]
            if c:
                v = [(x - c * y) % p for x, y in zip(v, row)]
        return v

    def add(self, vec) -> bool:
        """Add vec to the span; True if it enlarged the span."""
        v = self.reduce(vec)
        piv = next((i for i, x in enumerate(v) if x), None)
        if piv is None:
            return False
        inv = inv_mod(v[piv], self.p)
        v = [(x * inv) % self.p for x in v]
        for row in self.rows:
            c = row[piv]
            if c:
                row[:] = [(x - c * y) % self.p for x, y in zip(row, v)]
        idx = next((i for i, q in enumerate(self.pivots) if q > piv), len(self.pivots))
        self.rows.insert(idx, v)
        self.pivots.insert(idx, piv)
        return True

    def contains(self, vec) -> bool:
        return not any(self.reduce(vec))

    @property
    def dim(self) -> int:
        return len(self.rows)

    def coordinates(self, vec):
        """Coefficients of vec on the stored echelon rows, or None."""
        p = self.p
        v = [x % p for x in vec]
        coeffs = []
        for row, piv in zip(self.rows, self.pivots):
            c = v[piv]
            coeffs.append(c)
            if c:
                v = [(x - c * y) % p for x, y in zip(v, row)]
        if any(v):
            return None
        return coeffs


def rref_fp(rows, p: int):
    """Reduced row echelon form over F_p; returns (rows, pivot columns)."""
    span = SpanFp(p, len(rows[0]) if rows else 0)
    for r in rows:
        span.add(r)
    return [list(r) for r in span.rows], list(span.pivots)


def rank_fp(rows, p: int) -> int:
    return len(rref_fp(rows, p)[1])


def solve_fp(a, b, p: int):
    """One solution x of a x = b over F_p, or None."""
    n, m = len(a), len(a[0])
    aug = [[a[i][j] % p for j in range(m)] + [b[i] % p] for i in range(n)]
    rows, pivots = rref_fp(aug, p)
    x = [0] * m
    for row, piv in zip(rows, pivots):
        if piv == m:
            return None
        x[piv] = row[m]
    return x


# ---------------------------------------------------------------------------
# Howell normal form over Z/p^N

# Every nonzero x in Z/p^N factors as p^v * u with u a unit; pivots are
# normalized to plain powers p^v, which makes the row span canonical
# (echelon form alone is not, over a non-field ring).


def _val_unit(x: int, p: int, N: int) -> tuple[int, int]:
    if x == 0:
        return N, 1
    v = int_val(x, p)
    return v, x // p**v


def howell(rows, p: int, N: int, transform: bool = False):
    """Howell normal form of the row span of `rows` over Z/p^N.

    Returns the canonical list of nonzero rows (pivot entries are powers of
    p, entries above a pivot are reduced modulo it).  With transform=True,
    returns (H, T, Z) where each H[i] = T[i] . rows and Z collects the
    transform rows of relations (rows of the input span that reduce to 0),
    which generate the left kernel of the input matrix.
    """
    mod = p**N
    if not rows:
        return ([], [], []) if transform else []
    ncols = len(rows[0])
    work = [[x % mod for x in r] for r in rows]
    nin = len(work)
    trans = [[1 if i == j else 0 for j in range(nin)] for i in range(nin)] if transform else None

    def t_scale(i, c):
        if trans is not None:
            trans[i] = [(c * x) % mod for x in trans[i]]

    def t_axpy(i, j, c):
        # row i += c * row j   (transform side)
        if trans is not None:
            trans[i] = [(x + c * y) % mod for x, y in zip(trans[i], trans[j])]

    def t_append_scaled(j, c):
        if trans is not None:
            trans.append([(c * x) % mod for x in trans[j]])

    pivots: list[tuple[int, int]] = []  # (column, row index)
    assigned: set[int] = set()
    col = 0
    for col in range(ncols):
        # candidate rows: unassigned, zero before col (guaranteed), nonzero at col
        best = None
        best_v = N
        for i in range(len(work)):
            if i in assigned:
                continue
            x = work[i][col]
            if x:
                v = int_val(x, p)
                if v < best_v:
                    best_v, best = v, i
        if best is None:
            continue
        v, u = _val_unit(work[best][col], p, N)
        uinv = inv_mod(u, mod)
        work[best] = [(uinv * x) % mod for x in work[best]]
        t_scale(best, uinv)
        piv_val = p**v
        # eliminate below/among unassigned (valuations >= v there), reduce above
        for i in range(len(work)):
            if i == best:
                continue
            c = work[i][col]
            if not c:
                continue
            q = c // piv_val
            work[i] = [(x - q * y) % mod for x, y in zip(work[i], work[best])]
            t_axpy(i, best, -q)
        assigned.add(best)
        pivots.append((col, best))
        if v > 0:
            # annihilator row keeps the span Howell-closed in later columns
            ann = [(p ** (N - v) * x) % mod for x in work[best]]
            if any(ann):
                work.append(ann)
                t_append_scaled(best, p ** (N - v))
            elif trans is not None:
                # p^(N-v) * pivot row is a relation
                trans.append([(p ** (N - v) * x) % mod for x in trans[best]])
                work.append([0] * ncols)
    H = [work[i] for (_, i) in pivots]
    if transform:
        T = [trans[i] for (_, i) in pivots]
        Z = [trans[i][:nin] for i in range(len(work)) if i not in assigned and not any(work[i])]
        T = [t[:nin] for t in T]
        return H, T, Z
    return H


def howell_reduce(vec, H, p: int, N: int):
    """Reduce vec against Howell rows H; the residue is zero iff vec is in the span."""
    mod = p**N
    v = [x % mod for x in vec]
    for row in H:
        piv = next(i for i, x in enumerate(row) if x)
        pv = row[piv]
        q = v[piv] // pv
        if q:
            v = [(x - q * y) % mod for x, y in zip(v, row)]
    return v


def in_span(vec, H, p: int, N: int) -> bool:
    return not any(howell_reduce(vec, H, p, N))


def left_kernel(a, p: int, N: int) -> list[list[int]]:
    """Howell basis of {x : x a = 0 over Z/p^N}."""
    _, _, Z = howell(a, p, N, transform=True)
    return howell(Z, p, N) if Z else []


def right_kernel(a, p: int, N: int) -> list[list[int]]:
    return left_kernel(transpose(a), p, N)


def solve_left(a, b, p: int, N: int):
    """One x with x a = b over Z/p^N, or None."""
    H, T, _ = howell(a, p, N, transform=True)
    mod = p**N
    v = [x % mod for x in b]
    nin = len(a)
    x = [0] * nin
    for row, t in zip(H, T):
        piv = next(i for i, y in enumerate(row) if y)
        pv = row[piv]
        if v[piv] % pv:
            return None
        q = v[piv] // pv
        if q:
            v = [(s - q * y) % mod for s, y in zip(v, row)]
            x = [(s + q * y) % mod for s, y in zip(x, t)]
    if any(v):
        return None
    return x


def solve_right(a, b, p: int, N: int):
    """One x with a x = b (column convention) over Z/p^N, or None."""
    return solve_left(transpose(a), b, p, N)


def inv_unit_matrix(a, mod: int):
    """Inverse of a matrix invertible mod every prime of mod (unit pivots)."""
    n = len(a)
    work = [[a[i][j] % mod for j in range(n)] + [1 if i == j else 0 for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((i for i in range(col, n) if work[i][col] % mod and _is_unit(work[i][col], mod)), None)
        if piv is None:
            raise ValueError("matrix is not invertible modulo the given modulus")
        work[col], work[piv] = work[piv], work[col]
        inv = inv_mod(work[col][col], mod)
        work[col] = [(inv * x) % mod for x in work[col]]
        for i in range(n):
            if i != col and work[i][col]:
                c = work[i][col]
                work[i] = [(x - c * y) % mod for x, y in zip(work[i], work[col])]
    return [row[n:] for row in work]


def _is_unit(x: int, mod: int) -> bool:
    from math import gcd

    return gcd(x, mod) == 1


def module_size(H, p: int, N: int) -> int:
    """Number of elements of the Z/p^N-span of Howell rows H."""
    size = 1
    for row in H:
        piv = next(i for i, x in enumerate(row) if x)
        size *= p ** (N - int_val(row[piv], p))
    return size


def module_elements(H, p: int, N: int):
    """Iterate over all elements of the span of Howell rows H (small modules)."""
    mod = p**N
    if not H:
        yield [0] * 0
        return
    ncols = len(H[0])
    ranges = []
    for row in H:
        piv = next(i for i, x in enumerate(row) if x)
        ranges.append(p ** (N - int_val(row[piv], p)))

    def rec(i, acc):
        if i == len(H):
            yield list(acc)
            return
        row = H[i]
        for c in range(ranges[i]):
            nxt = [(x + c * y) % mod for x, y in zip(acc, row)] if c else list(acc)
            yield from rec(i + 1, nxt)

    yield from rec(0, [0] * ncols)


# ---------------------------------------------------------------------------
# exact rational / integer routines


def solve_fractions(a, b):
    """Solve a x = b exactly over Q; a, b may hold ints or Fractions.

    Returns a list of Fractions, or None if inconsistent.  When the system is
    underdetermined an arbitrary solution is returned.
    """
    n = len(a)
    m = len(a[0]) if n else 0
    aug = [[Fraction(a[i][j]) for j in range(m)] + [Fraction(b[i])] for i in range(n)]
    pivots = []
    r = 0
    for col in range(m):
        piv = next((i for i in range(r, n) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][col]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(n):
            if i != r and aug[i][col] != 0:
                c = aug[i][col]
                aug[i] = [x - c * y for x, y in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
        if r == n:
            break
    for i in range(r, n):
        if aug[i][m] != 0:
            return None
    x = [Fraction(0)] * m
    for i, col in enumerate(pivots):
        x[col] = aug[i][m]
    return x


def minpoly_fractions(a) -> list[Fraction]:
    """Monic minimal polynomial of an integer matrix over Q, low -> high."""
    n = len(a)
    span_rows: list[list[Fraction]] = []
    span_piv: list[int] = []
    powers = [identity(n)]
    # coords[i] = expression of span_rows[i] in terms of A^0..A^k
    coords: list[list[Fraction]] = []
    k = 0
    while True:
        vec = vec_of(powers[-1])
        v = [Fraction(x) for x in vec]
        expr = [Fraction(0)] * (k + 1)
        expr[k] = Fraction(1)
        for row, piv, cexp in zip(span_rows, span_piv, coords):
            c = v[piv]
            if c:
                v = [x - c * y for x, y in zip(v, row)]
                expr = [x - c * (cexp[i] if i < len(cexp) else 0) for i, x in enumerate(expr)]
        piv = next((i for i, x in enumerate(v) if x != 0), None)
        if piv is None:
            # zero residue: sum expr[i] A^i = 0 with expr[k] = 1, the minimal relation
            return expr
        inv = 1 / v[piv]
        v = [x * inv for x in v]
        expr = [x * inv for x in expr]
        span_rows.append(v)
        span_piv.append(piv)
        coords.append(expr)
        powers.append(mat_mul(powers[-1], a))
        k += 1
        if k > n * n + 1:
            raise RuntimeError("minimal polynomial search did not terminate")


def minpoly_fp(a, p: int) -> list[int]:
    """Monic minimal polynomial of a matrix over F_p, low -> high."""
    n = len(a)
    span = SpanFp(p, n * n)
    coords: list[list[int]] = []
    power = identity(n)
    k = 0
    while True:
        vec = [x % p for x in vec_of(power)]
        v = list(vec)
        expr = [0] * (k + 1)
        expr[k] = 1
        for row, piv, cexp in zip(span.rows, span.pivots, coords):
            c = v[piv]
            if c:
                v = [(x - c * y) % p for x, y in zip(v, row)]
                expr = [(x - c * (cexp[i] if i < len(cexp) else 0)) % p for i, x in enumerate(expr)]
        piv = next((i for i, x in enumerate(v) if x), None)
        if piv is None:
            return [x % p for x in expr]
        inv = inv_mod(v[piv], p)
        v = [(x * inv) % p for x in v]
        expr = [(x * inv) % p for x in expr]
        idx = len(span.rows)
        span.rows.append(v)
        span.pivots.append(piv)
        coords.append(expr)
        power = mat_mul(power, a, p)
        k += 1
        if k > n * n + 1:
            raise RuntimeError("minimal polynomial search did not terminate")


# ---------------------------------------------------------------------------
# integer lattices (HNF-based)


def _colop_gcd(a, i, j, r):
    """Column ops making a[r][j] = 0 using extended gcd with column i."""
    x, y = a[r][i], a[r][j]
    if y == 0:
        return
    import math

    g = math.gcd(x, y)
    if g:
        s, t = _xgcd(x, y)
        u, v = -(y // g), x // g
        for row in a:
            ci, cj = row[i], row[j]
            row[i] = s * ci + t * cj
            row[j] = u * ci + v * cj


def _xgcd(a: int, b: int) -> tuple[int, int]:
    """(s, t) with s a + t b = gcd(a, b)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_s, old_t


def right_kernel_int(a) -> list[list[int]]:
    """Saturated basis of {x in Z^m : a x = 0}, as rows."""
    n = len(a)
    m = len(a[0]) if n else 0
    work = [list(row) for row in a]
    u = identity(m)
    stacked = work + u  # column operations act on both
    row = 0
    col = 0
    for row in range(n):
        # clear row entries right of col using gcd column ops
        piv = None
        for j in range(col, m):
            if stacked[row][j]:
                piv = j
                break
        if piv is None:
            continue
        if piv != col:
            for r2 in stacked:
                r2[col], r2[piv] = r2[piv], r2[col]
        for j in range(col + 1, m):
            if stacked[row][j]:
                _colop_gcd(stacked, col, j, row)
        col += 1
    kernel_cols = []
    for j in range(m):
        if all(stacked[i][j] == 0 for i in range(n)):
            kernel_cols.append([stacked[n + i][j] for i in range(m)])
    return kernel_cols


def saturate_rowspan(rows) -> list[list[int]]:
    """Basis of (Q-span of rows) ∩ Z^d, as rows."""
    if not rows:
        return []
    w = right_kernel_int(rows)
    if not w:
        return [list(r) for r in identity(len(rows[0]))]
    return right_kernel_int(w)


def restrict_to_lattice(t, basis_rows) -> list[list[int]]:
    """Matrix of t on the saturated invariant lattice spanned by basis_rows.

    basis_rows are rows b_i; returns M with  b_i t = sum_j M[i][j] b_j  (so M
    is the action in the basis, row convention).  Raises if the lattice is
    not invariant or the action is not integral.
    """
    out = []
    for b in basis_rows:
        img = mat_vec(transpose(t), b)  # row vector times t
        sol = solve_fractions(transpose(basis_rows), img)
        if sol is None:
            raise ValueError("lattice is not invariant under the operator")
        coeffs = []
        for x in sol:
            if x.denominator != 1:
                raise ValueError("action on a saturated lattice must be integral")
            coeffs.append(int(x))
        out.append(coeffs)
    return out
