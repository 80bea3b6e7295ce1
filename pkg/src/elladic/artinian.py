"""Local decomposition of commutative algebras of commuting matrices.

The mod-l decomposition splits by each generator's minimal polynomial (CRT
idempotents from the coprime irreducible-power parts), then certifies or
completes every stalled piece with the Berlekamp subalgebra
B = {a : a^l = a}: dim B equals the number of maximal ideals, and its basis
elements have squarefree totally-split minimal polynomials, so they separate
whatever single generators cannot (Frobenius-conjugate residue pairs).

Idempotents lift to Z/l^N with the quadratic recursion e <- 3e^2 - 2e^3,
whose defect e^2 - e vanishes mod l^(2^n) after n steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import gfpoly, linalg
from .arith import ceil_div
from .errors import CertificateError, ComputationError
from .padic import PrimePower


@dataclass
class CommutingMatrixAlgebra:
    """A commutative algebra presented by commuting d x d generator matrices.

    modulus None means exact integer matrices; otherwise entries are canonical
    representatives in [0, l^N).  The identity is implicitly included and
    generator labels are distinct positive integers.
    """

    modulus: PrimePower | None
    dimension: int
    generators: list[tuple[int, list[list[int]]]]

    def __post_init__(self):
        labels = [n for n, _ in self.generators]
        if len(set(labels)) != len(labels) or any(n < 1 for n in labels):
            raise ValueError("generator labels must be distinct positive integers")
        d = self.dimension
        mod = self.modulus.modulus if self.modulus else None
        gens = []
        for n, m in self.generators:
            if len(m) != d or any(len(row) != d for row in m):
                raise ValueError(f"generator T_{n} is not {d}x{d}")
            gens.append((n, linalg.mat_mod(m, mod) if mod else [list(r) for r in m]))
        self.generators = sorted(gens, key=lambda t: t[0])
        for i, (na, a) in enumerate(self.generators):
            for nb, b in self.generators[i + 1 :]:
                if not linalg.commute(a, b, mod):
                    raise ValueError(f"generators T_{na} and T_{nb} do not commute")

    def reduce(self, ell: int, N: int) -> "CommutingMatrixAlgebra":
        return CommutingMatrixAlgebra(
            PrimePower(ell, N),
            self.dimension,
            [(n, linalg.mat_mod(m, ell**N)) for n, m in self.generators],
        )


@dataclass
class IdempotentSet:
    """A complete set of pairwise orthogonal idempotents of the algebra."""

    algebra: CommutingMatrixAlgebra
    idempotents: list[list[list[int]]]
    precision: int  # e^2 = e holds mod l^precision

    def __post_init__(self):
        mod = self.algebra.modulus.ell ** self.precision
        d = self.algebra.dimension
        total = linalg.zero_matrix(d, d)
        for i, e in enumerate(self.idempotents):
            if linalg.mat_mul(e, e, mod) != linalg.mat_mod(e, mod):
                raise CertificateError(f"idempotent {i} fails e^2 = e at precision {self.precision}")
            total = linalg.mat_add(total, e, mod)
            for j, f in enumerate(self.idempotents):
                if i != j and any(any(row) for row in linalg.mat_mul(e, f, mod)):
                    raise CertificateError(f"idempotents {i}, {j} are not orthogonal")
        if total != linalg.identity(d):
            raise CertificateError("idempotent set is not complete")


@dataclass
class LocalFactor:
    """One local factor of the algebra over Z/l^N."""

    algebra: CommutingMatrixAlgebra
    idempotent: list[list[int]]
    rank: int
    basis: list[list[int]]  # saturated image lattice, rows with unit pivots
    projected: dict[int, list[list[int]]] = field(repr=False)
    residue_degree: int = 1

    @property
    def ell(self) -> int:
        return self.algebra.modulus.ell

    @property
    def precision(self) -> int:
        return self.algebra.modulus.precision_N


# ---------------------------------------------------------------------------
# restriction helpers


def image_basis_fp(e, p: int) -> list[list[int]]:
    """Basis of the image of the projector e over F_p.

    Row convention throughout: vectors are rows, operators act by v -> v t,
    and the image of e is its row space.
    """
    rows, _ = linalg.rref_fp([list(r) for r in e], p)
    return rows


def project_fp(t, basis, p: int) -> list[list[int]]:
    """Action of t on the row space spanned by `basis` over F_p."""
    span = linalg.SpanFp(p, len(basis[0]))
    for b in basis:
        span.add(b)
    out = []
    for b in basis:
        img = linalg.mat_vec(linalg.transpose(t), b, p)
        coords = span.coordinates(img)
        if coords is None:
            raise CertificateError("subspace is not invariant under the operator")
        out.append(coords)
    return out


def coords_in_unit_basis(vec, basis, mod: int) -> list[int]:
    """Coordinates of vec on Howell rows with unit pivots (exact over Z/l^N)."""
    v = [x % mod for x in vec]
    coords = []
    for row in basis:
        piv = next(i for i, x in enumerate(row) if x)
        c = v[piv]  # pivot is 1
        coords.append(c)
        if c:
            v = [(a - c * b) % mod for a, b in zip(v, row)]
    if any(v):
        raise CertificateError("vector lies outside the factor lattice")
    return coords


# ---------------------------------------------------------------------------
# algebra closure and the Berlekamp subalgebra (mod l)


def algebra_closure_fp(unit, gens, p: int):
    """Basis of the F_p-span of monomials unit * (products of gens).

    `unit` acts as the identity of the piece (a projector e).  Returns
    (matrices, words) where each word is a tuple of generator indices whose
    product (times unit) the matrix equals.
    """
    dim2 = len(unit) * len(unit[0])
    span = linalg.SpanFp(p, dim2)
    mats: list = []
    words: list[tuple[int, ...]] = []
    queue = [(unit, ())]
    span.add(linalg.vec_of(unit))
    mats.append(unit)
    words.append(())
    while queue:
        m, w = queue.pop(0)
        for gi, (_, g) in enumerate(gens):
            nm = linalg.mat_mul(m, g, p)
            if span.add(linalg.vec_of(nm)):
                mats.append(nm)
                words.append(w + (gi,))
                queue.append((nm, w + (gi,)))
    return mats, words


def berlekamp_basis(unit, gens, p: int):
    """Basis of {a in e*A*e : a^p = a}, as (matrix, coeffs, words, mats).

    dim of the returned basis equals the number of maximal ideals of the
    piece algebra.
    """
    mats, words = algebra_closure_fp(unit, gens, p)
    span = linalg.SpanFp(p, len(linalg.vec_of(unit)))
    for m in mats:
        span.add(linalg.vec_of(m))
    rows = []
    for m in mats:
        fm = linalg.mat_pow(m, p, p)
        diff = linalg.mat_sub(fm, m, p)
        coords = span.coordinates(linalg.vec_of(diff))
        if coords is None:
            raise CertificateError("algebra closure is not Frobenius-stable")
        rows.append(coords)
    kernel = _nullspace_fp(rows, p)
    basis = []
    d = len(unit)
    for combo in kernel:
        mat = linalg.zero_matrix(d, d)
        for c, m in zip(combo, mats):
            if c:
                mat = linalg.mat_add(mat, linalg.mat_scale(m, c, p), p)
        basis.append((mat, list(combo)))
    return basis, mats, words


def _nullspace_fp(rows, p: int) -> list[list[int]]:
    """Basis of {x : sum x_i rows[i] = 0} over F_p (left nullspace)."""
    n = len(rows)
    width = len(rows[0]) if rows else 0
    aug = [list(rows[i]) + [1 if j == i else 0 for j in range(n)] for i in range(n)]
    span = linalg.SpanFp(p, width + n)
    out = []
    for r in aug:
        before = span.dim
        span.add(r)
        if span.dim == before:
            continue
    # rows of the reduced span with zero head give the nullspace
    for row in span.rows:
        if not any(row[:width]):
            out.append(row[width:])
    return out


# ---------------------------------------------------------------------------
# mod-l decomposition


def decompose_mod_ell(algebra: CommutingMatrixAlgebra) -> IdempotentSet:
    """Complete set of primitive orthogonal idempotents of the algebra mod l."""
    if algebra.modulus is None or algebra.modulus.precision_N != 1:
        raise ValueError("decompose_mod_ell expects an algebra over F_l")
    p = algebra.modulus.ell
    d = algebra.dimension
    pieces = [linalg.identity(d)]
    for _, t in algebra.generators:
        nxt = []
        for e in pieces:
            nxt.extend(_split_by_generator(e, t, p))
        pieces = nxt
    final = []
    for e in pieces:
        final.extend(_berlekamp_complete(e, algebra.generators, p))
    final.sort(key=lambda m: (_rank_fp(m, p), linalg.vec_of(m)))
    return IdempotentSet(algebra, final, precision=1)


def _rank_fp(m, p):
    return linalg.rank_fp([list(r) for r in m], p)


def _split_by_generator(e, t, p: int):
    basis = image_basis_fp(e, p)
    if not basis:
        return []
    tr = project_fp(t, basis, p)
    m = linalg.minpoly_fp(tr, p)
    parts = gfpoly.factor_fp(m, p)
    if len(parts) <= 1:
        return [e]
    coprime = []
    for fac, mult in parts:
        q = [1]
        for _ in range(mult):
            q = gfpoly.mul(q, list(fac), p)
        coprime.append(q)
    phis = gfpoly.crt_idempotent_polys(coprime, p)
    out = []
    for phi in phis:
        ei = linalg.mat_mul(gfpoly.eval_matrix(phi, t, p), e, p)
        out.append(ei)
    return out


def _berlekamp_complete(e, gens, p: int):
    basis, mats, _ = berlekamp_basis(e, gens, p)
    if len(basis) <= 1:
        return [e]
    # find a basis element that is not a scalar multiple of the piece identity
    span_e = linalg.SpanFp(p, len(linalg.vec_of(e)))
    span_e.add(linalg.vec_of(e))
    b = next(mat for mat, _ in basis if not span_e.contains(linalg.vec_of(mat)))
    img = image_basis_fp(e, p)
    br = project_fp(b, img, p)
    m = linalg.minpoly_fp(br, p)
    parts = gfpoly.factor_fp(m, p)
    if len(parts) <= 1:
        raise CertificateError("Berlekamp separator failed to split a non-local piece")
    coprime = []
    for fac, mult in parts:
        q = [1]
        for _ in range(mult):
            q = gfpoly.mul(q, list(fac), p)
        coprime.append(q)
    out = []
    for phi in gfpoly.crt_idempotent_polys(coprime, p):
        ei = linalg.mat_mul(gfpoly.eval_matrix(phi, b, p), e, p)
        out.extend(_berlekamp_complete(ei, gens, p))
    return out


def count_maximal_ideals(unit, gens, p: int) -> int:
    """Number of maximal ideals of the piece algebra (Berlekamp dimension)."""
    basis, _, _ = berlekamp_basis(unit, gens, p)
    return len(basis)


# ---------------------------------------------------------------------------
# idempotent lifting


def lift_iterates(e0, ell: int, N: int):
    """Yield the recursion e <- 3e^2 - 2e^3 mod l^N, starting from e0."""
    mod = ell**N
    e = linalg.mat_mod(e0, mod)
    while True:
        yield e
        sq = linalg.mat_mul(e, e, mod)
        cube = linalg.mat_mul(sq, e, mod)
        e = linalg.mat_sub(linalg.mat_scale(sq, 3, mod), linalg.mat_scale(cube, 2, mod), mod)


def algebra_representative(e0, algebra: CommutingMatrixAlgebra) -> list[list[int]]:
    """A mod-l^N element of the algebra reducing to e0 mod l.

    e0 is a polynomial in the reduced generators; re-evaluating the same
    monomial combination on the mod-l^N generators gives a representative
    that lies in the algebra (so every lift iterate does too).
    """
    ell, N = algebra.modulus.ell, algebra.modulus.precision_N
    mod = ell**N
    d = algebra.dimension
    reduced = algebra.reduce(ell, 1)
    mats, words = algebra_closure_fp(linalg.identity(d), reduced.generators, ell)
    mono = [linalg.vec_of(m) for m in mats]
    combo = linalg.solve_fp(linalg.transpose(mono), linalg.vec_of(linalg.mat_mod(e0, ell)), ell)
    if combo is None:
        raise ValueError("e0 does not lie in the algebra (not a polynomial in the generators)")
    products: dict[tuple[int, ...], list[list[int]]] = {(): linalg.identity(d)}
    big = [g for _, g in algebra.generators]
    for w in words:
        if w not in products:
            products[w] = linalg.mat_mul(products[w[:-1]], big[w[-1]], mod)
    rep = linalg.zero_matrix(d, d)
    for c, w in zip(combo, words):
        if c:
            rep = linalg.mat_add(rep, linalg.mat_scale(products[w], c, mod), mod)
    return rep


def lift_idempotent(e0, algebra: CommutingMatrixAlgebra) -> list[list[int]]:
    """Lift an idempotent mod l to an exact idempotent mod l^N in the algebra.

    The iteration runs from a representative of e0 inside the mod-l^N
    algebra; the intermediate guarantee e_n^2 = e_n mod l^(2^n) makes
    ceil(log2 N) iterations sufficient, and the result is bit-identical
    across runs.
    """
    if algebra.modulus is None:
        raise ValueError("lift_idempotent expects an algebra over Z/l^N")
    ell, N = algebra.modulus.ell, algebra.modulus.precision_N
    if linalg.mat_mul(e0, e0, ell) != linalg.mat_mod(e0, ell):
        raise ValueError("e0 is not idempotent mod l")
    mod = ell**N
    max_steps = max(1, (N - 1).bit_length() + 1)
    it = lift_iterates(algebra_representative(e0, algebra), ell, N)
    e = next(it)
    for _ in range(max_steps):
        if linalg.mat_mul(e, e, mod) == e:
            return e
        e = next(it)
    if linalg.mat_mul(e, e, mod) != e:
        raise CertificateError("idempotent lifting failed to converge within the certified bound")
    return e


# ---------------------------------------------------------------------------
# local factors


def local_factors(algebra: CommutingMatrixAlgebra) -> list[LocalFactor]:
    """Decompose the algebra over Z/l^N into its local factors.

    Composition of the mod-l decomposition and idempotent lifting; factor
    ranks sum to the ambient dimension and every stored generator is
    projected onto every factor.
    """
    if algebra.modulus is None:
        raise ValueError("local_factors expects an algebra over Z/l^N; reduce integer input first")
    ell, N = algebra.modulus.ell, algebra.modulus.precision_N
    mod = ell**N
    residual = algebra.reduce(ell, 1)
    idset = decompose_mod_ell(residual)
    factors = []
    for e0 in idset.idempotents:
        e = lift_idempotent(e0, algebra)
        basis = linalg.howell(e, ell, N)
        for row in basis:
            piv = next(x for x in row if x)
            if piv != 1:
                raise CertificateError("idempotent image is not a saturated direct summand")
        rank = len(basis)
        projected = {}
        for n, t in algebra.generators:
            rows = []
            for b in basis:
                img = linalg.mat_vec(linalg.transpose(t), b, mod)
                rows.append(coords_in_unit_basis(img, basis, mod))
            projected[n] = rows
        f_deg = _residue_degree(e0, residual.generators, ell)
        factors.append(
            LocalFactor(
                algebra=algebra,
                idempotent=e,
                rank=rank,
                basis=basis,
                projected=projected,
                residue_degree=f_deg,
            )
        )
    if sum(f.rank for f in factors) != algebra.dimension:
        raise CertificateError("factor ranks do not sum to the ambient dimension")
    return factors


def _residue_degree(e0, gens, p: int) -> int:
    """Residue field degree of a local piece: dim(A) - dim(nilradical)."""
    mats, _ = algebra_closure_fp(e0, gens, p)
    span = linalg.SpanFp(p, len(linalg.vec_of(e0)))
    for m in mats:
        span.add(linalg.vec_of(m))
    dim = span.dim
    t = 1
    while p**t < max(len(e0), 2):
        t += 1
    rows = []
    for m in mats:
        fm = linalg.mat_pow(m, p**t, p)
        coords = span.coordinates(linalg.vec_of(fm))
        if coords is None:
            raise CertificateError("algebra closure is not Frobenius-stable")
        rows.append(coords)
    # nilradical = kernel of a -> a^(p^t); its dimension is dim - rank
    rad_dim = dim - len(linalg.rref_fp(rows, p)[1])
    return dim - rad_dim


def basis_indices(factor: LocalFactor) -> list[int]:
    """Labels n_1 < ... < n_r whose projections form a basis (Nakayama).

    Greedy smallest-label-first; n_1 = 1 is always the identity.  Raises when
    the stored labels cannot span, which signals that the coefficient bound B
    of the input data is too small.
    """
    p = factor.ell
    r = factor.rank
    span = linalg.SpanFp(p, r * r)
    chosen: list[int] = []
    for n, t in sorted(factor.projected.items()):
        if span.add(linalg.vec_of(linalg.mat_mod(t, p))):
            chosen.append(n)
            if len(chosen) == r:
                return chosen
    raise ComputationError(
        f"stored labels span only {len(chosen)} of {r} dimensions; the coefficient bound B is too small"
    )
