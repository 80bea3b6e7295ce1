"""The modular-forms domain layer.

Ingests spaces of commuting integer Hecke matrices ("HMAT v1" files),
decomposes them into Q-orbits, l-adic orbits (local factors with
echelonised dual bases) and Q_l-orbits of eigenforms with exact
eigenvalue coefficients.

Hecke matrices are never computed here, only ingested: the exact integer
provenance is what lets the Q_l splitting escalate its internal precision
instead of silently losing digits.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from . import gfpoly, linalg
from .arith import ceil_div, factorize, int_val
from .artinian import (
    CommutingMatrixAlgebra,
    LocalFactor,
    algebra_closure_fp,
    basis_indices,
    berlekamp_basis,
    local_factors,
)
from .errors import CertificateError, ComputationError, FormatError
from .padic import LocalRing, PrimePower, RingElement, make_ring
from .qlfactor import QlPiece, _divide_elem, qell_factor


def sturm_bound(level: int, weight: int) -> int:
    """ceil((k/12) * N * prod_{p | N} (1 + 1/p)), the Gamma_0(N) bound."""
    if level < 1 or weight < 2:
        raise ValueError("need level >= 1 and weight >= 2")
    num = weight * level
    den = 12
    for p, _ in factorize(level):
        num *= p + 1
        den *= p
    return ceil_div(num, den)


@dataclass
class HeckeSpace:
    """Integer Hecke matrices T_1..T_B acting on a d-dimensional lattice."""

    level: int
    weight: int
    dimension: int
    bound: int
    matrices: dict[int, list[list[int]]]
    provenance: str = ""

    def __post_init__(self):
        d = self.dimension
        if sorted(self.matrices) != list(range(1, self.bound + 1)):
            raise ValueError("matrices must cover the labels 1..bound")
        if self.matrices[1] != linalg.identity(d):
            raise ValueError("T_1 must be the identity")
        # commutativity (and shape) checks ride on the algebra constructor
        CommutingMatrixAlgebra(None, d, list(self.matrices.items()))
        sb = sturm_bound(self.level, self.weight)
        if self.bound < sb:
            warnings.warn(
                f"coefficient bound {self.bound} is below the Sturm bound {sb} for level {self.level}, weight {self.weight}",
                stacklevel=2,
            )

    def algebra(self, ell: int, N: int) -> CommutingMatrixAlgebra:
        return CommutingMatrixAlgebra(
            PrimePower(ell, N),
            self.dimension,
            [(n, linalg.mat_mod(m, ell**N)) for n, m in self.matrices.items()],
        )


# ---------------------------------------------------------------------------
# HMAT v1 file format


def write_hmat(space: HeckeSpace) -> str:
    lines = ["HMAT v1"]
    lines.append(f"level {space.level}")
    lines.append(f"weight {space.weight}")
    lines.append(f"dim {space.dimension}")
    lines.append(f"bound {space.bound}")
    for n in range(1, space.bound + 1):
        lines.append(f"T {n}")
        for row in space.matrices[n]:
            lines.append(" ".join(str(x) for x in row))
    return "\n".join(lines) + "\n"


def parse_hmat(text: str, provenance: str = "") -> HeckeSpace:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    pos = 0

    def take(expected: str | None = None) -> str:
        nonlocal pos
        if pos >= len(lines):
            raise FormatError("unexpected end of file", pos + 1)
        line = lines[pos]
        pos += 1
        if expected is not None and not line.startswith(expected + " "):
            raise FormatError(f"expected '{expected} ...', got {line!r}", pos)
        return line

    header = take()
    if header != "HMAT v1":
        raise FormatError(f"expected 'HMAT v1' header, got {header!r}", 1)
    try:
        level = int(take("level").split()[1])
        weight = int(take("weight").split()[1])
        dim = int(take("dim").split()[1])
        bound = int(take("bound").split()[1])
    except (IndexError, ValueError) as exc:
        raise FormatError(f"malformed header field: {exc}", pos) from exc
    matrices = {}
    for n in range(1, bound + 1):
        tline = take("T")
        try:
            got = int(tline.split()[1])
        except (IndexError, ValueError) as exc:
            raise FormatError("malformed T line", pos) from exc
        if got != n:
            raise FormatError(f"expected 'T {n}', got 'T {got}'", pos)
        rows = []
        for _ in range(dim):
            line = take()
            try:
                row = [int(x) for x in line.split()]
            except ValueError as exc:
                raise FormatError(f"malformed matrix row: {exc}", pos) from exc
            if len(row) != dim:
                raise FormatError(f"expected {dim} entries, got {len(row)}", pos)
            rows.append(row)
        matrices[n] = rows
    if pos != len(lines):
        raise FormatError(f"trailing garbage: {lines[pos]!r}", pos + 1)
    try:
        return HeckeSpace(level, weight, dim, bound, matrices, provenance)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


# ---------------------------------------------------------------------------
# rational orbits


@dataclass
class RationalOrbit:
    """A G_Q-orbit: a saturated invariant lattice with restricted matrices."""

    space: HeckeSpace
    index: int  # 1-based orbit number, deterministic ordering
    rank: int
    lattice: list[list[int]]  # rows, saturated in Z^d
    restricted: HeckeSpace  # the matrices acting on the lattice
    minpoly_factor: tuple[int, ...]  # irreducible factor cutting out the orbit


def _trace_form_rank(mats) -> int:
    basis = mats
    n = len(basis)
    gram = [[sum(linalg.mat_mul(a, b)[i][i] for i in range(len(a))) for b in basis] for a in basis]
    # rank over Q
    m = [[Fraction(x) for x in row] for row in gram]
    rank = 0
    for col in range(n):
        piv = next((r for r in range(rank, n) if m[r][col]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = 1 / m[rank][col]
        m[rank] = [v * inv for v in m[rank]]
        for r in range(n):
            if r != rank and m[r][col]:
                c = m[r][col]
                m[r] = [v - c * w for v, w in zip(m[r], m[rank])]
        rank += 1
    return rank


def _closure_int(gens, d):
    """Monomial basis of the Q-algebra spanned by the generators (with 1)."""
    basis = [linalg.identity(d)]
    span_rows = []
    span_piv = []

    def add(mat):
        v = [Fraction(x) for x in linalg.vec_of(mat)]
        for row, piv in zip(span_rows, span_piv):
            c = v[piv]
            if c:
                v = [x - c * y for x, y in zip(v, row)]
        piv = next((i for i, x in enumerate(v) if x), None)
        if piv is None:
            return False
        inv = 1 / v[piv]
        span_rows.append([x * inv for x in v])
        span_piv.append(piv)
        return True

    add(basis[0])
    queue = [linalg.identity(d)]
    mats = [linalg.identity(d)]
    while queue:
        m = queue.pop(0)
        for _, g in gens:
            nm = linalg.mat_mul(m, g)
            if add(nm):
                mats.append(nm)
                queue.append(nm)
    return mats


def _separating_candidates(space: HeckeSpace, extra_mod_ell: int | None = None):
    """Deterministic sweep of candidate separating/primitive elements."""
    labels = sorted(space.matrices)
    for n in labels[1:]:
        yield space.matrices[n]
    yield space.matrices[1]
    small = labels[1 : min(len(labels), 6)]
    for c in range(1, 6):
        for i, a in enumerate(small):
            for b in small[i + 1 :]:
                yield linalg.mat_add(space.matrices[a], linalg.mat_scale(space.matrices[b], c))
    if extra_mod_ell:
        for combo in _berlekamp_int_lifts(space, extra_mod_ell):
            for c in range(1, 4):
                for n in small:
                    yield linalg.mat_add(space.matrices[n], linalg.mat_scale(combo, c))


def _berlekamp_int_lifts(space: HeckeSpace, ell: int):
    """Integer lifts of Berlekamp separators of the mod-l algebra."""
    d = space.dimension
    reduced = [(n, linalg.mat_mod(m, ell)) for n, m in space.matrices.items()]
    mats, words = algebra_closure_fp(linalg.identity(d), reduced, ell)
    try:
        basis, cmats, cwords = berlekamp_basis(linalg.identity(d), reduced, ell)
    except Exception:
        return []
    out = []
    products = {(): linalg.identity(d)}
    gens = [m for _, m in sorted(space.matrices.items())]
    for w in cwords:
        if w not in products:
            products[w] = linalg.mat_mul(products[w[:-1]], gens[w[-1]])
    for mat, combo in basis:
        lift = linalg.zero_matrix(d, d)
        for c, w in zip(combo, cwords):
            if c:
                lift = linalg.mat_add(lift, linalg.mat_scale(products[w], c))
        out.append(lift)
    return out


def rational_orbits(space: HeckeSpace) -> list[RationalOrbit]:
    """Decomposition of T (x) Q into its G_Q-orbit factors.

    Splits by a deterministically chosen separating element whose squarefree
    minimal polynomial degree matches dim(A/rad) (trace-form rank), so the
    orbit count is certified; ranks sum to the ambient dimension.
    """
    d = space.dimension
    gens = sorted(space.matrices.items())
    closure = _closure_int(gens, d)
    s_dim = _trace_form_rank(closure)
    chosen = None
    for cand in _separating_candidates(space, extra_mod_ell=2):
        mp = linalg.minpoly_fractions(cand)
        mp_int = _fractions_to_int(mp)
        parts = gfpoly.factor_int(mp_int)
        sep_deg = sum(len(fac) - 1 for fac, _ in parts)
        if sep_deg == s_dim:
            chosen = (cand, parts)
            break
    if chosen is None:
        raise ComputationError("no separating element found for the rational decomposition")
    theta, parts = chosen
    orbits = []
    pieces = []
    for fac, _ in parts:
        mat = _eval_int_poly(list(fac), theta)
        power = linalg.mat_pow(mat, d)
        lattice = linalg.right_kernel_int(linalg.transpose(power))
        pieces.append((tuple(fac), lattice))
    pieces.sort(key=lambda t: (len(t[0]), t[0]))
    for idx, (fac, lattice) in enumerate(pieces, start=1):
        restricted = {}
        for n, m in gens:
            restricted[n] = linalg.restrict_to_lattice(m, lattice)
        rank = len(lattice)
        sub = HeckeSpace(
            space.level,
            space.weight,
            rank,
            space.bound,
            restricted,
            provenance=f"{space.provenance}|orbit {idx}",
        )
        orbits.append(RationalOrbit(space, idx, rank, lattice, sub, fac))
    if sum(o.rank for o in orbits) != d:
        raise CertificateError("rational orbit ranks do not sum to the dimension")
    return orbits


def _eval_int_poly(coeffs, mat):
    d = len(mat)
    acc = linalg.zero_matrix(d, d)
    for c in reversed(coeffs):
        acc = linalg.mat_mul(acc, mat)
        if c:
            acc = linalg.mat_add(acc, linalg.mat_scale(linalg.identity(d), c))
    return acc


def _fractions_to_int(poly) -> list[int]:
    out = []
    for c in poly:
        f = Fraction(c)
        if f.denominator != 1:
            raise CertificateError("minimal polynomial of an integer matrix must be integral")
        out.append(int(f))
    return out


# ---------------------------------------------------------------------------
# l-adic orbits


@dataclass
class EllAdicOrbit:
    """One local factor of T (x) Z_l with its echelonised dual basis."""

    space: HeckeSpace
    ell: int
    precision: int
    factor: LocalFactor = field(repr=False)
    basis_labels: list[int]
    dual_table: dict[int, list[int]] = field(repr=False)
    fingerprint: tuple
    index: int = 0

    @property
    def rank(self) -> int:
        return self.factor.rank


def residue_fingerprint(factor: LocalFactor, upto: int = 12) -> tuple:
    """Mod-l characteristic polynomials of the projected T_n for small n."""
    ell = factor.ell
    out = []
    for n in sorted(factor.projected):
        if n > upto:
            break
        cp = linalg.charpoly(factor.projected[n], ell)
        out.append((n, tuple(cp)))
    return tuple(out)


def dual_basis(factor: LocalFactor, labels: list[int]) -> dict[int, list[int]]:
    """Solve T_n = sum_i a_{n,i} T_{n_i} in the factor for every stored n.

    Unique by Nakayama; echelonisation a_{n_j, i} = delta_{ij} is verified.
    """
    ell, N = factor.ell, factor.precision
    mod = ell**N
    r = factor.rank
    cols = [linalg.vec_of(factor.projected[n]) for n in labels]
    V = linalg.transpose(cols)  # (r*r) x r, columns are vec(T_{n_i})
    # pick r rows that are invertible mod l
    span = linalg.SpanFp(ell, r)
    rows_idx = []
    for i, row in enumerate(V):
        if span.add(row):
            rows_idx.append(i)
            if len(rows_idx) == r:
                break
    if len(rows_idx) < r:
        raise CertificateError("basis projections are not independent mod l")
    sub = [V[i] for i in rows_idx]
    inv = linalg.inv_unit_matrix(sub, mod)
    table = {}
    for n in sorted(factor.projected):
        vec = linalg.vec_of(factor.projected[n])
        rhs = [vec[i] for i in rows_idx]
        coeffs = linalg.mat_vec(inv, rhs, mod)
        # full-system verification (Nakayama consistency)
        recon = [sum(coeffs[j] * cols[j][i] for j in range(r)) % mod for i in range(r * r)]
        if recon != [x % mod for x in vec]:
            raise CertificateError("dual-basis system is inconsistent; corrupted factor")
        table[n] = coeffs
    for j, nj in enumerate(labels):
        expect = [1 if i == j else 0 for i in range(r)]
        if table[nj] != expect:
            raise CertificateError("dual basis is not echelonised")
    return table


def ell_adic_orbits(space: HeckeSpace, ell: int, N: int) -> list[EllAdicOrbit]:
    """One orbit per maximal ideal of T (x) F_l, deterministically ordered."""
    algebra = space.algebra(ell, N)
    factors = local_factors(algebra)
    orbits = []
    for f in factors:
        labels = basis_indices(f)
        table = dual_basis(f, labels)
        fp = residue_fingerprint(f)
        orbits.append(EllAdicOrbit(space, ell, N, f, labels, table, fp))
    orbits.sort(key=lambda o: (o.fingerprint, o.rank))
    for i, o in enumerate(orbits, start=1):
        o.index = i
    return orbits


# ---------------------------------------------------------------------------
# Q_l-orbits of eigenforms


@dataclass
class PadicEigenform:
    """One Q_l-Galois orbit of eigenforms inside a Z_l-orbit."""

    orbit: EllAdicOrbit
    index: int
    ring: LocalRing | None
    coefficients: dict[int, RingElement]
    rank: int  # eigenspace dimension x field degree
    attained_N: int
    defining: tuple[int, ...]  # defining polynomial of the coefficient ring
    resolved: bool = True
    note: str = ""

    @property
    def lambda_precision(self) -> int:
        return (self.ring.ramification_e if self.ring else 1) * self.attained_N

    def coefficient(self, n: int) -> RingElement:
        if n not in self.coefficients:
            raise ComputationError(f"coefficient {n} exceeds the stored bound")
        return self.coefficients[n]


def eigenform_coefficients(f: PadicEigenform, up_to: int) -> list[RingElement]:
    """The q-expansion coefficients b_1..b_up_to with their ring precision."""
    if up_to > f.orbit.space.bound:
        raise ComputationError(f"bound {up_to} exceeds the stored matrices (B = {f.orbit.space.bound})")
    if not f.resolved:
        raise ComputationError("eigenform block is unresolved; no coefficients available")
    return [f.coefficients[n] for n in range(1, up_to + 1)]


def _residual_minpoly_fp(ring: LocalRing, z: RingElement, ell: int) -> tuple[int, ...]:
    """Minimal polynomial over F_l of the residue of z."""
    k = ring.residue_field
    res = ring.residue(z)
    # Krylov over F_l inside the residue field
    span = linalg.SpanFp(ell, k.degree)
    coords = []
    power = k.one
    expr = []
    j = 0
    while True:
        v = list(power.coords)
        e = [0] * (j + 1)
        e[j] = 1
        for row, piv, cexp in zip(span.rows, span.pivots, coords):
            c = v[piv]
            if c:
                v = [(x - c * y) % ell for x, y in zip(v, row)]
                e = [(x - c * (cexp[i] if i < len(cexp) else 0)) % ell for i, x in enumerate(e)]
        piv = next((i for i, x in enumerate(v) if x), None)
        if piv is None:
            return tuple(x % ell for x in e)
        inv = linalg.inv_mod(v[piv], ell)
        span.rows.append([(x * inv) % ell for x in v])
        span.pivots.append(piv)
        coords.append([(x * inv) % ell for x in e])
        power = power * res
        j += 1
        if j > k.degree + 1:
            raise CertificateError("residual minimal polynomial search did not terminate")


def _factor_residual_poly(factor: LocalFactor, theta_proj) -> tuple[int, ...]:
    """The unique irreducible p with minpoly(theta on the factor) = p^j mod l."""
    ell = factor.ell
    mp = linalg.minpoly_fp(linalg.mat_mod(theta_proj, ell), ell)
    parts = gfpoly.factor_fp(mp, ell)
    if len(parts) != 1:
        raise _NotSeparating()
    return parts[0][0]


class _NotSeparating(Exception):
    pass


def qell_orbits(orbit: EllAdicOrbit, cap: int | None = None) -> list[PadicEigenform]:
    """Split one Z_l-orbit into its Q_l-orbits of eigenforms.

    Works from the exact integer matrices: a deterministically swept
    separating element's exact minimal polynomial is factored over Q_l with
    certified precision escalation, pieces are assigned to this local factor
    through their residual data, and all eigenvalue coefficients come out
    exact at the requested precision.  Blocks whose certificates fail at the
    escalation cap are returned flagged unresolved.
    """
    space = orbit.space
    ell, N = orbit.ell, orbit.precision
    if orbit.rank == 1:
        ring = make_ring(ell, N, [0, 1], 1)
        coeffs = {n: ring.from_int(orbit.dual_table[n][0]) for n in sorted(orbit.dual_table)}
        return [PadicEigenform(orbit, 1, ring, coeffs, 1, N, ring.poly)]

    last_error = None
    for theta in _separating_candidates(space, extra_mod_ell=ell):
        try:
            return _qell_with_theta(orbit, theta, cap)
        except _NotSeparating:
            continue
        except ComputationError as exc:
            last_error = exc
            continue
    raise ComputationError(f"no separating element resolved the Q_l-orbits: {last_error}")


def _qell_with_theta(orbit: EllAdicOrbit, theta, cap) -> list[PadicEigenform]:
    space = orbit.space
    ell, N = orbit.ell, orbit.precision
    d = space.dimension
    mp = _fractions_to_int(linalg.minpoly_fractions(theta))
    cp = linalg.charpoly(theta)
    # the squarefree irreducible directions; char-poly multiplicities give the
    # generalized eigenspace dimensions
    mp_parts = gfpoly.factor_int(mp)
    cp_parts = dict(gfpoly.factor_int(cp))

    # the factor's residual pattern for theta
    theta_proj = _project_to_factor(orbit, theta)
    p_factor = _factor_residual_poly(orbit.factor, theta_proj)

    # express every T_n as a rational polynomial in theta
    deg = len(mp) - 1
    krylov = []
    power = linalg.identity(d)
    for _ in range(deg):
        krylov.append(linalg.vec_of(power))
        power = linalg.mat_mul(power, theta)
    exprs = {}
    denom_val = 0
    for n, t in sorted(space.matrices.items()):
        sol = linalg.solve_fractions(linalg.transpose(krylov), linalg.vec_of(t))
        if sol is None:
            raise _NotSeparating()  # theta does not module-generate
        # verify (solve_fractions returns an arbitrary solution when underdetermined)
        recon = [sum(sol[j] * krylov[j][i] for j in range(deg)) for i in range(d * d)]
        if recon != [Fraction(x) for x in linalg.vec_of(t)]:
            raise _NotSeparating()
        exprs[n] = sol
        for c in sol:
            if c.denominator % ell == 0:
                denom_val = max(denom_val, int_val(c.denominator, ell))

    # factor each Q-irreducible part over Q_l and assign pieces to this
    # local factor through the residual minimal polynomial of theta
    assigned: list[tuple[QlPiece, int]] = []
    unresolved_rank = 0
    for fac, _ in mp_parts:
        if fac not in cp_parts:
            raise CertificateError("characteristic polynomial does not contain a minimal factor")
        mult = cp_parts[fac]
        fac_pieces, _ = qell_factor(list(fac), ell, N + denom_val, cap=cap)
        fac_bar = gfpoly.factor_fp([c % ell for c in fac], ell)
        touches_factor = any(tuple(p) == tuple(p_factor) for p, _ in fac_bar)
        for p in fac_pieces:
            if not p.resolved:
                if touches_factor:
                    unresolved_rank += p.degree * mult
                continue
            if _residual_minpoly_fp(p.ring, p.theta, ell) == tuple(p_factor):
                assigned.append((p, mult))
    total = sum(p.degree * mult for p, mult in assigned)
    if unresolved_rank == 0 and total != orbit.rank:
        raise _NotSeparating()
    if unresolved_rank and total > orbit.rank:
        raise _NotSeparating()

    forms = []
    for p, mult in assigned:
        ring_work = p.ring
        theta_img = p.theta
        attained = p.attained_N - denom_val
        out_N = min(N, attained)
        if out_N < 1:
            raise CertificateError("attained precision fell below 1; escalation bookkeeping failed")
        coeffs_work = {n: _eval_rational_poly(ring_work, sol, theta_img, ell) for n, sol in exprs.items()}
        ring_out = ring_work.reduce_precision(out_N)
        coeffs = {n: ring_out.from_coords(list(c.coords)) for n, c in coeffs_work.items()}
        forms.append(
            PadicEigenform(orbit, 0, ring_out, coeffs, p.degree * mult, out_N, ring_out.poly)
        )
    if unresolved_rank:
        remaining = orbit.rank - total
        forms.append(
            PadicEigenform(
                orbit,
                0,
                None,
                {},
                remaining,
                N,
                (),
                resolved=False,
                note="unresolved block at the precision escalation cap",
            )
        )
    forms.sort(key=lambda f: (not f.resolved, f.defining, f.rank))
    for i, f in enumerate(forms, start=1):
        f.index = i
    _verify_common_residue(forms)
    return forms


def _project_to_factor(orbit: EllAdicOrbit, theta):
    """Project an integer operator onto the factor lattice."""
    f = orbit.factor
    mod = f.ell**f.precision
    rows = []
    from .artinian import coords_in_unit_basis

    for b in f.basis:
        img = linalg.mat_vec(linalg.transpose(linalg.mat_mod(theta, mod)), b, mod)
        rows.append(coords_in_unit_basis(img, f.basis, mod))
    return rows


def _eval_rational_poly(ring: LocalRing, sol, theta_img: RingElement, ell: int) -> RingElement:
    """Evaluate sum sol[j] * theta^j with rational sol in the ring."""
    den = 1
    for c in sol:
        den = den * c.denominator // _gcd_int(den, c.denominator)
    dv = int_val(den, ell) if den % ell == 0 else 0
    unit = den // ell**dv
    acc = ring.zero
    power = ring.one
    for c in sol:
        num = int(c * den)
        if num:
            acc = acc + ring.from_int(num) * power
        power = power * theta_img
    if unit != 1:
        acc = acc * ring.invert(ring.from_int(unit))
    if dv:
        out = _divide_elem(ring, acc, ring.from_int(ell) ** dv)
        if out is None:
            raise CertificateError("eigenvalue is not integral; precision bookkeeping failed")
        return out
    return acc


def _gcd_int(a, b):
    from math import gcd

    return gcd(a, b)


def _verify_common_residue(forms: list[PadicEigenform]):
    """All eigenforms in one Z_l-orbit are congruent modulo a uniformiser.

    Residues may live in different presentations of the same field, so the
    comparison uses residual minimal polynomials (a presentation invariant).
    """
    mps = set()
    for f in forms:
        if not f.resolved:
            continue
        mp = tuple(_residual_minpoly_fp(f.ring, f.coefficients[n], f.ring.ell) for n in sorted(f.coefficients)[:12])
        mps.add(mp)
    if len(mps) > 1:
        raise CertificateError("eigenforms in one orbit do not share a residual fingerprint")
