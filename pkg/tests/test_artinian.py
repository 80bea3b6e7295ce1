"""Local decomposition: mod-l idempotents, lifting, factors, basis indices."""

import random

import pytest

from elladic import linalg
from elladic.artinian import (
    CommutingMatrixAlgebra,
    basis_indices,
    count_maximal_ideals,
    decompose_mod_ell,
    lift_idempotent,
    lift_iterates,
    local_factors,
)
from elladic.errors import ComputationError
from elladic.padic import PrimePower


def companion(poly_low_to_high):
    """Companion matrix (row convention) of a monic polynomial."""
    d = len(poly_low_to_high) - 1
    m = [[0] * d for _ in range(d)]
    for i in range(d - 1):
        m[i][i + 1] = 1
    for j in range(d):
        m[d - 1][j] = -poly_low_to_high[j]
    return m


def block_diag(*blocks):
    d = sum(len(b) for b in blocks)
    out = [[0] * d for _ in range(d)]
    at = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, x in enumerate(row):
                out[at + i][at + j] = x
        at += len(b)
    return out


def algebra(ell, N, gens, d=None):
    d = d or len(gens[0][1])
    return CommutingMatrixAlgebra(PrimePower(ell, N), d, gens)


class TestDecomposeModEll:
    def test_split_quadratic_two_idempotents(self):
        # oracle: x^2 - 6 = (x-1)(x+1) mod 5 by exhaustive root search
        assert sorted(r for r in range(5) if (r * r - 6) % 5 == 0) == [1, 4]
        A = algebra(5, 1, [(2, companion([-6, 0, 1]))])
        ids = decompose_mod_ell(A)
        assert len(ids.idempotents) == 2

    def test_identity_only(self):
        A = algebra(7, 1, [(1, linalg.identity(3))])
        ids = decompose_mod_ell(A)
        assert ids.idempotents == [linalg.identity(3)]

    def test_nilpotent_generator_is_local(self):
        A = algebra(5, 1, [(2, companion([0, 0, 1]))])  # x^2
        ids = decompose_mod_ell(A)
        assert len(ids.idempotents) == 1

    def test_non_commuting_rejected(self):
        a = [[0, 1], [0, 0]]
        b = [[0, 0], [1, 0]]
        with pytest.raises(ValueError):
            algebra(5, 1, [(2, a), (3, b)])

    def test_frobenius_conjugate_pair_needs_berlekamp(self):
        # t acts as alpha on one copy of F_9 and alpha^3 on the other, s as
        # alpha on both; every single generator has an irreducible minimal
        # polynomial, yet there are two maximal ideals.
        C = [[0, 1], [-1, 0]]  # mult by alpha, alpha^2 = -1
        C3 = linalg.mat_scale(C, -1, 3)  # alpha^3 = -alpha
        t = block_diag(C, C3)
        s = block_diag(C, C)
        A = algebra(3, 1, [(2, t), (3, s)])
        ids = decompose_mod_ell(A)
        assert len(ids.idempotents) == 2
        assert count_maximal_ideals(linalg.identity(4), A.generators, 3) == 2

    def test_generator_order_invariance(self):
        rng = random.Random(17)
        C = companion([-6, 0, 1])
        D = companion([2, 0, 1])
        t = block_diag(C, D)
        s = block_diag(linalg.identity(2), linalg.mat_scale(linalg.identity(2), 3, 5))
        base = algebra(5, 1, [(2, t), (3, s)])
        expected = {tuple(linalg.vec_of(e)) for e in decompose_mod_ell(base).idempotents}
        for _ in range(3):
            # relabel in a random order; the idempotent *set* must not change
            labels = [2, 3]
            rng.shuffle(labels)
            A = algebra(5, 1, [(labels[0], t), (labels[1], s)])
            got = {tuple(linalg.vec_of(e)) for e in decompose_mod_ell(A).idempotents}
            assert got == expected


class TestLiftIdempotent:
    def test_exact_fixed_points(self):
        A = algebra(5, 3, [(2, companion([-6, 0, 1]))])
        z = linalg.zero_matrix(2, 2)
        assert lift_idempotent(z, A) == z
        assert lift_idempotent(linalg.identity(2), A) == linalg.identity(2)

    def test_brute_force_oracle_z125(self):
        # all idempotents of Z/125[x]/(x^2-6), found by exhaustive search
        M = companion([-6, 0, 1])
        mod = 125
        brute = []
        for a in range(mod):
            for b in range(mod):
                E = linalg.mat_add(linalg.mat_scale(linalg.identity(2), a, mod), linalg.mat_scale(M, b, mod), mod)
                if linalg.mat_mul(E, E, mod) == E:
                    brute.append(tuple(linalg.vec_of(E)))
        assert len(brute) == 4  # {0, 1, e, 1-e}
        A = algebra(5, 3, [(2, M)])
        ids = decompose_mod_ell(A.reduce(5, 1))
        lifted = {tuple(linalg.vec_of(lift_idempotent(e0, A))) for e0 in ids.idempotents}
        assert lifted <= set(brute)
        zero = tuple([0] * 4)
        one = tuple(linalg.vec_of(linalg.identity(2)))
        assert set(brute) == lifted | {zero, one}

    def test_block_projectors(self):
        # block-diagonal with residually distinct blocks over Z/3^4
        B1 = companion([1, 0, 1])  # x^2 + 1, irreducible mod 3
        B2 = linalg.mat_scale(linalg.identity(2), 1, 81)
        t = block_diag(B1, B2)
        A = algebra(3, 4, [(2, t)])
        ids = decompose_mod_ell(A.reduce(3, 1))
        lifted = sorted(lift_idempotent(e, A) for e in ids.idempotents)
        p1 = block_diag(linalg.identity(2), linalg.zero_matrix(2, 2))
        p2 = block_diag(linalg.zero_matrix(2, 2), linalg.identity(2))
        assert sorted([p1, p2]) == lifted

    def test_defect_doubling(self):
        M = companion([-6, 0, 1])
        A = algebra(5, 6, [(2, M)])
        e0 = decompose_mod_ell(A.reduce(5, 1)).idempotents[0]
        it = lift_iterates(e0, 5, 6)
        for n in range(4):
            e = next(it)
            defect = linalg.mat_sub(linalg.mat_mul(e, e, 5**6), e, 5**6)
            assert all(x % 5 ** min(2**n, 6) == 0 for x in linalg.vec_of(defect))

    def test_non_idempotent_rejected(self):
        A = algebra(5, 3, [(2, companion([-6, 0, 1]))])
        with pytest.raises(ValueError):
            lift_idempotent([[2, 0], [0, 2]], A)

    def test_deterministic(self):
        M = companion([-6, 0, 1])
        A = algebra(5, 5, [(2, M)])
        e0 = decompose_mod_ell(A.reduce(5, 1)).idempotents[0]
        assert lift_idempotent(e0, A) == lift_idempotent(e0, A)


class TestLocalFactors:
    def test_two_blocks_distinct_residually(self):
        B1 = companion([-6, 0, 1])  # splits mod 5 into two pieces itself
        B2 = companion([2, 0, 1])  # x^2 + 2 irreducible mod 5
        t = block_diag(B1, B2)
        A = algebra(5, 4, [(2, t)])
        fs = local_factors(A)
        assert sorted(f.rank for f in fs) == [1, 1, 2]
        assert sum(f.rank for f in fs) == 4

    def test_rank_one(self):
        A = algebra(5, 4, [(1, [[1]]), (2, [[3]])])
        fs = local_factors(A)
        assert len(fs) == 1 and fs[0].rank == 1

    def test_residually_indistinguishable_roots(self):
        ell = 5
        # char poly (x-1)(x-1-l^3) over Z/l^6: both roots = 1 mod l
        poly = [1 * (1 + ell**3), -(2 + ell**3), 1]  # (x-1)(x-(1+l^3))
        t = companion([poly[0], poly[1], poly[2]])
        A = algebra(ell, 6, [(2, t)])
        fs = local_factors(A)
        assert len(fs) == 1 and fs[0].rank == 2

    def test_residue_degree(self):
        A = algebra(5, 3, [(2, companion([2, -1, 1]))])  # unramified quadratic
        fs = local_factors(A)
        assert len(fs) == 1 and fs[0].residue_degree == 2
        B = algebra(5, 3, [(2, companion([-5, 0, 1]))])  # ramified quadratic
        gs = local_factors(B)
        assert len(gs) == 1 and gs[0].residue_degree == 1

    def test_projection_identity(self):
        A = algebra(5, 4, [(1, linalg.identity(2)), (2, companion([2, -1, 1]))])
        fs = local_factors(A)
        assert fs[0].projected[1] == linalg.identity(2)


class TestBasisIndices:
    def test_rank_one(self):
        A = algebra(5, 3, [(1, [[1]]), (2, [[7]])])
        f = local_factors(A)[0]
        assert basis_indices(f) == [1]

    def test_identity_plus_nonscalar(self):
        A = algebra(5, 3, [(1, linalg.identity(2)), (2, companion([2, -1, 1]))])
        f = local_factors(A)[0]
        assert basis_indices(f) == [1, 2]

    def test_greedy_skips_scalars(self):
        # T_2, T_3 scalar mod 5, T_5 not: indices must be (1, 5)
        d5 = companion([2, -1, 1])
        d2 = [[2, 0], [0, 2]]
        d3 = linalg.mat_add(linalg.mat_scale(linalg.identity(2), 3, 125), linalg.mat_scale(d5, 5, 125), 125)
        A = algebra(5, 3, [(1, linalg.identity(2)), (2, d2), (3, d3), (5, d5)])
        f = local_factors(A)[0]
        assert basis_indices(f) == [1, 5]

    def test_insufficient_labels(self):
        A = algebra(5, 3, [(1, linalg.identity(2)), (2, [[3, 0], [0, 3]])])
        f = local_factors(A)[0]
        with pytest.raises(ComputationError):
            basis_indices(f)
