import json
from fractions import Fraction
from random import Random

import pytest

from padiclin import (
    CompactAdjugate,
    NotCyclic,
    PMatrix,
    PPoly,
    PadicCtx,
    PrecisionSpec,
    companion_matrix,
    compact_form,
    conjugate_compact,
    expand_compact,
    krylov_matrix,
    mat_mul,
    mat_vec,
    oracle_adjugate,
    oracle_charpoly,
    poly_rem,
)

from helpers import centers_fraction, det_fraction, frac_val, random_integral_matrix

Z5 = PadicCtx(5, 14)


def flat(ctx, rows, N):
    return PMatrix.from_ints(ctx, rows, PrecisionSpec(flat=N))


# ---------------------------------------------------------------------- #
# Krylov matrix


def test_krylov_zero_matrix():
    M = flat(Z5, [[0, 0], [0, 0]], 8)
    e1 = [Z5.one(), Z5.zero()]
    K = krylov_matrix(M, e1)
    assert K.entries[0][0] == Z5.one()
    assert K.entries[1][0].agrees_with(Z5.zero())
    assert K.entries[1][1].agrees_with(Z5.zero())


def test_krylov_companion_leading_zero_shape():
    chi = PPoly.from_ints(Z5, [3, 2, 1, 4, 1])
    C = companion_matrix(chi)
    e = [Z5.one()] + [Z5.zero()] * 3
    K = krylov_matrix(C, e)
    n = 4
    for i in range(1, n):
        row = K.entries[i]
        for j in range(n - i):
            assert row[j].is_exact_zero
        assert row[n - i] == Z5.exact(-3)  # -a_0


def test_krylov_agrees_with_iterated_matvec():
    rng = Random(9)
    M = random_integral_matrix(Z5, 4, 8, rng)
    c = [Z5.exact(rng.randrange(1, 100)) for _ in range(4)]
    K = krylov_matrix(M, c)
    w = c
    for i in range(4):
        for j in range(4):
            assert K.entries[i][j].agrees_with(w[j])
        w = mat_vec(M, w)


# ---------------------------------------------------------------------- #
# compact form


def test_compact_form_2x2_companion():
    chi = PPoly.from_ints(Z5, [2, 3, 1])  # X^2 + 3X + 2
    M = flat(Z5, [[0, 1], [-2, -3]], 12)
    ca = compact_form(M, Random(4))
    # alpha = a_1 + X with no further computation
    assert ca.alpha == PPoly(Z5, [ca.chi.coefficient(1), Z5.one()])
    assert ca.chi.congruent_mod(chi, 10)
    got = expand_compact(ca)
    want = oracle_adjugate(M, truncate=False)
    chix = oracle_charpoly(M, truncate=False)
    for i in range(2):
        for j in range(2):
            w = poly_rem(want[i][j], chix)
            assert got[i][j].agrees_with(w), (i, j)


def test_compact_form_conjugation_invariants():
    rng = Random(14)
    M = random_integral_matrix(Z5, 3, 12, rng)
    ca = compact_form(M, rng)
    comp = companion_matrix(ca.chi)
    # M = P C P^{-1} and M^t = Q C Q^{-1} at the certified digits
    lhs = mat_mul(ca.P, comp)
    rhs = mat_mul(M, ca.P)
    assert lhs.agrees_with(rhs)
    lhs2 = mat_mul(ca.Q, comp)
    rhs2 = mat_mul(M.transpose(), ca.Q)
    assert lhs2.agrees_with(rhs2)


def test_compact_form_identity_not_cyclic():
    M = flat(Z5, [[1, 0], [0, 1]], 10)
    with pytest.raises(NotCyclic):
        compact_form(M, Random(2))


def test_compact_form_random_vs_oracle():
    rng = Random(24)
    done = 0
    while done < 5:
        M = random_integral_matrix(Z5, 5, 14, rng, max_val=1)
        chix = oracle_charpoly(M, truncate=False)
        d = det_fraction(centers_fraction(M))
        if d == 0:
            continue
        try:
            ca = compact_form(M, rng)
        except NotCyclic:
            continue
        got = expand_compact(ca)
        want = oracle_adjugate(M, truncate=False)
        for i in range(5):
            for j in range(5):
                w = poly_rem(want[i][j], chix)
                assert got[i][j].agrees_with(w), (i, j)
        done += 1


def test_chi_matches_hessenberg_chi():
    from padiclin import adjugate_hessenberg, hessenberg

    rng = Random(34)
    M = random_integral_matrix(Z5, 4, 12, rng)
    _, chi_h = adjugate_hessenberg(hessenberg(M).H)
    ca = compact_form(M, rng)
    assert ca.chi.agrees_with(chi_h)


def test_krylov_of_companion_always_invertible():
    rng = Random(44)
    for _ in range(10):
        coeffs = [rng.randrange(1, 60)] + [rng.randrange(60) for _ in range(3)]
        chi = PPoly.from_ints(Z5, coeffs + [1])
        C = companion_matrix(chi)
        e = [Z5.one()] + [Z5.zero()] * 3
        K = krylov_matrix(C, e)
        d = det_fraction(centers_fraction(K))
        a0 = coeffs[0]
        assert d != 0
        assert frac_val(d, 5) == 3 * frac_val(Fraction(a0), 5)


# ---------------------------------------------------------------------- #
# expansion and conjugation


def test_expand_spot_indices():
    rng = Random(54)
    M = random_integral_matrix(Z5, 3, 12, rng)
    ca = compact_form(M, rng)
    got = expand_compact(ca)
    for (i, j) in [(0, 0), (1, 2), (2, 1)]:
        u = PPoly(Z5, list(ca.P.entries[i]))
        w = PPoly(Z5, list(ca.Q.entries[j]))
        direct = poly_rem(poly_rem(ca.alpha * u, ca.chi) * w, ca.chi)
        assert got[i][j] == direct


def test_expand_unit_rescaling_bilinearity():
    rng = Random(64)
    M = random_integral_matrix(Z5, 3, 12, rng)
    ca = compact_form(M, rng)
    u = Z5.exact(7)
    uinv = u.inv()
    ca2 = CompactAdjugate(
        alpha=ca.alpha * u,
        P=ca.P.map_entries(lambda e: e * uinv),
        Q=ca.Q,
        chi=ca.chi,
    )
    a, b = expand_compact(ca), expand_compact(ca2)
    for i in range(3):
        for j in range(3):
            assert a[i][j].agrees_with(b[i][j])


def test_conjugate_identity_and_permutation():
    rng = Random(74)
    M = random_integral_matrix(Z5, 3, 12, rng)
    ca = compact_form(M, rng)
    ca_id = conjugate_compact(ca, PMatrix.identity(Z5, 3))
    assert ca_id.P == ca.P and ca_id.chi == ca.chi
    perm = PMatrix.from_ints(Z5, [[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    ca_p = conjugate_compact(ca, perm)
    got = expand_compact(ca_p)
    base = expand_compact(ca)
    # (P B P^{-1})_{i,j} = B_{pi(i), pi(j)} with pi the row->column map of P
    pi = [1, 2, 0]
    for i in range(3):
        for j in range(3):
            assert got[i][j].agrees_with(base[pi[i]][pi[j]]), (i, j)


def test_conjugate_composition():
    rng = Random(84)
    M = random_integral_matrix(Z5, 3, 12, rng)
    ca = compact_form(M, rng)
    U1 = PMatrix.from_ints(Z5, [[1, 2, 0], [0, 1, 0], [0, 0, 1]])
    U2 = PMatrix.from_ints(Z5, [[1, 0, 0], [3, 1, 0], [0, 0, 1]])
    once = conjugate_compact(conjugate_compact(ca, U1), U2)
    both = conjugate_compact(ca, mat_mul(U2, U1))
    assert once.P.agrees_with(both.P)
    assert once.Q.agrees_with(both.Q)
    assert once.alpha == both.alpha and once.chi == both.chi


def test_compact_json_round_trip():
    rng = Random(94)
    M = random_integral_matrix(Z5, 3, 12, rng)
    ca = compact_form(M, rng)
    d = json.loads(json.dumps(ca.to_json()))
    ca2 = CompactAdjugate.from_json(d, Z5)
    assert ca2.alpha == ca.alpha and ca2.chi == ca.chi
    assert ca2.P == ca.P and ca2.Q == ca.Q
