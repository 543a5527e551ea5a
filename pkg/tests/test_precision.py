from random import Random

import pytest

from padiclin import (
    INF,
    InsufficientPrecision,
    NotSimpleRoot,
    PMatrix,
    PPoly,
    PadicCtx,
    PrecisionSpec,
    charpoly_optimal,
    companion_matrix,
    compact_form,
    cyclic_mod_p,
    eigenvalue_precision,
    eigenvalues_precision_batch,
    hensel_lift_eigenvalue,
    mat_mul,
    optimal_jagged_charpoly,
    oracle_charpoly,
    validity_check,
)
from padiclin.matops import berkowitz_charpoly_int
from padiclin.padic import val_of_int

from helpers import (
    centers_fraction,
    det_fraction,
    random_integral_matrix,
    random_unimodular_exact,
    track_eigenvalue_2x2,
)

Z5 = PadicCtx(5, 16)


def flat(ctx, rows, N):
    return PMatrix.from_ints(ctx, rows, PrecisionSpec(flat=N))


def perturb_coeff_vals(centers, p, lattice_exp, rng, trials):
    """Valuations of the charpoly coefficient changes under random in-lattice
    integer perturbations (exact division-free recomputation)."""
    n = len(centers)
    base = berkowitz_charpoly_int(centers)
    out = [[] for _ in range(n)]
    for _ in range(trials):
        pert = [
            [
                centers[i][j] + p ** lattice_exp(i, j) * rng.randrange(p**3)
                for j in range(n)
            ]
            for i in range(n)
        ]
        chi = berkowitz_charpoly_int(pert)
        for k in range(n):
            d = chi[k] - base[k]
            out[k].append(INF if d == 0 else val_of_int(d, p))
    return out


def single_entry_delta(centers, p, i, j, exp, k):
    """Valuation of the coefficient-k change for dM = p^exp * E_{i,j}."""
    n = len(centers)
    pert = [row[:] for row in centers]
    pert[i][j] += p**exp
    d = berkowitz_charpoly_int(pert)[k] - berkowitz_charpoly_int(centers)[k]
    return INF if d == 0 else val_of_int(d, p)


# ---------------------------------------------------------------------- #
# cyclicity of the reduction


def test_cyclic_identity_false():
    assert not cyclic_mod_p(flat(Z5, [[1, 0], [0, 1]], 6))


def test_cyclic_companion_true():
    M = companion_matrix(PPoly.from_ints(Z5, [2, 3, 1, 1]))
    assert cyclic_mod_p(M)


def test_cyclic_diag_brute_force_oracle():
    assert cyclic_mod_p(flat(Z5, [[1, 0, 0], [0, 2, 0], [0, 0, 3]], 6))
    assert not cyclic_mod_p(flat(Z5, [[1, 0, 0], [0, 1, 0], [0, 0, 2]], 6))


def test_cyclic_requires_digits():
    rows = [[Z5.ball(0), Z5.one()], [Z5.one(), Z5.one()]]
    with pytest.raises(InsufficientPrecision):
        cyclic_mod_p(PMatrix(Z5, rows))


# ---------------------------------------------------------------------- #
# validity radius


def test_validity_unit_determinant():
    M = flat(Z5, [[1, 1], [1, 2]], 1)
    assert validity_check(M).ok


def test_validity_diag_p_p2():
    # the lattice is the contract: declare O(p^1) on entries that carry
    # more digits internally, so the divisors stay computable
    rows = [[Z5.exact(5), Z5.zero()], [Z5.zero(), Z5.exact(25)]]
    M1 = PMatrix(Z5, rows, PrecisionSpec(flat=1))
    r1 = validity_check(M1)
    assert r1.s == 1 and r1.threshold == 3 and not r1.ok
    M4 = flat(Z5, [[5, 0], [0, 25]], 4)
    assert validity_check(M4).ok


def test_validity_all_balls_raises():
    from padiclin import SingularToPrecision

    M = flat(Z5, [[5, 0], [0, 25]], 1)  # every entry truncates to a ball
    with pytest.raises(SingularToPrecision):
        validity_check(M)


# ---------------------------------------------------------------------- #
# optimal jagged precision of chi


def test_diag_p_p2_constant_term_gains_one_digit():
    N = 6
    M = flat(Z5, [[5, 0], [0, 25]], N)
    rep = optimal_jagged_charpoly(M)
    # det coefficient gains one digit; the trace coefficient does not
    # (forced by the adjugate diag(X - p^2, X - p))
    assert rep.nprime[0] == N + 1
    assert rep.nprime[1] == N
    assert rep.gain
    assert not rep.cyclic_mod_p
    # perturbation oracle confirms both exponents are sharp
    rng = Random(5)
    vals = perturb_coeff_vals(
        [[5, 0], [0, 25]], 5, lambda i, j: N, rng, 300
    )
    assert min(vals[0]) == N + 1
    assert min(vals[1]) == N
    assert single_entry_delta([[5, 0], [0, 25]], 5, 1, 1, N, 0) == N + 1
    assert single_entry_delta([[5, 0], [0, 25]], 5, 0, 0, N, 1) == N


def test_companion_no_gain():
    N = 7
    M = companion_matrix(PPoly.from_ints(Z5, [3, 1, 4, 1]))
    M = PMatrix(
        Z5,
        [[e.truncate_to(N) for e in row] for row in M.entries],
        PrecisionSpec(flat=N),
    )
    rep = optimal_jagged_charpoly(M)
    assert all(v == N for v in rep.nprime)
    assert not rep.gain
    assert rep.cyclic_mod_p


def _noncyclic_rank_deficient(ctx, n, N, rng):
    """Reduction has a >= 2-dimensional kernel: non-cyclic with the gain
    visible on the constant coefficient."""
    core = [[0] * n for _ in range(n)]
    core[0][0] = 1 + 5 * rng.randrange(2)
    for i in range(n):
        for j in range(n):
            if core[i][j] == 0:
                core[i][j] = 5 * rng.randrange(5)
    U = random_unimodular_exact(ctx, n, rng)
    Uinv = [[int(x) for x in row] for row in _int_inverse(U)]
    M0 = mat_mul(mat_mul(U, PMatrix.from_ints(ctx, core)),
                 PMatrix.from_ints(ctx, Uinv))
    return PMatrix(
        ctx,
        [[e.truncate_to(N) for e in row] for row in M0.entries],
        PrecisionSpec(flat=N),
    )


def _int_inverse(U):
    from helpers import inverse_fraction

    return inverse_fraction(centers_fraction(U))


def test_constructed_noncyclic_gains():
    rng = Random(77)
    N = 8
    for _ in range(5):
        M = _noncyclic_rank_deficient(Z5, 4, N, rng)
        rep = optimal_jagged_charpoly(M)
        assert not rep.cyclic_mod_p
        assert rep.gain and rep.nprime[0] > N


def test_identity_matrix_diffuse_gain_not_visible():
    # the identity has no cyclic vector, yet no single coefficient gains:
    # the containment of the image lattice is diffuse there
    N = 6
    M = flat(Z5, [[1, 0], [0, 1]], N)
    rep = optimal_jagged_charpoly(M)
    assert not rep.cyclic_mod_p
    assert all(v == N for v in rep.nprime)


def test_cyclic_implies_no_gain_random():
    rng = Random(88)
    for _ in range(10):
        M = random_integral_matrix(Z5, 4, 7, rng)
        rep = optimal_jagged_charpoly(M)
        if rep.cyclic_mod_p:
            assert not rep.gain


def test_trace_linearity_jagged():
    # N'_{n-1} = min_i N_{i,i} always
    rng = Random(99)
    grid = [[6 + rng.randrange(5) for _ in range(3)] for _ in range(3)]
    rows = [
        [Z5.approx(rng.randrange(1, 5**6), grid[i][j]) for j in range(3)]
        for i in range(3)
    ]
    M = PMatrix(Z5, rows, PrecisionSpec(jagged=grid))
    rep = optimal_jagged_charpoly(M)
    assert rep.nprime[2] == min(grid[i][i] for i in range(3))


def test_transposed_pairing_on_asymmetric_lattice():
    # lattice N = [[12, 10], [4, 12]]: the (1,2) entry of the adjugate pairs
    # with N_{2,1} = 4, which dominates the constant coefficient
    grid = [[12, 10], [4, 12]]
    a, b, c, d = 2, 3, 2 * 25, 3  # val(b) = 0, val(c) = 2
    rows = [
        [Z5.approx(a, grid[0][0]), Z5.approx(b, grid[0][1])],
        [Z5.approx(c, grid[1][0]), Z5.approx(d, grid[1][1])],
    ]
    M = PMatrix(Z5, rows, PrecisionSpec(jagged=grid))
    rep = optimal_jagged_charpoly(M)
    assert rep.nprime[0] == 4  # N_{2,1} + val(C_{1,2}) = 4 + 0
    # perturbation oracle on the same asymmetric lattice
    centers = [[a, b], [c, d]]
    rng = Random(3)
    vals = perturb_coeff_vals(centers, 5, lambda i, j: grid[i][j], rng, 300)
    assert min(vals[0]) == 4
    assert single_entry_delta(centers, 5, 1, 0, 4, 0) == 4


def test_nprime_upper_bound_monte_carlo_flat():
    rng = Random(111)
    checked = 0
    while checked < 4:
        M = random_integral_matrix(Z5, 3, 9, rng)
        if not validity_check(M).ok:
            continue
        rep = optimal_jagged_charpoly(M)
        centers = [[e.lift_int() for e in row] for row in M.entries]
        vals = perturb_coeff_vals(centers, 5, lambda i, j: 9, rng, 200)
        for k in range(3):
            if rep.nprime[k] is INF:
                continue
            assert min(vals[k]) >= rep.nprime[k]
        checked += 1


# ---------------------------------------------------------------------- #
# charpoly at optimal precision


def test_charpoly_optimal_diag_example():
    M = flat(Z5, [[5, 0], [0, 25]], 3)
    chi, rep = charpoly_optimal(M)
    assert rep.nprime == (4, 3)
    a0 = chi.coefficient(0)
    assert a0.absprec == 4 and a0.congruent_mod(Z5.exact(125), 4)
    a1 = chi.coefficient(1)
    assert a1.absprec == 3 and a1.congruent_mod(Z5.exact(-30), 3)
    assert chi.coefficient(2) == Z5.one()


def test_charpoly_optimal_exact_matrix():
    M = PMatrix.from_ints(Z5, [[1, 2], [3, 4]])
    chi, rep = charpoly_optimal(M)
    assert all(v is INF for v in rep.nprime)
    assert chi == PPoly.from_ints(Z5, [4 * 1 - 2 * 3, -5, 1])


def test_charpoly_optimal_matches_exact_lift():
    rng = Random(123)
    done = 0
    while done < 5:
        M = random_integral_matrix(Z5, 4, 9, rng)
        if not validity_check(M).ok:
            continue
        chi, rep = charpoly_optimal(M)
        centers = [[e.lift_int() for e in row] for row in M.entries]
        exact = berkowitz_charpoly_int(centers)
        for k in range(4):
            got = chi.coefficient(k)
            assert got.absprec == rep.nprime[k]
            assert got.congruent_mod(Z5.exact(exact[k]), min(9, rep.nprime[k]))
        done += 1


def test_charpoly_optimal_requires_validity():
    M = flat(Z5, [[5, 0], [0, 25]], 1)
    with pytest.raises(InsufficientPrecision):
        charpoly_optimal(M)


# ---------------------------------------------------------------------- #
# Hensel lifting


def test_hensel_x2_minus_1():
    chi = PPoly(Z5, [Z5.approx(-1, 8), Z5.ball(8), Z5.one()])
    lam = hensel_lift_eigenvalue(chi, 1)
    assert lam.congruent_mod(Z5.one(), 8)


def test_hensel_x2_minus_6_newton_oracle():
    chi = PPoly.from_ints(Z5, [-6, 0, 1])
    lam = hensel_lift_eigenvalue(chi, 1)
    # digit-by-digit oracle: the square really is 6
    K = lam.absprec
    x = lam.lift_int()
    assert (x * x - 6) % 5**K == 0
    assert x % 5 == 1


def test_hensel_double_root_rejected():
    chi = PPoly.from_ints(Z5, [1, -2, 1])  # (X-1)^2
    with pytest.raises(NotSimpleRoot):
        hensel_lift_eigenvalue(chi, 1)
    with pytest.raises(NotSimpleRoot):
        hensel_lift_eigenvalue(PPoly.from_ints(Z5, [-6, 0, 1]), 2)


# ---------------------------------------------------------------------- #
# eigenvalue precision: the three worked families


def _mc_eigen_min_move(centers, p, N, lam0, trials, rng, include_worst=None):
    base = track_eigenvalue_2x2(centers, p, N + 10, lam0)
    moves = []
    cases = []
    for _ in range(trials):
        pert = [
            [centers[i][j] + p**N * rng.randrange(p**3) for j in range(2)]
            for i in range(2)
        ]
        cases.append(pert)
    if include_worst:
        i, j = include_worst
        pert = [row[:] for row in centers]
        pert[i][j] += p**N
        cases.append(pert)
    for pert in cases:
        lam = track_eigenvalue_2x2(pert, p, N + 10, lam0)
        d = (lam - base) % p ** (N + 10)
        moves.append(INF if d == 0 else val_of_int(d, p))
    return min(moves)


def test_eigen_diag_family_no_loss():
    N = 8
    M = flat(Z5, [[1, 0], [0, 2]], N)
    ca = compact_form(M, Random(7))
    lam = hensel_lift_eigenvalue(ca.chi, 1)
    ep = eigenvalue_precision(M, ca, lam)
    assert ep.nprime == N
    assert ep.val_chi_prime == 0
    got = _mc_eigen_min_move([[1, 0], [0, 2]], 5, N, 1, 400, Random(8),
                             include_worst=(0, 0))
    assert got == ep.nprime


def test_eigen_loss_family_one_digit():
    # M = [[1,1],[0,1+p]]: chi'(1) = -p, the adjugate at 1 has a unit entry:
    # one digit is lost
    N = 8
    M = flat(Z5, [[1, 1], [0, 6]], N)
    ca = compact_form(M, Random(17))
    lam = Z5.approx(1, N + 4)
    ep = eigenvalue_precision(M, ca, lam)
    assert ep.val_chi_prime == 1
    assert ep.nprime == N - 1
    got = _mc_eigen_min_move([[1, 1], [0, 6]], 5, N, 1, 400, Random(18),
                             include_worst=(1, 0))
    assert got == ep.nprime


def test_eigen_gain_cancels_loss_family():
    # M = diag(p, -p), lambda = p: +1 from the adjugate cancels -1 from chi'
    N = 8
    M = flat(Z5, [[5, 0], [0, -5]], N)
    ca = compact_form(M, Random(27))
    lam = Z5.approx(5, N + 4)
    ep = eigenvalue_precision(M, ca, lam)
    assert ep.val_chi_prime == 1
    assert ep.nprime == N
    got = _mc_eigen_min_move([[5, 0], [0, -5]], 5, N, 5, 400, Random(28),
                             include_worst=(0, 0))
    assert got == ep.nprime


def test_eigen_first_order_formula():
    # lambda(M + dM) - lambda(M) = +tr(com(lambda-M) dM)/chi'(lambda) to
    # first order (sign: Jacobi's determinant derivative)
    N = 9
    centers = [[1, 0], [0, 2]]
    base = track_eigenvalue_2x2(centers, 5, N + 8, 1)
    rng = Random(31)
    for _ in range(50):
        dm = [[5**N * rng.randrange(25) for _ in range(2)] for _ in range(2)]
        pert = [[centers[i][j] + dm[i][j] for j in range(2)] for i in range(2)]
        lam = track_eigenvalue_2x2(pert, 5, N + 8, 1)
        # com(1 - M) = diag(-1, 0), chi'(1) = -1
        predicted = (base + dm[0][0]) % 5 ** (2 * N - 1)
        assert lam % 5 ** (2 * N - 1) == predicted


def test_batch_matches_singletons():
    N = 10
    M = flat(Z5, [[1, 0], [0, 2]], N)
    ca = compact_form(M, Random(37))
    lams = [hensel_lift_eigenvalue(ca.chi, 1), hensel_lift_eigenvalue(ca.chi, 2)]
    batch = eigenvalues_precision_batch(M, ca, lams)
    singles = [eigenvalue_precision(M, ca, lam) for lam in lams]
    assert [b.nprime for b in batch] == [s.nprime for s in singles]
    assert [b.val_alpha for b in batch] == [s.val_alpha for s in singles]
    one = eigenvalues_precision_batch(M, ca, [lams[0]])
    assert one[0].nprime == singles[0].nprime


def test_batch_random_simple_roots():
    rng = Random(47)
    done = 0
    while done < 3:
        M = random_integral_matrix(Z5, 5, 12, rng, max_val=0)
        try:
            ca = compact_form(M, rng)
        except Exception:
            continue
        from padiclin import simple_residue_roots

        roots = simple_residue_roots(ca.chi)
        if len(roots) < 2:
            continue
        lams = [hensel_lift_eigenvalue(ca.chi, r) for r in roots]
        batch = eigenvalues_precision_batch(M, ca, lams)
        singles = [eigenvalue_precision(M, ca, lam) for lam in lams]
        assert [b.nprime for b in batch] == [s.nprime for s in singles]
        done += 1
