"""Shared test utilities: exact oracles and random instance generators."""

from __future__ import annotations

from fractions import Fraction
from random import Random

from padiclin import PMatrix, PPoly, PrecisionSpec
from padiclin.padic import INF, PadicCtx, val_of_int


def random_integral_matrix(ctx: PadicCtx, n: int, N: int, rng: Random,
                           max_val: int = 2) -> PMatrix:
    """Random integral matrix at flat O(p^N): entries p^v * a with small v."""
    rows = []
    for _ in range(n):
        row = []
        for _ in range(n):
            v = rng.randrange(max_val + 1) if rng.random() < 0.3 else 0
            a = rng.randrange(1, ctx.ppow(N))
            row.append(ctx.approx(a, N + v, shift=v).truncate_to(N))
        rows.append(row)
    return PMatrix(ctx, rows, PrecisionSpec(flat=N))


def random_unimodular_exact(ctx: PadicCtx, n: int, rng: Random) -> PMatrix:
    """Exact integer matrix with determinant +-1 (shears and swaps)."""
    rows = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for _ in range(3 * n):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        t = rng.randrange(-4, 5)
        rows[i] = [a + t * b for a, b in zip(rows[i], rows[j])]
    i, j = rng.randrange(n), rng.randrange(n)
    rows[i], rows[j] = rows[j], rows[i]
    return PMatrix(ctx, [[ctx.exact(int(x)) for x in r] for r in rows])


def centers_fraction(M: PMatrix) -> list[list[Fraction]]:
    return [[e.center_fraction() for e in row] for row in M.entries]


def frac_val(q: Fraction, p: int):
    if q == 0:
        return INF
    return val_of_int(q.numerator, p) - (
        0 if q.denominator == 1 else val_of_int(q.denominator, p)
    )


def det_fraction(rows: list[list[Fraction]]) -> Fraction:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    acc = Fraction(0)
    for j in range(n):
        if rows[0][j] == 0:
            continue
        minor = [[rows[i][k] for k in range(n) if k != j] for i in range(1, n)]
        term = rows[0][j] * det_fraction(minor)
        acc += term if j % 2 == 0 else -term
    return acc


def inverse_fraction(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(rows)
    A = [list(r) for r in rows]
    B = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        B[col], B[piv] = B[piv], B[col]
        d = A[col][col]
        A[col] = [x / d for x in A[col]]
        B[col] = [x / d for x in B[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * c for a, c in zip(A[r], A[col])]
                B[r] = [a - f * c for a, c in zip(B[r], B[col])]
    return B


class ZpModule:
    """The Z_(p)-module spanned by exact rational vectors.

    Built by row reduction with globally-minimal-valuation pivoting, so all
    elimination multipliers are p-integral and the stored staircase basis
    generates exactly the same module.  Membership reduces sequentially in
    build order; a non-p-integral coefficient means not a member.
    """

    def __init__(self, vectors, p: int):
        self.p = p
        rows = [[Fraction(x) for x in v] for v in vectors]
        self.basis: list[tuple[int, list[Fraction]]] = []  # (pivot col, vector)
        while True:
            best = None
            for r, v in enumerate(rows):
                for c, x in enumerate(v):
                    if x != 0:
                        w = frac_val(x, p)
                        if best is None or w < best[0]:
                            best = (w, r, c)
            if best is None:
                break
            _, r0, c0 = best
            pivot = rows.pop(r0)
            self.basis.append((c0, pivot))
            for r, v in enumerate(rows):
                if v[c0] != 0:
                    f = v[c0] / pivot[c0]
                    rows[r] = [a - f * b for a, b in zip(v, pivot)]

    def contains(self, w) -> bool:
        v = [Fraction(x) for x in w]
        for col, b in self.basis:
            if v[col] != 0:
                f = v[col] / b[col]
                if frac_val(f, self.p) < 0:
                    return False
                v = [a - f * c for a, c in zip(v, b)]
        return all(x == 0 for x in v)


def int_sqrt_padic(u: int, p: int, K: int, r0: int) -> int:
    """Square root of a unit u mod p^K by Newton from residue root r0 (p odd)."""
    x, k = r0 % p, 1
    assert x * x % p == u % p and x % p != 0
    while k < K:
        k = min(2 * k, K)
        mod = p ** k
        x = (x - (x * x - u) * pow(2 * x, -1, mod)) % mod
    return x


def track_eigenvalue_2x2(rows, p: int, K: int, lam0: int) -> int:
    """Eigenvalue of an exact integer 2x2 matrix mod p^K, the branch whose
    residue behaviour matches lam0 (p odd; discriminant p^{2m} * unit)."""
    (a, b), (c, d) = rows
    t = a + d
    disc = t * t - 4 * (a * d - b * c)
    assert disc != 0
    m = 0
    while disc % (p * p) == 0 and m < K:
        disc //= p * p
        m += 1
    assert disc % p != 0, "discriminant valuation must be even"
    r0 = next(r for r in range(1, p) if r * r % p == disc % p)
    y = int_sqrt_padic(disc, p, K, r0)
    inv2 = pow(2, -1, p ** (K + m + 1))
    for sign in (1, -1):
        lam = (t + sign * y * p**m) * inv2 % p ** (K + m)
        if (lam - lam0) % p ** (m + 1) == 0:
            return lam % p**K
    raise AssertionError("no branch matches the tracked eigenvalue")
