"""Matrix-level algorithms over Q_p.

The centerpiece is the division-free computation of the adjugate of X - H
for an (approximate) Hessenberg matrix H: eliminate in 1 - X*H over
Z_p[[X]] / X^(n+1), where every pivot is a series with constant term
exactly 1, take the product of the diagonal as the determinant series, and
reverse coefficients at the end.  Only units of Z_p are ever inverted.

Also here: the pivoted similarity reduction to Hessenberg form with an
exact change of basis, Smith normal form over Z_p with exact elementary
divisors, the matrix inverse through it, the randomized rank-one
factorization of the adjugate, and slow exact oracles (cofactor expansion
and a division-free iteration) used to verify everything else.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from random import Random

from .errors import (
    DiscriminantZero,
    InsufficientPrecision,
    NegativeValuation,
    PrecisionLossInGcd,
    RandomizationExhausted,
    SingularToPrecision,
)
from .padic import INF, PadicCtx, PadicElem
from .polyring import (
    PPoly,
    TruncSeries,
    derivative,
    poly_rem,
    reciprocal,
    series_inv,
    xgcd_mod,
)


class PrecisionSpec:
    """Flat O(p^N) or per-entry lattice exponents for a matrix."""

    __slots__ = ("flat", "jagged")

    def __init__(self, flat=None, jagged=None):
        if (flat is None) == (jagged is None):
            raise ValueError("exactly one of flat/jagged must be given")
        self.flat = flat
        self.jagged = None if jagged is None else tuple(tuple(r) for r in jagged)

    @classmethod
    def flat_spec(cls, N: int) -> "PrecisionSpec":
        return cls(flat=N)

    @classmethod
    def jagged_spec(cls, grid) -> "PrecisionSpec":
        return cls(jagged=grid)

    @property
    def is_flat(self) -> bool:
        return self.flat is not None

    def exponent(self, i: int, j: int):
        return self.flat if self.is_flat else self.jagged[i][j]

    def min_exponent(self):
        if self.is_flat:
            return self.flat
        return min(min(r) for r in self.jagged)

    def to_json(self):
        if self.is_flat:
            return {"flat": self.flat}
        enc = [["inf" if e is INF else e for e in row] for row in self.jagged]
        return {"jagged": enc}

    @classmethod
    def from_json(cls, d) -> "PrecisionSpec":
        if "flat" in d:
            return cls(flat=d["flat"])
        grid = [[INF if e == "inf" else int(e) for e in row] for row in d["jagged"]]
        return cls(jagged=grid)

    def __eq__(self, other):
        return (
            isinstance(other, PrecisionSpec)
            and self.flat == other.flat
            and self.jagged == other.jagged
        )

    def __repr__(self):
        return f"PrecisionSpec(flat={self.flat})" if self.is_flat else "PrecisionSpec(jagged=...)"


class PMatrix:
    """Immutable square matrix of PadicElem with a declared precision lattice.

    The lattice is the contract: each entry must carry at least the declared
    number of digits, and may carry more internally.
    """

    __slots__ = ("ctx", "n", "entries", "prec")

    def __init__(self, ctx: PadicCtx, entries, prec: PrecisionSpec | None = None):
        rows = tuple(tuple(r) for r in entries)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        if prec is None:
            prec = PrecisionSpec(jagged=[[e.absprec for e in r] for r in rows])
        for i, r in enumerate(rows):
            for j, e in enumerate(r):
                if e.absprec < prec.exponent(i, j):
                    raise ValueError(
                        f"entry ({i},{j}) carries {e.absprec} digits, "
                        f"lattice demands {prec.exponent(i, j)}"
                    )
        self.ctx = ctx
        self.n = n
        self.entries = rows
        self.prec = prec

    # ------------------------------------------------------------------ #

    @classmethod
    def identity(cls, ctx: PadicCtx, n: int) -> "PMatrix":
        one, zero = ctx.one(), ctx.zero()
        return cls(ctx, [[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def from_ints(cls, ctx: PadicCtx, rows, prec: PrecisionSpec | None = None) -> "PMatrix":
        ents = [[ctx.exact(v) for v in r] for r in rows]
        if prec is not None and prec.is_flat:
            ents = [[e.truncate_to(prec.flat) for e in r] for r in ents]
        elif prec is not None:
            ents = [
                [e.truncate_to(prec.exponent(i, j)) for j, e in enumerate(r)]
                for i, r in enumerate(ents)
            ]
        return cls(ctx, ents, prec)

    def entry(self, i: int, j: int) -> PadicElem:
        return self.entries[i][j]

    def rows_list(self) -> list[list[PadicElem]]:
        return [list(r) for r in self.entries]

    def transpose(self) -> "PMatrix":
        n = self.n
        prec = None
        if self.prec.is_flat:
            prec = self.prec
        else:
            prec = PrecisionSpec(
                jagged=[[self.prec.exponent(j, i) for j in range(n)] for i in range(n)]
            )
        return PMatrix(
            self.ctx, [[self.entries[j][i] for j in range(n)] for i in range(n)], prec
        )

    def map_entries(self, f, prec: PrecisionSpec | None = None) -> "PMatrix":
        return PMatrix(self.ctx, [[f(e) for e in r] for r in self.entries], prec)

    def shift(self, k: int) -> "PMatrix":
        """Multiply every entry by p^k (exact valuation shift)."""
        prec = None
        if self.prec.is_flat:
            prec = PrecisionSpec(flat=self.prec.flat + k)
        else:
            prec = PrecisionSpec(
                jagged=[
                    [self.prec.exponent(i, j) + k for j in range(self.n)]
                    for i in range(self.n)
                ]
            )
        return self.map_entries(lambda e: e.shift(k), prec)

    def min_valuation(self):
        """Minimum valuation among entries with known digits (INF if none)."""
        vals = [e.val for r in self.entries for e in r if e.has_digits]
        balls = [e.absprec for r in self.entries for e in r if not e.has_digits and not e.is_exact_zero]
        return min(vals + balls, default=INF)

    def is_integral(self) -> bool:
        v = self.min_valuation()
        return v is INF or v >= 0

    def agrees_with(self, other: "PMatrix") -> bool:
        return all(
            a.agrees_with(b)
            for ra, rb in zip(self.entries, other.entries)
            for a, b in zip(ra, rb)
        )

    def __eq__(self, other):
        if not isinstance(other, PMatrix):
            return NotImplemented
        return self.ctx == other.ctx and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        body = "; ".join(", ".join(str(e) for e in r) for r in self.entries)
        return f"<PMatrix {self.n}x{self.n} [{body}]>"

    def to_json(self) -> dict:
        return {
            "p": self.ctx.p,
            "n": self.n,
            "prec": self.prec.to_json(),
            "entries": [[str(e) for e in r] for r in self.entries],
        }

    @classmethod
    def from_json(cls, d: dict, ctx: PadicCtx | None = None) -> "PMatrix":
        if ctx is None:
            ctx = PadicCtx(d["p"], default_prec=max(20, _json_max_exp(d)))
        elif ctx.p != d["p"]:
            raise ValueError("context prime differs from file prime")
        prec = PrecisionSpec.from_json(d["prec"])
        ents = [[ctx.parse(s) for s in row] for row in d["entries"]]
        return cls(ctx, ents, prec)


def _json_max_exp(d: dict) -> int:
    pd = d.get("prec", {})
    if "flat" in pd:
        return int(pd["flat"])
    vals = [e for row in pd.get("jagged", []) for e in row if e != "inf"]
    return max((int(v) for v in vals), default=20)


# ---------------------------------------------------------------------- #
# elementwise helpers


def mat_mul(A: PMatrix, B: PMatrix) -> PMatrix:
    n = A.n
    za = A.ctx.zero()
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = za
            for k in range(n):
                a = A.entries[i][k]
                b = B.entries[k][j]
                if a.is_exact_zero or b.is_exact_zero:
                    continue
                acc = acc + a * b
            row.append(acc)
        out.append(row)
    return PMatrix(A.ctx, out)


def mat_vec(A: PMatrix, v: list[PadicElem]) -> list[PadicElem]:
    za = A.ctx.zero()
    out = []
    for i in range(A.n):
        acc = za
        for k in range(A.n):
            a = A.entries[i][k]
            if a.is_exact_zero or v[k].is_exact_zero:
                continue
            acc = acc + a * v[k]
        out.append(acc)
    return out


def gauss_inverse(M: PMatrix) -> PMatrix:
    """Inverse by Gauss-Jordan with minimal-valuation pivoting.

    Divisions by non-units happen freely; output precision is whatever the
    capped arithmetic yields.  Raises SingularToPrecision when no pivot with
    known digits remains in a column.
    """
    n = M.n
    ctx = M.ctx
    A = M.rows_list()
    B = PMatrix.identity(ctx, n).rows_list()
    for col in range(n):
        cands = [(A[r][col].val, r) for r in range(col, n) if A[r][col].has_digits]
        if not cands:
            raise SingularToPrecision(f"no usable pivot in column {col}")
        _, piv = min(cands)
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            B[col], B[piv] = B[piv], B[col]
        pinv = A[col][col].inv()
        A[col] = [e * pinv for e in A[col]]
        B[col] = [e * pinv for e in B[col]]
        for r in range(n):
            if r == col:
                continue
            f = A[r][col]
            if f.is_exact_zero:
                continue
            A[r] = [a - f * c for a, c in zip(A[r], A[col])]
            B[r] = [a - f * c for a, c in zip(B[r], B[col])]
    return PMatrix(ctx, B)


def exact_inverse(M: PMatrix, absprec) -> PMatrix:
    """Inverse of a matrix with exact entries, truncated at absprec.

    Exact Gauss-Jordan over Q; entries of the result are p-adic expansions
    capped at the requested absolute precision (or exact when absprec=INF
    and the rational happens to be representable).
    """
    n = M.n
    ctx = M.ctx
    A = [[e.center_fraction() for e in r] for r in M.entries]
    for r in M.entries:
        for e in r:
            if not e.exact:
                raise ValueError("exact_inverse requires exact entries")
    B = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise SingularToPrecision("matrix is exactly singular")
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            B[col], B[piv] = B[piv], B[col]
        pinv = 1 / A[col][col]
        A[col] = [e * pinv for e in A[col]]
        B[col] = [e * pinv for e in B[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * c for a, c in zip(A[r], A[col])]
                B[r] = [a - f * c for a, c in zip(B[r], B[col])]
    if absprec is INF:
        ents = [[ctx.exact(q) for q in row] for row in B]
    else:
        ents = [[ctx.from_rational(q, absprec) for q in row] for row in B]
    return PMatrix(ctx, ents)


def scalar_mat_polyvec(S: PMatrix, vec: list[PPoly]) -> list[PPoly]:
    """(scalar matrix) x (column vector of polynomials)."""
    out = []
    for i in range(S.n):
        acc = PPoly.zero(vec[0].ctx)
        for j in range(S.n):
            s = S.entries[i][j]
            if s.is_exact_zero or vec[j].is_zero:
                continue
            acc = acc + vec[j] * s
        out.append(acc)
    return out


def polyvec_scalar_mat(vec: list[PPoly], S: PMatrix) -> list[PPoly]:
    """(row vector of polynomials) x (scalar matrix)."""
    out = []
    for j in range(S.n):
        acc = PPoly.zero(vec[0].ctx)
        for i in range(S.n):
            s = S.entries[i][j]
            if s.is_exact_zero or vec[i].is_zero:
                continue
            acc = acc + vec[i] * s
        out.append(acc)
    return out


def scalar_conj_polymat(P: PMatrix, C, Pinv: PMatrix):
    """P * C * Pinv for a matrix C of polynomials."""
    n = P.n
    mid = []
    for i in range(n):
        mid.append(polyvec_scalar_mat(list(C[i]), Pinv))
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = PPoly.zero(P.ctx)
            for k in range(n):
                s = P.entries[i][k]
                if s.is_exact_zero or mid[k][j].is_zero:
                    continue
                acc = acc + mid[k][j] * s
            row.append(acc)
        out.append(row)
    return tuple(tuple(r) for r in out)


def poly_mat_mul(A, B):
    """Product of two matrices of PPoly."""
    n = len(A)
    ctx = next(e.ctx for row in A for e in row)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = PPoly.zero(ctx)
            for k in range(n):
                if A[i][k].is_zero or B[k][j].is_zero:
                    continue
                acc = acc + A[i][k] * B[k][j]
            row.append(acc)
        out.append(row)
    return tuple(tuple(r) for r in out)


def x_minus_m(M: PMatrix):
    """The polynomial matrix X*I - M."""
    ctx = M.ctx
    out = []
    for i in range(M.n):
        row = []
        for j in range(M.n):
            if i == j:
                row.append(PPoly(ctx, [-M.entries[i][j], ctx.one()]))
            else:
                row.append(PPoly(ctx, [-M.entries[i][j]]))
        out.append(row)
    return tuple(tuple(r) for r in out)


# ---------------------------------------------------------------------- #
# Algorithm 1: approximate Hessenberg form with exact change of basis


@dataclass(frozen=True)
class HessenbergForm:
    """H = P M P^{-1} with H approximate Hessenberg and P exact, det a unit.

    Entries of H below the first subdiagonal are indistinguishable from
    zero.  `skipped_columns` lists columns where no usable pivot existed.
    """

    H: PMatrix
    P: PMatrix
    P_inv: PMatrix
    skipped_columns: tuple[int, ...] = ()


def _shear_lift(ctx: PadicCtx, y: PadicElem, x: PadicElem) -> PadicElem:
    """Exact integer lift t of y/x modulo p^min(relprec), val(y) >= val(x).

    y - t*x is then guaranteed indistinguishable from zero at the combined
    precision.  When both operands are exact the ratio is capped at the
    context default precision.
    """
    vdiff = y.val - x.val
    rx = ctx.default_prec if x.exact else x.relprec
    ry = ctx.default_prec if y.exact else y.relprec
    r = min(rx, ry)
    pr = ctx.ppow(r)
    t = (y.mantissa % pr) * pow(x.mantissa % pr, -1, pr) % pr
    return ctx.exact(t, shift=vdiff)


def hessenberg(M: PMatrix) -> HessenbergForm:
    """Similarity-reduce M to approximate Hessenberg form (pivoted).

    In column j the pivot is the row i >= j+1 of minimal valuation among
    entries with known digits (ties: smallest row index); elimination uses
    exact integer shear lifts, so P and its inverse stay exact.  A column
    with no usable pivot is left alone and recorded.
    """
    ctx = M.ctx
    n = M.n
    H = M.rows_list()
    P = PMatrix.identity(ctx, n).rows_list()
    Pinv = PMatrix.identity(ctx, n).rows_list()
    skipped = []
    for j in range(n - 1):
        cands = [(H[i][j].val, i) for i in range(j + 1, n) if H[i][j].has_digits]
        if not cands:
            if any(
                not H[i][j].is_exact_zero for i in range(j + 2, n)
            ):
                skipped.append(j)
            continue
        _, piv = min(cands)
        if piv != j + 1:
            a, b = j + 1, piv
            H[a], H[b] = H[b], H[a]
            for r in range(n):
                H[r][a], H[r][b] = H[r][b], H[r][a]
            P[a], P[b] = P[b], P[a]
            for r in range(n):
                Pinv[r][a], Pinv[r][b] = Pinv[r][b], Pinv[r][a]
        x = H[j + 1][j]
        for i in range(j + 2, n):
            y = H[i][j]
            if not y.has_digits:
                continue
            t = _shear_lift(ctx, y, x)
            # row op: row_i -= t * row_{j+1}
            H[i] = [a - t * b for a, b in zip(H[i], H[j + 1])]
            P[i] = [a - t * b for a, b in zip(P[i], P[j + 1])]
            # matching column op: col_{j+1} += t * col_i
            for r in range(n):
                H[r][j + 1] = H[r][j + 1] + t * H[r][i]
                Pinv[r][j + 1] = Pinv[r][j + 1] + t * Pinv[r][i]
    return HessenbergForm(
        H=PMatrix(ctx, H),
        P=PMatrix(ctx, P),
        P_inv=PMatrix(ctx, Pinv),
        skipped_columns=tuple(skipped),
    )


# ---------------------------------------------------------------------- #
# Smith normal form over Z_p


@dataclass(frozen=True)
class SNFDecomp:
    """M = Pl * Delta * Qr with Pl, Qr unimodular over Z_p, Delta exact.

    sigma_vals are the valuations of the elementary divisors, nondecreasing;
    INF marks an exactly-zero divisor.  cond is the largest one.
    """

    Pl: PMatrix
    Qr: PMatrix
    Pl_inv: PMatrix
    Qr_inv: PMatrix
    Delta: PMatrix
    sigma_vals: tuple

    @property
    def cond(self):
        return self.sigma_vals[-1]


def snf(M: PMatrix) -> SNFDecomp:
    """Smith normal form over Z_p by global minimal-valuation pivoting.

    Requires an integral matrix.  The elementary divisors come out exact;
    the transformations absorb the precision loss (at flat O(p^m) input they
    are known at O(p^{m - cond}) or better).
    """
    ctx = M.ctx
    n = M.n
    if not M.is_integral():
        raise NegativeValuation("snf requires nonnegative valuations")
    S = M.rows_list()
    Pl = PMatrix.identity(ctx, n).rows_list()
    Plinv = PMatrix.identity(ctx, n).rows_list()
    Qr = PMatrix.identity(ctx, n).rows_list()
    Qrinv = PMatrix.identity(ctx, n).rows_list()
    sig: list = []
    for l in range(n):
        best = None
        ball_floor = INF
        for i in range(l, n):
            for j in range(l, n):
                e = S[i][j]
                if e.has_digits:
                    if best is None or e.val < best[0]:
                        best = (e.val, i, j)
                elif not e.is_exact_zero:
                    ball_floor = min(ball_floor, e.absprec)
        if best is None:
            rest = [S[i][j] for i in range(l, n) for j in range(l, n)]
            if all(e.is_exact_zero for e in rest):
                sig.extend([INF] * (n - l))
                break
            raise SingularToPrecision(
                f"elementary divisor {l} unresolved: remaining entries "
                "indistinguishable from zero"
            )
        if best[0] > ball_floor:
            raise SingularToPrecision(
                f"elementary divisor {l} unresolved: a ball O(p^{ball_floor}) "
                f"could hide a value below the best pivot valuation {best[0]}"
            )
        v, i0, j0 = best
        if i0 != l:
            S[l], S[i0] = S[i0], S[l]
            for r in range(n):
                Pl[r][l], Pl[r][i0] = Pl[r][i0], Pl[r][l]
            Plinv[l], Plinv[i0] = Plinv[i0], Plinv[l]
        if j0 != l:
            for r in range(n):
                S[r][l], S[r][j0] = S[r][j0], S[r][l]
            Qr[l], Qr[j0] = Qr[j0], Qr[l]
            for r in range(n):
                Qrinv[r][l], Qrinv[r][j0] = Qrinv[r][j0], Qrinv[r][l]
        # normalize the pivot row by the pivot's unit part
        unit = S[l][l].shift(-v)
        winv = unit.inv()
        S[l] = [e * winv for e in S[l]]
        for r in range(n):
            Pl[r][l] = Pl[r][l] * unit
        Plinv[l] = [e * winv for e in Plinv[l]]
        # clear the column; Pl picks up col_l += m * col_i
        for i in range(l + 1, n):
            e = S[i][l]
            if e.is_exact_zero:
                continue
            m = e.shift(-v)
            S[i] = [a - m * b for a, b in zip(S[i], S[l])]
            for r in range(n):
                Pl[r][l] = Pl[r][l] + m * Pl[r][i]
            Plinv[i] = [a - m * b for a, b in zip(Plinv[i], Plinv[l])]
        # clear the row; Qr picks up row_l += m * row_j
        for j in range(l + 1, n):
            e = S[l][j]
            if e.is_exact_zero:
                continue
            m = e.shift(-v)
            for r in range(n):
                S[r][j] = S[r][j] - m * S[r][l]
            Qr[l] = [a + m * b for a, b in zip(Qr[l], Qr[j])]
            for r in range(n):
                Qrinv[r][j] = Qrinv[r][j] - m * Qrinv[r][l]
        sig.append(v)
    zero, = (ctx.zero(),)
    delta_entries = [
        [
            (ctx.exact(1, shift=sig[i]) if sig[i] is not INF else zero)
            if i == j
            else zero
            for j in range(n)
        ]
        for i in range(n)
    ]
    return SNFDecomp(
        Pl=PMatrix(ctx, Pl),
        Qr=PMatrix(ctx, Qr),
        Pl_inv=PMatrix(ctx, Plinv),
        Qr_inv=PMatrix(ctx, Qrinv),
        Delta=PMatrix(ctx, delta_entries),
        sigma_vals=tuple(sig),
    )


def inverse_via_snf(M: PMatrix) -> PMatrix:
    """M^{-1} = Qr^{-1} Delta^{-1} Pl^{-1}; needs flat precision m > 2 cond(M).

    Every entry of the result carries absolute precision >= m - 2 cond(M),
    and that bound is attained on diag(1, p^c)-type inputs.
    """
    if not M.prec.is_flat:
        raise ValueError("inverse_via_snf requires a flat precision lattice")
    m = M.prec.flat
    dec = snf(M)
    if dec.cond is INF:
        raise SingularToPrecision("matrix has a zero elementary divisor")
    if m <= 2 * dec.cond:
        raise InsufficientPrecision(
            f"flat precision {m} <= 2*cond = {2 * dec.cond}"
        )
    ctx = M.ctx
    n = M.n
    dinv = [
        [
            ctx.exact(1, shift=-dec.sigma_vals[i]) if i == j else ctx.zero()
            for j in range(n)
        ]
        for i in range(n)
    ]
    out = mat_mul(mat_mul(dec.Qr_inv, PMatrix(ctx, dinv)), dec.Pl_inv)
    return out


# ---------------------------------------------------------------------- #
# Algorithm 2: adjugate of X - H, division-free


_smoke_done = False


def adjugate_hessenberg(H: PMatrix):
    """Adjugate of X - H and the characteristic polynomial of H.

    H must be integral approximate Hessenberg.  Works in 1 - X*H over
    Z_p[[X]]/X^(n+1): one full elimination pass right of the diagonal
    (column operations), then the n-1 subdiagonal eliminations (row
    operations); every pivot has constant term exactly 1, so no division by
    a non-unit of Z_p ever happens.  Returns (C, chi) with
    (X - H) * C = chi * I at working precision and chi monic of degree n.
    """
    global _smoke_done
    if not _smoke_done:
        _smoke_done = True
        _smoke_check()
    return _adjugate_hessenberg_raw(H)


def _adjugate_hessenberg_raw(H: PMatrix):
    ctx = H.ctx
    n = H.n
    if not H.is_integral():
        raise NegativeValuation("adjugate_hessenberg requires an integral matrix")
    if n == 0:
        raise ValueError("empty matrix")
    one = ctx.one()
    zero = ctx.zero()

    def entry_series(i, j):
        head = one if i == j else zero
        return TruncSeries(ctx, n, [head, -H.entries[i][j]])

    U = [[entry_series(i, j) for j in range(n)] for i in range(n)]
    Y = [
        [TruncSeries(ctx, n, [one if i == j else zero]) for j in range(n)]
        for i in range(n)
    ]
    # pass 1: clear U[i][j], j > i, with column operations
    for i in range(n - 1):
        pivinv = series_inv(U[i][i])
        for j in range(i + 1, n):
            f = U[i][j] * pivinv
            if f.is_structurally_zero:
                continue
            for r in range(n):
                U[r][j] = U[r][j] - f * U[r][i]
                Y[r][j] = Y[r][j] - f * Y[r][i]
    # pass 2: clear the subdiagonal with row operations; remember the shears
    g: list[TruncSeries | None] = [None] * (n - 1)
    for i in range(n - 1):
        gi = U[i + 1][i] * series_inv(U[i][i])
        g[i] = gi
        if not gi.is_structurally_zero:
            for c in range(n):
                U[i + 1][c] = U[i + 1][c] - gi * U[i][c]
    # determinant series and rescale of the accumulated right transforms
    psi = TruncSeries.one(ctx, n)
    for i in range(n):
        psi = psi * U[i][i]
    for i in range(n):
        di = series_inv(U[i][i])
        for r in range(n):
            Y[r][i] = Y[r][i] * di
    # V = psi * Y * Z where Z is the product of the pass-2 shears
    W = [[psi * Y[r][c] for c in range(n)] for r in range(n)]
    for i in range(n - 2, -1, -1):
        gi = g[i]
        if gi is None or gi.is_structurally_zero:
            continue
        for r in range(n):
            W[r][i] = W[r][i] - gi * W[r][i + 1]
    C = tuple(
        tuple(reciprocal(W[r][c].to_poly(n - 1), n - 1) for c in range(n))
        for r in range(n)
    )
    chi = reciprocal(psi.to_poly(n), n)
    return C, chi


def _smoke_check():
    """Orientation self-check of the transform bookkeeping on a 3x3 case."""
    ctx = PadicCtx(5, 12)
    H = PMatrix.from_ints(
        ctx, [[1, 2, 3], [4, 0, 1], [0, 2, 1]], PrecisionSpec(flat=12)
    )
    C, chi = _adjugate_hessenberg_raw(H)
    lhs = poly_mat_mul(x_minus_m(H), C)
    for i in range(3):
        for j in range(3):
            want = chi if i == j else PPoly.zero(ctx)
            assert lhs[i][j].agrees_with(want), "adjugate identity violated"


# ---------------------------------------------------------------------- #
# Algorithm 3: adjugate of X - M modulo chi, randomized rank-one pipeline


def adjugate_factored(M: PMatrix, rng: Random, retries: int = 16):
    """com(X - M) reduced mod chi_M, for M integral with simple spectrum.

    Hessenberg + division-free adjugate, then random row/column mixing to
    make the (1,1) entry invertible mod chi, a rank-one outer product, and
    conjugation back.  Retries fresh randomness up to `retries` times when
    the gcd test fails; raises DiscriminantZero when chi is not squarefree
    at working precision.
    """
    ctx = M.ctx
    n = M.n
    hf = hessenberg(M)
    A, chi = adjugate_hessenberg(hf.H)
    dchi = poly_rem(derivative(chi), chi)
    _, squarefree = xgcd_mod(dchi, chi)
    if not squarefree:
        raise DiscriminantZero("chi has a repeated factor at working precision")
    w = max(
        (e.relprec for r in M.entries for e in r if not e.exact),
        default=ctx.default_prec,
    )
    pw = ctx.ppow(max(w, 1))
    for _ in range(retries):
        mu = [rng.randrange(pw) for _ in range(n - 1)]
        nu = [rng.randrange(pw) for _ in range(n - 1)]
        T = _row_mixer(ctx, n, mu, +1)
        Tinv = _row_mixer(ctx, n, mu, -1)
        S = _col_mixer(ctx, n, nu, +1)
        Sinv = _col_mixer(ctx, n, nu, -1)
        B = scalar_conj_polymat(T, A, Tinv)
        C = scalar_conj_polymat(Sinv, B, S)
        c11 = poly_rem(C[0][0], chi)
        F, ok = xgcd_mod(c11, chi)
        if not ok:
            continue
        ucol = [C[i][0] for i in range(n)]
        vrow = [poly_rem(F * C[0][j], chi) for j in range(n)]
        # left chain: P_paper T^{-1} S u ; right chain: v S^{-1} T P_paper^{-1}
        left = scalar_mat_polyvec(hf.P_inv, scalar_mat_polyvec(Tinv, scalar_mat_polyvec(S, ucol)))
        right = polyvec_scalar_mat(polyvec_scalar_mat(polyvec_scalar_mat(vrow, Sinv), T), hf.P)
        return tuple(
            tuple(poly_rem(left[i] * right[j], chi) for j in range(n))
            for i in range(n)
        )
    raise RandomizationExhausted(f"gcd test failed {retries} times")


def _row_mixer(ctx, n, mu, sign):
    """I + sign * sum_i mu[i-1] E_{0,i} (exact)."""
    rows = [[ctx.one() if i == j else ctx.zero() for j in range(n)] for i in range(n)]
    for i in range(1, n):
        rows[0][i] = ctx.exact(sign * mu[i - 1])
    return PMatrix(ctx, rows)


def _col_mixer(ctx, n, nu, sign):
    """I + sign * sum_j nu[j-1] E_{j,0} (exact)."""
    rows = [[ctx.one() if i == j else ctx.zero() for j in range(n)] for i in range(n)]
    for j in range(1, n):
        rows[j][0] = ctx.exact(sign * nu[j - 1])
    return PMatrix(ctx, rows)


# ---------------------------------------------------------------------- #
# oracles: slow, independent, exact on the stored representatives


def _exact_poly_matrix(M: PMatrix):
    ctx = M.ctx
    out = []
    for i in range(M.n):
        row = []
        for j in range(M.n):
            c = ctx.exact(M.entries[i][j].center_fraction())
            if i == j:
                row.append(PPoly(ctx, [-c, ctx.one()]))
            else:
                row.append(PPoly(ctx, [-c]))
        out.append(row)
    return out


def _poly_det(rows) -> PPoly:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    ctx = rows[0][0].ctx
    acc = PPoly.zero(ctx)
    for j in range(n):
        c = rows[0][j]
        if c.is_zero:
            continue
        minor = [[rows[i][k] for k in range(n) if k != j] for i in range(1, n)]
        term = c * _poly_det(minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def _trunc_poly(P: PPoly, absexp) -> PPoly:
    if absexp is INF:
        return P
    return P.map_coeffs(lambda c: c.truncate_to(absexp))


def oracle_charpoly(M: PMatrix, truncate: bool = True) -> PPoly:
    """det(X - M) by exact cofactor expansion on the stored representatives.

    Truncates coefficientwise at the minimum lattice exponent unless told
    otherwise.  For test sizes only (n <= 6 or so).
    """
    chi = _poly_det(_exact_poly_matrix(M))
    return _trunc_poly(chi, M.prec.min_exponent()) if truncate else chi


def oracle_adjugate(M: PMatrix, truncate: bool = True):
    """com(X - M) by exact cofactor expansion (transpose of cofactors)."""
    X = _exact_poly_matrix(M)
    n = M.n
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            if n == 1:
                row.append(PPoly.from_ints(M.ctx, [1]))
                continue
            minor = [
                [X[r][c] for c in range(n) if c != i] for r in range(n) if r != j
            ]
            d = _poly_det(minor)
            if (i + j) % 2 == 1:
                d = -d
            row.append(_trunc_poly(d, M.prec.min_exponent()) if truncate else d)
        out.append(row)
    return tuple(tuple(r) for r in out)


def berkowitz_charpoly(M: PMatrix, truncate: bool = False) -> PPoly:
    """Characteristic polynomial by the division-free vector iteration.

    Works uniformly over exact, capped and fixed-window entries since it
    only adds and multiplies.  The leading coefficient stays exactly 1 and
    the X^(n-1) coefficient is assembled purely from the diagonal.
    """
    ctx = M.ctx
    n = M.n
    a = M.entries
    zero = ctx.zero()
    chi = [-a[0][0], ctx.one()]
    for k in range(1, n):
        corner = a[k][k]
        R = a[k][:k]
        w = [a[r][k] for r in range(k)]
        ts = []
        for j in range(k):
            acc = zero
            for x, y in zip(R, w):
                if x.is_exact_zero or y.is_exact_zero:
                    continue
                acc = acc + x * y
            ts.append(acc)
            if j < k - 1:
                w = [
                    _dot(a[r][:k], w, zero)
                    for r in range(k)
                ]
        new = []
        for idx in range(k + 2):
            acc = chi[idx - 1] if 1 <= idx <= len(chi) else zero
            if idx < len(chi) and not corner.is_exact_zero:
                acc = acc - corner * chi[idx]
            for j, t in enumerate(ts):
                src = idx + j + 1
                if src < len(chi) and not t.is_exact_zero:
                    acc = acc - t * chi[src]
            new.append(acc)
        chi = new
    out = PPoly(ctx, chi)
    return _trunc_poly(out, M.prec.min_exponent()) if truncate else out


def _dot(xs, ys, zero):
    acc = zero
    for x, y in zip(xs, ys):
        if x.is_exact_zero or y.is_exact_zero:
            continue
        acc = acc + x * y
    return acc


def berkowitz_charpoly_int(rows: list[list[int]]) -> list[int]:
    """Exact integer Berkowitz; fast oracle path for Monte-Carlo loops."""
    n = len(rows)
    chi = [-rows[0][0], 1]
    for k in range(1, n):
        corner = rows[k][k]
        R = rows[k][:k]
        w = [rows[r][k] for r in range(k)]
        ts = []
        for j in range(k):
            ts.append(sum(x * y for x, y in zip(R, w)))
            if j < k - 1:
                w = [sum(rows[r][c] * w[c] for c in range(k)) for r in range(k)]
        new = []
        for idx in range(k + 2):
            acc = chi[idx - 1] if 1 <= idx <= len(chi) else 0
            if idx < len(chi):
                acc -= corner * chi[idx]
            for j, t in enumerate(ts):
                src = idx + j + 1
                if src < len(chi):
                    acc -= t * chi[src]
            new.append(acc)
        chi = new
    return chi


def companion_matrix(chi: PPoly) -> PMatrix:
    """Companion matrix (superdiagonal ones, negated coefficients last row)."""
    ctx = chi.ctx
    n = chi.degree
    rows = []
    for i in range(n - 1):
        rows.append([ctx.one() if j == i + 1 else ctx.zero() for j in range(n)])
    rows.append([-chi.coefficient(j) for j in range(n)])
    return PMatrix(ctx, rows)
