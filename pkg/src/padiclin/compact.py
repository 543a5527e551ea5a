"""Compact O(n^2) encoding of the adjugate of X - M.

When M has a cyclic vector, com(X - M) factors modulo chi_M as
alpha * (P V^t) (V Q^t) with V = (1, X, ..., X^{n-1}), M = P C P^{-1} and
M^t = Q C Q^{-1} for the companion matrix C of chi_M.  The quadruple
(alpha, P, Q, chi) is built from one Krylov matrix of a random vector, one
structurally invertible Krylov matrix of the companion, and the relation
Q = P_inv^t R; alpha is read off the characteristic polynomial with no
further computation.

This module divides freely (matrix inversion over Q_p), so the precision
of its outputs is observed, not certified; tests compare only digits both
sides carry.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random

from .errors import NotCyclic, SingularToPrecision
from .matops import (
    PMatrix,
    companion_matrix,
    exact_inverse,
    gauss_inverse,
    mat_mul,
    mat_vec,
)
from .padic import INF, PadicCtx, PadicElem
from .polyring import PPoly, poly_rem


@dataclass(frozen=True)
class CompactAdjugate:
    """Quadruple (alpha, P, Q, chi) with com(X-M) = alpha P V^t V Q^t mod chi."""

    alpha: PPoly
    P: PMatrix
    Q: PMatrix
    chi: PPoly

    @property
    def n(self) -> int:
        return self.chi.degree

    def to_json(self) -> dict:
        return {
            "p": self.chi.ctx.p,
            "alpha": self.alpha.to_literals(),
            "chi": self.chi.to_literals(),
            "P": [[str(e) for e in row] for row in self.P.entries],
            "Q": [[str(e) for e in row] for row in self.Q.entries],
        }

    @classmethod
    def from_json(cls, d: dict, ctx: PadicCtx | None = None) -> "CompactAdjugate":
        if ctx is None:
            ctx = PadicCtx(d["p"], default_prec=20)
        elif ctx.p != d["p"]:
            raise ValueError("context prime differs from file prime")
        P = PMatrix(ctx, [[ctx.parse(s) for s in row] for row in d["P"]])
        Q = PMatrix(ctx, [[ctx.parse(s) for s in row] for row in d["Q"]])
        return cls(
            alpha=PPoly.from_literals(ctx, d["alpha"]),
            P=P,
            Q=Q,
            chi=PPoly.from_literals(ctx, d["chi"]),
        )


def krylov_matrix(M: PMatrix, c: list[PadicElem]) -> PMatrix:
    """Matrix whose rows are c, Mc, ..., M^{n-1}c (doubling on M's powers)."""
    n = M.n
    rows = [list(c)]
    power = M
    while len(rows) < n:
        block = []
        for r in rows:
            if len(rows) + len(block) >= n:
                break
            block.append(mat_vec(power, r))
        rows.extend(block)
        if len(rows) < n:
            power = mat_mul(power, power)
    return PMatrix(M.ctx, rows[:n])


def compact_form(M: PMatrix, rng: Random, retries: int = 8) -> CompactAdjugate:
    """Build the quadruple for a matrix with a cyclic vector.

    The Krylov iteration runs on M^t so that the change of basis lands on
    M = P C P^{-1} (and Q = P_inv^t R then gives M^t = Q C Q^{-1}).
    Retries a fresh random vector when the Krylov matrix is singular at
    working precision; raises NotCyclic after `retries` failures.
    """
    ctx = M.ctx
    n = M.n
    w = max(
        (e.relprec for row in M.entries for e in row if not e.exact),
        default=ctx.default_prec,
    )
    pw = ctx.ppow(max(w, 1))
    Mt = M.transpose()
    for _ in range(retries):
        c = [ctx.exact(rng.randrange(pw)) for _ in range(n)]
        if all(e.is_exact_zero for e in c):
            continue
        K = krylov_matrix(Mt, c)
        try:
            P = gauss_inverse(K)
        except SingularToPrecision:
            continue
        # chi from the linear relation among c_0..c_n in the Krylov basis:
        # solve  sum_i a_i c_i = -c_n,  c_n = M^t c_{n-1}
        cn = mat_vec(Mt, list(K.entries[n - 1]))
        Pt = P.transpose()
        a = mat_vec(Pt, cn)
        chi = PPoly(ctx, [-x for x in a] + [ctx.one()])
        comp = companion_matrix(chi)
        e1 = [ctx.one()] + [ctx.zero()] * (n - 1)
        KR = krylov_matrix(comp, e1)
        R = gauss_inverse(KR)  # singular only when a_0 has no digits
        Q = mat_mul(K.transpose(), R)
        alpha = PPoly(
            ctx, [chi.coefficient(k) for k in range(1, n)] + [ctx.one()]
        )
        return CompactAdjugate(alpha=alpha, P=P, Q=Q, chi=chi)
    raise NotCyclic(f"no cyclic vector found in {retries} attempts")


def expand_compact(ca: CompactAdjugate):
    """Materialize the n x n polynomial matrix, entries reduced mod chi."""
    ctx = ca.chi.ctx
    n = ca.n
    urows = [PPoly(ctx, list(ca.P.entries[i])) for i in range(n)]
    wrows = [PPoly(ctx, list(ca.Q.entries[j])) for j in range(n)]
    pre = [poly_rem(ca.alpha * u, ca.chi) for u in urows]
    return tuple(
        tuple(poly_rem(pre[i] * wrows[j], ca.chi) for j in range(n))
        for i in range(n)
    )


def conjugate_compact(ca: CompactAdjugate, U: PMatrix) -> CompactAdjugate:
    """Quadruple for U M U^{-1}: (alpha, U P, (U^t)^{-1} Q, chi)."""
    for row in U.entries:
        for e in row:
            if not e.exact:
                raise ValueError("conjugation matrix must be exact")
    finite = [
        e.absprec
        for row in ca.Q.entries
        for e in row
        if e.absprec is not INF
    ]
    qmax = max(finite, default=ca.chi.ctx.default_prec)
    qvmin = min(
        (e.val for row in ca.Q.entries for e in row if e.has_digits), default=0
    )
    cap = qmax + max(0, -qvmin) + 4
    ut_inv = exact_inverse(U.transpose(), cap)
    return CompactAdjugate(
        alpha=ca.alpha,
        P=mat_mul(U, ca.P),
        Q=mat_mul(ut_inv, ca.Q),
        chi=ca.chi,
    )
