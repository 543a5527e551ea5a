"""Optimal precision of characteristic polynomials and eigenvalues.

The optimal absolute precision of the k-th coefficient of chi_M, for input
lattice exponents N_{i,j}, is

    N'_k = min over (i,j) of  N_{j,i} + val(coeff_k(C_{i,j}))

with C = com(X - M); note the transposed lattice indices, which come from
the trace pairing.  For a flat lattice the base change back from Hessenberg
form can be skipped and N'_k = N + min val(coeff_k(C^H_{i,j})).

Coefficients of C that are indistinguishable from zero contribute +inf to
the minimum; when every contribution is +inf for some k the reported value
is capped at the lift bound and flagged, since approximate data cannot
certify an unbounded gain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .compact import CompactAdjugate
from .errors import (
    InsufficientPrecision,
    NotSimpleEigenvalue,
    NotSimpleRoot,
    SingularToPrecision,
)
from .matops import (
    PMatrix,
    adjugate_hessenberg,
    berkowitz_charpoly,
    hessenberg,
    mat_vec,
    scalar_conj_polymat,
    snf,
)
from .padic import INF, PadicCtx, PadicElem, reduce_mod_p
from .polyring import PPoly, derivative, eval_at
from .residue import is_cyclic_fp

_INF_JSON = "inf"


def _enc(v):
    return _INF_JSON if v is INF else v


@dataclass(frozen=True)
class PrecisionReport:
    """Per-coefficient optimal precisions plus the diagnostics behind them."""

    nprime: tuple
    gain: bool
    sigma_vals: tuple
    cyclic_mod_p: bool
    validity_ok: bool
    validity_detail: str = ""
    capped: tuple = ()
    lattice_floor: int | float = 0

    def to_json(self) -> dict:
        return {
            "nprime": [_enc(v) for v in self.nprime],
            "gain": self.gain,
            "sigma_vals": [_enc(v) for v in self.sigma_vals],
            "cyclic_mod_p": self.cyclic_mod_p,
            "validity_ok": self.validity_ok,
            "validity_detail": self.validity_detail,
            "capped": list(self.capped),
            "lattice_floor": _enc(self.lattice_floor),
        }


@dataclass(frozen=True)
class EigenPrecision:
    """Optimal precision of one simple eigenvalue, with the term breakdown."""

    lam: PadicElem
    nprime: int | float
    val_alpha: int | float
    val_chi_prime: int
    argmin: tuple = field(default=())

    def to_json(self) -> dict:
        return {
            "lambda": str(self.lam),
            "nprime": _enc(self.nprime),
            "val_alpha": _enc(self.val_alpha),
            "val_chi_prime": self.val_chi_prime,
            "argmin": list(self.argmin),
        }


# ---------------------------------------------------------------------- #


def cyclic_mod_p(M: PMatrix) -> bool:
    """True iff the reduction of M mod p has a cyclic vector.

    Checked as charpoly == minpoly over F_p.  Requires an integral matrix
    with at least one known digit per entry.
    """
    A = [[reduce_mod_p(e) for e in row] for row in M.entries]
    return is_cyclic_fp(A, M.ctx.p)


@dataclass(frozen=True)
class ValidityReport:
    ok: bool
    s: int
    sigma_vals: tuple
    lattice_min: int | float
    threshold: int

    @property
    def detail(self) -> str:
        return (
            f"min lattice exponent {self.lattice_min} vs threshold "
            f"{self.threshold} (= 2*{self.s}+1)"
        )


def validity_check(M: PMatrix) -> ValidityReport:
    """Conservative first-order validity: min N_{i,j} >= 2s + 1.

    s is the sum of the valuations of the first n-1 elementary divisors of
    M (computed after integral rescaling when needed).
    """
    shift = _integral_shift(M)
    dec = snf(M.shift(shift) if shift else M)
    sig = tuple(v - shift if v is not INF else INF for v in dec.sigma_vals)
    if any(v is INF for v in sig[:-1]):
        raise SingularToPrecision("zero elementary divisor below the top one")
    s = sum(sig[:-1]) if len(sig) > 1 else 0
    lattice_min = M.prec.min_exponent()
    threshold = 2 * s + 1
    return ValidityReport(
        ok=lattice_min is INF or lattice_min >= threshold,
        s=s,
        sigma_vals=sig,
        lattice_min=lattice_min,
        threshold=threshold,
    )


def _integral_shift(M: PMatrix) -> int:
    v = M.min_valuation()
    if v is INF or v >= 0:
        return 0
    return -v


def _coeff_val(c: PadicElem):
    """Valuation of a comatrix coefficient; +inf when no digits are known."""
    if not c.has_digits:
        return INF
    return c.val


def optimal_jagged_charpoly(M: PMatrix) -> PrecisionReport:
    """Optimal absolute precision of every coefficient of chi_M.

    Non-integral input is rescaled to Z_p internally; the reported
    exponents refer to the original matrix (the k-th coefficient picks up
    the inverse scaling p^{-(n-k)v}).
    """
    ctx = M.ctx
    n = M.n
    shift = _integral_shift(M)
    Ms = M.shift(shift) if shift else M

    try:
        vr = validity_check(M)
        validity_ok, validity_detail = vr.ok, vr.detail
        sigma_vals = vr.sigma_vals
        s_total = sum(v for v in vr.sigma_vals if v is not INF)
    except SingularToPrecision as e:
        validity_ok, validity_detail = False, f"validity unknown: {e}"
        sigma_vals = ()
        s_total = 0

    try:
        cyc = cyclic_mod_p(Ms)
    except InsufficientPrecision:
        cyc = False
    hf = hessenberg(Ms)
    C_H, _chi = adjugate_hessenberg(hf.H)

    finite_exps = [
        Ms.prec.exponent(i, j)
        for i in range(n)
        for j in range(n)
        if Ms.prec.exponent(i, j) is not INF
    ]
    lift_bound = (max(finite_exps) + s_total + 2) if finite_exps else INF

    nprime_scaled = []
    capped = []
    if Ms.prec.is_flat:
        N = Ms.prec.flat
        for k in range(n):
            m = min(
                (_coeff_val(C_H[i][j].coefficient(k)) for i in range(n) for j in range(n)),
                default=INF,
            )
            if m is INF:
                if N is INF:
                    nprime_scaled.append(INF)
                else:
                    nprime_scaled.append(lift_bound)
                    capped.append(k)
            else:
                nprime_scaled.append(N + m)
    else:
        C = scalar_conj_polymat(hf.P_inv, C_H, hf.P)
        for k in range(n):
            best = INF
            for i in range(n):
                for j in range(n):
                    v = _coeff_val(C[i][j].coefficient(k))
                    if v is INF:
                        continue
                    cand = Ms.prec.exponent(j, i) + v
                    if cand < best:
                        best = cand
            if best is INF:
                if lift_bound is INF:
                    nprime_scaled.append(INF)
                else:
                    nprime_scaled.append(lift_bound)
                    capped.append(k)
            else:
                nprime_scaled.append(best)

    nprime = tuple(
        v - (n - k) * shift if v is not INF else INF
        for k, v in enumerate(nprime_scaled)
    )
    floor = M.prec.min_exponent()
    gain = any(v is INF or v > floor for v in nprime) if floor is not INF else False
    return PrecisionReport(
        nprime=nprime,
        gain=gain,
        sigma_vals=sigma_vals,
        cyclic_mod_p=cyc,
        validity_ok=validity_ok,
        validity_detail=validity_detail,
        capped=tuple(capped),
        lattice_floor=floor,
    )


def charpoly_optimal(M: PMatrix) -> tuple[PPoly, PrecisionReport]:
    """chi_M at its optimal jagged precision.

    Computes the report, lifts the entries to max N'_k plus a safety margin
    (the divisor-valuation sum plus two digits), reruns the division-free
    pipeline at the lifted precision, and truncates coefficient k back to
    O(p^{N'_k}).
    """
    ctx = M.ctx
    n = M.n
    report = optimal_jagged_charpoly(M)
    if not report.validity_ok:
        raise InsufficientPrecision(
            f"input precision too low for a certified result: {report.validity_detail}"
        )
    if all(e.exact for row in M.entries for e in row):
        return berkowitz_charpoly(M), report

    shift = _integral_shift(M)
    finite = [v for v in report.nprime if v is not INF]
    margin = sum(v for v in report.sigma_vals if v is not INF) + 2
    target = (max(finite) if finite else ctx.default_prec) + margin + n * shift
    Ms = (M.shift(shift) if shift else M).map_entries(
        lambda e: e.lift_to(target), None
    )
    _, chi_s = adjugate_hessenberg(hessenberg(Ms).H)
    coeffs = []
    for k in range(n):
        c = chi_s.coefficient(k).shift(-(n - k) * shift)
        coeffs.append(c.truncate_to(report.nprime[k]))
    coeffs.append(ctx.one())
    return PPoly(ctx, coeffs), report


# ---------------------------------------------------------------------- #
# eigenvalues


def hensel_lift_eigenvalue(chi: PPoly, r0: int) -> PadicElem:
    """Newton-lift a simple residue root of chi to the precision of chi."""
    ctx = chi.ctx
    p = ctx.p
    precs = [c.absprec for c in chi.coeffs if not c.exact]
    L = int(min(precs)) if precs else ctx.default_prec
    if L < 1:
        raise InsufficientPrecision("chi carries no digits to lift against")
    f = []
    for c in chi.coeffs:
        if c.has_digits and c.val < 0:
            raise ValueError("hensel lifting expects an integral polynomial")
        f.append(c.lift_int() if (c.has_digits or c.is_exact_zero) else 0)
    fp_ = [k * f[k] for k in range(1, len(f))]
    r0 = r0 % p
    if _poly_int_eval(f, r0, p) != 0:
        raise NotSimpleRoot(f"{r0} is not a root of chi mod {p}")
    if _poly_int_eval(fp_, r0, p) == 0:
        raise NotSimpleRoot(f"{r0} is a multiple root of chi mod {p}")
    x, k = r0, 1
    while k < L:
        k = min(2 * k, L)
        mod = ctx.ppow(k)
        fx = _poly_int_eval(f, x, mod)
        dfx = _poly_int_eval(fp_, x, mod)
        x = (x - fx * pow(dfx, -1, mod)) % mod
    return ctx.approx(x, L)


def _poly_int_eval(coeffs: list[int], x: int, mod: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % mod
    return acc


def _dot_val(row, V):
    acc = None
    for a, b in zip(row, V):
        if a.is_exact_zero or b.is_exact_zero:
            continue
        t = a * b
        acc = t if acc is None else acc + t
    if acc is None or not acc.has_digits:
        return INF
    return acc.val


def eigenvalue_precision(
    M: PMatrix, ca: CompactAdjugate, lam: PadicElem
) -> EigenPrecision:
    """Optimal precision of a simple eigenvalue from the compact adjugate.

    Jagged form:  N' = val alpha(l) - val chi'(l)
                       + min_{i,j} (N_{j,i} + val(P_i V(l)^t) + val(V(l) Q_j^t)).
    Flat input uses the split minimum (the same value, rank-one structure).
    """
    n = M.n
    cp = eval_at(derivative(ca.chi), lam)
    if not cp.has_digits:
        raise NotSimpleEigenvalue("chi'(lambda) is indistinguishable from zero")
    va = eval_at(ca.alpha, lam)
    if not va.has_digits:
        raise InsufficientPrecision("alpha(lambda) carries no digits")
    V = [lam.ctx.one()]
    for _ in range(n - 1):
        V.append(V[-1] * lam)
    pvals = [_dot_val(ca.P.entries[i], V) for i in range(n)]
    qvals = [_dot_val(ca.Q.entries[j], V) for j in range(n)]
    base = va.val - cp.val
    if M.prec.is_flat:
        mi = min(range(n), key=lambda i: pvals[i])
        mj = min(range(n), key=lambda j: qvals[j])
        if pvals[mi] is INF or qvals[mj] is INF:
            raise InsufficientPrecision("rank-one factors carry no digits")
        return EigenPrecision(
            lam=lam,
            nprime=M.prec.flat + base + pvals[mi] + qvals[mj],
            val_alpha=va.val,
            val_chi_prime=cp.val,
            argmin=(mi, mj),
        )
    best, arg = INF, ()
    for i in range(n):
        if pvals[i] is INF:
            continue
        for j in range(n):
            if qvals[j] is INF:
                continue
            cand = M.prec.exponent(j, i) + pvals[i] + qvals[j]
            if cand < best:
                best, arg = cand, (i, j)
    if best is INF:
        raise InsufficientPrecision("rank-one factors carry no digits")
    return EigenPrecision(
        lam=lam,
        nprime=base + best,
        val_alpha=va.val,
        val_chi_prime=cp.val,
        argmin=arg,
    )


def eigenvalues_precision_batch(
    M: PMatrix, ca: CompactAdjugate, lams
) -> list[EigenPrecision]:
    """Batch variant sharing the P x Vandermonde products across eigenvalues."""
    n = M.n
    lams = list(lams)
    s = len(lams)
    powers = []
    for lam in lams:
        col = [lam.ctx.one()]
        for _ in range(n - 1):
            col.append(col[-1] * lam)
        powers.append(col)
    # pv[i][k] = P_i . V(lam_k)^t ; qv[j][k] = V(lam_k) . Q_j^t
    pv = [[_dot_val(ca.P.entries[i], powers[k]) for k in range(s)] for i in range(n)]
    qv = [[_dot_val(ca.Q.entries[j], powers[k]) for k in range(s)] for j in range(n)]
    out = []
    for k, lam in enumerate(lams):
        cp = eval_at(derivative(ca.chi), lam)
        if not cp.has_digits:
            raise NotSimpleEigenvalue("chi'(lambda) is indistinguishable from zero")
        va = eval_at(ca.alpha, lam)
        if not va.has_digits:
            raise InsufficientPrecision("alpha(lambda) carries no digits")
        base = va.val - cp.val
        if M.prec.is_flat:
            mi = min(range(n), key=lambda i: pv[i][k])
            mj = min(range(n), key=lambda j: qv[j][k])
            if pv[mi][k] is INF or qv[mj][k] is INF:
                raise InsufficientPrecision("rank-one factors carry no digits")
            out.append(
                EigenPrecision(
                    lam=lam,
                    nprime=M.prec.flat + base + pv[mi][k] + qv[mj][k],
                    val_alpha=va.val,
                    val_chi_prime=cp.val,
                    argmin=(mi, mj),
                )
            )
            continue
        best, arg = INF, ()
        for i in range(n):
            if pv[i][k] is INF:
                continue
            for j in range(n):
                if qv[j][k] is INF:
                    continue
                cand = M.prec.exponent(j, i) + pv[i][k] + qv[j][k]
                if cand < best:
                    best, arg = cand, (i, j)
        if best is INF:
            raise InsufficientPrecision("rank-one factors carry no digits")
        out.append(
            EigenPrecision(
                lam=lam,
                nprime=base + best,
                val_alpha=va.val,
                val_chi_prime=cp.val,
                argmin=arg,
            )
        )
    return out


def simple_residue_roots(chi: PPoly) -> list[int]:
    """Residue roots r with chi(r) = 0, chi'(r) != 0 over F_p (brute force)."""
    ctx = chi.ctx
    p = ctx.p
    f = [reduce_mod_p(c) for c in chi.coeffs]
    fp_ = [k * f[k] % p for k in range(1, len(f))]
    roots = []
    for r in range(p):
        if _poly_int_eval(f, r, p) == 0 and _poly_int_eval(fp_, r, p) != 0:
            roots.append(r)
    return roots
