"""Polynomials and truncated power series over the p-adic scalars.

``PPoly`` is a dense polynomial, lowest degree first.  Trailing *exact*
zeros are trimmed; coefficients that are balls ``O(p^k)`` are structural
(they carry precision information) and are kept.  ``TruncSeries`` is a
fixed-length coefficient window: all arithmetic happens modulo X^(order+1).

Division only ever happens through ``series_inv`` (unit constant term) and
``xgcd_mod`` (field inversions of leading coefficients, with naive precision
propagation).
"""

from __future__ import annotations

from .errors import (
    DegreeExceedsBound,
    NonMonicModulus,
    NonUnitConstantTerm,
    PrecisionLossInGcd,
)
from .padic import INF, PadicCtx, PadicElem


class PPoly:
    """Dense polynomial with PadicElem coefficients, lowest degree first."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: PadicCtx, coeffs):
        cs = list(coeffs)
        while cs and cs[-1].is_exact_zero:
            cs.pop()
        self.ctx = ctx
        self.coeffs = tuple(cs)

    @classmethod
    def from_ints(cls, ctx: PadicCtx, ints) -> "PPoly":
        return cls(ctx, [ctx.exact(c) for c in ints])

    @classmethod
    def zero(cls, ctx: PadicCtx) -> "PPoly":
        return cls(ctx, [])

    @classmethod
    def x_power(cls, ctx: PadicCtx, k: int) -> "PPoly":
        return cls(ctx, [ctx.zero()] * k + [ctx.one()])

    @property
    def degree(self) -> int:
        """Index of the last structurally nonzero coefficient; -1 for zero."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, k: int) -> PadicElem:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return self.ctx.zero()

    @property
    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == self.ctx.one()

    def map_coeffs(self, f) -> "PPoly":
        return PPoly(self.ctx, [f(c) for c in self.coeffs])

    # ------------------------------------------------------------------ #

    def _coerce(self, other):
        if isinstance(other, PPoly):
            return other
        if isinstance(other, (int, PadicElem)):
            e = other if isinstance(other, PadicElem) else self.ctx.exact(other)
            return PPoly(self.ctx, [e])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = max(len(self.coeffs), len(other.coeffs))
        return PPoly(self.ctx, [self.coefficient(k) + other.coefficient(k) for k in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return PPoly(self.ctx, [-c for c in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PadicElem):
            return PPoly(self.ctx, [c * other for c in self.coeffs])
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return poly_mul(self, other)

    __rmul__ = __mul__

    def scale_x(self, k: int) -> "PPoly":
        """Multiply by X^k."""
        if self.is_zero:
            return self
        return PPoly(self.ctx, [self.ctx.zero()] * k + list(self.coeffs))

    def __call__(self, x: PadicElem) -> PadicElem:
        return eval_at(self, x)

    def __eq__(self, other):
        if not isinstance(other, PPoly):
            return NotImplemented
        return self.ctx == other.ctx and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.ctx.p, self.coeffs))

    def agrees_with(self, other: "PPoly") -> bool:
        """Coefficientwise digit-set agreement at the common precision."""
        n = max(len(self.coeffs), len(other.coeffs))
        return all(self.coefficient(k).agrees_with(other.coefficient(k)) for k in range(n))

    def congruent_mod(self, other: "PPoly", absprec: int) -> bool:
        n = max(len(self.coeffs), len(other.coeffs))
        return all(
            self.coefficient(k).congruent_mod(other.coefficient(k), absprec)
            for k in range(n)
        )

    def __str__(self):
        if self.is_zero:
            return "0"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c.is_exact_zero:
                continue
            lit = str(c)
            safe = f"({lit})" if (" " in lit or "+" in lit) else lit
            if k == 0:
                terms.append(safe)
            else:
                xk = "X" if k == 1 else f"X^{k}"
                terms.append(xk if lit == "1" else f"{safe}*{xk}")
        return " + ".join(terms)

    def __repr__(self):
        return f"<PPoly {self} : Q_{self.ctx.p}>"

    def to_literals(self) -> list[str]:
        return [str(c) for c in self.coeffs]

    @classmethod
    def from_literals(cls, ctx: PadicCtx, lits) -> "PPoly":
        return cls(ctx, [ctx.parse(s) for s in lits])


def parse_poly(ctx: PadicCtx, text: str) -> "PPoly":
    """Parse the `c0 + (c1)*X + ... + (ck)*X^k` text form."""
    s = text.strip()
    if s == "0":
        return PPoly.zero(ctx)
    coeffs: dict[int, PadicElem] = {}
    for term in _split_terms(s):
        lit, k = _split_power(term)
        coeffs[k] = ctx.parse(lit)
    n = max(coeffs) + 1
    return PPoly(ctx, [coeffs.get(k, ctx.zero()) for k in range(n)])


def _split_terms(s: str) -> list[str]:
    out, depth, cur = [], 0, []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and s.startswith(" + ", i):
            out.append("".join(cur))
            cur = []
            i += 3
            continue
        cur.append(ch)
        i += 1
    out.append("".join(cur))
    return out


def _split_power(term: str) -> tuple[str, int]:
    term = term.strip()
    if term == "X":
        return "1", 1
    if term.startswith("X^"):
        return "1", int(term[2:])
    if "*X" in term:
        lit, _, tail = term.rpartition("*X")
        k = int(tail[1:]) if tail.startswith("^") else 1
    else:
        lit, k = term, 0
    lit = lit.strip()
    if lit.startswith("(") and lit.endswith(")"):
        lit = lit[1:-1]
    return lit, k


# ---------------------------------------------------------------------- #
# operations


def poly_mul(a: PPoly, b: PPoly) -> PPoly:
    """Exact convolution with capped precision."""
    if a.is_zero or b.is_zero:
        return PPoly.zero(a.ctx)
    ctx = a.ctx
    out = [ctx.zero()] * (len(a.coeffs) + len(b.coeffs) - 1)
    for i, ca in enumerate(a.coeffs):
        if ca.is_exact_zero:
            continue
        for j, cb in enumerate(b.coeffs):
            if cb.is_exact_zero:
                continue
            out[i + j] = out[i + j] + ca * cb
    return PPoly(ctx, out)


def poly_divmod(a: PPoly, m: PPoly) -> tuple[PPoly, PPoly]:
    """Schoolbook division by a monic modulus; no scalar division occurs."""
    if not m.is_monic:
        raise NonMonicModulus("modulus must be monic with exact leading 1")
    ctx = a.ctx
    dm = m.degree
    rem = list(a.coeffs)
    quo = [ctx.zero()] * max(0, len(rem) - dm)
    while len(rem) > dm:
        q = rem[-1]
        k = len(rem) - 1 - dm
        if not q.is_exact_zero:
            quo[k] = q
            for i in range(dm):
                rem[k + i] = rem[k + i] - q * m.coeffs[i]
        # the top coefficient cancels exactly by construction
        rem.pop()
    return PPoly(ctx, quo), PPoly(ctx, rem)


def poly_rem(a: PPoly, m: PPoly) -> PPoly:
    return poly_divmod(a, m)[1]


def reciprocal(P: PPoly, d: int) -> PPoly:
    """X^d P(1/X): coefficient i of the output is coefficient d-i of P."""
    if P.degree > d:
        raise DegreeExceedsBound(f"deg {P.degree} exceeds bound {d}")
    return PPoly(P.ctx, [P.coefficient(d - i) for i in range(d + 1)])


def eval_at(P: PPoly, x: PadicElem) -> PadicElem:
    """Horner evaluation."""
    acc = P.ctx.zero()
    for c in reversed(P.coeffs):
        acc = acc * x + c
    return acc


def derivative(P: PPoly) -> PPoly:
    ctx = P.ctx
    return PPoly(ctx, [ctx.exact(k) * c for k, c in enumerate(P.coeffs) if k >= 1])


def xgcd_mod(f: PPoly, m: PPoly) -> tuple[PPoly, bool]:
    """Inverse of f modulo a monic m, when gcd(f, m) = 1 at working precision.

    Returns (g, True) with f*g = 1 mod m, or (gcd-like remainder ignored,
    False) when a nontrivial common factor shows up.  Precision propagation
    through the Euclidean divisions is naive; feed generously precise inputs.
    Raises PrecisionLossInGcd when a remainder's degree cannot be decided
    because its leading coefficients are indistinguishable from zero but not
    known to vanish.
    """
    ctx = f.ctx
    if not m.is_monic:
        raise NonMonicModulus("modulus must be monic with exact leading 1")
    r0, r1 = m, poly_rem(f, m)
    s0, s1 = PPoly.zero(ctx), PPoly.from_ints(ctx, [1])
    while True:
        if r1.is_zero or all(not c.has_digits for c in r1.coeffs):
            # the previous remainder is a nontrivial common factor
            return PPoly.zero(ctx), False
        lead = r1.coeffs[-1]
        if not lead.has_digits:
            raise PrecisionLossInGcd("leading coefficient indistinguishable from zero")
        if r1.degree == 0:
            g = s1 * lead.inv()
            return poly_rem(g, m), True
        q, r2 = _field_divmod(r0, r1)
        r0, r1 = r1, r2
        s0, s1 = s1, s0 - q * s1


def _field_divmod(a: PPoly, b: PPoly) -> tuple[PPoly, PPoly]:
    """Division with remainder over Q_p; divides by the leading coefficient."""
    ctx = a.ctx
    lead_inv = b.coeffs[-1].inv()
    db = b.degree
    rem = list(a.coeffs)
    quo = [ctx.zero()] * max(0, len(rem) - db)
    while len(rem) - 1 >= db:
        top = rem[-1]
        k = len(rem) - 1 - db
        if not top.is_exact_zero:
            q = top * lead_inv
            quo[k] = q
            for i in range(db):
                rem[k + i] = rem[k + i] - q * b.coeffs[i]
        rem.pop()
    return PPoly(ctx, quo), PPoly(ctx, rem)


class TruncSeries:
    """Truncated power series: fixed window of order+1 coefficients."""

    __slots__ = ("ctx", "order", "coeffs")

    def __init__(self, ctx: PadicCtx, order: int, coeffs):
        cs = list(coeffs)[: order + 1]
        cs += [ctx.zero()] * (order + 1 - len(cs))
        self.ctx = ctx
        self.order = order
        self.coeffs = tuple(cs)

    @classmethod
    def one(cls, ctx: PadicCtx, order: int) -> "TruncSeries":
        return cls(ctx, order, [ctx.one()])

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        return TruncSeries(
            self.ctx, self.order, [a + b for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __neg__(self):
        return TruncSeries(self.ctx, self.order, [-a for a in self.coeffs])

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        return TruncSeries(
            self.ctx, self.order, [a - b for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __mul__(self, other):
        if isinstance(other, PadicElem):
            return TruncSeries(self.ctx, self.order, [c * other for c in self.coeffs])
        ctx = self.ctx
        out = [ctx.zero()] * (self.order + 1)
        for i, ca in enumerate(self.coeffs):
            if ca.is_exact_zero:
                continue
            for j in range(self.order + 1 - i):
                cb = other.coeffs[j]
                if cb.is_exact_zero:
                    continue
                out[i + j] = out[i + j] + ca * cb
        return TruncSeries(ctx, self.order, out)

    __rmul__ = __mul__

    @property
    def is_structurally_zero(self) -> bool:
        return all(c.is_exact_zero for c in self.coeffs)

    def inv(self) -> "TruncSeries":
        return series_inv(self)

    def to_poly(self, degree_bound: int | None = None) -> PPoly:
        d = self.order if degree_bound is None else degree_bound
        return PPoly(self.ctx, self.coeffs[: d + 1])

    def __eq__(self, other):
        return (
            isinstance(other, TruncSeries)
            and self.order == other.order
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.order, self.coeffs))

    def __repr__(self):
        return f"<TruncSeries O(X^{self.order + 1}) {self.to_poly()}>"


def series_inv(u: TruncSeries) -> TruncSeries:
    """Inverse modulo X^(order+1); the constant term must be a unit of Z_p."""
    ctx = u.ctx
    c0 = u.coeffs[0]
    if c0.is_exact_zero or (not c0.exact and c0.relprec == 0):
        raise NonUnitConstantTerm("constant term has no known digits")
    if c0.val != 0:
        raise NonUnitConstantTerm("constant term is not a unit of Z_p")
    inv0 = c0.inv()
    out = [inv0] + [ctx.zero()] * u.order
    for k in range(1, u.order + 1):
        acc = ctx.zero()
        for i in range(1, k + 1):
            ui = u.coeffs[i]
            if ui.is_exact_zero:
                continue
            acc = acc + ui * out[k - i]
        out[k] = -(inv0 * acc)
    return TruncSeries(ctx, u.order, out)
