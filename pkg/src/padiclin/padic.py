"""Capped-precision arithmetic over Q_p.

A value is stored in one of three shapes:

* an exact element ``p^v * m`` with ``m`` a (signed) integer prime to p.
  Exact zero is the special case ``m == 0``.  Exact elements have infinite
  absolute precision; they are what the exact change-of-basis matrices of
  the Hessenberg reduction are made of.
* an approximate element ``p^v * (m + O(p^r))`` with unit mantissa
  ``0 < m < p^r``, ``m`` prime to p.  Its absolute precision is ``v + r``.
* a ball ``O(p^v)``: a value known to be divisible by p^v with no known
  digits (``r == 0``, ``m == 0``).

Addition takes the minimum of the absolute precisions and renormalizes the
valuation when leading digits cancel; multiplication adds valuations and
takes the minimum of the relative precisions.  Those are the sharp interval
rules for this representation.

A context may instead be created with ``fp_mode=True``.  In that mode
elements keep a fixed-width digit window of ``default_prec`` digits starting
at a window base, nothing tracks precision, and digits pushed past the
window end are silently discarded.  This is the truncating floating-point
model used by the loss experiment; it is an approximation of a true
floating-point p-adic arithmetic and is labelled as such wherever it is
reported.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from random import Random

from .errors import (
    DivisionByIndistinguishableZero,
    InsufficientPrecision,
    NegativeValuation,
)

INF = math.inf

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin (exact below 3.3e24, overwhelming above)."""
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def val_of_int(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class InversionAudit:
    """Context manager recording every scalar inversion performed.

    Used by the no-division audit: Algorithm fragments that promise to divide
    only by units are run under an audit and the ``non_unit`` counter is
    asserted to stay at zero.
    """

    _active: list["InversionAudit"] = []

    def __init__(self):
        self.total = 0
        self.non_unit = 0

    def __enter__(self):
        InversionAudit._active.append(self)
        return self

    def __exit__(self, *exc):
        InversionAudit._active.remove(self)
        return False

    @classmethod
    def record(cls, valuation: int):
        for audit in cls._active:
            audit.total += 1
            if valuation != 0:
                audit.non_unit += 1


class PadicCtx:
    """A prime p and the default relative-precision cap.

    All elements carry a reference to their context; mixing contexts raises.
    """

    __slots__ = ("p", "default_prec", "fp_mode", "_pp_cache")

    def __init__(self, p: int, default_prec: int = 20, fp_mode: bool = False):
        if not is_prime(p):
            raise ValueError(f"p = {p} is not prime")
        if default_prec < 1:
            raise ValueError("default_prec must be >= 1")
        self.p = p
        self.default_prec = default_prec
        self.fp_mode = fp_mode
        self._pp_cache: dict[int, int] = {}

    def ppow(self, k: int) -> int:
        """p**k with a small cache (k >= 0)."""
        c = self._pp_cache.get(k)
        if c is None:
            c = self.p ** k
            if k <= 4096:
                self._pp_cache[k] = c
        return c

    # ------------------------------------------------------------------ #
    # constructors

    def zero(self) -> "PadicElem":
        return PadicElem(self, True, 0, 0, 0)

    def exact(self, n, shift: int = 0) -> "PadicElem":
        """Exact element n * p^shift from an integer or p-integral Fraction."""
        if isinstance(n, Fraction):
            den = n.denominator
            vd = 0 if den == 1 else val_of_int(den, self.p)
            if den != self.ppow(vd):
                raise ValueError("denominator is not a power of p")
            return self.exact(n.numerator, shift - vd)
        if n == 0:
            return self.zero()
        v = val_of_int(n, self.p)
        return PadicElem(self, True, v + shift, n // self.ppow(v), 0)

    def one(self) -> "PadicElem":
        return PadicElem(self, True, 0, 1, 0)

    def ball(self, absprec: int) -> "PadicElem":
        """O(p^absprec): no known digits."""
        return PadicElem(self, False, absprec, 0, 0)

    def from_unit(self, val: int, mantissa: int, relprec: int) -> "PadicElem":
        """Canonical approximate element p^val * (mantissa + O(p^relprec))."""
        if relprec < 0:
            raise ValueError("relprec must be >= 0")
        if relprec == 0:
            return self.ball(val)
        m = mantissa % self.ppow(relprec)
        if m % self.p == 0:
            raise ValueError("mantissa is not a unit")
        return PadicElem(self, False, val, m, relprec)

    def approx(self, center: int, absprec: int, shift: int = 0) -> "PadicElem":
        """Value center * p^shift known modulo p^absprec, canonicalized."""
        return _canonical(self, shift, center, absprec)

    def from_rational(self, q: Fraction, absprec: int) -> "PadicElem":
        """Truncate a p-integral-denominator rational at absolute precision."""
        q = Fraction(q)
        den = q.denominator
        vd = 0 if den == 1 else val_of_int(den, self.p)
        unit_den = den // self.ppow(vd)
        window = absprec + vd
        if window <= 0:
            return self.ball(absprec)
        inv_den = pow(unit_den, -1, self.ppow(window))
        return _canonical(self, -vd, q.numerator * inv_den, absprec)

    def random_elem(self, relprec: int, rng: Random) -> "PadicElem":
        return random_padic(self, relprec, rng)

    def parse(self, text: str) -> "PadicElem":
        return parse_literal(self, text)

    def __repr__(self):
        mode = ", fp" if self.fp_mode else ""
        return f"PadicCtx(p={self.p}, default_prec={self.default_prec}{mode})"

    def __eq__(self, other):
        return (
            isinstance(other, PadicCtx)
            and other.p == self.p
            and other.fp_mode == self.fp_mode
        )

    def __hash__(self):
        return hash((self.p, self.fp_mode))


def _canonical(ctx: PadicCtx, base: int, center: int, absprec) -> "PadicElem":
    """Element with value center * p^base known modulo p^absprec."""
    if absprec is INF:
        return ctx.exact(center, base)
    window = absprec - base
    if window <= 0:
        return ctx.ball(absprec)
    c = center % ctx.ppow(window)
    if c == 0:
        return ctx.ball(absprec)
    t = val_of_int(c, ctx.p)
    val = base + t
    relprec = absprec - val
    return PadicElem(ctx, False, val, (c // ctx.ppow(t)) % ctx.ppow(relprec), relprec)


class PadicElem:
    """Immutable element of Q_p at capped precision.  See module docstring."""

    __slots__ = ("ctx", "exact", "val", "mantissa", "relprec")

    def __init__(self, ctx, exact, val, mantissa, relprec):
        self.ctx = ctx
        self.exact = exact
        self.val = val
        self.mantissa = mantissa
        self.relprec = relprec

    # ------------------------------------------------------------------ #
    # predicates and views

    @property
    def is_exact_zero(self) -> bool:
        return self.exact and self.mantissa == 0

    @property
    def has_digits(self) -> bool:
        """True when at least one digit of the value is known."""
        if self.exact:
            return self.mantissa != 0
        return self.relprec > 0

    @property
    def is_indistinguishable_from_zero(self) -> bool:
        return not self.has_digits or self.is_exact_zero

    @property
    def absprec(self):
        return INF if self.exact else self.val + self.relprec

    def valuation(self):
        """Valuation; INF for exact zero.  Raises on a bare ball."""
        if self.is_exact_zero:
            return INF
        if not self.has_digits:
            raise InsufficientPrecision("valuation of a value with no known digits")
        if self.ctx.fp_mode and self.mantissa % self.ctx.p == 0:
            return self.val + val_of_int(self.mantissa, self.ctx.p)
        return self.val

    def center_fraction(self) -> Fraction:
        """The stored representative as an exact rational."""
        m = self.mantissa
        if self.val >= 0:
            return Fraction(m * self.ctx.ppow(self.val))
        return Fraction(m, self.ctx.ppow(-self.val))

    def lift_int(self) -> int:
        """The stored representative as an integer (requires val >= 0)."""
        if self.is_exact_zero or self.mantissa == 0:
            return 0
        if self.val < 0:
            raise NegativeValuation("negative valuation has no integer lift")
        return self.mantissa * self.ctx.ppow(self.val)

    # ------------------------------------------------------------------ #
    # arithmetic

    def _coerce(self, other):
        if isinstance(other, PadicElem):
            if other.ctx != self.ctx:
                raise ValueError("mixed p-adic contexts")
            return other
        if isinstance(other, int):
            return self.ctx.exact(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _add(self, other)

    __radd__ = __add__

    def __neg__(self):
        ctx = self.ctx
        if self.exact:
            return PadicElem(ctx, True, self.val, -self.mantissa, 0)
        if self.relprec == 0 and not ctx.fp_mode:
            return self
        cap = ctx.default_prec if ctx.fp_mode else self.relprec
        return PadicElem(ctx, False, self.val, (-self.mantissa) % ctx.ppow(cap), self.relprec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _add(self, -other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _add(other, -self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _mul(self, other)

    __rmul__ = __mul__

    def inv(self) -> "PadicElem":
        return _inv(self)

    def __pow__(self, k: int):
        if k < 0:
            return _inv(self).__pow__(-k)
        out = self.ctx.one()
        b = self
        while k:
            if k & 1:
                out = out * b
            b = b * b
            k >>= 1
        return out

    def shift(self, k: int) -> "PadicElem":
        """Multiply by p^k exactly (valuation shift)."""
        if self.is_exact_zero:
            return self
        return PadicElem(self.ctx, self.exact, self.val + k, self.mantissa, self.relprec)

    # ------------------------------------------------------------------ #
    # precision plumbing

    def truncate_to(self, absprec) -> "PadicElem":
        """Forget digits at and above p^absprec."""
        if absprec is INF or absprec >= self.absprec and not self.exact:
            return self
        return _canonical(self.ctx, self.val, self.mantissa, absprec)

    def lift_to(self, absprec) -> "PadicElem":
        """Promote the stored representative to a higher claimed precision."""
        if self.exact or absprec <= self.absprec:
            return self
        return _canonical(self.ctx, self.val, self.mantissa, absprec)

    def agrees_with(self, other: "PadicElem") -> bool:
        """Equality of digit sets up to the smaller absolute precision."""
        other = self._coerce(other)
        a = min(self.absprec, other.absprec)
        if a is INF:
            return (self.val, self.mantissa) == (other.val, other.mantissa)
        d = self.center_fraction() - other.center_fraction()
        if d == 0:
            return True
        v = val_of_int(d.numerator, self.ctx.p) - (
            0 if d.denominator == 1 else val_of_int(d.denominator, self.ctx.p)
        )
        return v >= a

    def congruent_mod(self, other: "PadicElem", absprec: int) -> bool:
        """Both sides carry >= absprec digits and they agree below it."""
        other = self._coerce(other)
        if self.absprec < absprec or other.absprec < absprec:
            return False
        d = self.center_fraction() - other.center_fraction()
        if d == 0:
            return True
        v = val_of_int(d.numerator, self.ctx.p) - (
            0 if d.denominator == 1 else val_of_int(d.denominator, self.ctx.p)
        )
        return v >= absprec

    def reduce_mod_p(self) -> int:
        return reduce_mod_p(self)

    # ------------------------------------------------------------------ #
    # hash/eq/format

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ctx.exact(other)
        if not isinstance(other, PadicElem):
            return NotImplemented
        return (
            self.ctx == other.ctx
            and self.exact == other.exact
            and self.val == other.val
            and self.mantissa == other.mantissa
            and self.relprec == other.relprec
        )

    def __hash__(self):
        return hash((self.ctx.p, self.exact, self.val, self.mantissa, self.relprec))

    def __str__(self):
        p = self.ctx.p
        if self.exact:
            if self.mantissa == 0:
                return "0"
            if self.val >= 0:
                return str(self.mantissa * self.ctx.ppow(self.val))
            return f"{p}^{self.val} * {self.mantissa}"
        if self.relprec == 0:
            return f"O({p}^{self.val})"
        k = self.val + self.relprec
        if self.val == 0:
            return f"{self.mantissa} + O({p}^{k})"
        return f"{p}^{self.val} * {self.mantissa} + O({p}^{k})"

    def __repr__(self):
        return f"<{self} : Q_{self.ctx.p}>"


# ---------------------------------------------------------------------- #
# arithmetic kernels


def _add(a: PadicElem, b: PadicElem) -> PadicElem:
    ctx = a.ctx
    if ctx.fp_mode:
        return _fp_add(a, b)
    if a.is_exact_zero:
        return b
    if b.is_exact_zero:
        return a
    if a.exact and b.exact:
        base = min(a.val, b.val)
        s = a.mantissa * ctx.ppow(a.val - base) + b.mantissa * ctx.ppow(b.val - base)
        return ctx.exact(s, base)
    absprec = min(a.absprec, b.absprec)
    base = min(a.val, b.val)
    s = a.mantissa * ctx.ppow(a.val - base) + b.mantissa * ctx.ppow(b.val - base)
    return _canonical(ctx, base, s, absprec)


def _mul(a: PadicElem, b: PadicElem) -> PadicElem:
    ctx = a.ctx
    if ctx.fp_mode:
        return _fp_mul(a, b)
    if a.is_exact_zero or b.is_exact_zero:
        return ctx.zero()
    val = a.val + b.val
    if a.exact and b.exact:
        return PadicElem(ctx, True, val, a.mantissa * b.mantissa, 0)
    relprec = min(a.relprec if not a.exact else INF, b.relprec if not b.exact else INF)
    if relprec == 0:
        return ctx.ball(val)
    m = (a.mantissa * b.mantissa) % ctx.ppow(relprec)
    return PadicElem(ctx, False, val, m, relprec)


def _inv(a: PadicElem) -> PadicElem:
    ctx = a.ctx
    if ctx.fp_mode:
        return _fp_inv(a)
    if not a.has_digits:
        raise DivisionByIndistinguishableZero(
            "cannot invert a value with no known digits"
        )
    InversionAudit.record(a.val)
    if a.exact:
        if a.mantissa in (1, -1):
            return PadicElem(ctx, True, -a.val, a.mantissa, 0)
        # the inverse of a generic exact unit has an infinite expansion;
        # cap it at the context default
        r = ctx.default_prec
        return PadicElem(ctx, False, -a.val, pow(a.mantissa, -1, ctx.ppow(r)), r)
    r = a.relprec
    return PadicElem(ctx, False, -a.val, pow(a.mantissa, -1, ctx.ppow(r)), r)


# fixed-window (floating-point style) kernels.  `val` is the window base,
# `mantissa` any residue in [0, p^N); nothing tracks precision.


def _fp_coerce(a: PadicElem) -> tuple[int, int]:
    N = a.ctx.default_prec
    if a.exact:
        if a.mantissa == 0:
            return (0, 0)
        return (a.val, a.mantissa % a.ctx.ppow(N))
    return (a.val, a.mantissa)


def _fp_add(a: PadicElem, b: PadicElem) -> PadicElem:
    ctx = a.ctx
    N = ctx.default_prec
    va, ma = _fp_coerce(a)
    vb, mb = _fp_coerce(b)
    if ma == 0:
        return PadicElem(ctx, False, vb, mb, N)
    if mb == 0:
        return PadicElem(ctx, False, va, ma, N)
    base = min(va, vb)
    s = (ma * ctx.ppow(va - base) + mb * ctx.ppow(vb - base)) % ctx.ppow(N)
    return PadicElem(ctx, False, base, s, N)


def _fp_mul(a: PadicElem, b: PadicElem) -> PadicElem:
    ctx = a.ctx
    N = ctx.default_prec
    va, ma = _fp_coerce(a)
    vb, mb = _fp_coerce(b)
    return PadicElem(ctx, False, va + vb, (ma * mb) % ctx.ppow(N), N)


def _fp_inv(a: PadicElem) -> PadicElem:
    ctx = a.ctx
    N = ctx.default_prec
    v, m = _fp_coerce(a)
    if m == 0:
        raise DivisionByIndistinguishableZero("fp inversion of zero")
    c = val_of_int(m, ctx.p)
    u = m // ctx.ppow(c)
    return PadicElem(ctx, False, -(v + c), pow(u, -1, ctx.ppow(N)), N)


# ---------------------------------------------------------------------- #
# spec-level operation names


def add(a: PadicElem, b: PadicElem) -> PadicElem:
    return a + b


def mul(a: PadicElem, b: PadicElem) -> PadicElem:
    return a * b


def inv(a: PadicElem) -> PadicElem:
    return a.inv()


def reduce_mod_p(a: PadicElem) -> int:
    """Reduction to F_p of an integral element with at least one known digit."""
    if a.is_exact_zero:
        return 0
    if a.exact:
        if a.val < 0:
            raise NegativeValuation("cannot reduce a non-integral value mod p")
        return 0 if a.val > 0 else a.mantissa % a.ctx.p
    if a.val < 0:
        raise NegativeValuation("cannot reduce a non-integral value mod p")
    if a.absprec < 1:
        raise InsufficientPrecision("no digits known modulo p")
    if a.val >= 1:
        return 0
    return a.mantissa % a.ctx.p


def _sample_valuation(rng: Random) -> int:
    """v = 0 with probability 1/5; P[v = n] = 2/(5 |n| (|n|+1)) otherwise."""
    z = rng.randrange(5)
    if z == 0:
        return 0
    sign = 1 if z <= 2 else -1
    t = rng.randrange(1 << 63)
    return sign * ((1 << 63) // ((1 << 63) - t))


def random_padic(ctx: PadicCtx, N: int, rng: Random) -> PadicElem:
    """Random element p^v (a + O(p^{N + v_p(a)})), a uniform in [1, p^N).

    The valuation v follows the heavy-tailed distribution above.  a = 0 is
    redrawn so every sample carries exactly N significant digits.
    """
    if N < 1:
        raise ValueError("relative precision must be >= 1")
    v = _sample_valuation(rng)
    a = 0
    while a == 0:
        a = rng.randrange(ctx.ppow(N))
    va = val_of_int(a, ctx.p)
    return PadicElem(ctx, False, v + va, a // ctx.ppow(va), N)


# ---------------------------------------------------------------------- #
# text literals: `p^v * m + O(p^k)`, `m + O(p^k)`, `O(p^k)`, bare integers,
# `p^v * m` for exact values with nonzero valuation; `0` is exact zero.

_BALL_RE = re.compile(r"^O\(\s*(\d+)\^(-?\d+)\s*\)$")
_SHORT_RE = re.compile(r"^(-?\d+)\s*\+\s*O\(\s*(\d+)\^(-?\d+)\s*\)$")
_LONG_RE = re.compile(r"^(\d+)\^(-?\d+)\s*\*\s*(-?\d+)\s*\+\s*O\(\s*(\d+)\^(-?\d+)\s*\)$")
_EXACT_SCALED_RE = re.compile(r"^(\d+)\^(-?\d+)\s*\*\s*(-?\d+)$")
_INT_RE = re.compile(r"^-?\d+$")


def parse_literal(ctx: PadicCtx, text: str) -> PadicElem:
    s = text.strip()
    if _INT_RE.match(s):
        return ctx.exact(int(s))
    m = _BALL_RE.match(s)
    if m:
        if int(m.group(1)) != ctx.p:
            raise ValueError(f"literal base {m.group(1)} != p = {ctx.p}")
        return ctx.ball(int(m.group(2)))
    m = _SHORT_RE.match(s)
    if m:
        if int(m.group(2)) != ctx.p:
            raise ValueError(f"literal base {m.group(2)} != p = {ctx.p}")
        return ctx.approx(int(m.group(1)), int(m.group(3)))
    m = _LONG_RE.match(s)
    if m:
        if int(m.group(1)) != ctx.p or int(m.group(4)) != ctx.p:
            raise ValueError(f"literal base != p = {ctx.p}")
        return ctx.approx(int(m.group(3)), int(m.group(5)), shift=int(m.group(2)))
    m = _EXACT_SCALED_RE.match(s)
    if m:
        if int(m.group(1)) != ctx.p:
            raise ValueError(f"literal base {m.group(1)} != p = {ctx.p}")
        return ctx.exact(int(m.group(3)), shift=int(m.group(2)))
    raise ValueError(f"bad p-adic literal: {text!r}")


def format_literal(a: PadicElem) -> str:
    return str(a)
