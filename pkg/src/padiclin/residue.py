"""Small F_p linear algebra: just enough to decide charpoly == minpoly.

Vectors and matrices are plain lists of ints reduced mod p; polynomials are
coefficient lists (lowest degree first, normalized, leading nonzero).
"""

from __future__ import annotations


def poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_mul_fp(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return poly_trim(out)


def poly_divmod_fp(a, b, p):
    a = list(a)
    inv_lead = pow(b[-1], -1, p)
    quo = [0] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b):
        q = a[-1] * inv_lead % p
        k = len(a) - len(b)
        if q:
            quo[k] = q
            for i in range(len(b) - 1):
                a[k + i] = (a[k + i] - q * b[i]) % p
        a.pop()
    return poly_trim(quo), poly_trim(a)


def poly_gcd_fp(a, b, p):
    a, b = poly_trim(list(a)), poly_trim(list(b))
    while b:
        a, b = b, poly_divmod_fp(a, b, p)[1]
    if a:
        inv_lead = pow(a[-1], -1, p)
        a = [c * inv_lead % p for c in a]
    return a


def poly_lcm_fp(a, b, p):
    if not a or not b:
        return []
    g = poly_gcd_fp(a, b, p)
    q, _ = poly_divmod_fp(poly_mul_fp(a, b, p), g, p)
    inv_lead = pow(q[-1], -1, p)
    return [c * inv_lead % p for c in q]


def mat_vec_fp(A, v, p):
    return [sum(a * x for a, x in zip(row, v)) % p for row in A]


class SpanFp:
    """Incremental echelonized span over F_p (membership tests only)."""

    def __init__(self, n: int, p: int):
        self.n = n
        self.p = p
        self.rows: list[list[int]] = []
        self.pivots: list[int] = []

    def reduce(self, v):
        v = [x % self.p for x in v]
        for row, piv in zip(self.rows, self.pivots):
            c = v[piv]
            if c:
                v = [(x - c * r) % self.p for x, r in zip(v, row)]
        return v

    def contains(self, v) -> bool:
        return all(x == 0 for x in self.reduce(v))

    def insert(self, v) -> bool:
        """Add v to the span; False if it was already contained."""
        res = self.reduce(v)
        piv = next((i for i, x in enumerate(res) if x), None)
        if piv is None:
            return False
        inv = pow(res[piv], -1, self.p)
        self.rows.append([x * inv % self.p for x in res])
        self.pivots.append(piv)
        return True

    @property
    def dim(self) -> int:
        return len(self.rows)


def local_minpoly_fp(A, v, p):
    """Minimal monic g with g(A) v = 0."""
    n = len(A)
    width = n + 1
    ech: list[tuple[list[int], list[int], int]] = []  # (vector, combo, pivot)
    w = list(v)
    for k in range(width):
        res = [x % p for x in w]
        combo = [0] * width
        combo[k] = 1
        for row, cmb, piv in ech:
            c = res[piv]
            if c:
                res = [(x - c * r) % p for x, r in zip(res, row)]
                combo = [(a - c * b) % p for a, b in zip(combo, cmb)]
        piv = next((i for i, x in enumerate(res) if x), None)
        if piv is None:
            # combo expresses 0 = sum combo[i] A^i v with combo[k] = 1
            inv = pow(combo[k], -1, p)
            g = [c * inv % p for c in combo[: k + 1]]
            return poly_trim(g)
        inv = pow(res[piv], -1, p)
        ech.append(
            ([x * inv % p for x in res], [c * inv % p for c in combo], piv)
        )
        w = mat_vec_fp(A, w, p)
    raise AssertionError("unreachable: dependency must occur by degree n")


def minpoly_fp(A, p):
    """Minimal polynomial of A over F_p (lcm of local ones on a spin basis)."""
    n = len(A)
    span = SpanFp(n, p)
    best = [1]
    for i in range(n):
        e = [0] * n
        e[i] = 1
        if span.contains(e):
            continue
        g = local_minpoly_fp(A, e, p)
        best = poly_lcm_fp(best, g, p)
        if len(best) - 1 == n:
            return best
        w = e
        for _ in range(len(g) - 1):
            span.insert(w)
            w = mat_vec_fp(A, w, p)
    return best


def is_cyclic_fp(A, p) -> bool:
    """charpoly == minpoly over F_p (degree test on the minimal polynomial)."""
    return len(minpoly_fp(A, p)) - 1 == len(A)
