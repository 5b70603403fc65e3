"""Exact linear algebra over the integers, the rationals and real quadratic fields.

Matrices are tuples of row tuples.  Entries are Python ints (arbitrary
precision), ``Fraction`` or :class:`QuadraticNumber`; nothing here ever
touches floating point.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Sequence

Matrix = tuple[tuple[int, ...], ...]


def as_matrix(rows: Sequence[Sequence[int]]) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in rows)


def shape(a: Matrix) -> tuple[int, int]:
    return len(a), (len(a[0]) if a else 0)


def identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def matmul(a, b):
    if not a:
        return ()
    inner = len(b)
    cols = len(b[0]) if b else 0
    return tuple(
        tuple(sum(row[k] * b[k][j] for k in range(inner)) for j in range(cols))
        for row in a
    )


def matvec(a, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def transpose(a):
    if not a:
        return ()
    return tuple(zip(*a))


def product(mats, size: int) -> Matrix:
    """Ordered product ``mats[-1] @ ... @ mats[0]`` (rightmost factor applied first)."""
    out = identity(size)
    for m in mats:
        out = matmul(m, out)
    return out


def matpow(a: Matrix, k: int) -> Matrix:
    out = identity(len(a))
    base = a
    while k:
        if k & 1:
            out = matmul(base, out)
        base = matmul(base, base)
        k >>= 1
    return out


def is_zero_vector(v) -> bool:
    return all(x == 0 for x in v)


# -- integer lattices -------------------------------------------------------


def hermite_form(a: Matrix) -> tuple[list[list[int]], list[list[int]]]:
    """Row-style Hermite reduction with unimodular transform.

    Returns ``(h, u)`` with ``u @ a == h``, ``u`` unimodular and ``h`` in row
    echelon form (pivots positive, entries above each pivot reduced).
    """
    rows, cols = shape(a)
    h = [list(r) for r in a]
    u = [list(r) for r in identity(rows)]
    r = 0
    for c in range(cols):
        if r == rows:
            break
        # Euclid on column c among rows r.. until one nonzero entry remains.
        while True:
            nz = [i for i in range(r, rows) if h[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(h[i][c]))
            h[r], h[p] = h[p], h[r]
            u[r], u[p] = u[p], u[r]
            done = True
            for i in range(r + 1, rows):
                if h[i][c]:
                    q = h[i][c] // h[r][c]
                    h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                    u[i] = [x - q * y for x, y in zip(u[i], u[r])]
                    if h[i][c]:
                        done = False
            if done:
                break
        if r < rows and h[r][c] != 0:
            if h[r][c] < 0:
                h[r] = [-x for x in h[r]]
                u[r] = [-x for x in u[r]]
            for i in range(r):
                q = h[i][c] // h[r][c]
                if q:
                    h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                    u[i] = [x - q * y for x, y in zip(u[i], u[r])]
            r += 1
    return h, u


def rank(a: Matrix) -> int:
    if not a:
        return 0
    h, _ = hermite_form(a)
    return sum(1 for row in h if any(row))


def integer_kernel(a: Matrix) -> list[tuple[int, ...]]:
    """Basis of the saturated lattice ``{x in Z^n : a x = 0}``."""
    rows, cols = shape(a)
    if cols == 0:
        return []
    if not rows:
        return [tuple(r) for r in identity(cols)]
    h, u = hermite_form(transpose(a))
    return [tuple(u[i]) for i in range(cols) if not any(h[i])]


# -- fields -----------------------------------------------------------------


def field_solve_nullspace(a, zero, one):
    """Nullspace basis of ``a`` over any exact field (elements support + - * /)."""
    rows = [list(r) for r in a]
    n = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != zero), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = one / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != zero:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        vec = [zero] * n
        vec[fc] = one
        for i, pc in enumerate(pivots):
            vec[pc] = zero - rows[i][fc]
        basis.append(vec)
    return basis


def solve_rational(a, b) -> list[Fraction]:
    """Unique solution of the square system ``a x = b`` over Q."""
    n = len(a)
    aug = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(a, b)]
    for c in range(n):
        p = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if p is None:
            raise ValueError("singular system")
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [x / piv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [aug[i][n] for i in range(n)]


def _squarefree_part(d: int) -> tuple[int, int]:
    """Write d = s^2 * r with r squarefree; returns (s, r)."""
    s, r, k = 1, d, 2
    while k * k <= r:
        while r % (k * k) == 0:
            r //= k * k
            s *= k
        k += 1
    return s, r


@dataclass(frozen=True)
class QuadraticNumber:
    """``a + b*sqrt(d)`` with rational ``a, b`` and squarefree ``d > 1``."""

    a: Fraction
    b: Fraction
    d: int

    @classmethod
    def rational(cls, x, d: int) -> "QuadraticNumber":
        return cls(Fraction(x), Fraction(0), d)

    @classmethod
    def sqrt(cls, n: int) -> "QuadraticNumber | Fraction":
        if n < 0:
            raise ValueError("real quadratic fields only")
        r = isqrt(n)
        if r * r == n:
            return Fraction(r)
        s, d = _squarefree_part(n)
        return cls(Fraction(0), Fraction(s), d)

    def _coerce(self, other) -> "QuadraticNumber":
        if isinstance(other, QuadraticNumber):
            if other.d != self.d:
                raise ValueError("mixed quadratic fields")
            return other
        return QuadraticNumber(Fraction(other), Fraction(0), self.d)

    def __add__(self, other):
        o = self._coerce(other)
        return QuadraticNumber(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.d)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return QuadraticNumber(
            self.a * o.a + self.b * o.b * self.d, self.a * o.b + self.b * o.a, self.d
        )

    __rmul__ = __mul__

    def conjugate(self) -> "QuadraticNumber":
        return QuadraticNumber(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    def __truediv__(self, other):
        o = self._coerce(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        num = self * o.conjugate()
        return QuadraticNumber(num.a / n, num.b / n, self.d)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return QuadraticNumber.rational(1, self.d) / (self ** (-k))
        out = QuadraticNumber.rational(1, self.d)
        for _ in range(k):
            out = out * self
        return out

    def sign(self) -> int:
        """Exact sign, by comparing squares."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == sb or sb == 0:
            return sa
        if sa == 0:
            return sb
        # opposite signs: compare a^2 with b^2 d
        diff = self.a * self.a - self.b * self.b * self.d
        return sa if diff > 0 else (sb if diff < 0 else 0)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if isinstance(other, QuadraticNumber):
            return (self - other).sign() == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __float__(self):
        return float(self.a) + float(self.b) * self.d**0.5

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        root = f"√{self.d}"
        b = "" if self.b == 1 else ("-" if self.b == -1 else f"{self.b}·")
        if self.a == 0:
            return f"{b}{root}"
        sign = "+" if self.b > 0 else "-"
        babs = abs(self.b)
        bstr = "" if babs == 1 else f"{babs}·"
        return f"{self.a} {sign} {bstr}{root}"


def sign(x) -> int:
    if isinstance(x, QuadraticNumber):
        return x.sign()
    return (x > 0) - (x < 0)


def vec_gcd(v) -> int:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g
