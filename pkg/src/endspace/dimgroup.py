"""Dimension groups of eventually periodic Bratteli diagrams.

An element is a pair ``(level, vector)``; two elements are equal when some
common pushforward agrees, and an element is positive when some pushforward
is coordinatewise nonnegative.  Every decision here is exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import sympy

from . import linalg
from .bratteli import BratteliDiagram
from .errors import NotPeriodicError, PreconditionError, StructureError
from .linalg import Matrix, QuadraticNumber


@dataclass(frozen=True)
class Element:
    level: int
    vector: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "vector", tuple(int(x) for x in self.vector))

    def __neg__(self):
        return Element(self.level, tuple(-x for x in self.vector))

    def scaled(self, n: int) -> "Element":
        return Element(self.level, tuple(n * x for x in self.vector))


@dataclass(frozen=True)
class Positive:
    level: int
    vector: tuple[int, ...]

    verdict = "positive"


@dataclass(frozen=True)
class NotPositive:
    certificate: str
    detail: dict = field(default_factory=dict, hash=False, compare=False)

    verdict = "not positive"


@dataclass(frozen=True)
class Unknown:
    bound: int

    verdict = "unknown"


def _is_primitive(p: Matrix) -> bool:
    n = len(p)
    b = tuple(tuple(int(x > 0) for x in row) for row in p)
    k = (n - 1) ** 2 + 1
    acc = linalg.identity(n)
    for _ in range(k):
        acc = tuple(tuple(int(x > 0) for x in row) for row in linalg.matmul(b, acc))
    return all(all(row) for row in acc)


def _poly_eval_matrix(coeffs: Sequence[int], p: Matrix) -> Matrix:
    """``f(P)`` for an integer polynomial given highest coefficient first (Horner)."""
    n = len(p)
    out = tuple(tuple(0 for _ in range(n)) for _ in range(n))
    for c in coeffs:
        out = linalg.matmul(out, p)
        out = tuple(
            tuple(x + (c if i == j else 0) for j, x in enumerate(row)) for i, row in enumerate(out)
        )
    return out


@dataclass(frozen=True)
class PerronData:
    value: object  # int, Fraction or QuadraticNumber; None when degree >= 3
    numeric: float
    minimal_poly: tuple[int, ...]
    cofactor: tuple[int, ...]
    left_vector: tuple | None


def _perron(p: Matrix) -> PerronData:
    x = sympy.Symbol("x")
    cp = sympy.Matrix(p).charpoly(x).as_expr()
    _, factors = sympy.factor_list(cp)
    best = None
    for f, mult in factors:
        poly = sympy.Poly(f, x)
        roots = poly.real_roots()
        if roots:
            r = max(roots)
            if best is None or r > best[0]:
                best = (r, poly, mult)
    if best is None:
        raise PreconditionError("period matrix has no real eigenvalue")
    root, poly, mult = best
    if mult != 1:
        raise PreconditionError("Perron eigenvalue is not simple")
    minimal = tuple(int(c) for c in poly.all_coeffs())
    cof_poly = sympy.Poly(sympy.quo(sympy.Poly(cp, x), poly), x)
    cofactor = tuple(int(c) for c in cof_poly.all_coeffs())
    numeric = float(sympy.N(root, 30))
    lead = minimal[0]
    value = None
    if poly.degree() == 1:
        value = Fraction(-minimal[1], lead)
        if value.denominator == 1:
            value = int(value)
    elif poly.degree() == 2:
        a, b, c = minimal
        disc = b * b - 4 * a * c
        value = (QuadraticNumber.sqrt(disc) - b) / (2 * a)
    left = None
    if value is not None:
        n = len(p)
        if isinstance(value, QuadraticNumber):
            zero = QuadraticNumber.rational(0, value.d)
            one = QuadraticNumber.rational(1, value.d)
        else:
            zero, one = Fraction(0), Fraction(1)
        pt = linalg.transpose(p)
        m = [[pt[i][j] - (value if i == j else 0) for j in range(n)] for i in range(n)]
        m = [[e if isinstance(e, QuadraticNumber) else zero + e for e in row] for row in m]
        basis = linalg.field_solve_nullspace(m, zero, one)
        if len(basis) != 1:
            raise PreconditionError("Perron eigenspace is not one-dimensional")
        vec = basis[0]
        first = next(e for e in vec if e != zero)
        left = tuple(e / first for e in vec)
        if not isinstance(value, QuadraticNumber):
            left = tuple(Fraction(e) for e in left)
    return PerronData(value, numeric, minimal, cofactor, left)


def _integer_roots(p: Matrix) -> dict[int, int] | None:
    """Eigenvalue multiplicities when the characteristic polynomial splits over Z."""
    x = sympy.Symbol("x")
    cp = sympy.Matrix(p).charpoly(x).as_expr()
    _, factors = sympy.factor_list(cp)
    roots: dict[int, int] = {}
    for f, mult in factors:
        poly = sympy.Poly(f, x)
        if poly.degree() != 1:
            return None
        a, b = (int(c) for c in poly.all_coeffs())
        if b % a:
            return None
        r = -b // a
        roots[r] = roots.get(r, 0) + mult
    return roots


class DimensionGroup:
    """Direct limit of ``Z^{m_i}`` along the diagram, with cone and order unit."""

    def __init__(self, diagram: BratteliDiagram):
        self.diagram = diagram

    @property
    def order_unit(self) -> Element:
        return Element(0, (1,))

    def _require_periodic(self):
        if not self.diagram.periodic:
            raise NotPeriodicError("exact dimension-group decisions need an eventually periodic diagram")

    def _check(self, el: Element) -> None:
        if len(el.vector) != self.diagram.m(el.level):
            raise StructureError(
                f"vector of length {len(el.vector)} at level {el.level}; expected "
                f"{self.diagram.m(el.level)}"
            )

    # -- structure ------------------------------------------------------------

    @property
    def start(self) -> int:
        return len(self.diagram.prefix)

    @property
    def period(self) -> int:
        return len(self.diagram.cycle)

    @cached_property
    def period_matrix(self) -> Matrix:
        self._require_periodic()
        return self.diagram.composite(self.start, self.start + self.period)

    def aligned_level(self, level: int) -> int:
        """Smallest period-aligned level at or after ``level``."""
        self._require_periodic()
        if level <= self.start:
            return self.start
        k = -(-(level - self.start) // self.period)
        return self.start + k * self.period

    @cached_property
    def kernel_stabilization(self) -> tuple[int, list[tuple[int, ...]]]:
        """``(s, basis)``: kernels of ``P^k`` stop growing at ``k = s``."""
        p = self.period_matrix
        k, power = 0, linalg.identity(len(p))
        r = linalg.rank(power)
        while True:
            nxt = linalg.matmul(p, power)
            r2 = linalg.rank(nxt)
            if r2 == r:
                return k, linalg.integer_kernel(power)
            k, power, r = k + 1, nxt, r2

    def rank(self) -> int:
        s, _ = self.kernel_stabilization
        return linalg.rank(linalg.matpow(self.period_matrix, s))

    # -- elements --------------------------------------------------------------

    def push(self, el: Element, to_level: int) -> Element:
        self._check(el)
        if to_level < el.level:
            raise PreconditionError(f"cannot push from level {el.level} back to {to_level}")
        v = el.vector
        for i in range(el.level, to_level):
            v = linalg.matvec(self.diagram.matrix(i), v)
        return Element(to_level, v)

    def _eventually_zero(self, w: Element) -> bool:
        s, _ = self.kernel_stabilization
        v = w.vector
        for _ in range(s):
            v = linalg.matvec(self.period_matrix, v)
        return linalg.is_zero_vector(v)

    def equals(self, a: Element, b: Element) -> bool:
        self._require_periodic()
        level = self.aligned_level(max(a.level, b.level))
        pa, pb = self.push(a, level), self.push(b, level)
        delta = Element(level, tuple(x - y for x, y in zip(pa.vector, pb.vector)))
        return self._eventually_zero(delta)

    def add(self, a: Element, b: Element) -> Element:
        level = max(a.level, b.level)
        pa, pb = self.push(a, level), self.push(b, level)
        return Element(level, tuple(x + y for x, y in zip(pa.vector, pb.vector)))

    def sub(self, a: Element, b: Element) -> Element:
        return self.add(a, -b)

    # -- order -------------------------------------------------------------------

    @cached_property
    def primitive(self) -> bool:
        return _is_primitive(self.period_matrix)

    @cached_property
    def perron(self) -> PerronData:
        return _perron(self.period_matrix)

    def _first_nonnegative(self, el: Element, limit: int | None):
        """Walk forward level by level until the vector is >= 0."""
        v, lv = el.vector, el.level
        while limit is None or lv <= el.level + limit:
            if all(x >= 0 for x in v):
                return Positive(lv, v)
            v = linalg.matvec(self.diagram.matrix(lv), v)
            lv += 1
        return None

    def is_positive(self, el: Element, bound: int = 200):
        """Decide membership in the positive cone.

        Positive verdicts carry a nonnegative pushforward.  NotPositive
        verdicts carry a certificate: a strictly negative Perron pairing, a
        zero Perron pairing on a vector that never dies, a closed-form
        eventual sign of some coordinate, or a nonpositive pushforward that
        never vanishes.  Anything else is Unknown.
        """
        self._require_periodic()
        self._check(el)
        hit = self._first_nonnegative(el, self.aligned_level(el.level) - el.level)
        if hit:
            return hit
        w = self.push(el, self.aligned_level(el.level))
        if self._eventually_zero(w):
            return self._first_nonnegative(w, None)
        p = self.period_matrix
        if self.primitive:
            return self._primitive_verdict(w)
        roots = _integer_roots(p)
        if roots is not None:
            return self._closed_form_verdict(w, roots)
        v, lv = w.vector, w.level
        for _ in range(bound):
            if all(x >= 0 for x in v):
                return Positive(lv, v)
            if all(x <= 0 for x in v):
                return NotPositive("nonpositive-orbit", {"level": lv, "vector": v})
            v = linalg.matvec(p, v)
            lv += self.period
        return Unknown(bound)

    def _primitive_verdict(self, w: Element):
        data = self.perron
        if data.left_vector is not None:
            pairing = sum((a * b for a, b in zip(data.left_vector, w.vector)), 0 * data.left_vector[0])
            sgn = linalg.sign(pairing)
            if sgn > 0:
                return self._first_nonnegative(w, None)
            if sgn < 0:
                return NotPositive(
                    "perron",
                    {"level": w.level, "left_vector": data.left_vector, "pairing": pairing},
                )
            return NotPositive("perron-boundary", {"level": w.level, "pairing": pairing})
        # Perron value of degree >= 3: the pairing vanishes on an integer vector
        # exactly when the complementary factor of the characteristic polynomial kills it.
        g = _poly_eval_matrix(data.cofactor, self.period_matrix)
        if linalg.is_zero_vector(linalg.matvec(g, w.vector)):
            return NotPositive("perron-boundary", {"level": w.level})
        v, lv = w.vector, w.level
        while True:
            if all(x >= 0 for x in v):
                return Positive(lv, v)
            if all(x <= 0 for x in v):
                return NotPositive("nonpositive-orbit", {"level": lv, "vector": v})
            v = linalg.matvec(self.period_matrix, v)
            lv += self.period

    def _closed_form_verdict(self, w: Element, roots: dict[int, int]):
        p, steps = self.period_matrix, 1
        if any(r < 0 for r in roots):
            p, steps = linalg.matmul(p, p), 2
            roots = _integer_roots(p)
        n = len(p)
        basis = [(r, j) for r in sorted(roots) if r != 0 for j in range(roots[r])]
        samples = []
        v = w.vector
        for _ in range(n):
            v = linalg.matvec(p, v)
        for _ in range(len(basis)):
            samples.append(v)
            v = linalg.matvec(p, v)
        ks = range(n, n + len(basis))
        system = [[Fraction(k) ** j * Fraction(r) ** k for r, j in basis] for k in ks]
        for i in range(n):
            if not basis:
                break
            coeffs = linalg.solve_rational(system, [s[i] for s in samples])
            terms = [(r, j, c) for (r, j), c in zip(basis, coeffs) if c != 0]
            if terms:
                r, j, c = max(terms, key=lambda t: (t[0], t[1]))
                if c < 0:
                    return NotPositive(
                        "closed-form",
                        {"level": w.level, "coordinate": i, "root": r, "power": j, "coefficient": c,
                         "steps": steps},
                    )
        return self._first_nonnegative(w, None)

    # -- real embedding --------------------------------------------------------

    def pf_embedding(self) -> "PerronEmbedding":
        self._require_periodic()
        if not self.primitive:
            raise PreconditionError(
                "period matrix is not primitive; use is_positive's closed-form analysis instead"
            )
        return PerronEmbedding(self, self.perron)


@dataclass(frozen=True)
class PerronEmbedding:
    """``v`` at aligned level ``p + k c`` maps to ``lambda^(-k) * l . v``.

    ``l`` is the left Perron vector scaled to first entry 1, and levels are
    counted from the start of the period.
    """

    group: DimensionGroup
    data: PerronData

    @property
    def value(self):
        return self.data.value

    @property
    def left_vector(self):
        return self.data.left_vector

    def evaluate(self, el: Element):
        if self.data.value is None or self.data.left_vector is None:
            raise PreconditionError("exact evaluation needs a Perron value of degree <= 2")
        g = self.group
        level = g.aligned_level(el.level)
        w = g.push(el, level)
        k = (level - g.start) // g.period
        pairing = sum((a * b for a, b in zip(self.data.left_vector, w.vector)),
                      0 * self.data.left_vector[0])
        lam = self.data.value
        if isinstance(lam, QuadraticNumber):
            return pairing / (lam ** k)
        return pairing / Fraction(lam) ** k

    def describe_image(self) -> str:
        lam = self.data.value
        gens = self.data.left_vector
        if lam is None or gens is None:
            return "unknown"
        if isinstance(lam, QuadraticNumber):
            unit = abs(lam.norm()) == 1 and lam.a.denominator in (1, 2)
            span = " + ".join(f"Z·({g})" if g != 1 else "Z" for g in gens)
            return span if unit else f"Z[1/λ]-span of {{{', '.join(map(str, gens))}}}"
        lam = Fraction(lam)
        if lam == 1:
            return "Z" if all(Fraction(g).denominator == 1 for g in gens) else "Z-span of " + str(gens)
        if lam.denominator == 1 and all(Fraction(g).denominator == 1 for g in gens):
            return f"Z[1/{lam.numerator}]"
        return f"Z[1/λ]-span of {{{', '.join(map(str, gens))}}}"
