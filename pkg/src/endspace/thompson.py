"""Higman-Thompson prefix maps and their Cuntz algebra representation.

Words are digit strings over ``0..n-1``; ``""`` is the empty word.  A
prefix map replaces a leading ``u_i`` by ``v_i``.  Cuntz algebra elements
are finite sums of terms ``S_u S_v*`` with Gaussian rational coefficients.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from typing import Iterable, Sequence

from .errors import PreconditionError, StructureError
from .groupoid import Germ
from .trees import EndPoint, Vertex

F, T, V = "F", "T-only", "V-only"


def _words(n: int, length: int) -> list[str]:
    return ["".join(map(str, w)) for w in product(range(n), repeat=length)]


def _check_code(n: int, code: Sequence[str], side: str) -> None:
    for w in code:
        if any(not ch.isdigit() or int(ch) >= n for ch in w):
            raise StructureError(f"{side} word {w!r} is not over the alphabet 0..{n - 1}")
    if len(set(code)) != len(code):
        raise StructureError(f"{side} code repeats a word")
    ordered = sorted(code)
    for a, b in zip(ordered, ordered[1:]):
        if b.startswith(a):
            raise StructureError(f"{side} code is not prefix free: {a!r} prefixes {b!r}")
    if sum(Fraction(1, n ** len(w)) for w in code) != 1:
        raise StructureError(f"{side} code is not complete")


@dataclass(frozen=True)
class PrefixMap:
    n: int
    pairs: tuple[tuple[str, str], ...]

    def domain(self) -> tuple[str, ...]:
        return tuple(u for u, _ in self.pairs)

    def range(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.pairs)

    def is_identity(self) -> bool:
        return self.pairs == (("", ""),)

    def to_json(self) -> dict:
        return {"n": self.n, "pairs": [list(p) for p in self.pairs]}

    def __str__(self):
        body = ", ".join(f"{u or 'ε'}→{v or 'ε'}" for u, v in self.pairs)
        return "{" + body + "}"


def reduce_pairs(n: int, pairs: Iterable[tuple[str, str]], rng: random.Random | None = None):
    """Collapse full sibling families until none is left.

    With ``rng`` the collapsible family is picked at random, which is how
    confluence is tested.
    """
    current = dict(pairs)
    while True:
        families = []
        for u in current:
            if not u:
                continue
            p, v = u[:-1], current[u]
            if u[-1] != "0" or not v or v[-1] != "0":
                continue
            q = v[:-1]
            if all(current.get(p + str(a)) == q + str(a) for a in range(n)):
                families.append((p, q))
        if not families:
            return tuple(sorted(current.items()))
        p, q = rng.choice(sorted(families)) if rng else min(families)
        for a in range(n):
            del current[p + str(a)]
        current[p] = q


def make_prefix_map(n: int, pairs: Iterable[Sequence[str]]) -> PrefixMap:
    if n < 2:
        raise StructureError("alphabet size must be at least 2")
    pairs = [(str(u), str(v)) for u, v in pairs]
    _check_code(n, [u for u, _ in pairs], "domain")
    _check_code(n, [v for _, v in pairs], "range")
    return PrefixMap(n, reduce_pairs(n, pairs))


def from_json(doc: dict) -> PrefixMap:
    try:
        return make_prefix_map(int(doc["n"]), [tuple(p) for p in doc["pairs"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise StructureError('expected {"n": int, "pairs": [["u", "v"], ...]}') from exc


def identity(n: int) -> PrefixMap:
    return PrefixMap(n, (("", ""),))


def _same_alphabet(g: PrefixMap, h: PrefixMap) -> None:
    if g.n != h.n:
        raise PreconditionError(f"alphabet mismatch: {g.n} vs {h.n}")


def compose(g: PrefixMap, h: PrefixMap) -> PrefixMap:
    """``g ∘ h``: apply h first."""
    _same_alphabet(g, h)
    out = []
    for u, v in h.pairs:
        for u2, v2 in g.pairs:
            if u2.startswith(v):
                out.append((u + u2[len(v):], v2))
            elif v.startswith(u2):
                out.append((u, v2 + v[len(u2):]))
    return PrefixMap(g.n, reduce_pairs(g.n, out))


def invert(g: PrefixMap) -> PrefixMap:
    return PrefixMap(g.n, reduce_pairs(g.n, [(v, u) for u, v in g.pairs]))


def classify(g: PrefixMap) -> str:
    """F if order preserving, T-only if cyclically so, else V-only."""
    dom = sorted(g.domain())
    rng = sorted(g.range())
    target = dict(g.pairs)
    sigma = [rng.index(target[u]) for u in dom]
    k = len(sigma)
    if sigma == list(range(k)):
        return F
    if all(sigma[i] == (sigma[0] + i) % k for i in range(k)):
        return T
    return V


def _drop(x: EndPoint, k: int) -> EndPoint:
    if k <= len(x.prefix):
        return EndPoint(x.prefix[k:], x.cycle)
    r = (k - len(x.prefix)) % len(x.cycle)
    return EndPoint((), x.cycle[r:] + x.cycle[:r])


def _lookup(g: PrefixMap, x: EndPoint) -> tuple[str, str]:
    for u, v in g.pairs:
        if "".join(map(str, x.head(len(u)))) == u:
            return u, v
    raise AssertionError("complete code misses a point")  # pragma: no cover


def germ_at(g: PrefixMap, x: EndPoint) -> Germ:
    """Germ at x; its ``shift`` |u| - |v| is the log of the similarity modulus."""
    u, v = _lookup(g, x)
    return Germ(Vertex.of(tuple(map(int, u))), Vertex.of(tuple(map(int, v))))


def apply(g: PrefixMap, x: EndPoint) -> EndPoint:
    if any(not 0 <= a < g.n for a in x.prefix + x.cycle):
        raise PreconditionError(f"point is not over the alphabet 0..{g.n - 1}")
    u, v = _lookup(g, x)
    rest = _drop(x, len(u))
    return EndPoint(tuple(map(int, v)) + rest.prefix, rest.cycle)


def random_prefix_map(rng: random.Random, n: int, depth: int = 4, max_splits: int = 6) -> PrefixMap:
    """Random reduced map with both codes of depth at most ``depth``."""

    def code(splits: int) -> list[str]:
        leaves = [""]
        for _ in range(splits):
            open_ = [w for w in leaves if len(w) < depth]
            w = rng.choice(open_)
            leaves.remove(w)
            leaves.extend(w + str(a) for a in range(n))
        return leaves

    if max_splits > (n**depth - 1) // (n - 1):
        raise PreconditionError("too many splits for the depth bound")
    k = rng.randint(0, max_splits)
    dom, ran = code(k), code(k)
    rng.shuffle(ran)
    return make_prefix_map(n, zip(dom, ran))


# Generators of F, T and V as maps of the binary Cantor set.
X0 = make_prefix_map(2, [("00", "0"), ("01", "10"), ("1", "11")])
X1 = make_prefix_map(2, [("0", "0"), ("100", "10"), ("101", "110"), ("11", "111")])
C = make_prefix_map(2, [("0", "11"), ("10", "0"), ("11", "10")])
PI0 = make_prefix_map(2, [("0", "10"), ("10", "0"), ("11", "11")])
PI1 = make_prefix_map(2, [("0", "0"), ("10", "11"), ("11", "10")])
SWAP = make_prefix_map(2, [("0", "1"), ("1", "0")])


# -- Cuntz algebra ----------------------------------------------------------------


@dataclass(frozen=True)
class GaussianRational:
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @classmethod
    def of(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(Fraction(x))

    def __add__(self, o):
        o = GaussianRational.of(o)
        return GaussianRational(self.re + o.re, self.im + o.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-GaussianRational.of(o))

    def __mul__(self, o):
        o = GaussianRational.of(o)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}·i"
        return f"({self.re} + {self.im}·i)"


ONE = GaussianRational(Fraction(1))


@dataclass(frozen=True)
class CuntzElement:
    """Finite sum of coefficient times ``S_u S_v*``."""

    n: int
    terms: dict = field(hash=False)

    @classmethod
    def make(cls, n: int, terms) -> "CuntzElement":
        acc: dict[tuple[str, str], GaussianRational] = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for (u, v), c in items:
            acc[(u, v)] = acc.get((u, v), GaussianRational()) + GaussianRational.of(c)
        return cls(n, {k: c for k, c in sorted(acc.items()) if c})

    def __add__(self, other: "CuntzElement") -> "CuntzElement":
        _same_n(self, other)
        return CuntzElement.make(self.n, list(self.terms.items()) + list(other.terms.items()))

    def __sub__(self, other: "CuntzElement") -> "CuntzElement":
        return self + other.scale(-1)

    def scale(self, c) -> "CuntzElement":
        c = GaussianRational.of(c)
        return CuntzElement.make(self.n, [(k, v * c) for k, v in self.terms.items()])

    def __mul__(self, other: "CuntzElement") -> "CuntzElement":
        return mul(self, other)

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(
            f"{c}·S_{u or 'ε'} S*_{v or 'ε'}" for (u, v), c in self.terms.items()
        )

    def to_json(self) -> list:
        return [[u, v, str(c.re), str(c.im)] for (u, v), c in self.terms.items()]


def _same_n(a: CuntzElement, b: CuntzElement) -> None:
    if a.n != b.n:
        raise PreconditionError(f"alphabet mismatch: {a.n} vs {b.n}")


def unit(n: int) -> CuntzElement:
    return CuntzElement(n, {("", ""): ONE})


def term(n: int, u: str, v: str, c=1) -> CuntzElement:
    return CuntzElement.make(n, [((u, v), c)])


def mul(a: CuntzElement, b: CuntzElement) -> CuntzElement:
    _same_n(a, b)
    out = []
    for (u, v), c in a.terms.items():
        for (p, q), d in b.terms.items():
            if p.startswith(v):
                out.append(((u + p[len(v):], q), c * d))
            elif v.startswith(p):
                out.append(((u, q + v[len(p):]), c * d))
    return CuntzElement.make(a.n, out)


def star(a: CuntzElement) -> CuntzElement:
    return CuntzElement.make(a.n, [((v, u), c.conjugate()) for (u, v), c in a.terms.items()])


def normal_form(a: CuntzElement) -> dict:
    """Per weight |u|-|v|, every term expanded to the deepest |v| of that weight."""
    depth: dict[int, int] = {}
    for u, v in a.terms:
        w = len(u) - len(v)
        depth[w] = max(depth.get(w, 0), len(v))
    acc: dict = {}
    for (u, v), c in a.terms.items():
        for s in _words(a.n, depth[len(u) - len(v)] - len(v)):
            key = (u + s, v + s)
            acc[key] = acc.get(key, GaussianRational()) + c
    return {k: c for k, c in sorted(acc.items()) if c}


def equals(a: CuntzElement, b: CuntzElement) -> bool:
    _same_n(a, b)
    return not normal_form(a - b)


def act_on_words(a: CuntzElement, length: int) -> dict:
    """Matrix of ``a`` on basis vectors e_w, |w| = length, as {w: {w': c}}.

    S_u S_v* sends e_w to e_{u w'} when w = v w', else to 0.
    """
    if any(len(v) > length for _, v in a.terms):
        raise PreconditionError("word length shorter than a term's source word")
    out = {}
    for w in _words(a.n, length):
        col: dict = {}
        for (u, v), c in a.terms.items():
            if w.startswith(v):
                key = u + w[len(v):]
                col[key] = col.get(key, GaussianRational()) + c
        out[w] = {k: c for k, c in sorted(col.items()) if c}
    return out


def equal_by_action(a: CuntzElement, b: CuntzElement) -> bool:
    """Independent equality test through the path-vector action."""
    _same_n(a, b)
    length = max([len(v) for _, v in list(a.terms) + list(b.terms)] + [0])
    return act_on_words(a, length) == act_on_words(b, length)


def rho(g: PrefixMap) -> CuntzElement:
    """``Σ S_{v_i} S_{u_i}*``, acting on paths the way g acts on points."""
    return CuntzElement.make(g.n, [((v, u), 1) for u, v in g.pairs])


def cuntz_relation(n: int) -> CuntzElement:
    return CuntzElement.make(n, [((str(a), str(a)), 1) for a in range(n)])


@dataclass(frozen=True)
class RepresentationReport:
    checks: tuple[tuple[str, bool], ...]

    @property
    def ok(self) -> bool:
        return all(ok for _, ok in self.checks)

    def failures(self) -> list[str]:
        return [name for name, ok in self.checks if not ok]


def verify_representation(g: PrefixMap, h: PrefixMap) -> RepresentationReport:
    _same_alphabet(g, h)
    one = unit(g.n)
    rg, rh = rho(g), rho(h)
    checks = [
        ("multiplicative", equals(rho(compose(g, h)), mul(rg, rh))),
        ("star-inverse", equals(star(rg), rho(invert(g)))),
        ("unitary-left", equals(mul(star(rg), rg), one)),
        ("unitary-right", equals(mul(rg, star(rg)), one)),
        ("faithful", equals(rg, one) == g.is_identity()),
    ]
    return RepresentationReport(tuple(checks))


def finite_pair_representation(n: int, perm: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    """Permutation matrix M with M[perm[i]][i] = 1 (0-based)."""
    if sorted(perm) != list(range(n)):
        raise PreconditionError(f"not a permutation of 0..{n - 1}: {list(perm)}")
    return tuple(tuple(1 if perm[j] == i else 0 for j in range(n)) for i in range(n))


def symmetric_group(n: int) -> list[tuple[int, ...]]:
    return list(permutations(range(n)))
