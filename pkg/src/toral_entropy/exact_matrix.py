"""Exact integer linear algebra and polynomial tests.

Everything here uses Python integers (or ``Fraction`` for intermediate
division), so there is no overflow and no rounding.  Matrices are tiny
(desk scale) so plain nested tuples are fine.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import DegreeTooLarge

MAX_IRREDUCIBILITY_DEGREE = 8


@dataclass(frozen=True)
class IntegerMatrix:
    """Square integer matrix, stored row-major as a tuple of tuples."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.rows)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise ValueError("matrix must be square and non-empty")
        object.__setattr__(self, "rows", rows)

    @property
    def l(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, l: int) -> "IntegerMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(l)) for i in range(l)))

    @classmethod
    def from_json(cls, obj) -> "IntegerMatrix":
        """Build from ``{"l": int, "rows": [[int, ...], ...]}`` (string or dict)."""
        if isinstance(obj, str):
            obj = json.loads(obj)
        rows = obj["rows"]
        for row in rows:
            for v in row:
                if isinstance(v, bool) or not isinstance(v, int):
                    raise ValueError(f"matrix entries must be integers, got {v!r}")
        m = cls(tuple(tuple(r) for r in rows))
        if "l" in obj and int(obj["l"]) != m.l:
            raise ValueError(f"declared l={obj['l']} but matrix is {m.l}x{m.l}")
        return m

    def to_json(self) -> dict:
        return {"l": self.l, "rows": [list(r) for r in self.rows]}

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        cols = list(zip(*other.rows))
        return IntegerMatrix(
            tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in cols) for row in self.rows)
        )

    def __pow__(self, k: int) -> "IntegerMatrix":
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = IntegerMatrix.identity(self.l)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def trace(self) -> int:
        return sum(self.rows[i][i] for i in range(self.l))

    def tolist(self) -> list:
        return [list(r) for r in self.rows]


def determinant(A: IntegerMatrix) -> int:
    """Fraction-free Bareiss elimination."""
    n = A.l
    M = [list(r) for r in A.rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial, coefficients in ascending degree order."""

    coeffs: tuple

    def __post_init__(self):
        c = [int(v) for v in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c) if c else (0,))

    @classmethod
    def from_descending(cls, coeffs: Sequence[int]) -> "IntPolynomial":
        return cls(tuple(reversed(list(coeffs))))

    @property
    def degree(self) -> int:
        if self.coeffs == (0,):
            return -1
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1]

    def is_monic(self) -> bool:
        return self.leading == 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __mul__(self, other: "IntPolynomial") -> "IntPolynomial":
        return IntPolynomial(_mul(self.coeffs, other.coeffs))

    def __eq__(self, other):
        return isinstance(other, IntPolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial(tuple(i * c for i, c in enumerate(self.coeffs))[1:] or (0,))

    def divides(self, other: "IntPolynomial") -> bool:
        """True iff ``self`` divides ``other`` over Z (self monic or primitive)."""
        _, r = _divmod_q(other.coeffs, self.coeffs)
        return not any(r)

    def exact_quotient(self, divisor: "IntPolynomial") -> "IntPolynomial":
        q, r = _divmod_q(self.coeffs, divisor.coeffs)
        if any(r) or any(v.denominator != 1 for v in q):
            raise ValueError("division is not exact over Z")
        return IntPolynomial(tuple(int(v) for v in q))

    def is_reciprocal(self) -> bool:
        """p(x) = +-x^n p(1/x), i.e. palindromic or anti-palindromic coefficients."""
        c = self.coeffs
        return c == c[::-1] or c == tuple(-v for v in c[::-1])

    def norm2(self) -> float:
        return math.sqrt(sum(c * c for c in self.coeffs))

    def __str__(self):
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if i == 0:
                body = str(a)
            else:
                mono = "x" if i == 1 else f"x^{i}"
                body = mono if a == 1 else f"{a}*{mono}"
            terms.append((sign, body))
        if not terms:
            return "0"
        s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            s += f" {sign} {body}"
        return s


def _mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _trim(c):
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _divmod_q(num, den):
    """Polynomial long division over Q; ascending coefficient lists."""
    num = [Fraction(v) for v in _trim(num)]
    den = [Fraction(v) for v in _trim(den)]
    if den == [0]:
        raise ZeroDivisionError("polynomial division by zero")
    if len(num) < len(den):
        return [Fraction(0)], num
    q = [Fraction(0)] * (len(num) - len(den) + 1)
    r = num[:]
    lead = den[-1]
    for i in range(len(q) - 1, -1, -1):
        coef = r[i + len(den) - 1] / lead
        q[i] = coef
        if coef:
            for j, d in enumerate(den):
                r[i + j] -= coef * d
    r = _trim(r[: len(den) - 1] or [Fraction(0)])
    return q, r


def _primitive(c) -> IntPolynomial:
    """Scale a rational coefficient list to a primitive integer polynomial with positive lead."""
    c = [Fraction(v) for v in _trim(c)]
    lcm = 1
    for v in c:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    ints = [int(v * lcm) for v in c]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    g = g or 1
    if ints[-1] < 0:
        g = -g
    return IntPolynomial(tuple(v // g for v in ints))


def poly_gcd(p: IntPolynomial, q: IntPolynomial) -> IntPolynomial:
    """Greatest common divisor over Q, returned primitive with positive leading coefficient."""
    a, b = list(p.coeffs), list(q.coeffs)
    while _trim(b) != [0]:
        _, r = _divmod_q(a, b)
        a, b = b, r
    return _primitive(a)


def square_free_decomposition(p: IntPolynomial) -> list:
    """Yun/Musser decomposition: ``[(factor, multiplicity), ...]`` with p = prod factor^mult."""
    if p.degree < 1:
        return []
    out = []
    c = poly_gcd(p, p.derivative())
    w = _primitive(_divmod_q(p.coeffs, c.coeffs)[0])
    i = 1
    while w.degree >= 1:
        y = poly_gcd(w, c)
        z = _primitive(_divmod_q(w.coeffs, y.coeffs)[0])
        if z.degree >= 1:
            out.append((z, i))
        c = _primitive(_divmod_q(c.coeffs, y.coeffs)[0])
        w = y
        i += 1
    return out


def char_poly(A: IntegerMatrix) -> IntPolynomial:
    """det(xI - A) by the Faddeev-LeVerrier recursion (all divisions are exact)."""
    n = A.l
    a = [list(r) for r in A.rows]
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    M = [[0] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{n-k+1} I
        AM = [[sum(a[i][t] * M[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        for i in range(n):
            AM[i][i] += coeffs[n - k + 1]
        M = AM
        tr = sum(sum(a[i][t] * M[t][i] for t in range(n)) for i in range(n))
        assert tr % k == 0
        coeffs[n - k] = -tr // k
    return IntPolynomial(tuple(coeffs))


def companion(p: IntPolynomial) -> IntegerMatrix:
    """Companion matrix whose characteristic polynomial is the monic ``p``."""
    if not p.is_monic() or p.degree < 1:
        raise ValueError("companion matrix needs a monic polynomial of degree >= 1")
    n = p.degree
    rows = []
    for i in range(n):
        row = [0] * n
        if i > 0:
            row[i - 1] = 1
        row[n - 1] = -p.coeffs[i]
        rows.append(tuple(row))
    return IntegerMatrix(tuple(rows))


def _divisors(n: int) -> list:
    n = abs(n)
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def _mignotte_ok(q, d, p_norm):
    return all(abs(c) <= math.comb(d, i) * p_norm + 1e-9 for i, c in enumerate(q))


def _newton_to_monomial(nodes, coefs):
    """Convert Newton-form coefficients to ascending monomial coefficients."""
    poly = [Fraction(0)]
    for c, x0 in zip(reversed(coefs), reversed(nodes[: len(coefs)])):
        # poly = poly * (x - x0) + c
        shifted = [Fraction(0)] + poly
        for i in range(len(poly)):
            shifted[i] -= x0 * poly[i]
        shifted[0] += c
        poly = shifted
    return _trim(poly)


def find_factor(p: IntPolynomial, degree: int):
    """Search for a monic integer factor of ``p`` of the given degree (Kronecker's method).

    Candidate factors are pinned down by their values at ``degree + 1`` integer
    nodes, each of which must divide the corresponding value of ``p``.  Divided
    differences of an integer polynomial at integer nodes are integers, which
    prunes the search long before interpolation.
    """
    n = p.degree
    if degree < 1 or degree >= n:
        return None
    radius = max(8, n + 3)
    values = {}
    for a in range(-radius, radius + 1):
        v = p(a)
        if v == 0:
            if degree == 1:
                return IntPolynomial((-a, 1))
            continue
        values[a] = v
    nodes = sorted(values, key=lambda a: (len(_divisors(values[a])), abs(a)))[: degree + 1]
    choices = [[s * d for d in _divisors(values[a]) for s in (1, -1)] for a in nodes]
    p_norm = p.norm2()

    # table[i][j] = divided difference over nodes j..i
    table = []

    def dfs(i):
        if i == degree + 1:
            q = _newton_to_monomial(nodes, [table[t][0] for t in range(degree + 1)])
            if len(q) != degree + 1 or q[-1] != 1 or any(v.denominator != 1 for v in q):
                return None
            qi = [int(v) for v in q]
            if not _mignotte_ok(qi, degree, p_norm):
                return None
            cand = IntPolynomial(tuple(qi))
            return cand if cand.divides(p) else None
        for v in choices[i]:
            row = [Fraction(v)]
            ok = True
            for j in range(i - 1, -1, -1):
                dd = (row[-1] - table[i - 1][j]) / (nodes[i] - nodes[j])
                if dd.denominator != 1:
                    ok = False
                    break
                row.append(dd)
            if not ok:
                continue
            stored = row[::-1]
            # the top divided difference is the leading coefficient
            if i == degree and stored[0] != 1:
                continue
            table.append(stored)
            found = dfs(i + 1)
            table.pop()
            if found is not None:
                return found
        return None

    return dfs(0)


def is_irreducible(p: IntPolynomial, max_degree: int = MAX_IRREDUCIBILITY_DEGREE) -> bool:
    """Irreducibility over Q of a monic integer polynomial, decided exactly."""
    if not p.is_monic() or p.degree < 1:
        raise ValueError("is_irreducible expects a monic polynomial of degree >= 1")
    if p.degree > max_degree:
        raise DegreeTooLarge(f"degree {p.degree} exceeds the exact factor-search cap {max_degree}")
    n = p.degree
    if n == 1:
        return True
    for d in range(1, n // 2 + 1):
        if find_factor(p, d) is not None:
            return False
    return True


def euler_phi(n: int) -> int:
    result, m, f = n, n, 2
    while f * f <= m:
        if m % f == 0:
            while m % f == 0:
                m //= f
            result -= result // f
        f += 1
    if m > 1:
        result -= result // m
    return result


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> IntPolynomial:
    """The n-th cyclotomic polynomial, by dividing x^n - 1 by the proper-divisor factors."""
    if n < 1:
        raise ValueError("n must be positive")
    p = IntPolynomial(tuple([-1] + [0] * (n - 1) + [1]))
    for d in range(1, n):
        if n % d == 0:
            p = p.exact_quotient(cyclotomic_poly(d))
    return p


def cyclotomic_indices(max_phi: int) -> list:
    """All n with phi(n) <= max_phi (finite since phi(n) >= sqrt(n/2))."""
    bound = 2 * max_phi * max_phi + 2
    return [n for n in range(1, bound + 1) if euler_phi(n) <= max_phi]


def cyclotomic_factor_test(p: IntPolynomial) -> list:
    """Every n such that the n-th cyclotomic polynomial divides ``p``."""
    if p.degree < 1:
        return []
    return [n for n in cyclotomic_indices(p.degree) if cyclotomic_poly(n).divides(p)]


def random_unimodular(l: int, rng, steps: int = 6) -> IntegerMatrix:
    """Product of random elementary integer operations; determinant +-1."""
    M = [[int(i == j) for j in range(l)] for i in range(l)]
    for _ in range(steps):
        i, j = rng.sample(range(l), 2)
        c = rng.choice([-2, -1, 1, 2])
        for t in range(l):
            M[i][t] += c * M[j][t]
    if rng.random() < 0.5:
        M[0] = [-v for v in M[0]]
    return IntegerMatrix(tuple(tuple(r) for r in M))


def adjugate_inverse(P: IntegerMatrix) -> IntegerMatrix:
    """Exact inverse of a unimodular integer matrix."""
    d = determinant(P)
    if abs(d) != 1:
        raise ValueError("matrix is not unimodular")
    n = P.l
    inv = [[0] * n for _ in range(n)]
    for i, j in itertools.product(range(n), repeat=2):
        minor = IntegerMatrix(
            tuple(tuple(P.rows[r][c] for c in range(n) if c != j) for r in range(n) if r != i)
        ) if n > 1 else None
        cof = (-1) ** (i + j) * (determinant(minor) if minor is not None else 1)
        inv[j][i] = cof * d
    return IntegerMatrix(tuple(tuple(r) for r in inv))


def poly_from_roots_int(roots: Iterable[int]) -> IntPolynomial:
    p = IntPolynomial((1,))
    for r in roots:
        p = p * IntPolynomial((-r, 1))
    return p
