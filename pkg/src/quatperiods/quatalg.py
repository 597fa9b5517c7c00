"""Definite quaternion algebras over Q.

Structure constants i^2 = a, j^2 = b, k = ij = -ji with a, b < 0.  All
coordinates are exact rationals; the reduced norm is then a positive definite
quaternary form and Brandt matrices downstream stay integral.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from ._linalg import frac_mat


class QuatAlgError(ValueError):
    pass


def _prime_factors(n):
    n = abs(int(n))
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _is_squarefree(n):
    n = abs(int(n))
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


def _is_prime(p):
    p = int(p)
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def _legendre(a, p):
    a %= p
    if a == 0:
        return 0
    t = pow(a, (p - 1) // 2, p)
    return 1 if t == 1 else -1


def _split_valuation(x, p):
    """x = p^v * u with u a p-unit; returns (v, u) for a nonzero rational."""
    x = Fraction(x)
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v, Fraction(num, den)


def hilbert_symbol(a, b, p):
    """Hilbert symbol (a, b)_p in {+1, -1}; p a prime or the string 'inf'.

    +1 iff z^2 = a x^2 + b y^2 has a nontrivial solution over the completion.
    """
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise QuatAlgError("hilbert symbol needs nonzero arguments")
    if p == "inf":
        return -1 if (a < 0 and b < 0) else 1
    p = int(p)
    if not _is_prime(p):
        raise QuatAlgError(f"{p} is not prime")
    alpha, u = _split_valuation(a, p)
    beta, v = _split_valuation(b, p)
    if p != 2:
        # (a,b)_p = (-1)^{alpha beta eps(p)} (u|p)^beta (v|p)^alpha
        sign = 1
        if alpha % 2 and beta % 2 and (p - 1) // 2 % 2:
            sign = -sign
        # Legendre symbols of p-units: use numerator*denominator trick
        def unit_symbol(w):
            return _legendre(w.numerator * w.denominator, p)
        if beta % 2:
            sign *= unit_symbol(u)
        if alpha % 2:
            sign *= unit_symbol(v)
        return sign
    # p = 2: (a,b)_2 = (-1)^{eps(u)eps(v) + alpha omega(v) + beta omega(u)}
    def eps(w):
        t = (w.numerator * pow(w.denominator, -1, 8)) % 8
        return ((t - 1) // 2) % 2

    def omega(w):
        t = (w.numerator * pow(w.denominator, -1, 8)) % 8
        return ((t * t - 1) // 8) % 2

    e = eps(u) * eps(v) + (alpha % 2) * omega(v) + (beta % 2) * omega(u)
    return -1 if e % 2 else 1


class QuaternionAlgebra:
    """Q-algebra with basis 1, i, j, k; i^2 = a, j^2 = b, k = ij = -ji."""

    def __init__(self, a, b):
        self.a = Fraction(a)
        self.b = Fraction(b)
        if self.a >= 0 or self.b >= 0:
            raise QuatAlgError("need a < 0 and b < 0 for a definite algebra")
        self.ramified_finite = self._ramified_set()
        # product formula: with infinity ramified, |finite set| must be odd
        if len(self.ramified_finite) % 2 != 1:
            raise QuatAlgError("product formula violated (bad structure constants)")

    @property
    def definite(self):
        return True

    def _ramified_set(self):
        candidates = {2}
        for x in (self.a, self.b):
            candidates.update(_prime_factors(x.numerator))
            candidates.update(_prime_factors(x.denominator))
        return tuple(sorted(p for p in candidates
                            if hilbert_symbol(self.a, self.b, p) == -1))

    @property
    def discriminant(self):
        d = 1
        for p in self.ramified_finite:
            d *= p
        return d

    def one(self):
        return Quaternion(self, 1, 0, 0, 0)

    def element(self, coords):
        return Quaternion(self, *coords)

    def gens(self):
        return (Quaternion(self, 0, 1, 0, 0),
                Quaternion(self, 0, 0, 1, 0),
                Quaternion(self, 0, 0, 0, 1))

    def norm_gram(self):
        """Gram of B(x,y) = tr(x * conj(y)) on the basis 1, i, j, k."""
        a, b = self.a, self.b
        return frac_mat([[2, 0, 0, 0],
                         [0, -2 * a, 0, 0],
                         [0, 0, -2 * b, 0],
                         [0, 0, 0, 2 * a * b]])

    def trace_zero_gram(self):
        """Gram of B restricted to span(i, j, k)."""
        a, b = self.a, self.b
        return frac_mat([[-2 * a, 0, 0], [0, -2 * b, 0], [0, 0, 2 * a * b]])

    def to_json(self):
        return {"a": f"{self.a.numerator}/{self.a.denominator}",
                "b": f"{self.b.numerator}/{self.b.denominator}",
                "disc": self.discriminant}

    def __eq__(self, other):
        return isinstance(other, QuaternionAlgebra) and \
            (self.a, self.b) == (other.a, other.b)

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f"QuaternionAlgebra({self.a}, {self.b}; disc {self.discriminant})"


class Quaternion:
    __slots__ = ("alg", "w", "x", "y", "z")

    def __init__(self, alg, w, x, y, z):
        self.alg = alg
        self.w = Fraction(w)
        self.x = Fraction(x)
        self.y = Fraction(y)
        self.z = Fraction(z)

    def coords(self):
        return [self.w, self.x, self.y, self.z]

    def __add__(self, other):
        return Quaternion(self.alg, self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    def __sub__(self, other):
        return Quaternion(self.alg, self.w - other.w, self.x - other.x,
                          self.y - other.y, self.z - other.z)

    def __neg__(self):
        return Quaternion(self.alg, -self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            return Quaternion(self.alg, self.w * c, self.x * c,
                              self.y * c, self.z * c)
        a, b = self.alg.a, self.alg.b
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return Quaternion(
            self.alg,
            w1 * w2 + a * x1 * x2 + b * y1 * y2 - a * b * z1 * z2,
            w1 * x2 + x1 * w2 - b * y1 * z2 + b * z1 * y2,
            w1 * y2 + y1 * w2 + a * x1 * z2 - a * z1 * x2,
            w1 * z2 + z1 * w2 + x1 * y2 - y1 * x2,
        )

    def __rmul__(self, other):
        return self * other  # scalars commute

    def conj(self):
        return Quaternion(self.alg, self.w, -self.x, -self.y, -self.z)

    def trace(self):
        return 2 * self.w

    def norm(self):
        a, b = self.alg.a, self.alg.b
        return (self.w ** 2 - a * self.x ** 2 - b * self.y ** 2
                + a * b * self.z ** 2)

    def is_zero(self):
        return not (self.w or self.x or self.y or self.z)

    def inverse(self):
        n = self.norm()
        if n == 0:
            raise QuatAlgError("zero quaternion has no inverse")
        return self.conj() * (Fraction(1) / n)

    def __eq__(self, other):
        return isinstance(other, Quaternion) and self.alg == other.alg and \
            self.coords() == other.coords()

    def __hash__(self):
        return hash((self.alg, self.w, self.x, self.y, self.z))

    def __repr__(self):
        return f"({self.w} + {self.x}i + {self.y}j + {self.z}k)"


def similitude_action(x1, x2, y):
    """sigma_{x1,x2}(y) = x1 * y * x2^{-1}; scales norms by n(x1)/n(x2)."""
    if x2.is_zero():
        raise QuatAlgError("x2 must be invertible")
    if x1.is_zero():
        raise QuatAlgError("x1 must be invertible")
    return x1 * y * x2.inverse()


def left_mul_matrix(q):
    """Matrix M with row_j = coords(q * e_j), so coords(q*y) = y_coords * M."""
    alg = q.alg
    return [list(map(Fraction, (q * e).coords()))
            for e in (alg.one(),) + alg.gens()]


def right_mul_matrix(q):
    """Matrix of y -> y*q on basis 1, i, j, k (rows are images)."""
    alg = q.alg
    return [list(map(Fraction, (e * q).coords()))
            for e in (alg.one(),) + alg.gens()]


@lru_cache(maxsize=None)
def algebra_for_discriminant(n1):
    """The definite quaternion algebra ramified exactly at primes(n1) and inf.

    n1 must be squarefree with an odd number of prime factors.  Search policy:
    (-1,-1) for n1 = 2, (-1,-p) for p = 3 mod 4, otherwise small structure
    constants by increasing |a| + |b|.
    """
    n1 = int(n1)
    if n1 < 2 or not _is_squarefree(n1):
        raise QuatAlgError(f"{n1} is not a valid squarefree discriminant")
    primes = _prime_factors(n1)
    if len(primes) % 2 == 0:
        raise QuatAlgError(
            f"{n1} has an even number of prime factors; no definite algebra")
    target = tuple(sorted(primes))
    if n1 == 2:
        return QuaternionAlgebra(-1, -1)
    if _is_prime(n1) and n1 % 4 == 3:
        alg = QuaternionAlgebra(-1, -n1)
        if alg.ramified_finite == target:
            return alg
    for total in range(2, 4 * n1 + 64):
        for abs_a in range(1, total):
            abs_b = total - abs_a
            try:
                alg = QuaternionAlgebra(-abs_a, -abs_b)
            except QuatAlgError:
                continue
            if alg.ramified_finite == target:
                return alg
    raise QuatAlgError(f"no algebra found for discriminant {n1}")
