"""Newform data, exact Euler factor algebra, numerical central values.

Factor algebra is exact over Q throughout (reciprocal-root power sums make
tensor products and symmetric squares one-liners); floating point enters only
in the smoothed approximate-functional-equation evaluator, which works at a
configurable mpmath precision and reports an error estimate.

Normalization bookkeeping: polynomials are stored in the arithmetic
normalization (coefficients in Z[a_p]); each factor records the shift that
moves the functional-equation center to s = 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .quatalg import _is_prime, _prime_factors


class LSeriesError(ValueError):
    pass


# ---------------------------------------------------------------------------
# newform records
# ---------------------------------------------------------------------------

@dataclass
class NewformRecord:
    label: str
    level: int
    weight: int
    ap: dict                 # prime -> integer a_p
    al_signs: dict           # prime | level -> +-1
    source: str = "file"

    def a(self, p):
        if p not in self.ap:
            raise LSeriesError(f"{self.label}: no a_{p} in the data file")
        return self.ap[p]

    def pmax(self):
        return max(self.ap)


def ingest(path):
    """Parse a newform eigen-data file.

    Format (one record per line):
    label|N|k|eps_p list as p:+-1 comma-separated|a_p list as p:value
    Rejects malformed rows and Ramanujan violations, naming the row.
    """
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("|")
            if len(parts) != 5:
                raise LSeriesError(f"row {lineno}: expected 5 fields")
            label, level_s, weight_s, eps_s, ap_s = parts
            try:
                level = int(level_s)
                weight = int(weight_s)
                eps = {}
                for chunk in filter(None, eps_s.split(",")):
                    p_s, v_s = chunk.split(":")
                    eps[int(p_s)] = int(v_s)
                ap = {}
                for chunk in filter(None, ap_s.split(",")):
                    p_s, v_s = chunk.split(":")
                    ap[int(p_s)] = int(v_s)
            except ValueError:
                raise LSeriesError(f"row {lineno}: malformed row") from None
            for p, v in eps.items():
                if v not in (1, -1) or level % p:
                    raise LSeriesError(f"row {lineno}: bad sign data at {p}")
            for p, a in ap.items():
                if not _is_prime(p):
                    raise LSeriesError(f"row {lineno}: {p} is not prime")
                if a * a > 4 * p ** (weight - 1):
                    raise LSeriesError(
                        f"row {lineno}: Ramanujan violation |a_{p}|={abs(a)}")
            records.append(NewformRecord(label, level, weight, ap, eps))
    return records


def resolve_label(records, label):
    hits = [r for r in records if r.label == label]
    if len(hits) != 1:
        raise LSeriesError(f"label {label}: {len(hits)} matches in the file")
    return hits[0]


# ---------------------------------------------------------------------------
# Satake parameters and Euler factors
# ---------------------------------------------------------------------------

@dataclass
class SatakeParams:
    """The pair {alpha, beta} stored exactly as (a_p, p^{k-1})."""
    prime: int
    a: Fraction
    pk1: Fraction            # alpha * beta = p^{k-1}
    analytic: bool = False   # True once scaled to |alpha| = 1 bookkeeping

    @classmethod
    def of(cls, record, p):
        if record.level % p == 0:
            raise LSeriesError(f"{p} divides the level; not a good prime")
        return cls(p, Fraction(record.a(p)),
                   Fraction(p ** (record.weight - 1)))

    def factor(self):
        """Local L-factor 1 - a_p X + p^{k-1} X^2 (arithmetic)."""
        return EulerFactor(self.prime, [Fraction(1), -self.a, self.pk1],
                           shift=Fraction(0))


@dataclass
class EulerFactor:
    """Local factor as a polynomial in X = p^{-s}, constant term 1.

    shift: evaluating the analytic (s -> 1-s symmetric) normalization means
    substituting X = p^{-s-shift}.
    """
    prime: int
    coeffs: list
    shift: Fraction = Fraction(0)

    def __post_init__(self):
        self.coeffs = [Fraction(c) for c in self.coeffs]
        if not self.coeffs or self.coeffs[0] != 1:
            raise LSeriesError("Euler factor must have constant term 1")

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def power_sums(self, count):
        """Power sums of reciprocal roots via Newton's identities."""
        e = [(-1) ** k * self.coeffs[k] if k < len(self.coeffs) else Fraction(0)
             for k in range(count + 1)]
        ps = [Fraction(0)] * (count + 1)
        for k in range(1, count + 1):
            acc = Fraction(0)
            for i in range(1, k):
                acc += (-1) ** (i - 1) * e[i] * ps[k - i]
            ps[k] = acc + (-1) ** (k - 1) * Fraction(k) * e[k]
        return ps[1:]

    @classmethod
    def from_power_sums(cls, prime, ps, degree, shift=Fraction(0)):
        e = [Fraction(1)]
        for k in range(1, degree + 1):
            acc = Fraction(0)
            for i in range(1, k + 1):
                acc += (-1) ** (i - 1) * e[k - i] * ps[i - 1]
            e.append(acc / k)
        coeffs = [(-1) ** k * e[k] for k in range(degree + 1)]
        return cls(prime, coeffs, shift)

    def tensor(self, other, shift=None):
        """Factor with reciprocal roots r_i * s_j (Rankin-Selberg tensor)."""
        if self.prime != other.prime:
            raise LSeriesError("tensor needs matching primes")
        d = self.degree * other.degree
        ps1 = self.power_sums(d)
        ps2 = other.power_sums(d)
        ps = [ps1[k] * ps2[k] for k in range(d)]
        if shift is None:
            shift = self.shift + other.shift
        return EulerFactor.from_power_sums(self.prime, ps, d, shift)

    def sym2(self, shift=None):
        """Symmetric square: roots r_i r_j for i <= j."""
        d = self.degree * (self.degree + 1) // 2
        ps1 = self.power_sums(2 * d)
        ps = [(ps1[k] ** 2 + ps1[2 * k + 1]) / 2 for k in range(d)]
        if shift is None:
            shift = 2 * self.shift
        return EulerFactor.from_power_sums(self.prime, ps, d, shift)

    def scale_roots(self, c, shift=None):
        c = Fraction(c)
        coeffs = [self.coeffs[k] * c ** k for k in range(len(self.coeffs))]
        return EulerFactor(self.prime, coeffs,
                           self.shift if shift is None else shift)

    def multiply(self, other):
        """Product of factors (concatenated root multisets)."""
        if self.prime != other.prime or self.shift != other.shift:
            raise LSeriesError("factor product needs matching prime and shift")
        a, b = self.coeffs, other.coeffs
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] += x * y
        return EulerFactor(self.prime, out, self.shift)

    def local_coefficients(self, count):
        """Dirichlet coefficients of 1/f at p^0..p^count (arithmetic)."""
        inv = [Fraction(1)]
        for m in range(1, count + 1):
            acc = Fraction(0)
            for k in range(1, min(m, self.degree) + 1):
                acc -= self.coeffs[k] * inv[m - k]
            inv.append(acc)
        return inv

    def evaluate(self, s, bits=80):
        """Value of 1/f(p^{-s-shift}) at real s (analytic normalization)."""
        with mpmath.workprec(bits):
            x = mpmath.power(self.prime, -(mpmath.mpf(1) * s
                                           + mpmath.mpf(self.shift.numerator)
                                           / self.shift.denominator))
            val = sum(mpmath.mpf(c.numerator) / c.denominator * x ** k
                      for k, c in enumerate(self.coeffs))
            return 1 / val


# ---------------------------------------------------------------------------
# the paper's factor combinations
# ---------------------------------------------------------------------------

def good_factor(record, p):
    """Degree-2 arithmetic factor of a newform at a good prime."""
    return SatakeParams.of(record, p).factor()


def bad_factor(record, p):
    """Degree-1 factor 1 - a_p X at p || N."""
    if record.level % p:
        raise LSeriesError(f"{p} is a good prime for {record.label}")
    return EulerFactor(p, [Fraction(1), -Fraction(record.a(p))])


def triple_factor(h, f1, f2, p):
    """Degree-8 good-prime factor of the triple product L(h, f1, f2; s).

    Arithmetic coefficients in Z[a_p]; the analytic center s = 1/2 is reached
    with shift (k1 + k2 + k3 - 3)/2.
    """
    for r in (h, f1, f2):
        if r.level % p == 0:
            raise LSeriesError(f"{p} divides a level; use the bad-prime table")
    shift = Fraction(h.weight + f1.weight + f2.weight - 3, 2)
    t = good_factor(h, p).tensor(good_factor(f1, p)).tensor(good_factor(f2, p))
    return EulerFactor(p, t.coeffs, shift)


def triple_factor_steinberg(h, f1, f2, p):
    """Bad-prime factor when all three forms are Steinberg at p (weight 2).

    Convention (documented, not from the paper): the Weil-Deligne tensor
    sp(2)^{x3} = sp(4) + sp(2) + sp(2) leaves three Frobenius lines, giving
    (1 - c X)(1 - c p X)^2 with c = a_p(h) a_p(f1) a_p(f2), and local
    conductor exponent 5.
    """
    for r in (h, f1, f2):
        if r.level % p or r.weight != 2:
            raise LSeriesError("Steinberg triple factor needs weight 2, p||N")
    c = Fraction(h.a(p) * f1.a(p) * f2.a(p))
    one = EulerFactor(p, [1, -c], shift=Fraction(3, 2))
    two = EulerFactor(p, [1, -c * p], shift=Fraction(3, 2))
    return one.multiply(two).multiply(two)


def triple_conductor(n):
    """Conductor N^5 for an all-Steinberg squarefree-level weight-2 triple."""
    return n ** 5


def triple_gamma_shifts():
    """Gamma_R shifts of the weight-2 triple product, analytic normalization:
    Gamma_C(s+1/2)^3 Gamma_C(s+3/2)."""
    return [Fraction(1, 2), Fraction(3, 2)] * 3 + [Fraction(3, 2), Fraction(5, 2)]


def sym2_factor(record, p):
    """Symmetric square local factor (degree 3 good, 1 bad), shift k-1."""
    shift = Fraction(record.weight - 1)
    if record.level % p == 0:
        a = Fraction(record.a(p))
        return EulerFactor(p, [1, -a * a * p ** (record.weight - 2)],
                           shift=shift)
    s2 = good_factor(record, p).sym2()
    return EulerFactor(p, s2.coeffs, shift)


def sym2_conductor(record):
    return record.level ** 2


def sym2_gamma_shifts(weight=2):
    """Gamma_R shifts for Sym^2 of a weight-2 form: Gamma_C(s+1) Gamma_R(s)."""
    if weight != 2:
        raise LSeriesError("documented defaults cover weight 2 only")
    return [Fraction(0), Fraction(1), Fraction(2)]


def spin_split_check(h1, h2, p):
    """Degree-4 spin factor of the lift equals L_p(h1) * L_p(h2).

    The spin parameters of the lift are defined as the union of the two
    Satake pairs, so this is an identity by construction; it guards the
    normalization-shift bookkeeping.
    """
    f1 = good_factor(h1, p)
    f2 = good_factor(h2, p)
    ps = [f1.power_sums(4)[k] + f2.power_sums(4)[k] for k in range(4)]
    spin = EulerFactor.from_power_sums(p, ps, 4)
    return spin.coeffs == f1.multiply(f2).coeffs


def sym2_identity_check(h1, h2, p):
    """Exact factorization identities of the symmetric square of the spin.

    Sym^2(spin_4) = Sym^2(h1) * Sym^2(h2) * (h1 x h2)   (degrees 10 = 3+3+4)
    std_5 = zeta_p * (h1 x h2 scaled by p^{1-k})        (degrees 5 = 1+4)
    """
    f1 = good_factor(h1, p)
    f2 = good_factor(h2, p)
    ps = [f1.power_sums(20)[k] + f2.power_sums(20)[k] for k in range(20)]
    spin = EulerFactor.from_power_sums(p, ps, 4)
    lhs = spin.sym2()
    rhs = f1.sym2().multiply(f2.sym2()).multiply(f1.tensor(f2))
    ok1 = lhs.coeffs == rhs.coeffs and lhs.degree == 10
    # degree-5 standard: 1 union (tensor roots scaled by p^{1-k})
    k = h1.weight
    tens = f1.tensor(f2).scale_roots(Fraction(1, p ** (k - 1)))
    zeta = EulerFactor(p, [1, -1])
    std5 = zeta.multiply(tens)
    ok2 = std5.degree == 5 and std5.coeffs[1] == -1 - (
        Fraction(h1.a(p) * h2.a(p), p ** (k - 1)))
    return ok1 and ok2


def asai_combination(asai_factor, satake):
    """L_p(h x f, s) = L^{Asai}_p(f, alpha X) L^{Asai}_p(f, beta X).

    asai_factor: the Asai local polynomial (caller-supplied; the Hilbert side
    is out of scope here).  The product is expanded symmetrically in the
    Satake pair, so the result is exact in (a_p, p^{k-1}).
    """
    a = asai_factor.coeffs
    s = satake.a
    q = satake.pk1
    deg = 2 * (len(a) - 1)
    # V_k = alpha^k + beta^k (Lucas recursion)
    v = [Fraction(2), s]
    while len(v) <= deg:
        v.append(s * v[-1] - q * v[-2])
    out = [Fraction(0)] * (deg + 1)
    n = len(a)
    for i in range(n):
        out[2 * i] += a[i] * a[i] * q ** i
        for j in range(i + 1, n):
            out[i + j] += a[i] * a[j] * q ** i * v[j - i]
    return EulerFactor(satake.prime, out, asai_factor.shift)


# ---------------------------------------------------------------------------
# Dirichlet coefficients and the smoothed AFE evaluator
# ---------------------------------------------------------------------------

def dirichlet_coefficients(factors, count, bits=80):
    """Analytic-normalization coefficients b_1..b_count as mpf.

    factors: dict prime -> EulerFactor (each with its shift).  Primes missing
    from the dict contribute trivial local factors.
    """
    with mpmath.workprec(bits):
        b = [None] + [mpmath.mpf(1)] * count
        for p in sorted(factors):
            f = factors[p]
            mmax = int(math.log(count, p)) + 1
            local = f.local_coefficients(mmax)
            shift = mpmath.mpf(f.shift.numerator) / f.shift.denominator
            scale = [mpmath.power(p, -m * shift) for m in range(mmax + 1)]
            loc = [mpmath.mpf(c.numerator) / c.denominator * scale[m]
                   for m, c in enumerate(local)]
            for n in range(2, count + 1):
                v = 0
                nn = n
                while nn % p == 0:
                    nn //= p
                    v += 1
                if v:
                    b[n] *= loc[v]
        # zero out coefficients touched by primes with no factor supplied
        known = set(factors)
        for n in range(2, count + 1):
            nn = n
            ok = True
            d = 2
            while d * d <= nn:
                if nn % d == 0:
                    if d not in known:
                        ok = False
                        break
                    while nn % d == 0:
                        nn //= d
                d += 1
            if ok and nn > 1 and nn not in known:
                ok = False
            if not ok:
                raise LSeriesError(
                    f"no Euler factor supplied for a prime dividing {n}")
        return b


@dataclass
class CentralValue:
    value: float
    error: float
    lam: float              # completed-Lambda value
    terms: int
    details: dict = field(default_factory=dict)


def central_value(factors, gamma_shifts, conductor, sign, s0=Fraction(1, 2),
                  bits=100, terms=None, kernel_width=4, poles=()):
    """Smoothed approximate functional equation at s0.

    Lambda(s) = Q^{s/2} prod_j Gamma_R(s + mu_j) L(s) with Lambda(s) =
    sign * Lambda(1-s); poles may be declared as (location, residue) pairs of
    Lambda.  Returns the finite part L(s0) with an error estimate combining
    quadrature refinement and a Ramanujan-type tail bound.

    Raises when the supplied factors do not reach the needed cutoff.
    """
    with mpmath.workprec(bits):
        q = mpmath.mpf(conductor)
        mus = [mpmath.mpf(m.numerator) / m.denominator
               if isinstance(m, Fraction) else mpmath.mpf(m)
               for m in gamma_shifts]
        degree = len(mus)
        s0 = mpmath.mpf(s0.numerator) / s0.denominator \
            if isinstance(s0, Fraction) else mpmath.mpf(s0)
        # both expansion lines s0 + c and 1 - s0 + c must clear the
        # absolute-convergence abscissa
        c = max(mpmath.mpf("1.75"), abs(s0 - mpmath.mpf("0.5")) + mpmath.mpf("1.3"))
        aa = mpmath.mpf(kernel_width)

        def gamma_r(s):
            return mpmath.power(mpmath.pi, -s / 2) * mpmath.gamma(s / 2)

        def lam_gamma(s):
            out = mpmath.power(q, s / 2)
            for mu in mus:
                out *= gamma_r(s + mu)
            return out

        # choose the truncation from the size of V(n): the integrand decays
        # like n^{-(sigma+c)}; require bound * tail_zeta < tol
        if terms is None:
            terms = _afe_terms(q, degree, float(c))
        maxn = terms

        # Dirichlet coefficients (converted to machine floats for the
        # oscillatory sums; the grid itself is computed with mpmath gammas)
        b_mp = dirichlet_coefficients(factors, maxn, bits=bits)
        b = [0.0 if x is None else float(x) for x in b_mp]

        tol = mpmath.mpf(2) ** (-max(40, bits // 2))

        def grid(s, nodes, cline):
            tmax = mpmath.sqrt(aa * (mpmath.log(1 / tol)
                                     + cline * cline / aa + 10))
            h = tmax / nodes
            gs = []
            for k in range(-nodes, nodes + 1):
                w = mpmath.mpc(cline, k * h)
                gs.append(lam_gamma(s + w) * mpmath.exp(w * w / aa) / w)
            return float(h), [complex(g) for g in gs]

        def smoothed_sum(s, nodes):
            h, gs = grid(s, nodes, c)
            sf = float(s)
            cf = float(c)
            total = 0.0
            checkpoint = max(1, int(maxn * 0.65))
            at_checkpoint = 0.0
            for n in range(1, maxn + 1):
                if n == checkpoint:
                    at_checkpoint = total
                if b[n] == 0.0:
                    continue
                rot = complex(math.cos(h * math.log(n)),
                              -math.sin(h * math.log(n)))
                # e^{-i t_k ln n} with t_k = k h, k = -nodes..nodes
                z = rot ** (-nodes)
                acc = 0.0 + 0.0j
                for g in gs:
                    acc += g * z
                    z *= rot
                total += b[n] * n ** (-sf - cf) * acc.real
            total *= h / (2 * math.pi)
            at_checkpoint *= h / (2 * math.pi)
            return mpmath.mpf(total), abs(total - at_checkpoint)

        val1, blk1 = smoothed_sum(s0, nodes=180)
        val2, blk2 = smoothed_sum(1 - s0, nodes=180)
        val1b, _ = smoothed_sum(s0, nodes=260)
        val2b, _ = smoothed_sum(1 - s0, nodes=260)
        quad_err = abs(val1 - val1b) + abs(val2 - val2b)
        # the tail beyond maxn is estimated by the final 35% block (terms
        # decay superpolynomially in this range, so the block dominates)
        series_err = 2 * (blk1 + blk2)

        lam = val1b + sign * val2b
        for (loc, res) in poles:
            loc = mpmath.mpf(loc)
            res = mpmath.mpf(res)
            w = loc - s0
            if abs(mpmath.re(w)) < c:
                lam -= res * mpmath.exp(w * w / aa) / w

        gam = lam_gamma(s0)
        value = lam / gam
        err = (quad_err + series_err) / abs(gam)
        return CentralValue(float(value), float(err), float(lam),
                            maxn, {"quad_err": float(quad_err),
                                   "tail": float(series_err)})


def _afe_terms(q, degree, c):
    """Series length needed for the smoothed sums (heuristic + margin)."""
    sq = float(q) ** 0.5
    base = int(sq * 3) + 50
    return min(base, 200000)


def petersson_norm_proxy(record, factors=None, bits=100, terms=None):
    """Value of the completed symmetric square at the analytic edge s = 1.

    Proportional to the Petersson norm up to a level-weight constant, which
    cancels in the ratio diagnostics this proxy feeds.
    """
    pmax = record.pmax()
    if factors is None:
        factors = {}
        for p in _primes_up_to(pmax):
            if record.level % p == 0:
                factors[p] = sym2_factor(record, p)
            elif p in record.ap:
                factors[p] = sym2_factor(record, p)
    cv = central_value(factors, sym2_gamma_shifts(record.weight),
                       sym2_conductor(record), +1, s0=Fraction(1),
                       bits=bits, terms=terms)
    return cv


def _primes_up_to(n):
    sieve = bytearray([1]) * 0 + bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, int(n ** 0.5) + 1):
        if sieve[i]:
            sieve[i * i::i] = b"\x00" * len(sieve[i * i::i])
    return [i for i in range(2, n + 1) if sieve[i]]
