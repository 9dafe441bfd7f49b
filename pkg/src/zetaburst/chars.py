"""Dirichlet characters mod q with Conrey indexing.

A character is addressed by its Conrey label "q.n" (n coprime to q).
Values are exact roots of unity, computed through discrete logarithms on
the prime-power factors of q and combined multiplicatively; conversion
to complex enclosures happens only at evaluation time, at the caller's
precision.  Conductor, parity, order, Gauss sum and root number are
derived quantities.
"""

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpq, mpz

from .numcore import (Ball, ComplexBall, DomainError, ball, ball_div,
                      ball_mul, ball_sqrt, cball, cball_unit_angle)


@dataclass(frozen=True)
class RootOfUnity:
    """Exact value e^{2 pi i k/order}."""

    k: int
    order: int

    def exponent(self):
        """Angle as an exact rational in [0, 1)."""
        return mpq(self.k, self.order) % 1

    def mul(self, other):
        e = self.exponent() + other.exponent()
        e %= 1
        return RootOfUnity(int(e.numerator), int(e.denominator))

    def conj(self):
        e = (-self.exponent()) % 1
        return RootOfUnity(int(e.numerator), int(e.denominator))

    def is_one(self):
        return self.exponent() == 0

    def is_real(self):
        return self.exponent() * 2 % 1 == 0

    def real_sign(self):
        """+1 or -1 for real roots of unity."""
        e = self.exponent()
        if e == 0:
            return 1
        if e == mpq(1, 2):
            return -1
        raise ValueError("not a real root of unity")

    def as_complex(self, prec):
        return cball_unit_angle(self.exponent(), prec)

    def __eq__(self, other):
        if not isinstance(other, RootOfUnity):
            return NotImplemented
        return self.exponent() == other.exponent()

    def __hash__(self):
        e = self.exponent()
        return hash((int(e.numerator), int(e.denominator)))


def factorize(q):
    """Prime factorization by trial division, [(p, e), ...]."""
    q = int(q)
    out = []
    d = 2
    while d * d <= q:
        if q % d == 0:
            e = 0
            while q % d == 0:
                q //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if q > 1:
        out.append((q, 1))
    return out


def _is_primitive_root(g, p):
    order = p - 1
    for f, _ in factorize(order):
        if gmpy2.powmod(g, order // f, p) == 1:
            return False
    return True


def conrey_generator(p):
    """Least primitive root mod p^2 (hence mod p^e for every e >= 1)."""
    g = 2
    while True:
        if _is_primitive_root(g, p) and \
                gmpy2.powmod(g, p - 1, p * p) != 1:
            return g
        g += 1


class _OddLocal:
    """Discrete-log data for (Z/p^e)^*, p odd."""

    def __init__(self, p, e):
        self.pe = p ** e
        self.phi = (p - 1) * p ** (e - 1)
        g = conrey_generator(p)
        self.dlog = {}
        t = 1
        for i in range(self.phi):
            self.dlog[t] = i
            t = t * g % self.pe

    def exponent(self, a_n, m):
        """Pairing exponent a_n * dlog(m) / phi as an exact rational."""
        return mpq(a_n * self.dlog[m % self.pe], self.phi)


class _TwoLocal:
    """Discrete-log data for (Z/2^e)^*, e >= 1, generators -1 and 5."""

    def __init__(self, e):
        self.e = e
        self.pe = 2 ** e
        if e >= 3:
            self.half = 2 ** (e - 2)
            self.dlog5 = {}
            t = 1
            for i in range(self.half):
                self.dlog5[t] = i
                t = t * 5 % self.pe

    def decompose(self, m):
        m %= self.pe
        if self.e == 1:
            return 0, 0
        if self.e == 2:
            return (0, 0) if m == 1 else (1, 0)
        if m % 4 == 1:
            return 0, self.dlog5[m]
        return 1, self.dlog5[(-m) % self.pe]

    def exponent(self, n_parts, m):
        a0, a1 = n_parts
        b0, b1 = self.decompose(m)
        t = mpq(0)
        if self.e >= 2:
            t += mpq(a0 * b0, 2)
        if self.e >= 3:
            t += mpq(a1 * b1, self.half)
        return t


class DirichletChar:
    """Dirichlet character chi_{q.n} in the Conrey labeling."""

    def __init__(self, q, n=1):
        q, n = int(q), int(n)
        if q < 1:
            raise ValueError("modulus must be >= 1")
        n %= q
        if q == 1:
            n = 1
        if gmpy2.gcd(n, q) != 1:
            raise ValueError("Conrey index %d not coprime to %d" % (n, q))
        self.q = q
        self.n = n
        self._locals = []  # [(p, e, local data, index exponent(s))]
        for p, e in factorize(q):
            if p == 2:
                loc = _TwoLocal(e)
                self._locals.append((p, e, loc, loc.decompose(n)))
            else:
                loc = _OddLocal(p, e)
                self._locals.append((p, e, loc, loc.dlog[n % (p ** e)]))
        self._values = {}
        self._conductor = None

    @classmethod
    def from_label(cls, label):
        """Parse a Conrey label "q.n"."""
        try:
            qs, ns = str(label).split(".")
            return cls(int(qs), int(ns))
        except (ValueError, AttributeError):
            raise ValueError("bad Conrey label %r" % (label,))

    @property
    def label(self):
        return "%d.%d" % (self.q, self.n)

    def __eq__(self, other):
        return (isinstance(other, DirichletChar)
                and self.q == other.q and self.n == other.n)

    def __hash__(self):
        return hash((self.q, self.n))

    def __repr__(self):
        return "DirichletChar(%s)" % self.label

    # -- evaluation ---------------------------------------------------

    def __call__(self, m):
        """chi(m) as an exact RootOfUnity, or None when gcd(m, q) > 1."""
        m = int(m) % self.q
        if self.q == 1:
            return RootOfUnity(0, 1)
        v = self._values.get(m)
        if v is not None:
            return v if v != 0 else None
        if gmpy2.gcd(m, self.q) != 1:
            self._values[m] = 0
            return None
        t = mpq(0)
        for _p, _e, loc, a_n in self._locals:
            t += loc.exponent(a_n, m)
        t %= 1
        v = RootOfUnity(int(t.numerator), int(t.denominator))
        self._values[m] = v
        return v

    @property
    def parity(self):
        """delta in {0,1} with chi(-1) = (-1)^delta."""
        v = self(self.q - 1)
        return 0 if v.real_sign() == 1 else 1

    @property
    def order(self):
        ord_ = 1
        for p, _e, loc, a_n in self._locals:
            if p == 2:
                a0, a1 = a_n
                if loc.e >= 2 and a0:
                    ord_ = gmpy2.lcm(ord_, 2)
                if loc.e >= 3 and a1:
                    ord_ = gmpy2.lcm(ord_, loc.half // gmpy2.gcd(a1, loc.half))
            elif a_n:
                ord_ = gmpy2.lcm(ord_, loc.phi // gmpy2.gcd(a_n, loc.phi))
        return int(ord_)

    def is_principal(self):
        return self.n == 1

    # -- conductor / primitivity ---------------------------------------

    def conductor(self):
        """Smallest f | q such that chi factors through (Z/f)^*."""
        if self._conductor is None:
            f = 1
            for p, _e, loc, a_n in self._locals:
                if p == 2:
                    a0, a1 = a_n
                    if a1:
                        # conductor 2^(w+2) where 2^w is the order of chi(5)
                        fp = 4 * int(loc.half // gmpy2.gcd(a1, loc.half))
                    elif a0:
                        fp = 4
                    else:
                        fp = 1
                elif a_n == 0:
                    fp = 1
                else:
                    phi_chi = int(loc.phi // gmpy2.gcd(a_n, loc.phi))
                    fp = p
                    while _phi(fp) % phi_chi != 0:
                        fp *= p
                f *= fp
            self._conductor = f
        return self._conductor

    def is_primitive(self):
        return self.conductor() == self.q

    def primitive_part(self):
        """(f, chi*) with chi* primitive mod f inducing chi."""
        f = self.conductor()
        return f, DirichletChar(f, self.n % f if f > 1 else 1)

    def conjugate(self):
        if self.q == 1:
            return self
        return DirichletChar(self.q, int(gmpy2.invert(self.n, self.q)))

    # -- analytic data --------------------------------------------------

    def gauss_sum(self, prec):
        """tau(chi) = sum_m chi(m) e^{2 pi i m / q} as a ComplexBall."""
        wp = prec + self.q.bit_length() + 8
        acc = cball(0)
        for m in range(1, self.q + 1):
            v = self(m)
            if v is None:
                continue
            term = cball_unit_angle(v.exponent() + mpq(m, self.q), wp)
            acc = acc.add(term, wp)
        return acc

    def root_number(self, prec):
        """omega = tau(chi) / (i^delta sqrt(q)) for primitive chi."""
        if not self.is_primitive():
            raise DomainError("root number needs a primitive character")
        wp = prec + self.q.bit_length() + 16
        tau = self.gauss_sum(wp)
        if self.parity == 1:
            tau = tau.mul_i().neg()  # divide by i
        sq = ball_sqrt(ball(self.q), wp)
        return ComplexBall(ball_div(tau.re, sq, prec),
                           ball_div(tau.im, sq, prec))


def _phi(n):
    out = 1
    for p, e in factorize(n):
        out *= (p - 1) * p ** (e - 1)
    return out


def conductor_and_primitive_part(chi):
    """Module-level convenience mirroring DirichletChar.primitive_part."""
    return chi.primitive_part()


def char_eval(chi, m):
    return chi(m)


def root_number(chi, prec):
    return chi.root_number(prec)
