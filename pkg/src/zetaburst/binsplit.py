"""Binary splitting of products U_{N-1} ... U_1 U_0 of small exact
rational matrices.

Every series in this package (hypergeometric/asymptotic kernels, Taylor
continuation steps, the Euler-constant series) is folded into such a
product.  Matrices are stored with integer entries over a single big
cleared denominator, and products are kept exact: no truncation or
rounding of subproducts.  The divide-and-conquer recursion balances
operand bit sizes, which is where the quasi-optimal bit complexity
comes from.
"""

from concurrent.futures import ThreadPoolExecutor

import gmpy2
from gmpy2 import mpq, mpz

_BASECASE = 6


class RatMatrix:
    """Square matrix (dim 1..3) of exact rationals, held as integer
    entries ``num`` (row-major tuple) over a common denominator ``den``.

    Entries are not reduced to lowest terms; ``den`` is kept positive.
    """

    __slots__ = ("dim", "num", "den")

    def __init__(self, dim, num, den=mpz(1)):
        den = mpz(den)
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            den = -den
            num = tuple(-v for v in num)
        self.dim = dim
        self.num = tuple(mpz(v) for v in num)
        self.den = den

    @classmethod
    def identity(cls, dim):
        return cls(dim, tuple(1 if i == j else 0 for i in range(dim)
                              for j in range(dim)))

    @classmethod
    def from_rationals(cls, rows):
        """Build from nested lists of mpq/int, clearing denominators."""
        dim = len(rows)
        flat = [mpq(v) for row in rows for v in row]
        den = mpz(1)
        for v in flat:
            den = den * v.denominator // gmpy2.gcd(den, v.denominator)
        num = tuple(mpz(v.numerator * (den // v.denominator)) for v in flat)
        return cls(dim, num, den)

    def entry(self, i, j):
        return mpq(self.num[i * self.dim + j], self.den)

    def to_rationals(self):
        return [[self.entry(i, j) for j in range(self.dim)]
                for i in range(self.dim)]

    def mul(self, other):
        """self @ other, exact."""
        d = self.dim
        if d != other.dim:
            raise ValueError("dimension mismatch")
        a, b = self.num, other.num
        if d == 1:
            num = (a[0] * b[0],)
        elif d == 2:
            num = (a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
                   a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3])
        else:
            num = tuple(
                sum(a[i * d + k] * b[k * d + j] for k in range(d))
                for i in range(d) for j in range(d))
        return RatMatrix(d, num, self.den * other.den)

    def eq_rational(self, other):
        """Equality as rational matrices (representations may differ)."""
        if self.dim != other.dim:
            return False
        return all(self.num[k] * other.den == other.num[k] * self.den
                   for k in range(self.dim * self.dim))

    def __repr__(self):
        return "RatMatrix(%d, %s, den=%s)" % (self.dim, self.num, self.den)


def _product_range(factory, lo, hi):
    # exact product U_{hi-1} ... U_{lo}
    n = hi - lo
    if n <= _BASECASE:
        acc = factory(lo)
        for k in range(lo + 1, hi):
            acc = factory(k).mul(acc)
        return acc
    mid = (lo + hi) // 2
    left = _product_range(factory, lo, mid)
    right = _product_range(factory, mid, hi)
    return right.mul(left)


def bsplit_product(factory, lo, hi, dim=None):
    """U_{hi-1} ... U_{lo} by midpoint recursion; empty range gives the
    identity (``dim`` required in that case)."""
    if lo > hi:
        raise ValueError("lo > hi")
    if lo == hi:
        if dim is None:
            raise ValueError("dim required for an empty product")
        return RatMatrix.identity(dim)
    return _product_range(factory, lo, hi)


def bsplit_parallel(factory, lo, hi, workers, dim=None):
    """Same exact result as bsplit_product (matrix products over Z are
    associative, so regrouping cannot change the entries), with top-level
    subranges evaluated on a thread pool."""
    n = hi - lo
    if workers <= 1 or n < 4 * _BASECASE:
        return bsplit_product(factory, lo, hi, dim=dim)
    chunks = min(2 * workers, max(2, n // _BASECASE))
    cuts = [lo + (n * i) // chunks for i in range(chunks + 1)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(
            lambda ab: _product_range(factory, ab[0], ab[1]),
            [(cuts[i], cuts[i + 1]) for i in range(chunks)]))
    acc = parts[0]
    for part in parts[1:]:
        acc = part.mul(acc)
    return acc
