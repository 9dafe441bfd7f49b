"""Exact Bernoulli and Euler numbers recovered from L-values, and the
Landau-Ramanujan constant.

B_2n and E_2n have Theta(n log n) bits, so a numerical zeta / beta value
of matching accuracy pins them down exactly: multiply by the known
denominator (von Staudt-Clausen for B_n, 1 for E_n), verify the ball
traps a single integer, and round.  The rounding is therefore
self-verifying; a too-wide ball triggers one precision retry and then a
hard failure.
"""

import math
import time
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpq, mpz

from .afe import LValueRequest, afe_eval, lfunc_eval
from .chars import DirichletChar
from .numcore import (Ball, ResourceError, ball, ball_add_error, ball_div,
                      ball_mul, ball_mul_mpq, ball_pow, ball_sqrt, const_pi,
                      pow2)
from .oracles import zeta_euler_product

LOG2E = 1.0 / math.log(2.0)

_CHI4 = DirichletChar(4, 3)
_TRIV = DirichletChar(1, 1)


@dataclass
class ExactNumberResult:
    n: int
    value: object  # mpq or mpz
    digits: int    # decimal digits of E_n / of the numerator of B_n
    bits_used: int
    seconds: float
    algorithm: str = "afe"


def vonstaudt_clausen_denominator(n):
    """Product of the primes p with (p-1) | n (n even)."""
    d = mpz(1)
    for div in _divisors(n):
        if gmpy2.is_prime(div + 1):
            d *= (div + 1)
    return d


def _divisors(n):
    small, big = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i != n // i:
                big.append(n // i)
        i += 1
    return small + big[::-1]


def _round_to_integer(b):
    """The unique integer in a ball, or None when the ball traps zero
    or several."""
    lo, hi = b.bounds_mpq()
    ilo = gmpy2.ceil(lo)
    ihi = gmpy2.floor(hi)
    if ilo != ihi:
        return None
    return mpz(ilo)


def _zeta_even(n, p, algorithm):
    if algorithm == "ep":
        return zeta_euler_product(mpq(n), _TRIV, p)
    return afe_eval(LValueRequest(_TRIV, mpq(n), p))


def _beta_odd(n, p, algorithm):
    if algorithm == "ep":
        return zeta_euler_product(mpq(n), _CHI4, p)
    return afe_eval(LValueRequest(_CHI4, mpq(n), p))


def bernoulli_exact(n, algorithm="afe"):
    """B_n as an exact fraction: B_2m = (-1)^{m+1} 2 (2m)!/(2 pi)^{2m}
    zeta(2m), with the denominator known in advance."""
    return bernoulli_exact_info(n, algorithm=algorithm).value


def bernoulli_exact_info(n, algorithm="afe"):
    n = int(n)
    t0 = time.time()
    if n == 0:
        return ExactNumberResult(0, mpq(1), 1, 0, 0.0, algorithm)
    if n == 1:
        return ExactNumberResult(1, mpq(-1, 2), 1, 0, 0.0, algorithm)
    if n % 2:
        return ExactNumberResult(n, mpq(0), 1, 0, 0.0, algorithm)
    d = vonstaudt_clausen_denominator(n)
    # |B_n| <= 4 n!/(2 pi)^n; bits of d |B_n| sets the precision
    mag = (math.lgamma(n + 1) * LOG2E - n * math.log2(2 * math.pi) + 2
           + float(gmpy2.log2(d)))
    p = max(64, math.ceil(mag) + 32)
    for attempt in range(2):
        z = _zeta_even(n, p, algorithm)
        fac = mpq(2 * gmpy2.fac(n) * d * (-1) ** (n // 2 + 1), 1)
        pi_n = ball_pow(const_pi(p + 32), mpq(n), p + 32)
        scaled = ball_div(ball_mul_mpq(z, fac, p + 32),
                          ball_mul_mpq(pi_n, mpz(2) ** n, p + 32), p + 32)
        k = _round_to_integer(scaled)
        if k is not None:
            val = mpq(k, d)
            digits = len(str(abs(val.numerator)))
            return ExactNumberResult(n, val, digits, p,
                                     time.time() - t0, algorithm)
        p += 64
    raise ResourceError("Bernoulli ball failed to trap a unique integer")


def euler_exact(n, algorithm="afe"):
    """E_n as an exact integer: E_2m = (-1)^m 4^{m+1} (2m)!/pi^{2m+1}
    beta(2m+1)."""
    return euler_exact_info(n, algorithm=algorithm).value


def euler_exact_info(n, algorithm="afe"):
    n = int(n)
    t0 = time.time()
    if n == 0:
        return ExactNumberResult(0, mpz(1), 1, 0, 0.0, algorithm)
    if n % 2:
        return ExactNumberResult(n, mpz(0), 1, 0, 0.0, algorithm)
    m = n // 2
    mag = ((m + 1) * 2 + math.lgamma(n + 1) * LOG2E
           - (n + 1) * math.log2(math.pi) + 1)
    p = max(64, math.ceil(mag) + 32)
    for attempt in range(2):
        b = _beta_odd(n + 1, p, algorithm)
        fac = mpq(mpz(4) ** (m + 1) * gmpy2.fac(n) * (-1) ** m, 1)
        pi_n = ball_pow(const_pi(p + 32), mpq(n + 1), p + 32)
        scaled = ball_div(ball_mul_mpq(b, fac, p + 32), pi_n, p + 32)
        k = _round_to_integer(scaled)
        if k is not None:
            return ExactNumberResult(n, k, len(str(abs(k))), p,
                                     time.time() - t0, algorithm)
        p += 64
    raise ResourceError("Euler ball failed to trap a unique integer")


# ---------------------------------------------------------------------------
# Landau-Ramanujan constant

_lr_value_cache = {}


def _lvalue_cached(chi, s, p):
    key = (chi.label, s, p)
    hit = _lr_value_cache.get(key)
    if hit is None:
        hit = afe_eval(LValueRequest(chi, mpq(s), p))
        _lr_value_cache[key] = hit
    return hit


def landau_ramanujan(p, depth=None):
    """The constant lambda ~ 0.764 counting sums of two squares, from
    the sparse product (1/sqrt 2) prod_n [(1 - 2^-2^n) zeta(2^n) /
    beta(2^n)]^{1/2^{n+1}}.

    Each factor deviates from 1 by at most 4 * 2^-2^n (since
    |zeta(x)/beta(x) - 1| <= 3 * 2^-x for x >= 2), so the truncated
    product's log-tail is below sum_{n>depth} 6 * 2^-2^n / 2^{n+1} and
    only O(log p) factors are needed.
    """
    if p < 16:
        raise ValueError("p must be >= 16")
    if depth is None:
        depth = 1
        while 2 ** depth < p + 6 + depth:
            depth += 1
    wp = p + 24 + depth
    acc = ball_div(ball(1), ball_sqrt(ball(2), wp), wp)
    for n in range(1, depth + 1):
        x = 2 ** n
        zx = _lvalue_cached(_TRIV, x, wp)
        bx = _lvalue_cached(_CHI4, x, wp)
        f = ball_mul_mpq(ball_div(zx, bx, wp), 1 - mpq(1, mpz(2) ** x), wp)
        acc = ball_mul(acc, ball_pow(f, mpq(1, mpz(2) ** (n + 1)), wp), wp)
    # omitted factors multiply the result by exp(theta),
    # |theta| <= sum_{n>depth} 6 * 2^-(2^n + n + 1) <= 8 * 2^-2^{depth+1}
    tail_bits = 2 ** (depth + 1) - 3
    mag = gmpy2.get_exp(acc.mid) if acc.mid != 0 else 0
    return ball_add_error(acc, pow2(-tail_bits + mag + 1))
