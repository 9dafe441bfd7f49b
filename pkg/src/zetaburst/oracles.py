"""Independent reference computations used to cross-validate the fast
path.

Everything here sums series term by term in ball arithmetic with its own
error bounds: Euler-Maclaurin for the Hurwitz zeta function, the Euler
product for sigma > 1, Ramanujan's two-series identity for zeta(1/2),
and a naive (no binary splitting, no bit-burst) incomplete gamma.  None
of it shares series code with the fast evaluators, so agreement between
the two paths is strong evidence for both.
"""

import math
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr, mpq, mpz

from .incgamma import estimate_log_incgamma
from .numcore import (Ball, DomainError, ResourceError, RoundDown, RoundUp,
                      _ctx, ball, ball_add, ball_add_error, ball_cos,
                      ball_cosh, ball_div, ball_exp, ball_log, ball_mul,
                      ball_mul_mpq, ball_neg, ball_pow, ball_sin, ball_sqrt,
                      ball_sub, cball, const_pi, mpfr_abs, pow2)

LOG2E = 1.0 / math.log(2.0)


@dataclass
class OracleResult:
    value: object  # Ball or ComplexBall
    method: str
    terms: int
    seconds: float = 0.0


# ---------------------------------------------------------------------------
# classical recurrences (also the small-coefficient source for EM)

_bern = [mpq(1)]


def bernoulli_recurrence(n):
    """B_n as an exact fraction from the defining recurrence
    sum_{k<=m} C(m+1,k) B_k = 0 (convention B_1 = -1/2)."""
    n = int(n)
    while len(_bern) <= n:
        m = len(_bern)
        acc = mpq(0)
        c = mpz(1)  # C(m+1, k)
        for k in range(m):
            acc += c * _bern[k]
            c = c * (m + 1 - k) // (k + 1)
        _bern.append(-acc / (m + 1))
    return _bern[n]


_eul = [mpz(1)]


def euler_recurrence(n):
    """E_n as an exact integer from sum_{k even <= m} C(m,k) E_k = 0."""
    n = int(n)
    if n % 2:
        return mpz(0)
    while 2 * (len(_eul) - 1) < n:
        m = 2 * len(_eul)
        acc = mpz(0)
        for k in range(0, m, 2):
            acc += gmpy2.bincoef(m, k) * _eul[k // 2]
        _eul.append(-acc)
    return _eul[n // 2]


# ---------------------------------------------------------------------------
# Euler-Maclaurin


def hurwitz_em(s, a, p, info=None, regularized=False):
    """zeta(s, a) for rational s != 1 and rational a in (0, 1], by
    Euler-Maclaurin summation.

    The remainder after M correction terms is bounded through the
    periodic Bernoulli polynomials: |R| <= 4 |(s)_{2M+1}|
    (a+N)^{-sigma-2M} / ((2 pi)^{2M+1} (sigma + 2M)).

    With ``regularized`` the pole term 1/(s-1) is dropped, which at
    s = 1 turns the result into lim_{s->1} (zeta(s,a) - 1/(s-1)); the
    character sums in l_em use this to reach s = 1.
    """
    s, a = mpq(s), mpq(a)
    if s == 1 and not regularized:
        raise DomainError("pole at s = 1")
    if not 0 < a <= 1:
        raise DomainError("a must lie in (0, 1]")
    sigma = s
    N = max(4, int(p * math.log(2) / (2 * math.pi)) +
            int(abs(float(s))) + 2)
    M = max(2, int(p * math.log(2) /
                   (2 * math.log(max(2 * math.pi * N, 8)))) + 1)
    rem = None
    for _ in range(6):
        if sigma + 2 * M > 0:
            rem = _em_remainder(s, a, sigma, N, M)
            if rem is not None and rem <= pow2(-(p + 4)):
                break
        N += N // 2 + 4
        M += M // 2 + 2
    else:
        raise ResourceError("Euler-Maclaurin parameters did not converge")
    wp = p + 32 + N.bit_length()
    acc = ball(0)
    for k in range(N):
        acc = ball_add(acc, ball_pow(ball(a + k, wp), -s, wp), wp)
    aN = ball(a + N, wp)
    if s == 1:
        acc = ball_sub(acc, ball_log(aN, wp), wp)
    else:
        pole = ball_mul_mpq(ball_pow(aN, 1 - s, wp), 1 / (s - 1), wp)
        if regularized:
            pole = ball_add(pole, ball_mul_mpq(ball(1), -1 / (s - 1), wp),
                            wp)
        acc = ball_add(acc, pole, wp)
    aNs = ball_pow(aN, -s, wp)
    acc = ball_add(acc, ball_mul_mpq(aNs, mpq(1, 2), wp), wp)
    poch = s                       # (s)_{2j-1} at j = 1
    fact = mpq(2)                  # (2j)!
    shift = ball_pow(aN, -2, wp)
    cur = ball_mul(ball_pow(aN, 1 - s, wp), shift, wp)  # (a+N)^{-s-1}
    for j in range(1, M + 1):
        term = ball_mul_mpq(cur, bernoulli_recurrence(2 * j) / fact * poch,
                            wp)
        acc = ball_add(acc, term, wp)
        poch = poch * (s + 2 * j - 1) * (s + 2 * j)
        fact = fact * (2 * j + 1) * (2 * j + 2)
        cur = ball_mul(cur, shift, wp)
    acc = ball_add_error(acc, rem)
    if info is not None:
        info["terms"] = N + M
    return acc


def _em_remainder(s, a, sigma, N, M):
    """mpfr upper bound for the Euler-Maclaurin tail (None if it cannot
    be evaluated)."""
    cu = _ctx(64, RoundUp)
    cd = _ctx(64, RoundDown)
    poch = mpq(1)
    for i in range(2 * M + 1):
        poch *= (s + i)
    if poch == 0:
        return mpfr(0)
    t = cu.mul(cu.add(mpfr(0), abs(poch)), mpfr(4.1))
    twopi = cd.mul(cd.const_pi(), mpfr(2))
    t = cu.div(t, cd.pow(twopi, mpfr(2 * M + 1)))
    aN = cd.add(mpfr(0), a + N)  # >= 1
    t = cu.mul(t, cu.pow(aN, cu.add(mpfr(0), -(sigma + 2 * M))))
    t = cu.div(t, cd.add(mpfr(0), sigma + 2 * M))
    return t if gmpy2.is_finite(t) else None


def l_em(chi, s, p, info=None):
    """L(s, chi) assembled from Hurwitz zeta values,
    q^-s sum_a chi(a) zeta(s, a/q); at s = 1 (non-principal chi only)
    the poles cancel and the regularized values are summed."""
    s = mpq(s)
    q = chi.q
    principal = chi.is_principal()
    if s == 1 and (q == 1 or principal):
        raise DomainError("pole at s = 1")
    wp = p + 32 + 2 * q.bit_length()
    real_char = chi.order <= 2
    acc = ball(0) if real_char else cball(0)
    sub = {}
    for r in range(1, q + 1):
        v = chi(r)
        if v is None:
            continue
        z = hurwitz_em(s, mpq(r, q), p + 8 + q.bit_length(), info=sub,
                       regularized=(s == 1))
        if real_char:
            if v.real_sign() < 0:
                z = ball_neg(z)
            acc = ball_add(acc, z, wp)
        else:
            acc = acc.add(v.as_complex(wp).mul_ball(z, wp), wp)
    qs = ball_pow(ball(q), -s, wp)
    if info is not None:
        info["terms"] = sub.get("terms", 0) * q
    if real_char:
        return ball_mul(acc, qs, wp)
    return acc.mul_ball(qs, wp)


# ---------------------------------------------------------------------------
# Euler product


def _sieve(limit):
    limit = int(limit)
    flags = bytearray(limit + 1)
    out = []
    for i in range(2, limit + 1):
        if not flags[i]:
            out.append(i)
            if i * i <= limit:
                flags[i * i::i] = b"\x01" * len(flags[i * i::i])
    return out


def zeta_euler_product(s, chi, p, info=None):
    """L(s, chi) for sigma > 1 as a finite Euler product over primes
    up to P, with the log-tail bound 2 P^{1-sigma}/(sigma-1)."""
    s = mpq(s)
    if s <= 1:
        raise DomainError("Euler product needs sigma > 1")
    sf = float(s)
    log2P = (p + 8 + max(0.0, math.log2(4.0 / (sf - 1)))) / (sf - 1)
    if log2P > 24.5:
        raise ResourceError("Euler-product cutoff too large at this s")
    P = max(3, int(2.0 ** log2P) + 1)
    primes = _sieve(P)
    wp = p + 24
    real_char = chi.order <= 2
    acc = ball(1) if real_char else cball(1)
    for prime in primes:
        v = chi(prime)
        if v is None:
            continue
        ps = ball_pow(ball(prime), -s, wp)
        if real_char:
            f = ball_sub(ball(1), ps if v.real_sign() > 0 else ball_neg(ps),
                         wp)
            acc = ball_div(acc, f, wp)
        else:
            f = cball(1).sub(v.as_complex(wp).mul_ball(ps, wp), wp)
            acc = acc.div(f, wp)
    cu = _ctx(64, RoundUp)
    cd = _ctx(64, RoundDown)
    tau = cu.div(cu.mul(cu.pow(cd.add(mpfr(0), P), cu.add(mpfr(0), 1 - s)),
                        mpfr(2.01)), cd.add(mpfr(0), s - 1))
    blow = cu.mul(tau, mpfr(2))  # |e^t - 1| <= 2|t| for |t| <= 1/2
    if info is not None:
        info["terms"] = len(primes)
    if real_char:
        mag = cu.add(mpfr_abs(acc.mid), acc.rad)
        return ball_add_error(acc, cu.mul(mag, blow))
    mag = cu.add(cu.add(mpfr_abs(acc.re.mid), acc.re.rad),
                 cu.add(mpfr_abs(acc.im.mid), acc.im.rad))
    return acc.add_error(cu.mul(mag, blow))


# ---------------------------------------------------------------------------
# Ramanujan's formula for zeta(1/2)


def ramanujan_zeta_half(p, info=None):
    """zeta(1/2) from the two-series identity: for alpha beta = 4 pi^3,

      sum_n 1/(e^{n^2 alpha} - 1) = pi^2/(6 alpha) + 1/4
        + sqrt(beta)/(4 pi) [zeta(1/2) + S_R],

    S_R = sum_n (cos - sin - e^-)(sqrt(n beta)) /
                (sqrt(n)(cosh - cos)(sqrt(n beta))).

    alpha ~ 36/p balances the series at Theta(p) terms each; both tails
    decay like e^{-n^2 alpha} and e^{-sqrt(n beta)} and carry explicit
    integral bounds.
    """
    alpha = mpq(36, p)
    wp = p + 60
    pi = const_pi(wp)
    pi3 = ball_mul(ball_mul(pi, pi, wp), pi, wp)
    beta = ball_mul_mpq(pi3, 4 / alpha, wp)
    af = float(alpha)
    cu = _ctx(64, RoundUp)
    cd = _ctx(64, RoundDown)
    # left series: 1/(e^{n^2 alpha} - 1), exact rational arguments
    nl = 1
    while (nl * nl) * af * LOG2E < p + 10:
        nl += 1
    acc_l = ball(0)
    for n in range(1, nl + 1):
        x = n * n * alpha
        wn = max(32, p + 16 - int(float(x) * LOG2E) +
                 max(0, -int(math.floor(math.log2(float(x))))))
        e = ball_exp(ball(x, wn), wn)
        acc_l = ball_add(acc_l, ball_div(ball(1), ball_sub(
            e, ball(1), wn), wn), wp)
    N = nl + 1
    ta = cu.exp(cu.mul(cd.add(mpfr(0), -(N * N) * alpha), mpfr('0.999')))
    ta = cu.div(cu.mul(ta, mpfr(2)),
                cd.sub(mpfr(1), cu.exp(cd.add(mpfr(0), -2 * N * alpha))))
    acc_l = ball_add_error(acc_l, ta)
    # right series at x = sqrt(n beta)
    bf = 4.0 * math.pi ** 3 / af
    nr = 1
    while math.sqrt(nr * bf) * LOG2E < p + 10:
        nr += 1
    wn = p + 50
    acc_r = ball(0)
    for n in range(1, nr + 1):
        x = ball_sqrt(ball_mul_mpq(beta, n, wn), wn)
        c = ball_cos(x, wn)
        num = ball_sub(ball_sub(c, ball_sin(x, wn), wn),
                       ball_exp(ball_neg(x), wn), wn)
        den = ball_mul(ball_sqrt(ball(n), wn),
                       ball_sub(ball_cosh(x, wn), c, wn), wn)
        acc_r = ball_add(acc_r, ball_div(num, den, wn), wp)
    sb = math.sqrt((nr + 1) * bf)
    tr = cu.mul(cu.exp(mpfr(-sb * 0.999)), mpfr(20.0 * (sb + 1.0) / bf))
    acc_r = ball_add_error(acc_r, tr)
    # solve the identity for zeta(1/2)
    bracket = ball_sub(acc_l, ball_mul_mpq(ball_mul(pi, pi, wp),
                                           mpq(1, 6) / alpha, wp), wp)
    bracket = ball_sub(bracket, ball(mpq(1, 4)), wp)
    lead = ball_div(ball_mul_mpq(pi, 4, wp), ball_sqrt(beta, wp), wp)
    out = ball_sub(ball_mul(lead, bracket, wp), acc_r, wp)
    if info is not None:
        info["terms"] = nl + nr
    return out


# ---------------------------------------------------------------------------
# naive incomplete gamma (independent of binsplit / bit-burst)


def _naive_hyp_sum(a, x, wp, tol_bits):
    """sum_n x^n/(a+1)_n by direct ball iteration, tail in the radius."""
    t = ball(1)
    acc = ball(0)
    n = 0
    tol = pow2(-max(8, tol_bits))
    cu = _ctx(53, RoundUp)
    cd = _ctx(53, RoundDown)
    while True:
        acc = ball_add(acc, t, wp)
        t = ball_mul_mpq(t, x / (a + n + 1), wp)
        n += 1
        if a + n + 1 > 0:
            c = cu.div(cu.add(mpfr(0), x), cd.add(mpfr(0), a + n + 1))
            if c <= mpfr('0.99'):
                up = cu.add(mpfr_abs(t.mid), t.rad)
                bound = cu.div(up, cd.sub(mpfr(1), c))
                if bound < tol:
                    return ball_add_error(acc, bound), n
        if n > 10_000_000:
            raise ResourceError("naive series did not converge")


def _naive_asymp_sum(a, x, wp, tol_bits):
    """sum_n (1-a)_n/(-x)^n by direct ball iteration, or None when its
    minimal remainder exceeds the tolerance."""
    t = ball(1)
    acc = ball(0)
    tol = pow2(-max(4, tol_bits))
    cu = _ctx(53, RoundUp)
    n = 0
    prev = None
    cap = 4 * int(float(x)) + abs(tol_bits) + 64
    while n <= cap:
        acc = ball_add(acc, t, wp)
        t = ball_mul_mpq(t, (a - n - 1) / x, wp)
        n += 1
        up = cu.add(mpfr_abs(t.mid), t.rad)
        if n >= float(a) - 1:
            if up < tol:
                return ball_add_error(acc, up), n
            if prev is not None and up > prev:
                return None, n
            prev = up
    return None, n


def _naive_gamma(a, wp):
    """Gamma(a) via Gamma(a, N) + lower series at N ~ wp ln 2, all by
    direct summation."""
    N = mpq(math.ceil(wp * math.log(2)) + 8)
    # the head is ~2^-wp itself, so its sum needs few relative bits
    pre_head = (float(a) - 1) * math.log2(float(N)) - float(N) * LOG2E
    head_sum, _ = _naive_asymp_sum(a, N, wp + 8,
                                   max(8, wp + 8 + int(pre_head)))
    if head_sum is None:
        raise ResourceError("naive Gamma(a) head did not converge")
    nb = ball(N)
    head = ball_mul(ball_mul(ball_pow(nb, a - 1, wp),
                             ball_exp(ball_neg(nb), wp), wp), head_sum, wp)
    pre_mag = float(a) * math.log2(float(N)) - float(N) * LOG2E
    s, _ = _naive_hyp_sum(a, N, wp + int(float(N) * LOG2E) + 24,
                          wp + 8 + int(pre_mag))
    low = ball_mul(ball_mul_mpq(ball_mul(ball_pow(nb, a, wp), ball_exp(
        ball_neg(nb), wp), wp), 1 / a, wp), s, wp)
    return ball_add(head, low, wp)


def incgamma_naive(a, z, p, info=None):
    """Gamma(a, z) by direct term-by-term ball summation: same
    mathematical contract as the bit-burst evaluator, independent code
    path (its Gamma(a) and Euler-constant inputs are independent too)."""
    a = mpq(a)
    if isinstance(z, Ball):
        zq, zrad = z.mid_mpq(), z.rad
    else:
        zq, zrad = mpq(z), mpfr(0)
    if zq <= 0:
        raise DomainError("z must be positive")
    xf = float(zq)
    est = estimate_log_incgamma(a, zq)
    if xf > max(8.0, (p + est) * math.log(2) / max(1.0, math.log(xf))):
        wp = p + 32 + abs(est)
        pre_mag = (float(a) - 1) * math.log2(xf) - xf * LOG2E
        ssum, n = _naive_asymp_sum(a, zq, wp, p + 8 + int(pre_mag))
        if ssum is not None:
            zb = ball(zq)
            out = ball_mul(ball_mul(ball_pow(zb, a - 1, wp), ball_exp(
                ball_neg(zb), wp), wp), ssum, wp)
            return _propagate_rad(out, a, zq, zrad, info, n)
    if a.denominator == 1 and a <= 0:
        out, terms = _naive_singular(int(-a), zq, p)
        return _propagate_rad(out, a, zq, zrad, info, terms)
    pre_mag = float(a) * math.log2(max(xf, 1e-300)) - xf * LOG2E - \
        math.log2(abs(float(a)))
    gmag = math.lgamma(float(a)) * LOG2E
    wp = p + 24 + math.ceil(max(pre_mag + max(0.0, xf * LOG2E), gmag, 0.0)) \
        + 16
    s, terms = _naive_hyp_sum(a, zq, wp, p + 12 + int(pre_mag))
    zb = ball(zq)
    pre = ball_mul_mpq(ball_mul(ball_pow(zb, a, wp), ball_exp(
        ball_neg(zb), wp), wp), 1 / a, wp)
    out = ball_sub(_naive_gamma(a, wp), ball_mul(pre, s, wp), wp)
    return _propagate_rad(out, a, zq, zrad, info, terms)


def _naive_singular(n, x, p):
    wp = p + 24 + max(0, int(float(x) * LOG2E)) + \
        abs(int(n * math.log2(float(x)))) + 16
    hn = mpq(0)
    fac = mpz(1)
    for k in range(1, n + 1):
        hn += mpq(1, k)
        fac *= k
    gam = Ball(_ctx(wp).const_euler(), pow2(-wp))
    psi = ball_sub(ball(hn, wp), gam, wp)
    lead = ball_mul_mpq(ball_sub(psi, ball_log(ball(x), wp), wp),
                        mpq((-1) ** n, fac), wp)
    acc = ball(0)
    kfac = mpz(1)
    xpow = mpq(1)
    for k in range(0, n):
        if k:
            kfac *= k
            xpow *= -x
        acc = ball_add(acc, ball(xpow / (kfac * (k - n)), wp), wp)
    t = ball(mpq(-x) ** (n + 1) / (fac * (n + 1)), wp)
    cu = _ctx(53, RoundUp)
    tol = pow2(-(p + 8 - min(0, int(n * math.log2(float(x))))))
    k = n + 1
    while True:
        acc = ball_add(acc, t, wp)
        t = ball_mul_mpq(t, -x * (k - n) / ((k + 1) * (k + 1 - n)), wp)
        k += 1
        up = cu.add(mpfr_abs(t.mid), t.rad)
        if 2 * x <= (k + 1 - n) and cu.mul(up, mpfr(2)) < tol:
            acc = ball_add_error(acc, cu.mul(up, mpfr(2)))
            break
        if k > 10_000_000:
            raise ResourceError("naive singular series stalled")
    out = ball_sub(lead, ball_mul_mpq(acc, mpq(1) / x ** n, wp), wp)
    return out, k - n


def _propagate_rad(out, a, zq, zrad, info, terms):
    if info is not None:
        info["terms"] = terms
    if zrad == 0:
        return out
    iv = ball_add_error(ball(zq), zrad)
    d = ball_mul(ball_pow(iv, a - 1, 64), ball_exp(ball_neg(iv), 64), 64)
    cu = _ctx(30, RoundUp)
    return ball_add_error(out, cu.mul(zrad, cu.add(mpfr_abs(d.mid), d.rad)))
