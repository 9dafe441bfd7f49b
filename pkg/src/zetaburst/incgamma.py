"""Rigorous enclosures of the incomplete gamma function Gamma(a, z) for
rational a and positive z.

Evaluation analytically continues y(z) = Gamma(a, z) along a path of
dyadic points whose mantissas double in length until they land exactly
on the target.  The starting value comes from the hypergeometric series
at the origin, from the asymptotic series at infinity whenever its
minimal remainder meets the tolerance, or from the explicit limit
formula when a is a nonpositive integer; each later step uses the
Taylor expansion of the second-order ODE satisfied by y at the previous
point.  Every series is summed exactly by binary splitting of 2x2/3x3
integer matrices; truncation tails carry explicit bounds that are
absorbed into ball radii, so the returned enclosures are rigorous.
"""

import math
import threading

import gmpy2
from gmpy2 import mpfr, mpq, mpz

from .binsplit import RatMatrix, bsplit_product
from .numcore import (Ball, DomainError, ResourceError, RoundDown, RoundUp,
                      _ctx, ball, ball_add, ball_add_error, ball_div,
                      ball_exp, ball_from_ratio, ball_log, ball_mul,
                      ball_mul_mpq, ball_neg, ball_pow, ball_sub, mpfr_abs,
                      pow2)

LN2 = math.log(2.0)
LOG2E = 1.0 / LN2

_SCAN_CAP = 20_000_000


def _log2_mpq(x):
    """float log2 of a positive mpq/mpz/int, safe for huge exponents."""
    x = mpq(x)
    e = x.numerator.bit_length() - x.denominator.bit_length()
    m = x / (mpq(2) ** e)
    return e + math.log2(float(m))


def estimate_log_incgamma(a, z):
    """ceil(log2 |Gamma(a, z)|) from the piecewise magnitude estimate
    (a-1)log z - z for a < z, a(log a - 1) for a >= z.  Scheduling aid
    only; never used as an error bound."""
    af = float(a)
    if isinstance(z, Ball):
        z = z.mid_mpq()
    zq = mpq(z)
    if zq <= 0:
        raise DomainError("z must be positive")
    lnz = _log2_mpq(zq) * LN2
    zf = min(float(zq), 1e300) if zq < mpq(10) ** 300 else math.inf
    if af < zf:
        nats = (af - 1.0) * lnz - float(zq)
    else:
        nats = af * (math.log(af) - 1.0)
    return math.ceil(nats * LOG2E)


# ---------------------------------------------------------------------------
# series kernels


def _upper_scan_ctx():
    return _ctx(53, RoundUp), _ctx(53, RoundDown)


def _hyp_sum(a, x, tol_bits):
    """Ball for sum_{n>=0} x^n / (a+1)_n with absolute error <= 2^-tol_bits
    (truncation tail plus rounding), by binary splitting.

    Requires x > 0 and a not a nonpositive integer.
    """
    a, x = mpq(a), mpq(x)
    cu, cd = _upper_scan_ctx()
    xu = cu.add(mpfr(0), x)
    n_valid = 0 if a > -1 else int(gmpy2.floor(-(a + 1))) + 1
    t = mpfr(1)
    smax = mpfr(1)
    tol = pow2(-max(tol_bits, 4))
    n = 0
    N = None
    bound = None
    while n <= _SCAN_CAP:
        if n >= n_valid:
            den = cd.add(mpfr(0), abs(a + n + 1))
            if den > xu:
                c = cu.div(xu, den)
                b = cu.div(t, cd.sub(mpfr(1), c))
                if b < tol:
                    N, bound = n, b
                    break
        t = cu.div(cu.mul(t, xu), cd.add(mpfr(0), abs(a + n + 1)))
        if t > smax:
            smax = t
        n += 1
    if N is None:
        raise ResourceError("hypergeometric series did not converge")
    smag = gmpy2.get_exp(smax) + max(0, N).bit_length()
    prec = max(32, tol_bits + smag + 16)
    if N == 0:
        return Ball(mpfr(0), bound)
    an, ad = a.numerator, a.denominator
    xn, xd = x.numerator, x.denominator

    def U(n):
        d = xd * (an + (n + 1) * ad)
        return RatMatrix(2, (xn * ad, 0, d, d), d)

    P = bsplit_product(U, 0, N)
    s = ball_from_ratio(P.num[2], P.den, prec)
    return ball_add_error(s, bound)


def hyp_series_origin(a, x, tol_bits):
    """Gamma(a, x) = Gamma(a) - x^a e^-x / a * hypergeometric sum, with
    absolute error <= 2^-tol_bits.  Valid for x > 0 and a not a
    nonpositive integer; the working precision compensates for the
    cancellation between Gamma(a) and the series when x is large."""
    a, x = mpq(a), mpq(x)
    if x <= 0:
        raise DomainError("x must be positive")
    if a <= 0 and a.denominator == 1:
        raise DomainError("use the nonpositive-integer formula")
    xl2 = _log2_mpq(x)
    pre_mag = float(a) * xl2 - float(x) * LOG2E - _log2_mpq(abs(a))
    gamma_mag = math.lgamma(float(a)) * LOG2E if abs(float(a)) < 1e15 else 0.0
    wp = max(32, tol_bits + 8 + math.ceil(
        max(pre_mag + max(0.0, float(x) * LOG2E), gamma_mag, 0.0)) + 16)
    s = _hyp_sum(a, x, max(8, tol_bits + 8 + math.ceil(pre_mag)))
    g = gamma_rational(a, wp)
    xb = ball(x)
    pre = ball_mul(ball_pow(xb, a, wp), ball_exp(ball_neg(xb), wp), wp)
    pre = ball_mul_mpq(pre, 1 / a, wp)
    return ball_sub(g, ball_mul(pre, s, wp), wp)


def asymp_series(a, x, tol_bits):
    """Gamma(a, x) from the divergent series at infinity, or None when no
    truncation order makes the remainder small enough (caller falls back
    to another kernel).  Absolute error <= 2^-tol_bits on success."""
    a, x = mpq(a), mpq(x)
    if x <= 0:
        raise DomainError("x must be positive")
    pre_mag = (float(a) - 1.0) * _log2_mpq(x) - float(x) * LOG2E
    tol_sum = max(4, tol_bits + 4 + math.ceil(pre_mag))
    tol = pow2(-tol_sum)
    cu, cd = _upper_scan_ctx()
    xd_ = cd.add(mpfr(0), x)
    n_min = max(0, math.ceil(float(a) - 1.0))
    terminating = a.denominator == 1 and a >= 1
    t = mpfr(1)
    n = 0
    N = None
    bound = None
    while n <= 4 * int(float(x)) + tol_sum + 64:
        if terminating and n >= int(a):
            N, bound = n, mpfr(0)
            break
        if n >= n_min and t < tol:
            N, bound = n, t
            break
        fac = cu.add(mpfr(0), abs(a - n - 1))
        t_next = cu.div(cu.mul(t, fac), xd_)
        if n >= n_min and t_next > t and t >= tol:
            return None  # minimal remainder exceeds the tolerance
        t = t_next
        n += 1
    if N is None:
        return None
    wp = max(32, tol_bits + 8 + math.ceil(abs(pre_mag)) + 16)
    an, ad = a.numerator, a.denominator
    xn, xd = x.numerator, x.denominator
    if N == 0:
        s = Ball(mpfr(0), bound)
    else:
        def U(n):
            d = ad * xn
            return RatMatrix(2, ((an - (n + 1) * ad) * xd, 0, d, d), d)

        P = bsplit_product(U, 0, N)
        s = ball_add_error(ball_from_ratio(P.num[2], P.den, wp), bound)
    xb = ball(x)
    pre = ball_mul(ball_pow(xb, a - 1, wp), ball_exp(ball_neg(xb), wp), wp)
    return ball_mul(pre, s, wp)


def singular_at_nonpositive_int(n, x, tol_bits):
    """Gamma(-n, x) for integer n >= 0 via the limit formula
    (-1)^n/n! (psi(n+1) - log x) - x^-n [finite + infinite sums]."""
    n = int(n)
    if n < 0:
        raise DomainError("n must be >= 0")
    x = mpq(x)
    if x <= 0:
        raise DomainError("x must be positive")
    xf = float(x)
    xl2 = _log2_mpq(x)
    # largest intermediate ~ x^-n e^x; result ~ x^{-n-1} e^-x
    wp = max(32, tol_bits + 8 + math.ceil(
        max(0.0, xf * LOG2E) + abs(n * xl2)) + 24)
    hn = mpq(0)
    fac = mpz(1)
    for k in range(1, n + 1):
        hn += mpq(1, k)
        fac *= k
    psi = ball_sub(ball(hn, wp), euler_gamma(wp), wp)
    lead = ball_mul_mpq(ball_sub(psi, ball_log(ball(x), wp), wp),
                        mpq((-1) ** n, fac), wp)
    # finite part, exact
    finite = mpq(0)
    kfac = mpz(1)
    xpow = mpq(1)
    for k in range(0, n):
        if k:
            kfac *= k
            xpow *= -x
        finite += xpow / (kfac * (k - n))
    # infinite part: t_k = (-x)^k/(k!(k-n)) from k = n+1
    t_first = mpq(-x) ** (n + 1) / (fac * (n + 1))
    cu, cd = _upper_scan_ctx()
    tol_inf = max(4, tol_bits + 4 - math.floor(n * xl2))
    tol = pow2(-tol_inf)
    xu = cu.add(mpfr(0), x)
    tmag = cu.add(mpfr(0), abs(t_first))
    K = 1  # number of terms taken from the infinite sum
    while True:
        k = n + K  # last included index is n + K
        rho = cu.div(cu.mul(xu, mpfr(k - n)),
                     cd.mul(mpfr(k + 1), mpfr(k + 1 - n)))
        nxt = cu.mul(tmag, rho)
        # past this point every term ratio is <= x/(j+1-n) <= 1/2
        if cu.mul(xu, mpfr(2)) <= mpfr(k + 2 - n) \
                and cu.mul(nxt, mpfr(2)) < tol:
            tail = cu.mul(nxt, mpfr(2))
            break
        tmag = nxt
        K += 1
        if K > _SCAN_CAP:
            raise ResourceError("singular-series scan exceeded cap")
    xn, xd = x.numerator, x.denominator

    def U(j):
        k = n + 1 + j
        d = xd * (k + 1) * (k + 1 - n)
        return RatMatrix(2, (-xn * (k - n), 0, d, d), d)

    P = bsplit_product(U, 0, K)
    inf_sum = ball_mul_mpq(ball_from_ratio(P.num[2], P.den, wp), t_first, wp)
    inf_sum = ball_add_error(inf_sum, tail)
    bracket = ball_add(ball(finite, wp), inf_sum, wp)
    return ball_sub(lead, ball_mul_mpq(bracket, mpq(1) / x ** n, wp), wp)


def _max_abs_on_disk(a, u, R, prec=64):
    """Upper bound for |t^{a-1} e^-t| on the disk |t - u| <= R, 0 < R < u,
    by interval evaluation of both factors."""
    iv = ball_add_error(ball(u, prec), R)
    p = ball_pow(iv, a - 1, prec)
    e = ball_exp(ball_neg(iv), prec)
    hi = _ctx(prec, RoundUp).mul(
        _ctx(prec, RoundUp).add(p.mid, p.rad),
        _ctx(prec, RoundUp).add(e.mid, e.rad))
    return hi


def _taylor_tail_bound(a, u, R, x_abs, N):
    """Cauchy-majorant tail bound R M_R(u)/N * C^N/(1-C), C = |x|/R."""
    cu, cd = _upper_scan_ctx()
    M = _max_abs_on_disk(a, u, R)
    C = cu.div(cu.add(mpfr(0), x_abs), cd.add(mpfr(0), R))
    if not C < 1:
        return None
    one_minus = cd.sub(mpfr(1), C)
    b = cu.div(cu.mul(cu.add(mpfr(0), R), M), mpfr(N))
    # C^N rounded up via exponent arithmetic
    cn = cu.pow(C, mpfr(N))
    if not gmpy2.is_finite(cn):
        return None
    return cu.div(cu.mul(b, cn), one_minus)


def taylor_step(a, u, y_u, x, tol_bits):
    """Continue an enclosure y_u of Gamma(a, u) to Gamma(a, u + x) via the
    Taylor expansion at u.  Requires 0 < |x| < u; absolute truncation
    error <= 2^-tol_bits is added to the radius."""
    a, u, x = mpq(a), mpq(u), mpq(x)
    if x == 0:
        return y_u
    if not 0 < abs(x) < u:
        raise DomainError("need 0 < |x| < u for the expansion disk")
    # pick R by repeated halving from (u + |x|)/2, judging a fixed N
    xa = abs(x)
    R = (u + xa) / 2
    lc = max(1.0, -_log2_mpq(xa / R))
    n_trial = max(8, int((tol_bits + 16) / lc))
    best, best_bound = None, None
    for _ in range(40):
        bnd = _taylor_tail_bound(a, u, R, xa, n_trial)
        if bnd is not None and (best_bound is None or bnd < best_bound):
            best, best_bound = R, bnd
        elif best is not None:
            break
        R = R / 2
        if R <= xa:
            break
    if best is None:
        raise DomainError("no admissible expansion radius")
    R = best
    tol = pow2(-(tol_bits + 2))
    N = n_trial
    bound = _taylor_tail_bound(a, u, R, xa, N)
    while bound is None or bound >= tol:
        N = max(N + 8, int(N * 1.5))
        if N > _SCAN_CAP:
            raise ResourceError("Taylor step did not reach tolerance")
        bound = _taylor_tail_bound(a, u, R, xa, N)
    while N > 8:
        cand = _taylor_tail_bound(a, u, R, xa, N - 8)
        if cand is not None and cand < tol:
            N -= 8
        else:
            break
    ymag = max(0, y_u.mag_bits())
    wp = max(32, tol_bits + 8 + ymag + N.bit_length() + 16)
    an, ad = a.numerator, a.denominator
    xn, xd = x.numerator, x.denominator
    un, ud = u.numerator, u.denominator

    def U(n):
        qn = un * (n + 1) * (n + 2)
        d = xd * ad * qn
        return RatMatrix(3, (
            0, xn * ad * qn, 0,
            -xn * n * ud * ad, -xn * (n + 1) * ((n + 1) * ud * ad
                                                + un * ad - an * ud), 0,
            d, 0, d), d)

    P = bsplit_product(U, 0, N)
    p31 = ball_from_ratio(P.num[6], P.den, wp)
    p32 = ball_from_ratio(P.num[7], P.den, wp)
    ub = ball(u)
    yprime = ball_neg(ball_mul(ball_pow(ub, a - 1, wp),
                               ball_exp(ball_neg(ub), wp), wp))
    out = ball_add(ball_mul(p31, y_u, wp), ball_mul(p32, yprime, wp), wp)
    return ball_add_error(out, bound)


# ---------------------------------------------------------------------------
# bit-burst driver


def _truncate_mantissa(z, bits):
    """Leading ``bits`` mantissa bits of the positive dyadic rational z."""
    num, den = z.numerator, z.denominator
    L = num.bit_length()
    if bits >= L:
        return z
    shift = L - bits
    return mpq((num >> shift) << shift, den)


def _bitburst_points(z, b1=32):
    pts = []
    L = z.numerator.bit_length()
    b = b1
    while b < L:
        t = _truncate_mantissa(z, b)
        if not pts or t != pts[-1]:
            pts.append(t)
        b *= 2
    if not pts or pts[-1] != z:
        pts.append(z)
    return pts


def _initial_kernel(a, x, tol_bits):
    if a.denominator == 1 and a <= 0:
        return singular_at_nonpositive_int(int(-a), x, tol_bits)
    xf = float(x)
    pre_mag = (float(a) - 1.0) * _log2_mpq(x) - xf * LOG2E
    p_rel = tol_bits + pre_mag
    if xf > max(8.0, p_rel * LN2 / max(1.0, math.log(max(xf, 1.001)))):
        r = asymp_series(a, x, tol_bits)
        if r is not None:
            return r
    return hyp_series_origin(a, x, tol_bits)


def incgamma_bitburst(a, z, p):
    """Enclosure of Gamma(a, z) for rational a and a strictly positive
    ball z, with absolute error <= 2^-p plus the propagated effect of
    the input radius."""
    a = mpq(a)
    if not isinstance(z, Ball):
        z = ball(mpq(z))
    if not z.is_positive():
        raise DomainError("z must be a strictly positive ball")
    zm = z.mid_mpq()
    rad_extra = None
    if z.rad != 0:
        # |dGamma/dz| = z^{a-1} e^-z, bounded over the input interval
        dmax = _max_abs_on_disk(a, zm, z.rad)
        rad_extra = _ctx(30, RoundUp).mul(z.rad, dmax)
    tol = p + 4
    for attempt in range(4):
        pts = _bitburst_points(zm)
        t_step = tol + 2 * len(pts).bit_length() + 4
        y = _initial_kernel(a, pts[0], t_step)
        for k in range(1, len(pts)):
            x = pts[k] - pts[k - 1]
            if x == 0:
                continue
            y = taylor_step(a, pts[k - 1], y, x, t_step)
        if y.rad <= pow2(-p):
            break
        tol += 64 + tol // 3
    else:
        raise ResourceError("bit-burst evaluation failed to meet tolerance")
    if rad_extra is not None:
        y = ball_add_error(y, rad_extra)
    return y


# ---------------------------------------------------------------------------
# Gamma(a) and Euler's constant

_gamma_cache = {}
_gamma_lock = threading.Lock()
_BUCKET = 256


def gamma_rational(a, p):
    """Enclosure of Gamma(a) for rational a (not a nonpositive integer)
    with relative error ~2^-p, via Gamma(a') = Gamma(a', N) + lower
    series at a large integer N, after shifting a' into [1, 2).
    Results are cached per (a, precision bucket)."""
    a = mpq(a)
    if a.denominator == 1:
        if a <= 0:
            raise DomainError("Gamma pole at %s" % a)
        return ball(gmpy2.fac(int(a) - 1))
    pq = _BUCKET * ((p + _BUCKET - 1) // _BUCKET)
    with _gamma_lock:
        hit = _gamma_cache.get(a)
    if hit is not None and hit[0] >= pq:
        return hit[1]
    frac = a - gmpy2.floor(a)
    ap = 1 + frac
    shift = a - ap  # integer
    mult = mpq(1)
    if shift > 0:
        for j in range(1, int(shift) + 1):
            mult *= (a - j)
    else:
        for j in range(0, int(-shift)):
            mult *= (a + j)
    mult_mag = abs(_log2_mpq(abs(mult))) if mult != 1 else 0.0
    wp = pq + 48 + math.ceil(mult_mag)
    N = mpq(math.ceil(wp * LN2) + 8)
    upper = asymp_series(ap, N, wp + 4)
    if upper is None:
        raise ResourceError("asymptotic series unexpectedly inadequate")
    pre_mag = float(ap) * _log2_mpq(N) - float(N) * LOG2E - \
        _log2_mpq(ap)
    s = _hyp_sum(ap, N, max(8, wp + 8 + math.ceil(pre_mag)))
    nb = ball(N)
    pre = ball_mul(ball_pow(nb, ap, wp), ball_exp(ball_neg(nb), wp), wp)
    lower = ball_mul(ball_mul_mpq(pre, 1 / ap, wp), s, wp)
    g = ball_add(upper, lower, wp)
    if shift > 0:
        out = ball_mul_mpq(g, mult, wp)
    elif shift < 0:
        out = ball_mul_mpq(g, 1 / mult, wp)
    else:
        out = g
    with _gamma_lock:
        prev = _gamma_cache.get(a)
        if prev is None or prev[0] < pq:
            _gamma_cache[a] = (pq, out)
    return out


_euler_cache = {}
_euler_lock = threading.Lock()


def euler_gamma(p):
    """Euler's constant by the Bessel-quotient series: with
    t_k = (n^k/k!)^2, gamma = (sum H_k t_k)/(sum t_k) - log n within
    pi e^-4n.  Both sums run through one 4x4 binary splitting."""
    pq = _BUCKET * ((p + _BUCKET - 1) // _BUCKET)
    with _euler_lock:
        hit = _euler_cache.get("best")
    if hit is not None and hit[0] >= pq:
        return hit[1]
    n = int(0.17329 * (pq + 16)) + 2
    nsq = mpz(n) * mpz(n)
    cu, cd = _upper_scan_ctx()
    blo_bits = 2 * n * LOG2E - 0.5 * math.log2(13.0 * n)  # B >= e^2n/sqrt(4 pi n)
    # truncate both sums once terms are deep in the (n/k)^2 decay regime
    t = mpfr(1)
    K = 0
    while True:
        if K >= 4 * n:
            margin = 16.0 * (2.0 + math.log(K + 1))
            if gmpy2.get_exp(t) + math.log2(margin) <= blo_bits - (pq + 8):
                break
        K += 1
        if K > _SCAN_CAP:
            raise ResourceError("Euler-constant scan exceeded cap")
        t = cu.div(cu.mul(t, nsq), cd.mul(mpfr(K), mpfr(K)))
    tk = t

    def U(k):
        k1 = mpz(k + 1)
        c = k1 ** 3
        return RatMatrix(4, (
            nsq * k1, 0, 0, 0,
            nsq, nsq * k1, 0, 0,
            0, c, c, 0,
            c, 0, 0, c), c)

    P = bsplit_product(U, 0, K)
    wp = pq + 32
    A = ball_from_ratio(P.num[8], P.den, wp)
    B = ball_from_ratio(P.num[12], P.den, wp)
    quot = ball_div(A, B, wp)
    g = ball_sub(quot, ball_log(ball(n), wp), wp)
    # |A/B - A_K/B_K| <= (tail_A + (A/B) tail_B)/B_K with tail_B <= 2 t_K
    # (term ratio <= 1/16 past K >= 4n) and tail_A <= 2(2 + ln K) t_K
    tail_b = cu.mul(tk, mpfr(2))
    tail_a = cu.mul(tk, mpfr(2.0 * (2.0 + math.log(K + 1))))
    q_up = cu.add(mpfr_abs(quot.mid), quot.rad)
    b_lo = _ctx(53, RoundDown).sub(B.mid, B.rad)
    err = cu.div(cu.add(tail_a, cu.mul(q_up, tail_b)), b_lo)
    ident = pow2(math.ceil(-4 * n * LOG2E) + 2)
    out = ball_add_error(g, cu.add(err, ident))
    if out.rad > pow2(-(pq + 2)):
        raise ResourceError("Euler-constant enclosure too wide")
    with _euler_lock:
        prev = _euler_cache.get("best")
        if prev is None or prev[0] < pq:
            _euler_cache["best"] = (pq, out)
    return out
