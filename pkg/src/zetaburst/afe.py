"""L(s, chi) for rational s by the approximate functional equation.

Gamma((s+delta)/2) L(s, chi) equals a correction term (only when q = 1)
plus two rapidly convergent series whose terms are incomplete gamma
values at pi n^2 alpha / q and pi n^2 / (alpha q): the super-exponential
decay Gamma(a, C n^2) ~ exp(-C n^2) means only O(sqrt(p)) terms are
needed for p bits.  Truncation lengths come from an explicit tail bound
evaluated for N = 1, 2, ...; each term is computed only to the handful
of bits it actually contributes, which is where most of the speed at
high precision comes from.

Imprimitive characters are reduced to their primitive part times a
finite Euler product.
"""

import math
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpq, mpfr

from .chars import DirichletChar, factorize
from .incgamma import (LOG2E, estimate_log_incgamma, euler_gamma,
                       gamma_rational, incgamma_bitburst)
from .numcore import (Ball, ComplexBall, DomainError, ResourceError,
                      ball, ball_add, ball_add_error, ball_div, ball_exp,
                      ball_mul, ball_mul_mpq, ball_neg, ball_pow, ball_sub,
                      cball, const_pi, pow2)

__all__ = [
    "LValueRequest", "AFEPlan", "tail_bound", "choose_truncation",
    "afe_eval", "lfunc_eval", "gamma_rational", "euler_gamma",
]

_N_CAP = 2_000_000


@dataclass(frozen=True)
class LValueRequest:
    """What to evaluate: L(s, chi) to ``prec`` bits, with the free
    splitting parameter alpha (default 1, which balances both series)."""

    char: DirichletChar
    s: mpq
    prec: int
    alpha: mpq = mpq(1)

    def __post_init__(self):
        object.__setattr__(self, "s", mpq(self.s))
        object.__setattr__(self, "alpha", mpq(self.alpha))
        if self.prec < 16:
            raise ValueError("prec must be >= 16")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.char.q == 1 and self.s in (0, 1):
            raise DomainError("q = 1 excludes s in {0, 1}")


@dataclass
class AFEPlan:
    """Truncation lengths, tail bounds and the per-term bit schedule."""

    n1: int
    n2: int
    eps1: mpfr
    eps2: mpfr
    prec1: list = field(repr=False)
    prec2: list = field(repr=False)
    gamma_scale_bits: int = 0
    symmetric: bool = False


def tail_bound(series, s, delta, q, alpha, N):
    """Upper bound (as a Ball) for the tail starting at n = N of the
    chosen series, or None when the bound's hypothesis D N^2 > C - 1
    does not hold yet."""
    s, alpha = mpq(s), mpq(alpha)
    sigma = s
    if series == 1:
        c = (sigma + delta) / 2
        d = ball_mul_mpq(const_pi(64), alpha / q, 64)
    elif series == 2:
        c = (1 - sigma + delta) / 2
        d = ball_mul_mpq(const_pi(64), mpq(1) / (q * alpha), 64)
    else:
        raise ValueError("series must be 1 or 2")
    dn2 = ball_mul_mpq(d, N * N, 64)
    if not dn2.lo() > c - 1:
        return None
    if c > 1:
        b0 = ball_div(ball(c - 1, 64), dn2, 64)
        if not b0.hi() < 1:
            return None
        inv = ball_div(ball(1), ball_sub(ball(1), b0, 64), 64)
    else:
        inv = ball(1)
    lead = ball_mul(ball_pow(d, c - 1, 64), inv, 64)
    decay = ball_exp(ball_neg(dn2), 64)
    geo = ball_sub(ball(1), ball_exp(ball_neg(d), 64), 64)
    den = ball_mul_mpq(geo, mpq(N) ** (2 - delta), 64)
    return ball_div(ball_mul(lead, decay, 64), den, 64)


def _gamma_scale_bits(a1):
    af = float(a1)
    if a1.denominator == 1 and a1 <= 0:
        return 0
    return math.ceil(math.lgamma(af) * LOG2E)


def _zq(n, series, q, alpha):
    return n * n * alpha / q if series == 1 else mpq(n * n) / (alpha * q)


def choose_truncation(request):
    """Scan N = 1, 2, ... for both series until the tails drop below
    2^-(p+3) on the scale of Gamma((s+delta)/2), then lay out how many
    bits each term needs."""
    chi, s, p, alpha = (request.char, request.s, request.prec,
                        request.alpha)
    q, delta = chi.q, chi.parity
    sigma = s
    a1 = (s + delta) / 2
    g = _gamma_scale_bits(a1)
    h = float(sigma - mpq(1, 2)) * (math.log2(math.pi) - math.log2(q))
    pi_f = math.pi
    targets = (pow2(g - p - 3), pow2(g - p - 3 - math.ceil(h)))
    sym = (s == mpq(1, 2) and alpha == 1 and chi.order <= 2)
    out = []
    for series in (1, 2):
        if series == 2 and sym:
            out.append(out[0])
            continue
        target = targets[series - 1]
        N = 1
        while True:
            b = tail_bound(series, s, delta, q, alpha, N)
            if b is not None and b.hi() <= mpq(target):
                eps = _upper(b)
                break
            N += 1
            if N > _N_CAP:
                raise ResourceError("series truncation scan exceeded cap")
        sig = float(sigma) if series == 1 else float(1 - sigma)
        hser = 0 if series == 1 else math.ceil(h)
        lead = p - g + 2 * max(1, N).bit_length() + 6 + hser
        precs = []
        for n in range(1, N):
            pn = lead - math.floor(sig * math.log2(n)) if n > 1 else lead
            precs.append(max(16, pn))
        out.append((N, eps, precs))
    n1, eps1, prec1 = out[0]
    n2, eps2, prec2 = out[1]
    return AFEPlan(n1=n1, n2=n2, eps1=eps1, eps2=eps2, prec1=prec1,
                   prec2=prec2, gamma_scale_bits=g, symmetric=sym)


def _upper(b):
    return gmpy2.context(precision=30, round=gmpy2.RoundUp).add(
        b.mid if b.mid > 0 else mpfr(0), b.rad)


def _series_sum(chi, s_exp, a, series, q, alpha, plan, wp, real_char):
    """One truncated AFE series: sum of chi(n) n^-s_exp Gamma(a, z_n)."""
    N = plan.n1 if series == 1 else plan.n2
    precs = plan.prec1 if series == 1 else plan.prec2
    acc = ball(0) if real_char else cball(0)
    for n in range(1, N):
        v = chi(n)
        if v is None:
            continue
        pn = precs[n - 1]
        zq_ = _zq(n, series, q, alpha)
        est = estimate_log_incgamma(a, zq_)
        pz = max(32, pn + est + 24)
        zb = ball_mul_mpq(const_pi(pz), zq_, pz)
        G = incgamma_bitburst(a, zb, pn)
        if n > 1:
            pc = max(32, pn + est + 16)
            coeff = ball_pow(ball(n), -s_exp, pc)
            term = ball_mul(coeff, G, wp)
        else:
            term = G
        if real_char:
            if v.real_sign() < 0:
                term = ball_neg(term)
            acc = ball_add(acc, term, wp)
        else:
            acc = acc.add(v.as_complex(wp).mul_ball(term, wp), wp)
    return acc


def afe_eval(request):
    """Enclosure of L(s, chi) for primitive chi, radius at most
    2^-p max(1, |L|).  Real characters give a Ball, complex ones a
    ComplexBall."""
    chi, s, p = request.char, request.s, request.prec
    if not chi.is_primitive():
        raise DomainError("afe_eval needs a primitive character")
    q, delta = chi.q, chi.parity
    real_char = chi.order <= 2
    a1 = (s + delta) / 2
    if a1.denominator == 1 and a1 <= 0:
        # Gamma pole on the left side forces a trivial zero of L
        return ball(0) if real_char else cball(0)
    p_eff = p
    for attempt in range(4):
        req = LValueRequest(chi, s, p_eff, request.alpha)
        out = _afe_eval_once(req, real_char)
        if _rad_ok(out, p, real_char):
            return out
        p_eff += 64 + p_eff // 4
    raise ResourceError("AFE evaluation failed to meet tolerance")


def _rad_ok(out, p, real_char):
    if real_char:
        scale = max(0, out.mag_bits())
        return out.rad <= pow2(-p + scale)
    scale = max(0, out.re.mag_bits(), out.im.mag_bits())
    tol = pow2(-p + scale)
    return out.re.rad <= tol and out.im.rad <= tol


def _afe_eval_once(request, real_char):
    chi, s, p, alpha = (request.char, request.s, request.prec,
                        request.alpha)
    q, delta = chi.q, chi.parity
    a1 = (s + delta) / 2
    a2 = (1 - s + delta) / 2
    plan = choose_truncation(request)
    wp = p + 40 + (plan.n1 + plan.n2 + 2).bit_length() + \
        max(0, plan.gamma_scale_bits)
    s1 = _series_sum(chi, s, a1, 1, q, alpha, plan, wp, real_char)
    if plan.symmetric:
        s2 = s1
    else:
        s2 = _series_sum(chi.conjugate(), 1 - s, a2, 2, q, alpha, plan,
                         wp, real_char)
    if real_char:
        s1 = ball_add_error(s1, plan.eps1)
        s2 = ball_add_error(s2, plan.eps2)
    else:
        s1 = s1.add_error(plan.eps1)
        s2 = s2.add_error(plan.eps2)
    piq = ball_div(const_pi(wp), ball(q), wp)
    pref = ball_pow(piq, s - mpq(1, 2), wp)
    om = chi.root_number(wp)
    if real_char:
        if not om.im.contains_zero():
            raise ResourceError("real character with non-real root number")
        total = ball_add(s1, ball_mul(ball_mul(om.re, pref, wp), s2, wp), wp)
    else:
        total = s1.add(om.mul_ball(pref, wp).mul(s2, wp), wp)
    if q == 1:
        t1 = ball_mul_mpq(ball_pow(ball(alpha, wp), (s - 1) / 2, wp),
                          1 / (s - 1), wp)
        t2 = ball_mul_mpq(ball_pow(ball(alpha, wp), s / 2, wp), 1 / s, wp)
        dt = ball_mul(ball_pow(const_pi(wp), s / 2, wp),
                      ball_sub(t1, t2, wp), wp)
        if real_char:
            total = ball_add(total, dt, wp)
        else:
            total = total.add(ComplexBall(dt), wp)
    gam = gamma_rational(a1, p + 48)
    if real_char:
        return ball_div(total, gam, wp)
    return total.div_ball(gam, wp)


def lfunc_eval(request):
    """L(s, chi) for arbitrary chi: primitive part via the functional
    equation, times the finite Euler product over primes dividing q but
    not the conductor."""
    chi, s, p = request.char, request.s, request.prec
    f, chi_star = chi.primitive_part()
    if f == 1 and s == 1:
        raise DomainError("pole of zeta at s = 1")
    wp = p + 32
    if f == 1 and s == 0:
        base = ball(mpq(-1, 2))  # zeta(0), exact
    else:
        base = afe_eval(LValueRequest(chi_star, s, p + 16, request.alpha))
    real_out = isinstance(base, Ball)
    for prime, _e in factorize(chi.q):
        if f % prime == 0:
            continue
        v = chi_star(prime)
        ps = ball_pow(ball(prime), -s, wp)
        if real_out:
            sgn = v.real_sign()
            factor = ball_sub(ball(1), ps if sgn > 0 else ball_neg(ps), wp)
            base = ball_mul(base, factor, wp)
        else:
            w = v.as_complex(wp).mul_ball(ps, wp)
            factor = cball(1).sub(w, wp)
            base = base.mul(factor, wp)
    return base
