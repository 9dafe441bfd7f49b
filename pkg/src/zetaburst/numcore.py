"""Arbitrary-precision ball arithmetic on top of GMP/MPFR.

A ``Ball`` is a midpoint-radius enclosure [mid - rad, mid + rad] of a real
number: every operation returns a ball containing the exact image of its
input set(s).  Midpoints are MPFR floats (sign, big mantissa, binary
exponent) rounded at an explicit per-operation precision; the rounding
error is captured through MPFR's inexact flag and absorbed into the
radius.  Radii are kept at ~30 bits of relative precision and always
rounded upward.

There is no ambient global precision: every operation takes the working
precision in bits.  All values are immutable and all operations pure, so
balls can be shared freely between threads (MPFR contexts are cached per
thread).
"""

import re
import threading

import gmpy2
from gmpy2 import mpfr, mpq, mpz

RADIUS_PREC = 30

RoundDown = gmpy2.RoundDown
RoundUp = gmpy2.RoundUp
RoundNearest = gmpy2.RoundToNearest


class DomainError(ValueError):
    """Input outside an operation's mathematical domain."""


class ResourceError(RuntimeError):
    """An iteration/precision cap was exceeded before reaching tolerance."""


_tls = threading.local()


def _ctx(prec, rnd=RoundNearest):
    """Per-thread cached MPFR context (no shared mutable state)."""
    try:
        cache = _tls.ctxcache
    except AttributeError:
        cache = _tls.ctxcache = {}
    key = (prec, rnd)
    ctx = cache.get(key)
    if ctx is None:
        ctx = gmpy2.context(precision=prec, round=rnd)
        cache[key] = ctx
    return ctx


def _rctx():
    return _ctx(RADIUS_PREC, RoundUp)


_ZERO = mpfr(0)


def pow2(k):
    """Exact MPFR power of two 2**k (k any int within exponent range)."""
    if k >= 0:
        return gmpy2.mul_2exp(mpfr(1), k)
    return gmpy2.div_2exp(mpfr(1), -k)


def mpfr_neg(x):
    """Exact negation (bare operators round at the ambient 53-bit
    context, so they must never touch high-precision midpoints)."""
    return _ctx(max(2, x.precision)).minus(x)


def mpfr_abs(x):
    return mpfr_neg(x) if x < 0 else x


def _round_op(prec, opname, *args):
    """Apply a context method at ``prec`` (to nearest) and return
    (result, rounding-error bound as an exact mpfr)."""
    ctx = _ctx(prec)
    ctx.clear_flags()
    r = getattr(ctx, opname)(*args)
    if not gmpy2.is_finite(r):
        raise DomainError("operation overflowed or left the real line")
    if not ctx.inexact:
        return r, _ZERO
    if ctx.underflow:
        raise ResourceError("MPFR exponent range exhausted")
    return r, pow2(gmpy2.get_exp(r) - prec - 1)


class Ball:
    """Midpoint-radius enclosure of a real number."""

    __slots__ = ("mid", "rad")

    def __init__(self, mid, rad=_ZERO):
        self.mid = mid
        self.rad = rad

    # -- exact views -------------------------------------------------

    def mid_mpq(self):
        return mpq(self.mid)

    def bounds_mpq(self):
        """Exact rational (lo, hi) endpoints."""
        m = mpq(self.mid)
        r = mpq(self.rad)
        return m - r, m + r

    def lo(self):
        return self.bounds_mpq()[0]

    def hi(self):
        return self.bounds_mpq()[1]

    # -- predicates (all exact) --------------------------------------

    def is_exact(self):
        return self.rad == 0

    def contains_value(self, v):
        lo, hi = self.bounds_mpq()
        v = mpq(v)
        return lo <= v <= hi

    def contains(self, other):
        lo, hi = self.bounds_mpq()
        olo, ohi = other.bounds_mpq()
        return lo <= olo and ohi <= hi

    def overlaps(self, other):
        lo, hi = self.bounds_mpq()
        olo, ohi = other.bounds_mpq()
        return lo <= ohi and olo <= hi

    def contains_zero(self):
        return self.contains_value(0)

    def is_positive(self):
        return self.lo() > 0

    def is_negative(self):
        return self.hi() < 0

    def mag_bits(self):
        """Rough magnitude ceil(log2 |self|), 0 for balls containing 0."""
        if self.mid == 0:
            return gmpy2.get_exp(self.rad) if self.rad != 0 else -(10 ** 9)
        return max(gmpy2.get_exp(self.mid), gmpy2.get_exp(self.rad))

    def __repr__(self):
        return "Ball(%s)" % ball_to_decimal(self, 20)


def ball(value, prec=None):
    """Ball from an exact value (int/mpz/mpq/mpfr).  Dyadic inputs are
    stored exactly with zero radius; other rationals are rounded at
    ``prec`` with the rounding error in the radius."""
    if isinstance(value, Ball):
        return value
    if isinstance(value, mpfr):
        if not gmpy2.is_finite(value):
            raise DomainError("non-finite midpoint")
        return Ball(value, _ZERO)
    if isinstance(value, (int, mpz)):
        v = mpz(value)
        bits = max(2, v.bit_length())
        return Ball(mpfr(v, precision=bits), _ZERO)
    if isinstance(value, mpq):
        den = value.denominator
        k = den.bit_length() - 1
        if den == mpz(1) << k:  # dyadic: exactly representable
            num = value.numerator
            bits = max(2, num.bit_length())
            m = _ctx(bits).div_2exp(mpfr(num, precision=bits), k)
            return Ball(m, _ZERO)
        if prec is None:
            raise ValueError("prec required for non-dyadic rationals")
        m, err = _round_op(prec, "add", value, _ZERO)
        return Ball(m, err)
    raise TypeError("cannot build a ball from %r" % type(value))


def ball_from_ratio(num, den, prec):
    """Ball enclosing the exact fraction num/den (big integers)."""
    m, err = _round_op(prec, "div", mpz(num), mpz(den))
    return Ball(m, err)


def _radd(*xs):
    r = _rctx()
    acc = _ZERO
    for x in xs:
        if x != 0:
            acc = r.add(acc, x)
    return acc


def _rmul(a, b):
    if a == 0 or b == 0:
        return _ZERO
    return _rctx().mul(mpfr_abs(a), mpfr_abs(b))


def ball_add(x, y, prec):
    m, err = _round_op(prec, "add", x.mid, y.mid)
    return Ball(m, _radd(x.rad, y.rad, err))


def ball_sub(x, y, prec):
    m, err = _round_op(prec, "sub", x.mid, y.mid)
    return Ball(m, _radd(x.rad, y.rad, err))


def ball_neg(x):
    return Ball(mpfr_neg(x.mid), x.rad)


def ball_abs(x):
    return Ball(mpfr_abs(x.mid), x.rad)


def ball_mul(x, y, prec):
    m, err = _round_op(prec, "mul", x.mid, y.mid)
    rad = _radd(_rmul(x.mid, y.rad), _rmul(y.mid, x.rad),
                _rmul(x.rad, y.rad), err)
    return Ball(m, rad)


def ball_mul_mpq(x, c, prec):
    """x times an exact rational scalar c."""
    c = mpq(c)
    if c == 0:
        return Ball(_ZERO, _ZERO)
    m, err = _round_op(prec, "mul", x.mid, c)
    r = _ZERO if x.rad == 0 else _rctx().mul(x.rad, abs(c))
    return Ball(m, _radd(r, err))


def ball_div(x, y, prec):
    # |ym| must exceed yr, i.e. 0 not in y
    ym = mpfr_abs(y.mid)
    d = _ctx(RADIUS_PREC, RoundDown).sub(ym, y.rad)
    if d <= 0:
        raise DomainError("division by a ball containing zero")
    m, err = _round_op(prec, "div", x.mid, y.mid)
    # |x/y - xm/ym| <= (xr + |xm/ym| yr) / (|ym| - yr)
    r = _rctx()
    t = r.div(mpfr_abs(x.mid), ym)
    rad = _radd(r.div(_radd(x.rad, _rmul(t, y.rad)), d), err)
    return Ball(m, rad)


def ball_inv(y, prec):
    return ball_div(ball(1), y, prec)


def ball_add_error(x, err):
    """Widen the radius by an absolute error bound (mpfr or exact qty)."""
    if not isinstance(err, mpfr):
        err = _rctx().add(mpfr(0), mpq(err))
    if err < 0:
        raise ValueError("negative error bound")
    return Ball(x.mid, _radd(x.rad, err))


def _endpoints(x, prec):
    lo = _ctx(prec + 32, RoundDown).sub(x.mid, x.rad)
    hi = _ctx(prec + 32, RoundUp).add(x.mid, x.rad)
    return lo, hi


_ONE_PLUS = mpfr(1, precision=20) + pow2(-10)  # radius inflation factor


def _from_endpoints(flo, fhi, prec):
    """Ball covering [flo, fhi]; requires prec >= 8 for the inflation
    factor to dominate the midpoint-centering slack."""
    if flo == fhi:
        return Ball(flo, _ZERO)
    cu = _ctx(prec + 8, RoundUp)
    half_full = cu.div_2exp(cu.sub(fhi, flo), 1)
    mid, err = _round_op(prec, "add", flo, half_full)
    r = _rctx()
    half = r.div_2exp(r.sub(fhi, flo), 1)
    return Ball(mid, _radd(r.mul(half, _ONE_PLUS), err))


def _monotone(opname, x, prec, increasing=True, *extra):
    lo, hi = _endpoints(x, prec)
    if not increasing:
        lo, hi = hi, lo
    cd = _ctx(prec + 4, RoundDown)
    cu = _ctx(prec + 4, RoundUp)
    flo = getattr(cd, opname)(lo, *extra)
    fhi = getattr(cu, opname)(hi, *extra)
    if not (gmpy2.is_finite(flo) and gmpy2.is_finite(fhi)):
        raise DomainError("%s overflowed" % opname)
    return _from_endpoints(flo, fhi, prec)


def ball_sqrt(x, prec):
    if x.lo() < 0:
        raise DomainError("sqrt of a ball reaching below zero")
    return _monotone("sqrt", x, prec)


def ball_exp(x, prec):
    return _monotone("exp", x, prec)


def ball_log(x, prec):
    if x.lo() <= 0:
        raise DomainError("log of a ball reaching zero or below")
    return _monotone("log", x, prec)


def ball_atan(x, prec):
    return _monotone("atan", x, prec)


def _lipschitz1(opname, x, prec):
    # |f'| <= 1 everywhere: f(mid) +/- (rad + rounding)
    m, err = _round_op(prec, opname, x.mid)
    return Ball(m, _radd(x.rad, err))


def ball_cos(x, prec):
    return _lipschitz1("cos", x, prec)


def ball_sin(x, prec):
    return _lipschitz1("sin", x, prec)


def ball_cosh(x, prec):
    # even and increasing on [0, oo): evaluate on |x| endpoints
    lo, hi = _endpoints(x, prec)
    alo_, ahi_ = mpfr_abs(lo), mpfr_abs(hi)
    alo = mpfr(0) if (lo <= 0 <= hi) else min(alo_, ahi_)
    ahi = max(alo_, ahi_)
    cd = _ctx(prec + 4, RoundDown)
    cu = _ctx(prec + 4, RoundUp)
    flo, fhi = cd.cosh(alo), cu.cosh(ahi)
    if not gmpy2.is_finite(fhi):
        raise DomainError("cosh overflowed")
    return _from_endpoints(flo, fhi, prec)


def _pow_dir(t, num, den, rnd, prec):
    """Directed rounding of t**(num/den) for t > 0 (num, den exact ints)."""
    c = _ctx(prec, rnd)
    s = c.pow(t, mpz(num)) if num != 1 else t
    if den == 1:
        return s
    return c.rootn(s, den)


def ball_pow(x, e, prec):
    """x**e for a strictly positive ball x and exact rational e."""
    e = mpq(e)
    if e == 0:
        return ball(1)
    if e.denominator == 1 and x.contains_zero() and 0 < e <= 64:
        # small integer powers are fine with zero in the ball
        k = int(e)
        out = ball(1)
        for _ in range(k):
            out = ball_mul(out, x, prec + 8)
        return out
    if x.lo() <= 0:
        raise DomainError("pow base must be strictly positive")
    num, den = int(e.numerator), int(e.denominator)
    lo, hi = _endpoints(x, prec)
    if e < 0:
        lo, hi = hi, lo
    flo = _pow_dir(lo, num, den, RoundDown, prec + 4)
    fhi = _pow_dir(hi, num, den, RoundUp, prec + 4)
    if not (gmpy2.is_finite(flo) and gmpy2.is_finite(fhi)):
        raise DomainError("pow overflowed")
    return _from_endpoints(flo, fhi, prec)


def const_pi(prec):
    if prec < 2:
        raise ValueError("prec >= 2 required")
    c = _ctx(prec)
    m = c.const_pi()
    return Ball(m, pow2(2 - prec - 1))


def const_log2(prec):
    c = _ctx(prec)
    return Ball(c.const_log2(), pow2(0 - prec - 1))


def ball_arith(op, x, y=None, prec=53):
    """String-dispatched basic arithmetic; the two-operand ops need y."""
    if op == "add":
        return ball_add(x, y, prec)
    if op == "sub":
        return ball_sub(x, y, prec)
    if op == "mul":
        return ball_mul(x, y, prec)
    if op == "div":
        return ball_div(x, y, prec)
    if op == "sqrt":
        return ball_sqrt(x, prec)
    if op == "neg":
        return ball_neg(x)
    raise ValueError("unknown op %r" % op)


def elem_eval(f, x, e=None, prec=53):
    """String-dispatched elementary functions over balls."""
    if f == "exp":
        return ball_exp(x, prec)
    if f == "log":
        return ball_log(x, prec)
    if f == "pow_rational":
        return ball_pow(x, e, prec)
    if f == "cos":
        return ball_cos(x, prec)
    if f == "sin":
        return ball_sin(x, prec)
    if f == "cosh":
        return ball_cosh(x, prec)
    if f == "atan":
        return ball_atan(x, prec)
    raise ValueError("unknown function %r" % f)


# ---------------------------------------------------------------------------
# complex rectangles


class ComplexBall:
    """Rectangular enclosure re + i*im with Ball components."""

    __slots__ = ("re", "im")

    def __init__(self, re_, im_=None):
        self.re = re_ if isinstance(re_, Ball) else ball(re_)
        if im_ is None:
            im_ = Ball(_ZERO, _ZERO)
        self.im = im_ if isinstance(im_, Ball) else ball(im_)

    def conj(self):
        return ComplexBall(self.re, ball_neg(self.im))

    def neg(self):
        return ComplexBall(ball_neg(self.re), ball_neg(self.im))

    def mul_i(self):
        return ComplexBall(ball_neg(self.im), self.re)

    def add(self, w, prec):
        return ComplexBall(ball_add(self.re, w.re, prec),
                           ball_add(self.im, w.im, prec))

    def sub(self, w, prec):
        return ComplexBall(ball_sub(self.re, w.re, prec),
                           ball_sub(self.im, w.im, prec))

    def mul(self, w, prec):
        a, b, c, d = self.re, self.im, w.re, w.im
        return ComplexBall(
            ball_sub(ball_mul(a, c, prec), ball_mul(b, d, prec), prec),
            ball_add(ball_mul(a, d, prec), ball_mul(b, c, prec), prec))

    def mul_ball(self, r, prec):
        return ComplexBall(ball_mul(self.re, r, prec),
                           ball_mul(self.im, r, prec))

    def abs2(self, prec):
        return ball_add(ball_mul(self.re, self.re, prec),
                        ball_mul(self.im, self.im, prec), prec)

    def div(self, w, prec):
        den = w.abs2(prec)
        num = self.mul(w.conj(), prec)
        return ComplexBall(ball_div(num.re, den, prec),
                           ball_div(num.im, den, prec))

    def div_ball(self, r, prec):
        return ComplexBall(ball_div(self.re, r, prec),
                           ball_div(self.im, r, prec))

    def add_error(self, err):
        return ComplexBall(ball_add_error(self.re, err),
                           ball_add_error(self.im, err))

    def overlaps(self, w):
        return self.re.overlaps(w.re) and self.im.overlaps(w.im)

    def is_real(self):
        return self.im.contains_zero()

    def __repr__(self):
        return "ComplexBall(%s, %s)" % (
            ball_to_decimal(self.re, 20), ball_to_decimal(self.im, 20))


def cball(re_, im_=0):
    return ComplexBall(ball(re_), ball(im_))


def cball_unit_angle(t, prec):
    """e^{2 pi i t} for an exact rational t, as a ComplexBall."""
    t = mpq(t) % 1
    if t * 4 in (0, 1, 2, 3):
        k = int(t * 4)
        return [cball(1), cball(0, 1), cball(-1), cball(0, -1)][k]
    theta = ball_mul_mpq(const_pi(prec + 8), 2 * t, prec + 8)
    return ComplexBall(ball_cos(theta, prec), ball_sin(theta, prec))


# ---------------------------------------------------------------------------
# decimal serialization: "+/-d.ddd...e+X +/- r"

_DEC_RE = re.compile(
    r"^\s*([+-]?\d+(?:\.\d*)?)e([+-]?\d+)\s*\+/-\s*"
    r"([+-]?\d+(?:\.\d*)?(?:e[+-]?\d+)?|0)\s*$")


def _mpq_from_decimal(s):
    s = s.strip()
    m = re.match(r"^([+-]?)(\d+)(?:\.(\d*))?(?:e([+-]?\d+))?$", s)
    if not m:
        raise ValueError("bad decimal literal %r" % s)
    sign, ip, fp, ex = m.group(1), m.group(2), m.group(3) or "", m.group(4)
    v = mpq(int(ip + fp), 10 ** len(fp))
    if ex:
        e = int(ex)
        v = v * mpq(10) ** e if e >= 0 else v / mpq(10) ** (-e)
    return -v if sign == "-" else v


def ball_to_decimal(b, digits):
    """Serialize to "d.dd...e+X +/- r" with the decimal rounding of the
    midpoint absorbed into the printed radius (round-trip containment)."""
    digits = max(1, digits)
    if b.mid == 0:
        mid_str, exp10 = "0", 0
        mid_q = mpq(0)
    else:
        dig, exp10, _ = b.mid.digits(10, digits)
        neg = dig.startswith("-")
        d = dig[1:] if neg else dig
        mid_str = ("-" if neg else "") + d[0] + "." + d[1:]
        exp10 -= 1
        mid_q = _mpq_from_decimal(mid_str + "e" + str(exp10))
    # total radius = stored radius + |mid - printed mid|, exactly
    err_q = abs(mpq(b.mid) - mid_q) + mpq(b.rad)
    if err_q == 0:
        rad_str = "0"
    else:
        r = _rctx().add(_ZERO, err_q)
        rdig, rexp, _ = r.digits(10, 2)
        cand = mpq(int(rdig), 100) * mpq(10) ** rexp
        if cand < err_q:
            cand_i = int(rdig) + 1
            if cand_i == 100:
                cand_i, rexp = 10, rexp + 1
            rdig = str(cand_i)
        rad_str = rdig[0] + "." + rdig[1] + "e" + "%+d" % (rexp - 1)
    return "%se%+d +/- %s" % (mid_str, exp10, rad_str)


def ball_from_decimal(s):
    m = _DEC_RE.match(s)
    if not m:
        raise ValueError("cannot parse ball %r" % s)
    mid_q = _mpq_from_decimal(m.group(1) + "e" + m.group(2))
    rad_q = _mpq_from_decimal(m.group(3)) if m.group(3) != "0" else mpq(0)
    prec = max(32, 4 * len(m.group(1)))
    out = ball(mid_q, prec)
    return ball_add_error(out, rad_q) if rad_q else out
