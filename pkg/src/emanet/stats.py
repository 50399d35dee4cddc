"""Numerical statistics kernel: compensated moments, Pearson's r, Student-t tails.

Everything here is pure Python with no external statistics dependency, so the
scalar results are bit-reproducible across platforms. The t-distribution tail
is computed through the regularized incomplete beta function, evaluated with
Lentz's continued fraction (iteration cap 1000, epsilon 1e-15). Summations use
Neumaier compensation to keep long reductions (thousands of permutation
differences, large synthetic samples) stable.
"""

from __future__ import annotations

import math

_EPS = 1e-15
_FPMIN = 1e-300
_MAX_ITER = 1000


class LengthMismatch(ValueError):
    """Paired inputs have different lengths."""


def _neumaier(values) -> float:
    """Compensated sum over a sequence of floats."""
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def mean(values) -> float:
    n = len(values)
    if n == 0:
        raise ValueError("mean of an empty sequence")
    return _neumaier(values) / n


def sample_std(values) -> float:
    """Sample standard deviation (n-1 denominator), two-pass compensated."""
    n = len(values)
    if n < 2:
        raise ValueError("sample_std needs at least 2 values")
    m = mean(values)
    ss = _neumaier([(v - m) ** 2 for v in values])
    return math.sqrt(max(ss, 0.0) / (n - 1))


def pearson_r(x, y) -> float:
    """Product-moment correlation of two equal-length sequences.

    Returns 0.0 when either input has zero variance (no estimable linear
    relationship); with 0-3 Likert items and short samples a constant column
    is a realistic input, not an error.
    """
    if len(x) != len(y):
        raise LengthMismatch(f"lengths differ: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValueError("pearson_r needs at least 2 paired values")
    mx = mean(x)
    my = mean(y)
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxx = _neumaier([d * d for d in dx])
    syy = _neumaier([d * d for d in dy])
    if sxx <= 0.0 or syy <= 0.0:
        return 0.0
    sxy = _neumaier([a * b for a, b in zip(dx, dy)])
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz's method)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """I_x(a, b) for 0 <= x <= 1, a > 0, b > 0."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("shape parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x out of range: {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # Symmetry switch keeps the continued fraction in its fast-converging region.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf(t: float, df: int) -> float:
    """Two-sided tail probability of Student's t with df degrees of freedom.

    Uses the identity p = I_{df/(df+t^2)}(df/2, 1/2). Symmetric in t; returns
    1.0 at t = 0 and 0.0 at infinite t.
    """
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if math.isnan(t):
        raise ValueError("t is NaN")
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    p = regularized_incomplete_beta(x, 0.5 * df, 0.5)
    return min(max(p, 0.0), 1.0)
