"""Internal kernel: Gaussian-tilted polynomial moments.

Everything radial in this package reduces to

    H_q(beta)           = int_0^inf  u^q exp(-u^2/2 - beta u) du
    G_m(a, b, beta)     = int_a^b    u^m exp(-u^2/2 - beta u) du
    E_m(a, b, rate)     = int_a^b    u^m exp(-rate u) du

evaluated so that no catastrophic cancellation occurs for any tilt.  The
naive route (binomial expansion against incomplete gammas) loses
~beta^(2m)/m! relative digits and cannot meet the oracle tolerances once
|beta| grows past ~8, so:

  * H uses four regimes: reflected gamma sums (beta < 0), scaled upper
    gammas via erfcx (up to an order-dependent tilt where the alternation
    stays benign), a downward Miller recurrence (mid tilts), and the 1/beta
    asymptotic series (beta >= 100).
  * G marches across the segment in bounded-width pieces anchored at the
    dominant endpoint, so every partial sum has positive terms (or
    alternation bounded by 2^m), finishing infinite tails with H.

Segment values are returned log-scaled as (log_scale, mantissa) pairs so
piecewise densities with large linear offsets never overflow.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erf, erfcx

_LOG_TINY = -745.0
_NEG_BETA_LIMIT = -37.0


def direct_beta_limit(m: int) -> float:
    """Largest tilt for which the alternating scaled-gamma sum keeps ~1e-9
    relative accuracy: amplification beta^(2m) 2^m / m! capped at 1e6."""
    if m == 0:
        return 99.0
    return min(99.0, (1e6 * math.factorial(m) / 2.0**m) ** (1.0 / (2 * m)))


def gaussian_moment_ladder(m: int, beta: float) -> np.ndarray:
    """H_q(beta) for q = 0..m.  Requires beta > about -37 (e^(beta^2/2) overflow)."""
    if beta < _NEG_BETA_LIMIT:
        raise OverflowError("tilt too negative: exp(beta^2/2) overflows")
    if beta < 0.0:
        return _ladder_reflected(m, beta)
    if beta <= direct_beta_limit(m):
        return _ladder_scaled_gamma(m, beta)
    if beta < 100.0:
        return _ladder_miller(m, beta)
    return _ladder_asymptotic(m, beta)


def _ladder_scaled_gamma(m: int, beta: float) -> np.ndarray:
    # H_q = sum_j C(q,j) (-beta)^(q-j) 2^((j-1)/2) Q_j,  Q_j = e^x Gamma((j+1)/2, x)
    x = beta * beta / 2.0
    Q = np.empty(m + 1)
    Q[0] = math.sqrt(math.pi) * erfcx(math.sqrt(x))
    if m >= 1:
        Q[1] = 1.0
    for j in range(2, m + 1):
        a = (j + 1) / 2.0
        Q[j] = (a - 1.0) * Q[j - 2] + x ** (a - 1.0)
    H = np.empty(m + 1)
    for q in range(m + 1):
        H[q] = math.fsum(
            math.comb(q, j) * (-beta) ** (q - j) * 2.0 ** ((j - 1) / 2.0) * Q[j]
            for j in range(q + 1)
        )
    return H


def _ladder_reflected(m: int, beta: float) -> np.ndarray:
    # beta < 0: H_q = e^x sum_j C(q,j) |beta|^(q-j) 2^((j-1)/2) [Gamma_j + (-1)^j gamma_j]
    # with Gamma_j = Gamma((j+1)/2), gamma_j = gamma((j+1)/2, x); all terms positive.
    x = beta * beta / 2.0
    G = np.empty(m + 1)
    g = np.empty(m + 1)
    G[0] = math.sqrt(math.pi)
    if m >= 1:
        G[1] = 1.0
    for j in range(2, m + 1):
        G[j] = ((j + 1) / 2.0 - 1.0) * G[j - 2]
    if x < 2.0:
        for j in range(m + 1):
            a = (j + 1) / 2.0
            term = 1.0 / a
            s = term
            n = 0
            while n < 500:
                n += 1
                term *= x / (a + n)
                s += term
                if term < 1e-18 * s:
                    break
            g[j] = x**a * math.exp(-x) * s
    else:
        ex = math.exp(-x)
        g[0] = math.sqrt(math.pi) * erf(math.sqrt(x))
        if m >= 1:
            g[1] = 1.0 - ex
        for j in range(2, m + 1):
            a = (j + 1) / 2.0
            g[j] = (a - 1.0) * g[j - 2] - x ** (a - 1.0) * ex
    ex_pos = math.exp(x)
    H = np.empty(m + 1)
    for q in range(m + 1):
        H[q] = math.fsum(
            math.comb(q, j) * (-beta) ** (q - j) * 2.0 ** ((j - 1) / 2.0)
            * ex_pos * (G[j] + (-1) ** j * g[j])
            for j in range(q + 1)
        )
    return H


def _ladder_miller(m: int, beta: float) -> np.ndarray:
    # downward recurrence H_{k-1} = (H_{k+1} + beta H_k) / k from trial values;
    # all additions, normalized against the exact H_0 = sqrt(pi/2) erfcx(beta/sqrt(2)).
    mmax = max(m + 8, math.ceil((math.sqrt(m + 1) + 22.0 / beta) ** 2) + 4)
    t_hi = 0.0
    t_lo = 1.0
    out = np.empty(m + 1)
    for k in range(mmax, 0, -1):
        t_new = (t_hi + beta * t_lo) / k
        t_hi = t_lo
        t_lo = t_new
        if t_lo > 1e280:
            t_lo *= 1e-280
            t_hi *= 1e-280
            out[k:] *= 1e-280  # keep already-stored trial values proportional
        if k - 1 <= m:
            out[k - 1] = t_lo
    h0 = math.sqrt(math.pi / 2.0) * erfcx(beta / math.sqrt(2.0))
    return out * (h0 / t_lo)


def _ladder_asymptotic(m: int, beta: float) -> np.ndarray:
    # H_q = q!/beta^(q+1) [1 - (q+2)(q+1)/(2 beta^2) + ...]; beta >= 100 converges fast
    H = np.empty(m + 1)
    for q in range(m + 1):
        term = math.factorial(q) / beta ** (q + 1)
        s = term
        for i in range(1, 60):
            term *= -(q + 2 * i) * (q + 2 * i - 1) / (2.0 * i * beta * beta)
            s += term
            if abs(term) < 1e-18 * abs(s):
                break
        H[q] = s
    return H


def _v_ladder(nmax: int, width: float, rate: float) -> np.ndarray:
    """V[n] = int_0^width w^(n-1) e^(-rate w) dw for n = 1..nmax, rate >= 0."""
    z = rate * width
    V = np.empty(nmax + 1)
    if z < 30.0:
        ez = math.exp(-z)
        for n in range(1, nmax + 1):
            term = 1.0 / n
            s = term
            t = 0
            while t < 400:
                t += 1
                term *= z / (n + t)
                s += term
                if term < 1e-18 * s:
                    break
            V[n] = width**n * ez * s
    else:
        # V_n = ((n-1)! - Gamma(n, z)) / rate^n with Gamma(n, z) = (n-1)! e^-z S_n(z);
        # everything in log space to dodge over/underflow at huge z
        lz = math.log(z)
        lrate = math.log(rate)
        for n in range(1, nmax + 1):
            lt = -z  # log of e^-z z^0/0!
            acc = math.exp(lt) if lt > _LOG_TINY else 0.0
            for k in range(1, n):
                lt += lz - math.log(k)
                if lt > _LOG_TINY:
                    acc += math.exp(lt)
            lv = math.lgamma(n) - n * lrate
            V[n] = math.exp(lv) * (1.0 - acc) if lv > _LOG_TINY else 0.0
    return V


def _t_ladder(m: int, width: float, rate: float) -> np.ndarray:
    """T[j] = int_0^width w^j e^(-w^2/2 - rate w) dw, j = 0..m; rate >= 0, width <= ~1.6.

    Expands the Gaussian factor; alternation is bounded by e^(width^2/2).
    """
    depth = 40
    V = _v_ladder(m + 1 + 2 * depth, width, rate)
    T = np.empty(m + 1)
    for j in range(m + 1):
        s = V[j + 1]
        term = 1.0
        for i in range(1, depth):
            term *= -1.0 / (2.0 * i)
            d = term * V[j + 2 * i + 1]
            s += d
            if abs(d) < 1e-18 * abs(s):
                break
        T[j] = s
    return T


def tail_moment_log(m: int, a: float, beta: float) -> tuple[float, float]:
    """int_a^inf u^m e^(-u^2/2 - beta u) du as (log_scale, mantissa); a >= 0."""
    H = gaussian_moment_ladder(m, beta + a)
    s = math.fsum(math.comb(m, q) * a ** (m - q) * H[q] for q in range(m + 1))
    return -a * a / 2.0 - beta * a, s


def segment_moment_log(m: int, a: float, b: float, beta: float) -> tuple[float, float]:
    """int_a^b u^m e^(-u^2/2 - beta u) du as (log_scale, mantissa); 0 <= a < b <= inf.

    The segment is split at the exponential peak u = -beta; each side is
    marched in pieces whose partial sums cannot cancel below 2^-m of the
    running total, and infinite tails finish through the H ladder.
    """
    if not 0.0 <= a < b:
        raise ValueError("need 0 <= a < b")
    logs: list[float] = []
    vals: list[float] = []

    def push(lp: float, v: float) -> None:
        if v > 0.0 and math.isfinite(lp):
            logs.append(lp)
            vals.append(v)

    def running_max() -> float:
        return max((lp + math.log(v) for lp, v in zip(logs, vals)), default=-math.inf)

    peak = max(a, min(b, -beta))

    # growing side [a, peak]: march down from the right end, halving toward zero
    hi = peak
    while hi > a:
        width = min(1.5, hi / 2.0, hi - a)
        if width <= 0.0 or hi - width <= a * (1.0 + 1e-15) + 1e-300:
            width = hi - a
        rate = max(0.0, -(beta + hi))
        T = _t_ladder(m, width, rate)
        v = math.fsum(
            (-1) ** j * math.comb(m, j) * hi ** (m - j) * T[j] for j in range(m + 1)
        )
        lp = -hi * hi / 2.0 - beta * hi
        push(lp, v)
        hi -= width
        if hi > a and hi > 0.0:
            # remaining mass is below u = hi; integrand there is < e^(lp) (hi')^m
            if lp + m * math.log(hi) < running_max() - 46.0:
                rate2 = max(0.0, -(beta + hi))
                if hi - a <= 1.6:
                    T2 = _t_ladder(m, hi - a, rate2)
                    v2 = math.fsum(
                        (-1) ** j * math.comb(m, j) * hi ** (m - j) * T2[j]
                        for j in range(m + 1)
                    )
                    push(-hi * hi / 2.0 - beta * hi, v2)
                    break
                # fall through and keep marching (cheap; widths halve geometrically)

    # decaying side [peak, b]: march up from the left end
    lo = peak
    while lo < b:
        if math.isinf(b):
            lp, v = tail_moment_log(m, lo, beta)
            push(lp, v)
            break
        width = min(1.5, b - lo)
        T = _t_ladder(m, width, beta + lo)
        v = math.fsum(math.comb(m, j) * lo ** (m - j) * T[j] for j in range(m + 1))
        push(-lo * lo / 2.0 - beta * lo, v)
        lo += width
        if lo < b:
            lt, vt = tail_moment_log(m, lo, beta)
            if vt <= 0.0 or lt + math.log(vt) < running_max() - 46.0:
                break

    return combine_log_pieces(logs, vals)


def exp_segment_moment_log(m: int, a: float, b: float, rate: float) -> tuple[float, float]:
    """int_a^b u^m e^(-rate u) du as (log_scale, mantissa); 0 <= a < b <= inf.

    Negative rates (growing integrands) are allowed on finite segments and
    are marched from the dominant right endpoint.
    """
    if not 0.0 <= a < b:
        raise ValueError("need 0 <= a < b")
    if rate >= 0.0:
        if math.isinf(b):
            # e^(-rate a) sum_j C(m,j) a^(m-j) j!/rate^(j+1); requires rate > 0
            if rate <= 0.0:
                raise ValueError("divergent integral")
            s = math.fsum(
                math.comb(m, j) * a ** (m - j) * math.factorial(j) / rate ** (j + 1)
                for j in range(m + 1)
            )
            return -rate * a, s
        V = _v_ladder(m + 1, b - a, rate)
        s = math.fsum(math.comb(m, j) * a ** (m - j) * V[j + 1] for j in range(m + 1))
        return -rate * a, s
    # growing: march down from b, halving widths near zero to bound alternation
    if math.isinf(b):
        raise ValueError("divergent integral")
    logs: list[float] = []
    vals: list[float] = []
    hi = b
    while hi > a:
        width = min(hi / 2.0, hi - a)
        if width <= 0.0:
            break
        V = _v_ladder(m + 1, width, -rate)
        v = math.fsum(
            (-1) ** j * math.comb(m, j) * hi ** (m - j) * V[j + 1] for j in range(m + 1)
        )
        lp = -rate * hi
        if v > 0.0:
            logs.append(lp)
            vals.append(v)
        hi -= width
        if hi > a and logs:
            mx = max(lp2 + math.log(v2) for lp2, v2 in zip(logs, vals))
            if hi > 0 and (-rate * hi) + m * math.log(hi) < mx - 46.0:
                break
    if not logs:
        return 0.0, 0.0
    mx = max(lp + math.log(v) for lp, v in zip(logs, vals))
    return mx, math.fsum(v * math.exp(lp - mx) for lp, v in zip(logs, vals))


def combine_log_pieces(logs: list[float], vals: list[float]) -> tuple[float, float]:
    """Sum of exp(log) * val pairs as one (log_scale, mantissa) pair."""
    finite = [(lp, v) for lp, v in zip(logs, vals) if v > 0.0 and math.isfinite(lp)]
    if not finite:
        return 0.0, 0.0
    mx = max(lp + math.log(v) for lp, v in finite)
    s = math.fsum(v * math.exp(lp - mx) for lp, v in finite)
    return mx, s
