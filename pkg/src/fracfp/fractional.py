"""Convolution weights of the fractional time stepping and related special
functions.

The implicit scheme needs, at step n, the integrals of the power kernel
t**(alpha-1)/Gamma(alpha) over every earlier time interval.  These have the
closed form

    w[n, j] = ((t_n - t_{j-1})**alpha - (t_n - t_j)**alpha) / Gamma(alpha+1)

which this module evaluates in a cancellation-safe way.  The Mittag-Leffler
function is provided for exact reference solutions of the drift-free
problem.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy.special import gammaln

# Switch to the expm1/log1p evaluation of (x+k)**a - x**a once k/x drops
# below this; the direct difference then loses more than ~4 digits.
_CANCEL_SWITCH = 1e-4

# Use the defining power series while |z|**(1/beta) stays below this bound;
# beyond it the series cancellation outgrows practical working precision
# while the large-argument expansion is already accurate.
_SERIES_CUT = 40.0


class AccuracyError(ArithmeticError):
    """Requested accuracy cannot be reached on the given arguments."""


def _check_alpha(alpha):
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"fractional order must be in (0, 1], got {alpha}")


def weight_row(grid, alpha, n):
    """Kernel integrals w[n, 1..n] for step ``n`` of ``grid``.

    Row entries are strictly positive and sum to t_n**alpha/Gamma(alpha+1).
    At alpha = 1 the row is exactly the step sizes k_1..k_n, so the memory
    term of the scheme vanishes identically.
    """
    _check_alpha(alpha)
    n = int(n)
    if not 1 <= n <= grid.n_steps:
        raise ValueError(f"step index {n} outside 1..{grid.n_steps}")
    if alpha == 1.0:
        return grid.steps[:n].copy()
    t = grid.levels
    back = t[n] - t[: n + 1]  # t_n - t_j for j = 0..n (back[n] == 0)
    pows = back**alpha
    row = pows[:-1] - pows[1:]
    if n > 1:
        ratio = grid.steps[: n - 1] / back[1:n]
        small = ratio < _CANCEL_SWITCH
        if small.any():
            idx = np.nonzero(small)[0]
            row[idx] = pows[1:n][idx] * np.expm1(alpha * np.log1p(ratio[idx]))
    return row / math.gamma(alpha + 1.0)


def history_coefficients(grid, alpha, n):
    """Differences w[n, j] - w[n-1, j] for j = 1..n-1.

    These multiply the stored solution vectors in the memory term.  Each
    coefficient is <= 0 (and exactly 0 at alpha = 1).
    """
    n = int(n)
    if n < 2:
        raise ValueError(f"history coefficients need n >= 2, got {n}")
    return weight_row(grid, alpha, n)[: n - 1] - weight_row(grid, alpha, n - 1)


def fractional_integral_of_power(alpha, beta, t):
    """Order-``alpha`` fractional integral of t**(beta-1)/Gamma(beta).

    Maps the power kernel of exponent beta to the one of exponent
    alpha + beta, i.e. returns t**(alpha+beta-1)/Gamma(alpha+beta).
    """
    if not alpha > 0:
        raise ValueError(f"integration order must be positive, got {alpha}")
    if not beta > 0:
        raise ValueError(f"kernel exponent must be positive, got {beta}")
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    s = alpha + beta
    if t == 0.0:
        if s > 1.0:
            return 0.0
        if s == 1.0:
            return 1.0
        return math.inf
    return t ** (s - 1.0) / math.gamma(s)


def mittag_leffler(beta, z):
    """One-parameter Mittag-Leffler function E_beta(z) for real z <= 1.

    Uses the defining series (in elevated working precision, since the
    series alternates badly for z << 0) while |z|**(1/beta) is moderate,
    and the algebraic large-argument expansion otherwise.  Accurate to
    better than ten significant digits for z in [-50, 1] and beta in
    (0, 1].
    """
    if not beta > 0:
        raise ValueError(f"order must be positive, got {beta}")
    z = float(z)
    if z == 0.0:
        return 1.0
    if beta == 1.0:
        return math.exp(z)
    if abs(z) ** (1.0 / beta) <= _SERIES_CUT:
        return _ml_series(beta, z)
    if z < 0.0:
        return _ml_tail(beta, z)
    raise AccuracyError(
        f"E_{beta}({z}) is outside the supported argument range"
    )


def _ml_series(beta, z):
    # Cancellation grows like exp(|z|**(1/beta)); provision digits for it.
    lost = 0.5 * abs(z) ** (1.0 / beta)
    with mpmath.workdps(25 + int(lost)):
        zz = mpmath.mpf(z)
        bb = mpmath.mpf(beta)  # Gamma argument must carry full precision
        total = mpmath.mpf(1)
        peak = mpmath.mpf(1)
        tol = mpmath.mpf(10) ** (-(mpmath.mp.dps + 5))
        power = mpmath.mpf(1)
        prev = mpmath.inf
        for n in range(1, 100_000):
            power *= zz
            term = power / mpmath.gamma(1 + bb * n)
            total += term
            peak = max(peak, abs(total))
            if abs(term) < tol * peak and prev < tol * peak:
                return float(total)
            prev = abs(term)
    raise AccuracyError(f"series for E_{beta}({z}) did not converge")


def _ml_tail(beta, z):
    # E_beta(z) ~ -sum_{k>=1} z**(-k)/Gamma(1-k*beta) for z -> -inf.  Term
    # magnitudes are formed in log space via the reflection formula
    # 1/Gamma(1-w) = Gamma(w)*sin(pi*w)/pi to dodge overflow in Gamma.
    # Truncation is controlled by the sin-free envelope x**(-k)*Gamma(k*beta),
    # which decreases monotonically down to the optimal truncation index.
    x = -z
    logx = math.log(x)
    terms = []
    envelope = math.inf
    leading = None
    for k in range(1, 400):
        logenv = -k * logx + gammaln(k * beta) - math.log(math.pi)
        if logenv > envelope:
            break  # past the optimal truncation point
        envelope = logenv
        s = math.sin(math.pi * k * beta)
        if s != 0.0:
            term = -((-1.0) ** k) * math.copysign(math.exp(logenv + math.log(abs(s))), s)
            terms.append(term)
            if leading is None:
                leading = abs(term)
        if leading is not None and math.exp(logenv) < 1e-17 * leading:
            return math.fsum(terms)
    total = math.fsum(terms)
    if total == 0.0 or math.exp(envelope) > 1e-11 * abs(total):
        raise AccuracyError(
            f"large-argument expansion for E_{beta}({z}) stalls at "
            f"absolute size {math.exp(envelope):.1e}"
        )
    return total
