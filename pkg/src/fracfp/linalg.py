"""Direct solution of the per-step tridiagonal systems.

The system matrix picks up a nonsymmetric drift part and is not guaranteed
diagonally dominant, so the factorisation uses partial pivoting confined
to the band (one fill-in superdiagonal).  Pivot growth max|U|/max|A| is
returned as a conditioning diagnostic.  The compensated weighted
accumulation used by the memory term lives here too; both kernels are
jit-compiled since they sit in O(N) and O(N^2) loops.
"""

from __future__ import annotations

import numpy as np
from numba import njit


class SolverFailure(RuntimeError):
    """Singular or unusable system matrix.

    Attributes ``step`` (time-step index, or None outside the stepping
    loop) and ``pivot_growth`` carry diagnostics.
    """

    def __init__(self, message, step=None, pivot_growth=None):
        super().__init__(message)
        self.step = step
        self.pivot_growth = pivot_growth


@njit(cache=True)
def _plu_solve(sub, diag, sup, rhs):
    """Factor-and-solve for a tridiagonal system with partial pivoting.

    Returns (x, pivot_growth, ok).  Row swaps introduce one extra
    superdiagonal, held in ``d2``.
    """
    n = diag.size
    b = diag.copy()
    c = np.zeros(n)
    d2 = np.zeros(n)
    c[: n - 1] = sup
    a = sub.copy()
    x = rhs.copy()

    amax = 0.0
    for i in range(n):
        if abs(b[i]) > amax:
            amax = abs(b[i])
    for i in range(n - 1):
        if abs(a[i]) > amax:
            amax = abs(a[i])
        if abs(c[i]) > amax:
            amax = abs(c[i])
    if amax == 0.0:
        return x, 0.0, False

    umax = 0.0
    for i in range(n - 1):
        # pivot between row i and row i+1 on column i
        if abs(a[i]) > abs(b[i]):
            b[i], a[i] = a[i], b[i]
            t = c[i]
            c[i] = b[i + 1]
            b[i + 1] = t
            if i + 1 < n - 1:
                t = d2[i]
                d2[i] = c[i + 1]
                c[i + 1] = t
            t = x[i]
            x[i] = x[i + 1]
            x[i + 1] = t
        if b[i] == 0.0:
            return x, umax / amax, False
        m = a[i] / b[i]
        b[i + 1] -= m * c[i]
        if i + 1 < n - 1:
            c[i + 1] -= m * d2[i]
        x[i + 1] -= m * x[i]
        if abs(b[i]) > umax:
            umax = abs(b[i])
        if abs(c[i]) > umax:
            umax = abs(c[i])
        if abs(d2[i]) > umax:
            umax = abs(d2[i])
    if abs(b[n - 1]) > umax:
        umax = abs(b[n - 1])
    if b[n - 1] == 0.0:
        return x, umax / amax, False

    x[n - 1] /= b[n - 1]
    if n > 1:
        x[n - 2] = (x[n - 2] - c[n - 2] * x[n - 1]) / b[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - c[i] * x[i + 1] - d2[i] * x[i + 2]) / b[i]
    return x, umax / amax, True


@njit(cache=True)
def _kahan_weighted_sum(vectors, coeffs, out):
    """out[p] = sum_j coeffs[j] * vectors[j, p], compensated per component.

    Summation runs in increasing j so results do not depend on how the
    caller chunks the history.
    """
    nvec, npt = vectors.shape
    comp = np.zeros(npt)
    for p in range(npt):
        out[p] = 0.0
    for j in range(nvec):
        cj = coeffs[j]
        for p in range(npt):
            y = cj * vectors[j, p] - comp[p]
            t = out[p] + y
            comp[p] = (t - out[p]) - y
            out[p] = t
    return out


def solve_tridiagonal(matrix, rhs):
    """Solve matrix @ x = rhs directly; returns (x, pivot_growth).

    Raises SolverFailure on an exactly singular matrix.
    """
    rhs = np.ascontiguousarray(rhs, dtype=float)
    if rhs.shape != (matrix.n,):
        raise ValueError(
            f"right-hand side has shape {rhs.shape}, expected ({matrix.n},)"
        )
    if matrix.n == 1:
        if matrix.diag[0] == 0.0:
            raise SolverFailure("singular 1x1 system", pivot_growth=0.0)
        return rhs / matrix.diag, 1.0
    x, growth, ok = _plu_solve(
        np.ascontiguousarray(matrix.sub, dtype=float),
        np.ascontiguousarray(matrix.diag, dtype=float),
        np.ascontiguousarray(matrix.sup, dtype=float),
        rhs,
    )
    if not ok:
        raise SolverFailure(
            f"singular tridiagonal system of size {matrix.n}",
            pivot_growth=growth,
        )
    return x, float(growth)


def weighted_history_sum(vectors, coeffs):
    """Compensated accumulation sum_j coeffs[j] * vectors[j, :]."""
    vectors = np.ascontiguousarray(vectors, dtype=float)
    coeffs = np.ascontiguousarray(coeffs, dtype=float)
    if vectors.ndim != 2 or coeffs.shape != (vectors.shape[0],):
        raise ValueError("need a (m, q) stack and m coefficients")
    out = np.empty(vectors.shape[1])
    return _kahan_weighted_sum(vectors, coeffs, out)
