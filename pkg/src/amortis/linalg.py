"""Tiny dense linear algebra for the 4-unknown calibration problems.

Pure Python on purpose: the systems are 4x4 and the solver needs to report
rank deficiency in its own terms rather than through a LAPACK warning.
"""

from __future__ import annotations

import math
from typing import Sequence

from amortis.errors import CalibrationError

Matrix = list[list[float]]

SINGULAR_RTOL = 1e-12


def solve(a: Sequence[Sequence[float]], b: Sequence[float]) -> list[float]:
    """Solve the square system ``a x = b`` by Gaussian elimination with partial pivoting."""
    n = len(a)
    if any(len(row) != n for row in a) or len(b) != n:
        raise ValueError("solve() needs a square matrix and a matching right-hand side")
    m = [list(map(float, row)) + [float(rhs)] for row, rhs in zip(a, b)]
    scale = max((abs(v) for row in a for v in row), default=0.0)
    if scale == 0.0:
        raise CalibrationError("matrix is identically zero")

    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(m[r][col]))
        if abs(m[pivot][col]) <= SINGULAR_RTOL * scale:
            raise CalibrationError(f"matrix is rank deficient (column {col} has no usable pivot)")
        m[col], m[pivot] = m[pivot], m[col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            if f:
                for c in range(col, n + 1):
                    m[r][c] -= f * m[col][c]

    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        acc = m[r][n] - sum(m[r][c] * x[c] for c in range(r + 1, n))
        x[r] = acc / m[r][r]
    return x


def inverse(a: Sequence[Sequence[float]]) -> Matrix:
    n = len(a)
    cols = [solve(a, [1.0 if i == j else 0.0 for i in range(n)]) for j in range(n)]
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def norm1(a: Sequence[Sequence[float]]) -> float:
    """Maximum absolute column sum."""
    return max(sum(abs(row[j]) for row in a) for j in range(len(a[0])))


def normal_equations(design: Sequence[Sequence[float]], y: Sequence[float]) -> tuple[Matrix, list[float]]:
    k = len(design[0])
    gram = [[sum(row[i] * row[j] for row in design) for j in range(k)] for i in range(k)]
    rhs = [sum(row[i] * t for row, t in zip(design, y)) for i in range(k)]
    return gram, rhs


def lstsq(
    design: Sequence[Sequence[float]], y: Sequence[float], refine_steps: int = 3
) -> tuple[list[float], float]:
    """Least-squares solution of ``design @ x ~= y`` via the normal equations.

    Columns are scaled to unit norm first, and the solution is polished by a
    few rounds of iterative refinement with compensated residual sums, which
    recovers most of the accuracy the normal equations give away.

    Returns the solution and an estimate of the condition number of the
    (scaled) design matrix, i.e. the square root of the Gram matrix's 1-norm
    condition number.
    """
    if not design:
        raise CalibrationError("no rows to fit")
    k = len(design[0])
    if len(design) < k:
        raise CalibrationError(f"need at least {k} rows, got {len(design)}")
    norms = [math.sqrt(math.fsum(row[j] ** 2 for row in design)) for j in range(k)]
    if any(n == 0.0 for n in norms):
        raise CalibrationError("a regressor column is identically zero")
    scaled = [[v / n for v, n in zip(row, norms)] for row in design]
    gram, rhs = normal_equations(scaled, y)
    z = solve(gram, rhs)
    for _ in range(refine_steps):
        resid = [math.fsum([t] + [-a * zi for a, zi in zip(row, z)]) for row, t in zip(scaled, y)]
        grad = [math.fsum(row[j] * r for row, r in zip(scaled, resid)) for j in range(k)]
        dz = solve(gram, grad)
        z = [zi + d for zi, d in zip(z, dz)]
    cond = math.sqrt(norm1(gram) * norm1(inverse(gram)))
    return [zi / n for zi, n in zip(z, norms)], cond
