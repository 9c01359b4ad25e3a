"""
Exact linear algebra over the coefficient field: determinants of polynomial
matrices, linear solves and nullspaces through sympy's DomainMatrix.
"""

from typing import Callable, Dict, List, Optional, Sequence, Tuple

from sympy.polys.matrices import DomainMatrix

from app.errors import AnsatzError


def laplace_det(matrix: Sequence[Sequence], zero, one, is_zero: Optional[Callable] = None):
    """Division-free cofactor expansion memoized on the remaining column set."""
    n = len(matrix)
    is_zero = is_zero or (lambda v: not v)
    memo: Dict[Tuple[int, int], object] = {}

    def minor(row: int, cols: int):
        if row == n:
            return one
        key = (row, cols)
        if key not in memo:
            total = zero
            sign = 1
            for j in range(n):
                if not cols & (1 << j):
                    continue
                a = matrix[row][j]
                if not is_zero(a):
                    term = a * minor(row + 1, cols & ~(1 << j))
                    total = total + term if sign > 0 else total - term
                sign = -sign
            memo[key] = total
        return memo[key]

    return minor(0, (1 << n) - 1)


def _matrix(rows: Sequence[Sequence], ncols: int, domain) -> DomainMatrix:
    return DomainMatrix([list(r) for r in rows], (len(rows), ncols), domain)


def nullspace(rows: Sequence[Sequence], ncols: int, domain) -> List[List]:
    if not rows:
        return [[domain.one if i == j else domain.zero for i in range(ncols)] for j in range(ncols)]
    basis = _matrix(rows, ncols, domain).nullspace()
    return basis.to_list() if basis.shape[0] else []


def rank(rows: Sequence[Sequence], ncols: int, domain) -> int:
    if not rows:
        return 0
    return _matrix(rows, ncols, domain).rank()


def solve(
    rows: Sequence[Sequence],
    rhs: Sequence,
    domain,
    labels: Optional[Sequence[str]] = None,
) -> Tuple[List, List[List]]:
    """Particular solution (free unknowns set to zero) and nullspace basis.

    Raises AnsatzError naming the first inconsistent equation.
    """
    ncols = len(rows[0]) if rows else 0
    augmented = [list(r) + [b] for r, b in zip(rows, rhs)]
    reduced, pivots = _matrix(augmented, ncols + 1, domain).rref()
    if ncols in pivots:
        bad = _first_inconsistent(rows, rhs, ncols, domain)
        label = labels[bad] if labels else f"row {bad}"
        raise AnsatzError(f"inconsistent linear system at {label}", witness=label)
    table = reduced.to_list()
    solution = [domain.zero] * ncols
    for r, col in enumerate(pivots):
        solution[col] = table[r][ncols]
    return solution, nullspace(rows, ncols, domain)


def _first_inconsistent(rows, rhs, ncols: int, domain) -> int:
    """Smallest k such that equations 0..k are already unsatisfiable."""
    lo, hi = 0, len(rows) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        head = rows[: mid + 1]
        aug = [list(r) + [b] for r, b in zip(head, rhs[: mid + 1])]
        if rank(aug, ncols + 1, domain) > rank(head, ncols, domain):
            hi = mid
        else:
            lo = mid + 1
    return lo
