"""
codedcomp Linear Algebra

Exact rank and span computations over the rationals for integer matrices,
plus numeric helpers for real-valued generators. Integer matrices are plain
numpy int64 arrays; exact work happens on Python ints so entries never
overflow.
"""

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from loguru import logger

from .errors import InputError, NumericError

IntMatrix = npt.NDArray[np.int64]
FloatMatrix = npt.NDArray[np.float64]

# Mersenne prime used for the modular rank screen; products of two residues fit in int64
MODULUS = 2**31 - 1
SECOND_MODULUS = 2**31 - 19


def as_int_matrix(a: npt.ArrayLike) -> IntMatrix:
    """Validate and return a read-only 2-D int64 copy of `a`."""
    arr = np.asarray(a)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 0:
        raise InputError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or not np.array_equal(arr, np.round(arr)):
            raise InputError("integer matrix expected")
    elif arr.dtype.kind not in "iub":
        raise InputError(f"integer matrix expected, got dtype {arr.dtype}")
    out = np.array(arr, dtype=np.int64)
    out.setflags(write=False)
    return out


def as_float_matrix(a: npt.ArrayLike) -> FloatMatrix:
    arr = np.array(a, dtype=np.float64)
    if arr.ndim != 2:
        raise InputError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("matrix has non-finite entries")
    return arr


def _to_rows(M: npt.ArrayLike) -> List[List[int]]:
    return [[int(x) for x in row] for row in np.asarray(M)]


def _fraction_free_echelon(rows: List[List[int]], ncols: int) -> Tuple[List[List[int]], List[int]]:
    """Bareiss elimination with row swaps; returns the echelon rows and pivot columns.

    Every division is exact, so entries stay integers (they are minors of the input).
    """
    a = [list(r) for r in rows]
    nrows = len(a)
    prev = 1
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        head = a[r]
        p = head[c]
        for i in range(r + 1, nrows):
            row = a[i]
            f = row[c]
            a[i] = [(x * p - f * y) // prev for x, y in zip(row, head)]
        prev = p
        pivots.append(c)
        r += 1
    return a, pivots


def rank_exact(M: npt.ArrayLike) -> int:
    """Rank over the rationals."""
    A = as_int_matrix(M)
    if A.shape[1] == 0:
        return 0
    _, pivots = _fraction_free_echelon(_to_rows(A), A.shape[1])
    return len(pivots)


def rank_mod_p(M: npt.ArrayLike, p: int = MODULUS) -> int:
    """Rank over GF(p). Never exceeds the rational rank."""
    a = np.array(M, dtype=np.int64) % p
    if a.ndim != 2:
        raise InputError(f"expected a 2-D matrix, got shape {a.shape}")
    nrows, ncols = a.shape
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r] = (a[r] * inv) % p
        below = a[r + 1 :, c]
        if below.any():
            a[r + 1 :] = (a[r + 1 :] - (np.outer(below, a[r]) % p)) % p
        r += 1
    return r


def has_full_row_rank(M: npt.ArrayLike, certify: bool = True) -> bool:
    """Whether the rows of M are linearly independent over the rationals.

    A full modular rank is a certificate. A modular deficiency is confirmed
    with exact elimination when `certify` is set; otherwise a second prime is
    consulted and its answer accepted.
    """
    A = np.asarray(M)
    k, cols = A.shape
    if cols < k:
        return False
    if rank_mod_p(A) == k:
        return True
    if not certify:
        return rank_mod_p(A, SECOND_MODULUS) == k
    exact = rank_exact(A) == k
    if exact:
        logger.debug(f"modular screen reported deficiency for a full-rank {k}x{cols} matrix")
    return exact


def independent_columns(M: npt.ArrayLike) -> List[int]:
    """Indices of the first maximal set of independent columns, ascending."""
    A = as_int_matrix(M)
    if A.shape[1] == 0:
        return []
    _, pivots = _fraction_free_echelon(_to_rows(A), A.shape[1])
    return pivots


def independent_rows(M: npt.ArrayLike) -> List[int]:
    """Indices of the first maximal set of independent rows, ascending."""
    return independent_columns(np.asarray(M).T)


def exact_inverse(M: npt.ArrayLike) -> List[List[Fraction]]:
    """Inverse of a nonsingular integer matrix as Fractions (Gauss-Jordan)."""
    A = as_int_matrix(M)
    size = A.shape[0]
    if A.shape[1] != size:
        raise InputError(f"square matrix expected, got {A.shape}")
    aug = [
        [Fraction(int(x)) for x in row] + [Fraction(int(i == j)) for j in range(size)]
        for i, row in enumerate(A)
    ]
    for c in range(size):
        piv = next((i for i in range(c, size) if aug[i][c] != 0), None)
        if piv is None:
            raise InputError("matrix is singular")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv_p = 1 / aug[c][c]
        aug[c] = [x * inv_p for x in aug[c]]
        for i in range(size):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [row[size:] for row in aug]


class SpanSolver:
    """Exact membership and coefficients for targets in the column span of M.

    The first independent columns and a matching set of independent rows form
    a nonsingular square block whose inverse is computed once and reused.
    """

    def __init__(self, M: npt.ArrayLike):
        self.matrix = as_int_matrix(M)
        self.columns: List[int] = independent_columns(self.matrix)
        self.rank = len(self.columns)
        if self.rank:
            basis = self.matrix[:, self.columns]
            self.rows = independent_rows(basis)
            self._inverse = exact_inverse(basis[self.rows, :])
            self._basis = _to_rows(basis)
        else:
            self.rows = []
            self._inverse = []
            self._basis = []

    def solve(self, target: Sequence[int]) -> Optional[List[Fraction]]:
        """Coefficients w with M @ w == target, zero off the pivot columns; None if outside the span."""
        t = [int(x) for x in target]
        if len(t) != self.matrix.shape[0]:
            raise InputError(f"target length {len(t)} does not match {self.matrix.shape[0]} rows")
        ncols = self.matrix.shape[1]
        if self.rank == 0:
            return [Fraction(0)] * ncols if not any(t) else None
        rhs = [t[i] for i in self.rows]
        w_basis = [sum((a * b for a, b in zip(row, rhs)), Fraction(0)) for row in self._inverse]
        for i, row in enumerate(self._basis):
            if sum((a * b for a, b in zip(row, w_basis)), Fraction(0)) != t[i]:
                return None
        w = [Fraction(0)] * ncols
        for col, val in zip(self.columns, w_basis):
            w[col] = val
        return w


def solve_in_span(M: npt.ArrayLike, target: Sequence[int]) -> Optional[List[Fraction]]:
    """Exact w with M @ w == target, or None when target is outside span(M)."""
    return SpanSolver(M).solve(target)


class SpanTracker:
    """Incremental GF(p) column-rank tracker used to screen worker arrival prefixes."""

    def __init__(self, rows: int, p: int = MODULUS):
        self.p = p
        self.rows = rows
        self._basis: List[Tuple[int, np.ndarray]] = []

    @property
    def rank(self) -> int:
        return len(self._basis)

    def add(self, column: npt.ArrayLike) -> bool:
        """Add a column; return True when it increased the rank."""
        v = np.asarray(column, dtype=np.int64) % self.p
        for pivot, b in self._basis:
            f = v[pivot]
            if f:
                v = (v - (f * b) % self.p) % self.p
        nz = np.flatnonzero(v)
        if nz.size == 0:
            return False
        pivot = int(nz[0])
        inv = pow(int(v[pivot]), self.p - 2, self.p)
        self._basis.append((pivot, (v * inv) % self.p))
        return True


def numeric_rank(M: npt.ArrayLike, tol: float = 1e-10) -> Tuple[int, List[int]]:
    """Rank and pivot columns from pivoted QR, relative to the largest column norm."""
    from scipy.linalg import qr

    A = as_float_matrix(M)
    if A.size == 0:
        return 0, []
    _, R, piv = qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return 0, []
    rank = int(np.sum(diag > tol * diag[0]))
    return rank, sorted(int(c) for c in piv[:rank])


def condition_number(M: npt.ArrayLike, mode: str = "square", singular_floor: float = 1e-300) -> float:
    """Spectral condition number s_max / s_min.

    mode "square" uses M itself; "gram" uses M @ M.T. Returns inf when the
    smallest singular value is below `singular_floor`.
    """
    A = as_float_matrix(M)
    if mode == "gram":
        A = A @ A.T
    elif mode != "square":
        raise InputError(f"unknown condition mode: {mode}")
    if A.shape[0] != A.shape[1]:
        raise InputError(f"square matrix expected for mode {mode!r}, got {A.shape}")
    s = np.linalg.svd(A, compute_uv=False)
    if not np.all(np.isfinite(s)):
        raise NumericError("singular value decomposition produced non-finite values")
    if s[-1] < singular_floor:
        return float("inf")
    return float(s[0] / s[-1])
