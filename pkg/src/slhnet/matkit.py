"""Dense complex-matrix kernel shared by every other module.

Matrices are plain ``numpy.ndarray`` values of dtype complex128.  All
tolerances are absolute on the max-entry norm: the matrices handled here
are O(1)-normalized physical parameters, so no relative scaling is needed.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.linalg import LinAlgWarning

STRUCT_TOL = 1e-9    # default tolerance for structural predicates
SOLVE_TOL = 1e-10    # residual bound promised by solve()
EIG_MERGE_GAP = 1e-9  # relative gap under which eigenvalues share a projector
_PIVOT_REL = 1e-12   # rank-deficiency threshold relative to the max column norm


class SingularMatrix(ValueError):
    """The LU factorization detected rank deficiency."""


class NotHermitian(ValueError):
    """A hermitian-only operation received a non-hermitian matrix."""


def as_matrix(value, rows: int | None = None, cols: int | None = None,
              name: str = "matrix") -> np.ndarray:
    """Coerce ``value`` to a 2-D complex128 array, rejecting NaN/Inf entries."""
    m = np.array(value, dtype=complex, copy=True)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if m.size and not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    if rows is not None and m.shape[0] != rows:
        raise ValueError(f"{name} must have {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise ValueError(f"{name} must have {cols} columns, got {m.shape[1]}")
    return m


def max_abs(m) -> float:
    """Max-entry norm; zero for empty matrices."""
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def adjoint(m) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(m, dtype=complex).conj().T


def herm_real(m) -> np.ndarray:
    """Hermitian part (M + M†)/2."""
    m = np.asarray(m, dtype=complex)
    return (m + m.conj().T) / 2


def herm_imag(m) -> np.ndarray:
    """Anti-hermitian part mapped to a hermitian matrix: (M − M†)/(2i).

    This is the matrix reading of Im{a† M a} as a quadratic form: it is
    the unique hermitian N with a† N a = Im{a† M a}.
    """
    m = np.asarray(m, dtype=complex)
    return (m - m.conj().T) / 2j


def solve(m, rhs) -> np.ndarray:
    """Solve M X = RHS by LU factorization with partial pivoting.

    Raises SingularMatrix when a pivot falls below ``1e-12`` times the
    largest column norm of M (the explicit inverse is never formed).
    """
    m = np.asarray(m, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"solve needs a square matrix, got shape {m.shape}")
    if rhs.shape[0] != m.shape[0]:
        raise ValueError(f"rhs has {rhs.shape[0]} rows, expected {m.shape[0]}")
    if m.shape[0] == 0:
        return np.zeros_like(rhs)
    with warnings.catch_warnings():
        # exact-zero pivots are reported through SingularMatrix below
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(m)
    col_scale = float(np.max(np.linalg.norm(m, axis=0)))
    if np.min(np.abs(np.diag(lu))) <= _PIVOT_REL * col_scale:
        raise SingularMatrix("matrix is singular to working precision")
    return lu_solve((lu, piv), rhs)


def is_hermitian(m, tol: float = STRUCT_TOL) -> bool:
    """True iff ‖M − M†‖_max ≤ tol."""
    m = np.asarray(m, dtype=complex)
    if m.shape[0] != m.shape[1]:
        raise ValueError("is_hermitian needs a square matrix")
    return max_abs(m - m.conj().T) <= tol


def is_unitary(m, tol: float = STRUCT_TOL) -> bool:
    """True iff both ‖M†M − I‖_max and ‖MM† − I‖_max are ≤ tol."""
    m = np.asarray(m, dtype=complex)
    if m.shape[0] != m.shape[1]:
        raise ValueError("is_unitary needs a square matrix")
    eye = np.eye(m.shape[0])
    return (max_abs(m.conj().T @ m - eye) <= tol
            and max_abs(m @ m.conj().T - eye) <= tol)


def unitarity_residual(m) -> float:
    """max(‖M†M − I‖_max, ‖MM† − I‖_max)."""
    m = np.asarray(m, dtype=complex)
    eye = np.eye(m.shape[0])
    return max(max_abs(m.conj().T @ m - eye), max_abs(m @ m.conj().T - eye))


def eig_hermitian(m, tol: float = STRUCT_TOL,
                  merge_gap: float = EIG_MERGE_GAP) -> tuple[np.ndarray, list[np.ndarray]]:
    """Spectral decomposition M = Σ_k λ_k P_k of a hermitian matrix.

    Eigenvalues are returned ascending; eigenvalues closer than
    ``merge_gap`` (relative to max(1, spectral radius)) are merged into a
    single orthogonal projector, so degenerate clusters come back as one
    term.  Raises NotHermitian if the input fails ``is_hermitian``.
    """
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, tol):
        raise NotHermitian(
            f"matrix deviates from hermiticity by {max_abs(m - m.conj().T):.3e}")
    if m.shape[0] == 0:
        return np.zeros(0), []
    w, v = np.linalg.eigh(m)
    scale = max(1.0, float(np.max(np.abs(w))))
    values = []
    projectors = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > merge_gap * scale:
            block = v[:, start:i]
            values.append(float(np.mean(w[start:i])))
            projectors.append(block @ block.conj().T)
            start = i
    return np.array(values), projectors
