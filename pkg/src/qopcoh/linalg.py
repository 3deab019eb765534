"""Dense complex matrix kernel.

Everything downstream runs through the primitives here: Hermitian
eigendecomposition, PSD square roots, the two partial traces over the
|i alpha> product basis, Kronecker products and column-stacking
vectorization.

Basis convention, fixed project wide: the tensor basis ket |i alpha> of the
input(x)output space maps to linear index ``i*d + alpha`` (input index
major).  Vectorization is column stacking, so ``vec(A X B) == kron(B.T, A)
@ vec(X)``.
"""

from typing import NamedTuple

import numpy as np

from .exceptions import DimensionMismatchError, NotHermitianError, NotPSDError, NotSquareError
from .tolerances import admission_atol


def as_complex_matrix(a) -> np.ndarray:
    """Coerce to a 2-D complex ndarray without copying when possible."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D matrix, got ndim={m.ndim}")
    return m


def max_abs(a) -> float:
    """Max-entry modulus, the norm used by every tolerance check."""
    m = np.asarray(a)
    return 0.0 if m.size == 0 else float(np.max(np.abs(m)))


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def require_square(a: np.ndarray) -> int:
    if a.shape[0] != a.shape[1]:
        raise NotSquareError(f"matrix is {a.shape[0]}x{a.shape[1]}, not square")
    return a.shape[0]


def is_hermitian(a: np.ndarray, atol: float | None = None) -> bool:
    atol = admission_atol() if atol is None else atol
    return a.shape[0] == a.shape[1] and max_abs(a - dagger(a)) <= atol


class HermitianEig(NamedTuple):
    """Spectrum of a Hermitian matrix, eigenvalues in nonincreasing order."""

    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # orthonormal columns, matching order


def eig_hermitian(a) -> HermitianEig:
    """Eigendecompose a Hermitian matrix; spectrum sorted descending.

    Rejects non-square or non-Hermitian (beyond the admission tolerance)
    input.  The reconstruction V diag(w) V+ is accurate to 1e-10 in
    max-entry norm for the matrix sizes this package works at.
    """
    m = as_complex_matrix(a)
    require_square(m)
    if not is_hermitian(m):
        raise NotHermitianError(
            f"matrix is not Hermitian within tolerance (residual {max_abs(m - dagger(m)):.3e})"
        )
    w, v = np.linalg.eigh(m)
    order = np.argsort(w)[::-1]
    return HermitianEig(w[order].astype(float), v[:, order])


def sqrt_psd(a) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition.

    Eigenvalues in [-admission_tol, 0) are treated as round-off and clamped
    to zero; anything more negative raises NotPSDError.  Positive
    eigenvalues at relative machine-noise scale are clamped as well: taking
    square roots would amplify representation noise from ~1e-16 to ~1e-8,
    which would wreck downstream fidelity computations on rank-deficient
    states.
    """
    m = as_complex_matrix(a)
    require_square(m)
    tol = admission_atol()
    if not np.any(m - np.diag(np.diag(m))):
        # exactly diagonal: take scalar roots directly
        if max_abs(np.diag(m).imag) > tol:
            raise NotHermitianError("diagonal matrix has complex diagonal entries")
        w = np.diag(m).real
        if w.min(initial=0.0) < -tol:
            raise NotPSDError(f"matrix has eigenvalue {w.min():.3e} below -{tol:.1e}")
        return np.diag(np.sqrt(np.clip(w, 0.0, None))).astype(complex)
    w, v = eig_hermitian(m)
    if w[-1] < -tol:
        raise NotPSDError(f"matrix has eigenvalue {w[-1]:.3e} below -{tol:.1e}")
    noise_floor = 64 * np.finfo(float).eps * max(float(w[0]), 0.0)
    w = np.where(w <= noise_floor, 0.0, w)
    s = (v * np.sqrt(np.clip(w, 0.0, None))) @ dagger(v)
    return (s + dagger(s)) / 2.0


def _require_choi_shape(a: np.ndarray, d: int) -> None:
    if d < 1:
        raise DimensionMismatchError(f"dimension must be positive, got {d}")
    if a.shape != (d * d, d * d):
        raise DimensionMismatchError(f"expected a {d * d}x{d * d} matrix for d={d}, got {a.shape}")


def partial_trace_out(a, d: int) -> np.ndarray:
    """Trace out the second (output) factor: B[i,j] = sum_a A[i*d+a, j*d+a]."""
    m = as_complex_matrix(a)
    _require_choi_shape(m, d)
    return np.trace(m.reshape(d, d, d, d), axis1=1, axis2=3)


def partial_trace_in(a, d: int) -> np.ndarray:
    """Trace out the first (input) factor: B[a,b] = sum_i A[i*d+a, i*d+b]."""
    m = as_complex_matrix(a)
    _require_choi_shape(m, d)
    return np.trace(m.reshape(d, d, d, d), axis1=0, axis2=2)


def kron(a, b) -> np.ndarray:
    """Tensor product with (i*dB + alpha) index ordering, matching |i alpha>."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def vectorize(a) -> np.ndarray:
    """Column-stack a square matrix into a vector."""
    m = as_complex_matrix(a)
    require_square(m)
    return m.T.reshape(-1)


def devectorize(v, dim: int) -> np.ndarray:
    """Inverse of vectorize; v must have length dim**2."""
    vec = np.asarray(v, dtype=complex).reshape(-1)
    if vec.size != dim * dim:
        raise DimensionMismatchError(f"vector of length {vec.size} cannot fill a {dim}x{dim} matrix")
    return vec.reshape(dim, dim).T
