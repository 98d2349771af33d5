"""Module for dense complex matrix primitives: adjoints, spectral norm, inversion and Haar sampling.

Every function is pure; randomness is passed in explicitly as a seed or a
``numpy.random.Generator`` built on the counter-based Philox bit generator.
"""
import math
from typing import Optional, Union

import numpy as np

from cstar_isometry.config import JACOBI_LARGE_THETA, JACOBI_MAX_SWEEPS, JACOBI_THRESHOLD, SINGULAR_RTOL
from cstar_isometry.errors import SingularMatrixError

Seed = Union[int, np.random.SeedSequence, np.random.Generator]


def make_rng(seed: Seed) -> np.random.Generator:
    """Return a Philox-backed generator for the seed, or the generator itself if one is given."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def derived_seeds(seed: int, count: int) -> list:
    """Spawn ``count`` independent child seed sequences from one 64-bit seed."""
    return np.random.SeedSequence(seed).spawn(count)


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


def transpose(m: np.ndarray) -> np.ndarray:
    return np.transpose(m).copy()


def conjugate(m: np.ndarray) -> np.ndarray:
    """Entrywise conjugate, i.e. the transpose of the adjoint."""
    return np.conj(m)


def hermitian_eigenvalues(h: np.ndarray) -> np.ndarray:
    """Compute the eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Each rotation first turns the pivot entry real with a diagonal phase and then
    applies the classical real rotation that annihilates it. Sweeps stop once the
    off-diagonal Frobenius mass falls below ``JACOBI_THRESHOLD`` times the
    Frobenius norm, or after ``JACOBI_MAX_SWEEPS`` sweeps.

    Parameters:
        h (np.ndarray): Square Hermitian matrix; only its Hermitian part is used.

    Returns:
        np.ndarray: Real eigenvalues in ascending order.
    """
    a = np.array(h, dtype=np.complex128)
    a = 0.5 * (a + adjoint(a))
    n = a.shape[0]
    scale = float(np.sqrt(np.sum(np.abs(a) ** 2)))
    if n == 1 or scale == 0.0:
        return np.sort(a.diagonal().real)

    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.sum(np.abs(a) ** 2) - np.sum(np.abs(a.diagonal()) ** 2)
        if math.sqrt(max(off, 0.0)) <= JACOBI_THRESHOLD * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                pivot = a[p, q]
                mag = abs(pivot)
                if mag == 0.0:
                    continue
                phase = pivot / mag
                a[:, q] *= np.conj(phase)
                a[q, :] *= phase
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if abs(theta) > JACOBI_LARGE_THETA:
                    # theta * theta would overflow; t tends to 1 / (2 theta)
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
    return np.sort(a.diagonal().real)


def spectral_norm(m: np.ndarray) -> float:
    """Return the largest singular value of a (possibly rectangular) matrix.

    Computed as the square root of the top eigenvalue of the smaller Gram matrix.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.size == 0:
        return 0.0
    rows, cols = m.shape
    gram = adjoint(m) @ m if rows >= cols else m @ adjoint(m)
    top = hermitian_eigenvalues(gram)[-1]
    return math.sqrt(max(float(top), 0.0))


def _lu_inverse(m: np.ndarray) -> Optional[np.ndarray]:
    # LAPACK gesv: LU with partial pivoting.
    try:
        return np.linalg.solve(m, np.eye(m.shape[0], dtype=np.complex128))
    except np.linalg.LinAlgError:
        return None


def invert(m: np.ndarray) -> np.ndarray:
    """Invert a square matrix.

    Raises:
        SingularMatrixError: if the smallest singular value is below
            ``SINGULAR_RTOL`` times the largest. The exception's residual is that ratio.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"invert expects a square matrix, got shape {m.shape}")
    largest = spectral_norm(m)
    inverse = _lu_inverse(m) if largest > 0.0 else None
    if inverse is None:
        raise SingularMatrixError("matrix is exactly singular", residual=0.0)
    ratio = 1.0 / (largest * spectral_norm(inverse))
    if ratio < SINGULAR_RTOL:
        raise SingularMatrixError(f"singular value ratio {ratio:.3e} below {SINGULAR_RTOL:.0e}",
                                  residual=ratio)
    return inverse


def smallest_singular_value(m: np.ndarray) -> float:
    """Return the smallest singular value of a square matrix as the reciprocal norm of its inverse.

    Exactly singular matrices report 0.0.
    """
    m = np.asarray(m)
    inverse = _lu_inverse(m) if spectral_norm(m) > 0.0 else None
    if inverse is None:
        return 0.0
    return 1.0 / spectral_norm(inverse)


def ginibre(n: int, seed: Seed) -> np.ndarray:
    """Sample an n x n complex Ginibre matrix with unit-variance entries."""
    rng = make_rng(seed)
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)


def random_unitary(n: int, seed: Seed) -> np.ndarray:
    """Sample a Haar-distributed n x n unitary.

    A Ginibre sample is factored by QR and each column of Q is rescaled by the
    phase of the matching diagonal entry of R, which removes the QR gauge.
    """
    if n < 1:
        raise ValueError("random_unitary needs n >= 1")
    q, r = np.linalg.qr(ginibre(n, seed))
    diagonal = r.diagonal()
    magnitudes = np.abs(diagonal)
    phases = np.where(magnitudes > 0.0, diagonal / np.where(magnitudes > 0.0, magnitudes, 1.0), 1.0)
    return q * phases[np.newaxis, :]
