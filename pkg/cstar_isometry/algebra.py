"""Module for finite-dimensional C*-algebras presented as direct sums of full matrix algebras.

An algebra is fixed by its signature, the tuple of block sizes n_1, ..., n_k;
an element is one complex n_i x n_i matrix per block.

Real coordinates are block-major, row-major over (p, q) inside a block, and
real part before imaginary part. Basis vector 2k is E_pq and 2k + 1 is iE_pq
for the k-th complex coordinate.
"""
import numbers
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

import internal_logging as logging
from cstar_isometry import linalg
from cstar_isometry.errors import NotCentralProjection, SignatureMismatch, SingularMatrixError
from cstar_isometry.config import INVERTIBLE_MIN_RATIO
from cstar_isometry.reports import ResidualTracker, VerificationReport

logger = logging.get_logger(__name__)


@dataclass(frozen=True)
class AlgebraSignature:
    """Block dimensions of the algebra M_{n_1} + ... + M_{n_k}."""

    blocks: Tuple[int, ...]

    def __post_init__(self) -> None:
        blocks = tuple(int(n) for n in self.blocks)
        if not blocks:
            raise ValueError("a signature needs at least one block")
        if any(n < 1 for n in blocks):
            raise ValueError(f"block dimensions must be positive, got {blocks}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def of(cls, *blocks: int) -> "AlgebraSignature":
        return cls(tuple(blocks))

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def complex_dimension(self) -> int:
        return sum(n * n for n in self.blocks)

    @property
    def real_dimension(self) -> int:
        return 2 * self.complex_dimension

    @property
    def offsets(self) -> Tuple[int, ...]:
        """Complex coordinate offset of each block."""
        offsets, total = [], 0
        for n in self.blocks:
            offsets.append(total)
            total += n * n
        return tuple(offsets)

    def __str__(self) -> str:
        return "[" + ",".join(str(n) for n in self.blocks) + "]"


class AlgebraElement:
    """An immutable block-diagonal element of a finite-dimensional C*-algebra.

    ``@`` is the algebra product, ``*`` multiplies by a complex scalar.
    """

    __slots__ = ("signature", "blocks")

    def __init__(self, signature: AlgebraSignature, blocks: Sequence[np.ndarray]) -> None:
        if len(blocks) != signature.num_blocks:
            raise SignatureMismatch(
                f"expected {signature.num_blocks} blocks for {signature}, got {len(blocks)}")
        frozen = []
        for i, (n, block) in enumerate(zip(signature.blocks, blocks)):
            array = np.array(block, dtype=np.complex128)
            if array.shape != (n, n):
                raise SignatureMismatch(f"block {i} has shape {array.shape}, expected {(n, n)}")
            array.setflags(write=False)
            frozen.append(array)
        object.__setattr__(self, "signature", signature)
        object.__setattr__(self, "blocks", tuple(frozen))

    def __setattr__(self, name, value) -> None:
        raise AttributeError("AlgebraElement is immutable")

    def __repr__(self) -> str:
        return f"AlgebraElement({self.signature}, {[b.tolist() for b in self.blocks]})"

    def _check_same(self, other: "AlgebraElement") -> None:
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.signature != self.signature:
            raise SignatureMismatch(f"signatures differ: {self.signature} vs {other.signature}")

    def _map(self, fn) -> "AlgebraElement":
        return AlgebraElement(self.signature, [fn(b) for b in self.blocks])

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_same(other)
        return AlgebraElement(self.signature, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_same(other)
        return AlgebraElement(self.signature, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self) -> "AlgebraElement":
        return self._map(lambda b: -b)

    def __mul__(self, scalar) -> "AlgebraElement":
        if not isinstance(scalar, numbers.Number):
            return NotImplemented
        return self._map(lambda b: scalar * b)

    __rmul__ = __mul__

    def __matmul__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_same(other)
        return AlgebraElement(self.signature, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def adjoint(self) -> "AlgebraElement":
        return self._map(linalg.adjoint)

    def transpose(self) -> "AlgebraElement":
        return self._map(linalg.transpose)

    def conjugate(self) -> "AlgebraElement":
        return self._map(linalg.conjugate)

    def to_real_vector(self) -> np.ndarray:
        """Real coordinate vector of length ``signature.real_dimension``."""
        flat = np.concatenate([b.reshape(-1) for b in self.blocks])
        return np.ascontiguousarray(flat, dtype=np.complex128).view(np.float64).copy()

    @classmethod
    def from_real_vector(cls, signature: AlgebraSignature, vector: np.ndarray) -> "AlgebraElement":
        vector = np.ascontiguousarray(vector, dtype=np.float64)
        if vector.shape != (signature.real_dimension,):
            raise SignatureMismatch(
                f"coordinate vector has shape {vector.shape}, expected ({signature.real_dimension},)")
        flat = vector.view(np.complex128)
        blocks = [flat[offset:offset + n * n].reshape(n, n)
                  for offset, n in zip(signature.offsets, signature.blocks)]
        return cls(signature, blocks)

    def max_abs_difference(self, other: "AlgebraElement") -> float:
        self._check_same(other)
        return float(np.max([np.max(np.abs(a - b)) for a, b in zip(self.blocks, other.blocks)]))


@dataclass(frozen=True)
class CentralProjection:
    """A central projection: the identity on the flagged blocks, zero elsewhere."""

    signature: AlgebraSignature
    flags: Tuple[bool, ...]

    def __post_init__(self) -> None:
        flags = tuple(bool(f) for f in self.flags)
        if len(flags) != self.signature.num_blocks:
            raise SignatureMismatch(
                f"expected {self.signature.num_blocks} flags for {self.signature}, got {len(flags)}")
        object.__setattr__(self, "flags", flags)

    def as_element(self) -> AlgebraElement:
        return AlgebraElement(self.signature, [np.eye(n) * (1.0 if f else 0.0)
                                               for n, f in zip(self.signature.blocks, self.flags)])

    def complement(self) -> "CentralProjection":
        """The central projection I - P."""
        return CentralProjection(self.signature, tuple(not f for f in self.flags))


def identity(sig: AlgebraSignature) -> AlgebraElement:
    return AlgebraElement(sig, [np.eye(n) for n in sig.blocks])


def zero(sig: AlgebraSignature) -> AlgebraElement:
    return AlgebraElement(sig, [np.zeros((n, n)) for n in sig.blocks])


def block_identity(sig: AlgebraSignature, index: int) -> AlgebraElement:
    """The minimal central projection carried by block ``index``."""
    return CentralProjection(sig, tuple(i == index for i in range(sig.num_blocks))).as_element()


def matrix_unit(sig: AlgebraSignature, block: int, p: int, q: int, scalar: complex = 1.0) -> AlgebraElement:
    """scalar * E_pq placed in the given block."""
    blocks = [np.zeros((n, n), dtype=np.complex128) for n in sig.blocks]
    blocks[block][p, q] = scalar
    return AlgebraElement(sig, blocks)


def basis_element(sig: AlgebraSignature, index: int) -> AlgebraElement:
    """The real basis element with the given coordinate index."""
    if not 0 <= index < sig.real_dimension:
        raise IndexError(f"basis index {index} out of range for {sig}")
    vector = np.zeros(sig.real_dimension)
    vector[index] = 1.0
    return AlgebraElement.from_real_vector(sig, vector)


def real_basis(sig: AlgebraSignature) -> Iterator[AlgebraElement]:
    for index in range(sig.real_dimension):
        yield basis_element(sig, index)


def op_norm(x: AlgebraElement) -> float:
    """Operator norm: the largest spectral norm over the blocks."""
    # np.max keeps a NaN wherever it appears
    return float(np.max([linalg.spectral_norm(b) for b in x.blocks]))


def is_unitary(x: AlgebraElement, tol: float) -> bool:
    return unitarity_residual(x) <= tol


def unitarity_residual(x: AlgebraElement) -> float:
    """max(||x*x - I||, ||xx* - I||)."""
    one = identity(x.signature)
    return float(np.max([op_norm(x.adjoint() @ x - one), op_norm(x @ x.adjoint() - one)]))


def is_central_projection(x: AlgebraElement, tol: float) -> CentralProjection:
    """Recognize x as a central projection.

    The center of M_{n_1} + ... + M_{n_k} is spanned by the block identities, so
    x is a central projection exactly when each block is 0 or the identity.

    Returns:
        CentralProjection: The flag per block.

    Raises:
        NotCentralProjection: if some block is farther than tol from both 0 and I.
            The residual is the largest such distance.
    """
    flags, distances = [], []
    for i, block in enumerate(x.blocks):
        to_zero = linalg.spectral_norm(block)
        to_one = linalg.spectral_norm(block - np.eye(block.shape[0]))
        distance = min(to_zero, to_one)
        logger.debug("block %d: distance to 0 %.3e, to I %.3e", i, to_zero, to_one)
        distances.append(distance)
        flags.append(to_one < to_zero)
    worst = float(np.max(distances))
    if not worst <= tol:
        raise NotCentralProjection(f"element is {worst:.3e} away from a central projection", residual=worst)
    return CentralProjection(x.signature, tuple(flags))


def is_invertible(x: AlgebraElement) -> bool:
    try:
        inverse(x)
    except SingularMatrixError:
        return False
    return True


def inverse(x: AlgebraElement) -> AlgebraElement:
    return x._map(linalg.invert)


def random_element(sig: AlgebraSignature, seed: linalg.Seed) -> AlgebraElement:
    """Blockwise complex Ginibre sample."""
    rng = linalg.make_rng(seed)
    return AlgebraElement(sig, [linalg.ginibre(n, rng) for n in sig.blocks])


def random_unitary_element(sig: AlgebraSignature, seed: linalg.Seed) -> AlgebraElement:
    """Blockwise Haar-distributed unitary."""
    rng = linalg.make_rng(seed)
    return AlgebraElement(sig, [linalg.random_unitary(n, rng) for n in sig.blocks])


def random_invertible(sig: AlgebraSignature, seed: linalg.Seed) -> AlgebraElement:
    """Blockwise Ginibre sample, each block resampled until it is well conditioned."""
    rng = linalg.make_rng(seed)
    blocks = []
    for n in sig.blocks:
        while True:
            block = linalg.ginibre(n, rng)
            largest = linalg.spectral_norm(block)
            if largest > 0.0 and linalg.smallest_singular_value(block) >= INVERTIBLE_MIN_RATIO * largest:
                break
            logger.debug("resampling ill-conditioned %dx%d block", n, n)
        blocks.append(block)
    return AlgebraElement(sig, blocks)


def random_singular(sig: AlgebraSignature, seed: linalg.Seed) -> AlgebraElement:
    """Ginibre sample whose first block has its last row zeroed, hence not invertible."""
    x = random_element(sig, seed)
    blocks = [np.array(b) for b in x.blocks]
    blocks[0][-1, :] = 0.0
    return AlgebraElement(sig, blocks)


def random_symmetry(sig: AlgebraSignature, seed: linalg.Seed,
                    signs: Optional[Sequence[Sequence[int]]] = None) -> AlgebraElement:
    """Sample a symmetry s = u d u* with u blockwise Haar and d a diagonal sign pattern.

    Parameters:
        sig (AlgebraSignature): Target algebra.
        seed: Seed or generator.
        signs (optional): Per block, the +1/-1 diagonal of d. Drawn uniformly when omitted.
    """
    rng = linalg.make_rng(seed)
    blocks = []
    for i, n in enumerate(sig.blocks):
        u = linalg.random_unitary(n, rng)
        d = np.asarray(signs[i], dtype=float) if signs is not None else rng.choice([-1.0, 1.0], size=n)
        blocks.append(u @ np.diag(d) @ linalg.adjoint(u))
    return AlgebraElement(sig, blocks)


def random_central_projection(sig: AlgebraSignature, seed: linalg.Seed) -> CentralProjection:
    rng = linalg.make_rng(seed)
    return CentralProjection(sig, tuple(bool(f) for f in rng.integers(0, 2, size=sig.num_blocks)))


def norm_max_identity_residual(projection: CentralProjection, b: AlgebraElement, c: AlgebraElement) -> float:
    """| ||Pb + (I-P)c|| - max(||Pb||, ||(I-P)c||) |."""
    p = projection.as_element()
    q = projection.complement().as_element()
    pb, qc = p @ b, q @ c
    return abs(op_norm(pb + qc) - max(op_norm(pb), op_norm(qc)))


def verify_norm_max_identity(sig: AlgebraSignature, trials: int, seed: int, tol: float) -> VerificationReport:
    """Measure the norm max-identity over random central projections and element pairs."""
    tracker = ResidualTracker("norm_max")
    for child in linalg.derived_seeds(seed, trials):
        rng = linalg.make_rng(child)
        projection = random_central_projection(sig, rng)
        tracker.record("norm_max", norm_max_identity_residual(
            projection, random_element(sig, rng), random_element(sig, rng)))
    return tracker.report(tol)
