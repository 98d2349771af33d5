"""Module for structured Jordan *-isomorphisms between direct sums of matrix algebras.

On a full matrix block a Jordan *-isomorphism is either x -> w x w* or
x -> w x^T w* for a unitary w, and between direct sums it permutes blocks of
equal size. ``JordanStarIso`` stores exactly that data; this module applies
it, checks arbitrary real-linear maps against the defining identities, and
factors a verified map back into structured form.
"""
import itertools
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np

import internal_logging as logging
from cstar_isometry import linalg
from cstar_isometry.algebra import (AlgebraElement, AlgebraSignature, block_identity, identity,
                                    is_central_projection, matrix_unit, op_norm, real_basis)
from cstar_isometry.config import OUTPUT_AMPLIFICATION, PHASE_ZERO_TOL
from cstar_isometry.errors import (AmbiguousBlock, IncompatibleSignatures, NotCentralProjection,
                                   NotJordanIso, SignatureMismatch)
from cstar_isometry.linear_map import RealLinearMap
from cstar_isometry.reports import CheckResult, VerificationReport

logger = logging.get_logger(__name__)

UNITARY_TOL = 1e-10


class BlockForm(str, Enum):
    DIRECT = "direct"
    TRANSPOSE = "transpose"


@dataclass(frozen=True, eq=False)
class JordanStarIso:
    """Block permutation, per-block unitary and direct/transpose flag.

    Domain block i lands on codomain block ``perm[i]`` as
    ``w_i x_i w_i*`` (DIRECT) or ``w_i x_i^T w_i*`` (TRANSPOSE).
    """

    domain: AlgebraSignature
    codomain: AlgebraSignature
    perm: Tuple[int, ...]
    flags: Tuple[BlockForm, ...]
    unitaries: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        k = self.domain.num_blocks
        perm = tuple(int(j) for j in self.perm)
        if self.codomain.num_blocks != k or len(perm) != k or sorted(perm) != list(range(k)):
            raise IncompatibleSignatures(f"perm {perm} is not a bijection {self.domain} -> {self.codomain}")
        if len(self.flags) != k or len(self.unitaries) != k:
            raise SignatureMismatch(f"expected {k} flags and unitaries")
        flags, unitaries = [], []
        for i, (n, flag, w) in enumerate(zip(self.domain.blocks, self.flags, self.unitaries)):
            if self.codomain.blocks[perm[i]] != n:
                raise IncompatibleSignatures(
                    f"block {i} of size {n} cannot map onto block {perm[i]} of {self.codomain}")
            w = np.array(w, dtype=np.complex128)
            if w.shape != (n, n):
                raise SignatureMismatch(f"unitary {i} has shape {w.shape}, expected {(n, n)}")
            residual = linalg.spectral_norm(linalg.adjoint(w) @ w - np.eye(n))
            if not residual <= UNITARY_TOL:
                raise NotJordanIso(f"w_{i} is not unitary (residual {residual:.3e})", residual=residual)
            w.setflags(write=False)
            flags.append(BlockForm.DIRECT if n == 1 else BlockForm(flag))
            unitaries.append(w)
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "flags", tuple(flags))
        object.__setattr__(self, "unitaries", tuple(unitaries))

    def canonical(self) -> "JordanStarIso":
        """The same map with every unitary in canonical phase."""
        return JordanStarIso(self.domain, self.codomain, self.perm, self.flags,
                             tuple(canonicalize_unitary(w) for w in self.unitaries))


def identity_jordan(sig: AlgebraSignature) -> JordanStarIso:
    return JordanStarIso(sig, sig, tuple(range(sig.num_blocks)),
                         tuple(BlockForm.DIRECT for _ in sig.blocks),
                         tuple(np.eye(n) for n in sig.blocks))


def canonicalize_unitary(w: np.ndarray) -> np.ndarray:
    """Rescale w by the unimodular scalar that makes the first nonzero entry of its first column real positive."""
    w = np.asarray(w, dtype=np.complex128)
    column = w[:, 0]
    nonzero = np.flatnonzero(np.abs(column) > PHASE_ZERO_TOL)
    if nonzero.size == 0:
        return w.copy()
    index = nonzero[0]
    pivot = column[index]
    result = w * (np.conj(pivot) / abs(pivot))
    # rescaling leaves rounding residue in the pivot's imaginary part
    result[index, 0] = abs(pivot)
    return result


def nearest_unitary(m: np.ndarray) -> np.ndarray:
    """Unitary factor of the polar decomposition."""
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def apply_jordan(jordan: JordanStarIso, x: AlgebraElement) -> AlgebraElement:
    if x.signature != jordan.domain:
        raise SignatureMismatch(f"Jordan map expects {jordan.domain}, got {x.signature}")
    blocks: List[np.ndarray] = [None] * jordan.codomain.num_blocks
    for i, (block, flag, w) in enumerate(zip(x.blocks, jordan.flags, jordan.unitaries)):
        source = block.T if flag is BlockForm.TRANSPOSE else block
        blocks[jordan.perm[i]] = w @ source @ linalg.adjoint(w)
    return AlgebraElement(jordan.codomain, blocks)


def to_real_linear_map(jordan: JordanStarIso) -> RealLinearMap:
    return RealLinearMap.from_function(jordan.domain, jordan.codomain,
                                       lambda x: apply_jordan(jordan, x))


def jordan_equal(first: JordanStarIso, second: JordanStarIso, tol: float) -> bool:
    """Equal block structure, and unitaries equal after phase canonicalization."""
    if (first.domain, first.codomain, first.perm, first.flags) != \
            (second.domain, second.codomain, second.perm, second.flags):
        return False
    return all(np.max(np.abs(canonicalize_unitary(a) - canonicalize_unitary(b))) <= tol
               for a, b in zip(first.unitaries, second.unitaries))


def verify_jordan_star_iso(mapping: RealLinearMap, tol: float) -> VerificationReport:
    """Check a real-linear map against the defining identities of a Jordan *-isomorphism.

    The checks, in order: complex_linear (L(ie) = iL(e) on the real basis),
    unital (L(I) = I), star (L(e*) = L(e)* on the basis), jordan (the polarized
    square identity on every pair of basis elements) and bijective (smallest
    singular value of the real matrix above tol).
    """
    if mapping.domain.real_dimension != mapping.codomain.real_dimension:
        raise IncompatibleSignatures(
            f"{mapping.domain} and {mapping.codomain} differ in real dimension")
    basis = list(real_basis(mapping.domain))
    images = mapping.basis_images()

    complex_linear = float(np.max([op_norm(images[2 * k + 1] - 1j * images[2 * k])
                                   for k in range(len(basis) // 2)]))
    unital = op_norm(mapping(identity(mapping.domain)) - identity(mapping.codomain))
    star = float(np.max([op_norm(mapping(e.adjoint()) - image.adjoint()) for e, image in zip(basis, images)]))

    pairs = list(itertools.combinations_with_replacement(range(len(basis)), 2))
    products = np.column_stack([(basis[r] @ basis[s] + basis[s] @ basis[r]).to_real_vector() for r, s in pairs])
    mapped = (mapping.matrix @ products).T
    deviations = []
    for (r, s), column in zip(pairs, mapped):
        expected = images[r] @ images[s] + images[s] @ images[r]
        deviations.append(op_norm(AlgebraElement.from_real_vector(mapping.codomain, column) - expected))
    jordan = float(np.max(deviations))

    smallest = linalg.smallest_singular_value(mapping.matrix)
    report = VerificationReport((
        CheckResult("complex_linear", complex_linear, tol),
        CheckResult("unital", unital, tol),
        CheckResult("star", star, tol),
        CheckResult("jordan", jordan, tol),
        CheckResult("bijective", smallest, tol, lower_bound=True),
    ))
    logger.debug("Jordan check residuals: %s", report.to_dict()["checks"])
    return report


def _block_image(mapping: RealLinearMap, block: int, target: int, p: int, q: int) -> np.ndarray:
    return mapping(matrix_unit(mapping.domain, block, p, q)).blocks[target]


def _block_form(mapping: RealLinearMap, block: int, target: int, n: int, tol: float) -> BlockForm:
    # Multiplicative: L(E12)L(E23) = L(E13). Antimultiplicative: L(E23)L(E12) = L(E13).
    # A 2x2 block has no E23, so there the pair E12, E21 and the target E11 are used.
    if n >= 3:
        first, second, target_unit = (0, 1), (1, 2), (0, 2)
    else:
        first, second, target_unit = (0, 1), (1, 0), (0, 0)
    a = _block_image(mapping, block, target, *first)
    b = _block_image(mapping, block, target, *second)
    expected = _block_image(mapping, block, target, *target_unit)
    direct = linalg.spectral_norm(a @ b - expected)
    reverse = linalg.spectral_norm(b @ a - expected)
    logger.debug("block %d: multiplicative residual %.3e, antimultiplicative %.3e", block, direct, reverse)
    if (direct <= tol) == (reverse <= tol):
        raise AmbiguousBlock(f"block {block}: direct residual {direct:.3e}, transpose residual {reverse:.3e}",
                             residual=min(direct, reverse))
    return BlockForm.DIRECT if direct <= tol else BlockForm.TRANSPOSE


def _block_unitary(mapping: RealLinearMap, block: int, target: int, n: int, form: BlockForm) -> np.ndarray:
    # L(E_11) projects onto w_1; pick its largest column as a unit vector xi in its range.
    projection = _block_image(mapping, block, target, 0, 0)
    column = projection[:, int(np.argmax(np.linalg.norm(projection, axis=0)))]
    xi = canonicalize_unitary((column / np.linalg.norm(column))[:, np.newaxis])[:, 0]
    columns = []
    for j in range(n):
        p, q = (j, 0) if form is BlockForm.DIRECT else (0, j)
        columns.append(_block_image(mapping, block, target, p, q) @ xi)
    return canonicalize_unitary(nearest_unitary(np.column_stack(columns)))


def factor_jordan_iso(mapping: RealLinearMap, tol: float) -> JordanStarIso:
    """Factor a verified Jordan *-isomorphism into block permutation, flags and unitaries.

    Parameters:
        mapping (RealLinearMap): A map that passes ``verify_jordan_star_iso`` at tol.
        tol (float): Tolerance for the structural tests; the reconstruction must
            match the input within ``OUTPUT_AMPLIFICATION * tol`` entrywise.

    Returns:
        JordanStarIso: The structured form, unitaries in canonical phase.

    Raises:
        NotJordanIso: if verification fails or the blocks cannot be matched.
        AmbiguousBlock: if a block is neither multiplicative nor antimultiplicative.
    """
    report = verify_jordan_star_iso(mapping, tol)
    if not report.passed:
        failure = report.first_failure
        raise NotJordanIso(f"map fails the {failure.name} check", residual=failure.violation)
    return factor_verified(mapping, tol)


def factor_verified(mapping: RealLinearMap, tol: float) -> JordanStarIso:
    """``factor_jordan_iso`` for a map whose verification report the caller already holds."""
    domain, codomain = mapping.domain, mapping.codomain
    perm = []
    for i, n in enumerate(domain.blocks):
        image = mapping(block_identity(domain, i))
        try:
            projection = is_central_projection(image, tol)
        except NotCentralProjection as e:
            raise NotJordanIso(f"image of block identity {i} is not central", residual=e.residual) from e
        targets = [j for j, flag in enumerate(projection.flags) if flag]
        if len(targets) != 1 or codomain.blocks[targets[0]] != n:
            raise NotJordanIso(f"block identity {i} maps onto blocks {targets}, not one block of size {n}",
                               residual=1.0)
        perm.append(targets[0])
    if len(set(perm)) != len(perm):
        raise NotJordanIso(f"block map {perm} is not injective", residual=1.0)

    flags, unitaries = [], []
    for i, n in enumerate(domain.blocks):
        form = BlockForm.DIRECT if n == 1 else _block_form(mapping, i, perm[i], n, tol)
        flags.append(form)
        unitaries.append(np.eye(1) if n == 1 else _block_unitary(mapping, i, perm[i], n, form))

    result = JordanStarIso(domain, codomain, tuple(perm), tuple(flags), tuple(unitaries))
    residual = to_real_linear_map(result).max_abs_difference(mapping)
    if not residual <= OUTPUT_AMPLIFICATION * tol:
        raise NotJordanIso(f"factored map deviates by {residual:.3e}", residual=residual)
    logger.debug("factored Jordan map: perm %s, flags %s, residual %.3e",
                 perm, [f.value for f in flags], residual)
    return result


def random_jordan_iso(domain: AlgebraSignature, codomain: AlgebraSignature, seed: linalg.Seed) -> JordanStarIso:
    """Sample a Jordan *-isomorphism between signatures with the same block multiset.

    The block bijection is uniform among dimension-preserving ones, unitaries are
    independent Haar samples in canonical phase and flags are fair coins (DIRECT
    for 1x1 blocks).

    Raises:
        IncompatibleSignatures: if the block multisets differ.
    """
    if sorted(domain.blocks) != sorted(codomain.blocks):
        raise IncompatibleSignatures(f"block multisets of {domain} and {codomain} differ")
    rng = linalg.make_rng(seed)
    perm = [0] * domain.num_blocks
    for size in sorted(set(domain.blocks)):
        sources = [i for i, n in enumerate(domain.blocks) if n == size]
        targets = [j for j, n in enumerate(codomain.blocks) if n == size]
        for i, j in zip(sources, rng.permutation(targets)):
            perm[i] = int(j)
    flags, unitaries = [], []
    for n in domain.blocks:
        transpose = bool(rng.integers(0, 2))
        flags.append(BlockForm.TRANSPOSE if transpose and n > 1 else BlockForm.DIRECT)
        unitaries.append(canonicalize_unitary(linalg.random_unitary(n, rng)))
    return JordanStarIso(domain, codomain, tuple(perm), tuple(flags), tuple(unitaries))
