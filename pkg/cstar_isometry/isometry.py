"""Module for surjective isometries between invertible groups of finite-dimensional C*-algebras.

A surjective isometry T between the invertible groups extends to a real-linear
map of the form

    T(a) = u P J(a) + u (I - P) J(a)*

with u = T(I) unitary, P a central projection and J a Jordan *-isomorphism;
conversely every such formula is a surjective isometry. This module builds
maps from certificates (u, P, J), recovers certificates from maps following
the constructive argument step by step, and measures every intermediate
identity numerically.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np

import internal_logging as logging
from cstar_isometry import linalg
from cstar_isometry.algebra import (AlgebraElement, AlgebraSignature, CentralProjection, identity,
                                    is_central_projection, op_norm, random_central_projection,
                                    random_element, random_invertible, random_singular, random_symmetry,
                                    random_unitary_element, real_basis, unitarity_residual)
from cstar_isometry.config import DEFAULT_TOL, OUTPUT_AMPLIFICATION
from cstar_isometry.errors import (AmbiguousBlock, DecompositionError, IncompatibleSignatures,
                                   InconsistentExtension, InvalidCertificate, NotCentralProjection,
                                   NotJordanIso, NotNormalized, NotSingleBlock)
from cstar_isometry.jordan import (BlockForm, JordanStarIso, apply_jordan, factor_verified, jordan_equal,
                                   random_jordan_iso, to_real_linear_map, verify_jordan_star_iso)
from cstar_isometry.linear_map import RealLinearMap, adjoint_map, left_multiplication
from cstar_isometry.reports import ResidualTracker, VerificationReport

logger = logging.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class IsometryCertificate:
    """The triple (u, P, J) of the canonical form."""

    u: AlgebraElement
    projection: CentralProjection
    jordan: JordanStarIso

    @property
    def domain(self) -> AlgebraSignature:
        return self.jordan.domain

    @property
    def codomain(self) -> AlgebraSignature:
        return self.jordan.codomain

    def validate(self, tol: float) -> None:
        """Raise InvalidCertificate unless u is unitary, P lives on the codomain and J verifies."""
        if self.u.signature != self.codomain or self.projection.signature != self.codomain:
            raise InvalidCertificate(
                f"u on {self.u.signature} and P on {self.projection.signature} must live on {self.codomain}")
        residual = unitarity_residual(self.u)
        if not residual <= tol:
            raise InvalidCertificate(f"u is not unitary (residual {residual:.3e})", residual=residual)
        report = verify_jordan_star_iso(to_real_linear_map(self.jordan), tol)
        if not report.passed:
            failure = report.first_failure
            raise InvalidCertificate(f"J fails the {failure.name} check", residual=failure.violation)


class FailureStage(str, Enum):
    NOT_UNITARY_AT_IDENTITY = "NotUnitaryAtIdentity"
    NOT_SYMMETRY = "NotSymmetry"
    NOT_CENTRAL = "NotCentral"
    JORDAN_CHECK_FAILED = "JordanCheckFailed"


@dataclass(frozen=True)
class DecomposeFailure:
    """The first step of the decomposition that rejected the map, and by how much."""

    stage: FailureStage
    residual: float
    subcheck: Optional[str] = None

    def describe(self) -> str:
        name = self.stage.value if self.subcheck is None else f"{self.stage.value}({self.subcheck})"
        return f"{name} with residual {self.residual:.3e}"


def _canonical_form(cert: IsometryCertificate) -> Callable[[AlgebraElement], AlgebraElement]:
    p = cert.projection.as_element()
    q = cert.projection.complement().as_element()

    def isometry(a: AlgebraElement) -> AlgebraElement:
        image = apply_jordan(cert.jordan, a)
        return cert.u @ (p @ image + q @ image.adjoint())

    return isometry


def build_isometry(cert: IsometryCertificate, tol: float = DEFAULT_TOL) -> RealLinearMap:
    """Assemble the real-linear map a -> u (P J(a) + (I - P) J(a)*).

    Raises:
        InvalidCertificate: if the certificate does not validate at tol.
    """
    cert.validate(tol)
    return RealLinearMap.from_function(cert.domain, cert.codomain, _canonical_form(cert))


def normalize_map(mapping: RealLinearMap, tol: float) -> RealLinearMap:
    """Compose with left multiplication by L(I)* so that the identity is fixed.

    Raises:
        NotNormalized: if L(I) is not unitary within tol.
    """
    u = mapping(identity(mapping.domain))
    residual = unitarity_residual(u)
    if not residual <= tol:
        raise NotNormalized(f"L(I) is not unitary (residual {residual:.3e})", residual=residual)
    return left_multiplication(u.adjoint()).compose(mapping)


def decompose_isometry(mapping: RealLinearMap, tol: float) -> Union[IsometryCertificate, DecomposeFailure]:
    """Recover (u, P, J) from a real-linear map, or report the step that fails.

    The steps run in the order of the structural argument and stop at the first
    failure: u = L(I) must be unitary; T0 = u* L(.); s = -i T0(iI) must be a
    symmetry; P = (s + I)/2 must be central; J = P T0(.) + (I - P) T0(.)* must
    verify as a Jordan *-isomorphism and factor into structured form.

    Raises:
        IncompatibleSignatures: if domain and codomain differ in real dimension.
    """
    domain, codomain = mapping.domain, mapping.codomain
    if domain.real_dimension != codomain.real_dimension:
        raise IncompatibleSignatures(f"{domain} and {codomain} differ in real dimension")
    one_a, one_b = identity(domain), identity(codomain)

    u = mapping(one_a)
    residual = unitarity_residual(u)
    logger.debug("u = L(I): unitarity residual %.3e", residual)
    if not residual <= tol:
        return _reject(FailureStage.NOT_UNITARY_AT_IDENTITY, residual)

    normalized = left_multiplication(u.adjoint()).compose(mapping)
    s = -1j * normalized(1j * one_a)
    residual = float(np.max([op_norm(s - s.adjoint()), op_norm(s @ s - one_b)]))
    logger.debug("s = -i T0(iI): symmetry residual %.3e", residual)
    if not residual <= tol:
        return _reject(FailureStage.NOT_SYMMETRY, residual)

    try:
        projection = is_central_projection(0.5 * (s + one_b), tol)
    except NotCentralProjection as e:
        return _reject(FailureStage.NOT_CENTRAL, e.residual)

    p = projection.as_element()
    q = projection.complement().as_element()
    jordan_map = (left_multiplication(p).compose(normalized)
                  + left_multiplication(q).compose(adjoint_map(codomain)).compose(normalized))
    report = verify_jordan_star_iso(jordan_map, tol)
    if not report.passed:
        failure = report.first_failure
        return _reject(FailureStage.JORDAN_CHECK_FAILED, failure.violation, failure.name)
    try:
        jordan = factor_verified(jordan_map, tol)
    except (NotJordanIso, AmbiguousBlock) as e:
        return _reject(FailureStage.JORDAN_CHECK_FAILED, e.residual, "factorization")

    cert = IsometryCertificate(u, projection, jordan)
    rebuilt = RealLinearMap.from_function(domain, codomain, _canonical_form(cert))
    residual = rebuilt.max_abs_difference(mapping)
    if not residual <= OUTPUT_AMPLIFICATION * tol:
        return _reject(FailureStage.JORDAN_CHECK_FAILED, residual, "reconstruction")
    logger.info("decomposed %s -> %s: P=%s, flags=%s, reconstruction residual %.3e", domain, codomain,
                projection.flags, [f.value for f in jordan.flags], residual)
    return cert


def _reject(stage: FailureStage, residual: float, subcheck: Optional[str] = None) -> DecomposeFailure:
    failure = DecomposeFailure(stage, float(residual), subcheck)
    logger.info("decomposition rejected: %s", failure.describe())
    return failure


def extend_black_box(fn: Callable[[AlgebraElement], AlgebraElement], sig: AlgebraSignature,
                     tol: float) -> RealLinearMap:
    """Reconstruct the real-linear extension of a map given only on invertible elements.

    For each real basis element e the shift lam = 2(||e|| + 1) makes e + lam I
    invertible, and the extension must satisfy T(e) = f(e + lam I) - lam f(I).
    The same column is recomputed with lam + 1 as a consistency witness.

    Raises:
        InconsistentExtension: if the two reconstructions of some column differ
            by more than tol entrywise; then f has no real-linear extension.
    """
    one = identity(sig)
    image_of_one = fn(one)
    columns, gaps = [], []
    for e in real_basis(sig):
        lam = 2.0 * (op_norm(e) + 1.0)
        column = fn(e + lam * one) - lam * image_of_one
        witness = fn(e + (lam + 1.0) * one) - (lam + 1.0) * image_of_one
        gaps.append(column.max_abs_difference(witness))
        columns.append(column.to_real_vector())
    worst = float(np.max(gaps))
    if not worst <= tol:
        raise InconsistentExtension(f"shifted reconstructions disagree by {worst:.3e}", residual=worst)
    return RealLinearMap(sig, image_of_one.signature, np.column_stack(columns))


def verify_triple_identity(mapping: RealLinearMap, trials: int, seed: int, tol: float) -> VerificationReport:
    """Measure L(ab*c + cb*a) = L(a)L(b)*L(c) + L(c)L(b)*L(a) at a = b = c = I and on random triples."""
    tracker = ResidualTracker("triple")
    one = identity(mapping.domain)
    triples = [(one, one, one)]
    for child in linalg.derived_seeds(seed, trials):
        rng = linalg.make_rng(child)
        triples.append(tuple(random_element(mapping.domain, rng) for _ in range(3)))
    for a, b, c in triples:
        la, lb, lc = mapping(a), mapping(b), mapping(c)
        lhs = mapping(a @ b.adjoint() @ c + c @ b.adjoint() @ a)
        rhs = la @ lb.adjoint() @ lc + lc @ lb.adjoint() @ la
        tracker.record("triple", op_norm(lhs - rhs))
    return tracker.report(tol)


def _require_normalized(mapping: RealLinearMap, tol: float) -> None:
    residual = op_norm(mapping(identity(mapping.domain)) - identity(mapping.codomain))
    if not residual <= tol:
        raise NotNormalized(f"L(I) differs from I by {residual:.3e}", residual=residual)


def verify_star_square(mapping: RealLinearMap, trials: int, seed: int, tol: float) -> VerificationReport:
    """Measure the identities a normalized map inherits from the triple identity.

    Checks: star (L(a*) = L(a)*), jordan_triple (L(abc + cba) = L(a)L(b)L(c) + L(c)L(b)L(a)),
    aba (L(aba) = L(a)L(b)L(a)) and square (L(a^2) = L(a)^2).

    Raises:
        NotNormalized: if L(I) is not I within tol.
    """
    _require_normalized(mapping, tol)
    tracker = ResidualTracker("star", "jordan_triple", "aba", "square")
    for child in linalg.derived_seeds(seed, trials):
        rng = linalg.make_rng(child)
        a, b, c = (random_element(mapping.domain, rng) for _ in range(3))
        la, lb, lc = mapping(a), mapping(b), mapping(c)
        tracker.record("star", op_norm(mapping(a.adjoint()) - la.adjoint()))
        tracker.record("jordan_triple", op_norm(mapping(a @ b @ c + c @ b @ a) - (la @ lb @ lc + lc @ lb @ la)))
        tracker.record("aba", op_norm(mapping(a @ b @ a) - la @ lb @ la))
        tracker.record("square", op_norm(mapping(a @ a) - la @ la))
    return tracker.report(tol)


def symmetry_correspondence_check(mapping: RealLinearMap, trials: int, seed: int,
                                  tol: float) -> VerificationReport:
    """Check that a normalized map sends symmetries (s = s*, s^2 = I) to symmetries.

    The fixed symmetries I and -I are checked before ``trials`` random ones.

    Raises:
        NotNormalized: if L(I) is not I within tol.
    """
    _require_normalized(mapping, tol)
    one_a, one_b = identity(mapping.domain), identity(mapping.codomain)
    tracker = ResidualTracker("symmetry_square", "symmetry_selfadjoint")
    symmetries = [one_a, -one_a]
    symmetries.extend(random_symmetry(mapping.domain, child) for child in linalg.derived_seeds(seed, trials))
    for s in symmetries:
        image = mapping(s)
        tracker.record("symmetry_square", op_norm(image @ image - one_b))
        tracker.record("symmetry_selfadjoint", op_norm(image - image.adjoint()))
    return tracker.report(tol)


def verify_imaginary_unit_identities(mapping: RealLinearMap, trials: int, seed: int,
                                     tol: float) -> VerificationReport:
    """Measure the identities around v = T0(iI) that make P central and J complex-linear.

    Checks: unit_unitary (v unitary), unit_square (v^2 = -I), unit_central
    (v commutes with T0(a)), imaginary_factor (T0(ia) = v T0(a)), adjoint_factor
    (T0(ia)* = -v T0(a)*) and complex_linear (T0'(ia) = i T0'(a) for
    T0' = P T0(.) + (I - P) T0(.)* with P = (-iv + I)/2).

    Raises:
        NotNormalized: if L(I) is not I within tol.
    """
    _require_normalized(mapping, tol)
    one_a, one_b = identity(mapping.domain), identity(mapping.codomain)
    v = mapping(1j * one_a)
    p = 0.5 * (-1j * v + one_b)
    q = one_b - p

    def corrected(x: AlgebraElement) -> AlgebraElement:
        image = mapping(x)
        return p @ image + q @ image.adjoint()

    tracker = ResidualTracker("unit_unitary", "unit_square", "unit_central", "imaginary_factor",
                              "adjoint_factor", "complex_linear")
    tracker.record("unit_unitary", unitarity_residual(v))
    tracker.record("unit_square", op_norm(v @ v + one_b))
    for child in linalg.derived_seeds(seed, trials):
        a = random_element(mapping.domain, child)
        la, lia = mapping(a), mapping(1j * a)
        tracker.record("unit_central", op_norm(la @ v - v @ la))
        tracker.record("imaginary_factor", op_norm(lia - v @ la))
        tracker.record("adjoint_factor", op_norm(lia.adjoint() + v @ la.adjoint()))
        tracker.record("complex_linear", op_norm(corrected(1j * a) - 1j * corrected(a)))
    return tracker.report(tol)


def isometry_spot_check(mapping: RealLinearMap, trials: int, seed: int, tol: float) -> VerificationReport:
    """Sample the metric on invertible pairs and the norm on singular elements.

    Checks: metric (| ||L(a) - L(b)|| - ||a - b|| | over invertible pairs) and
    norm (| ||L(x)|| - ||x|| | over non-invertible x).
    """
    tracker = ResidualTracker("metric", "norm")
    for child in linalg.derived_seeds(seed, trials):
        rng = linalg.make_rng(child)
        a = random_invertible(mapping.domain, rng)
        b = random_invertible(mapping.domain, rng)
        x = random_singular(mapping.domain, rng)
        tracker.record("metric", abs(op_norm(mapping(a) - mapping(b)) - op_norm(a - b)))
        tracker.record("norm", abs(op_norm(mapping(x)) - op_norm(x)))
    return tracker.report(tol)


class BHForm(str, Enum):
    """The four shapes a surjective isometry of a full matrix algebra can take."""

    CONJUGATION = "conjugation"  # u w a w*
    ADJOINT = "adjoint"  # u w a* w*
    TRANSPOSE = "transpose"  # u w a^T w*
    BAR = "bar"  # u w conj(a) w*

    @property
    def number(self) -> int:
        return list(BHForm).index(self) + 1


_BH_ENTRYWISE = {
    BHForm.CONJUGATION: lambda a: a,
    BHForm.ADJOINT: linalg.adjoint,
    BHForm.TRANSPOSE: linalg.transpose,
    BHForm.BAR: linalg.conjugate,
}


@dataclass(frozen=True, eq=False)
class BHClassification:
    form: BHForm
    u: np.ndarray
    w: np.ndarray


def classify_bh(mapping: RealLinearMap, tol: float) -> BHClassification:
    """Classify an isometry of a single full matrix algebra into one of the four forms.

    Raises:
        NotSingleBlock: if either signature has more than one block.
        DecompositionError: if the map does not decompose.
    """
    if mapping.domain.num_blocks != 1 or mapping.codomain.num_blocks != 1:
        raise NotSingleBlock(f"expected single-block signatures, got {mapping.domain} -> {mapping.codomain}")
    result = decompose_isometry(mapping, tol)
    if isinstance(result, DecomposeFailure):
        raise DecompositionError(result)
    # The center of a full matrix algebra is the scalars, so P is 0 or I.
    full = result.projection.flags[0]
    direct = result.jordan.flags[0] is BlockForm.DIRECT
    if direct:
        form = BHForm.CONJUGATION if full else BHForm.ADJOINT
    else:
        form = BHForm.TRANSPOSE if full else BHForm.BAR
    logger.info("classified map on %s as form (%d) %s", mapping.domain, form.number, form.value)
    return BHClassification(form, np.array(result.u.blocks[0]), np.array(result.jordan.unitaries[0]))


def apply_bh_form(classification: BHClassification, a: np.ndarray) -> np.ndarray:
    """Evaluate u w f(a) w* for the classified form."""
    w = classification.w
    return classification.u @ w @ _BH_ENTRYWISE[classification.form](np.asarray(a)) @ linalg.adjoint(w)


def build_bh_form(n: int, form: BHForm, u: np.ndarray, w: np.ndarray) -> RealLinearMap:
    """The map of the given form on the full matrix algebra M_n."""
    sig = AlgebraSignature((n,))
    classification = BHClassification(form, np.asarray(u, dtype=np.complex128), np.asarray(w, dtype=np.complex128))
    return RealLinearMap.from_function(
        sig, sig, lambda a: AlgebraElement(sig, [apply_bh_form(classification, a.blocks[0])]))


def random_certificate(domain: AlgebraSignature, codomain: AlgebraSignature,
                       seed: linalg.Seed) -> IsometryCertificate:
    """Random Jordan map, blockwise Haar u and uniform central projection."""
    rng = linalg.make_rng(seed)
    jordan = random_jordan_iso(domain, codomain, rng)
    return IsometryCertificate(random_unitary_element(codomain, rng), random_central_projection(codomain, rng), jordan)


def certificates_equal(first: IsometryCertificate, second: IsometryCertificate, tol: float) -> bool:
    """u within tol entrywise, P flags identical and J equal after phase canonicalization."""
    if first.u.signature != second.u.signature or first.projection != second.projection:
        return False
    return first.u.max_abs_difference(second.u) <= tol and jordan_equal(first.jordan, second.jordan, tol)
