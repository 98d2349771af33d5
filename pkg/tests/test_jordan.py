#!/usr/bin/env python3
import unittest

import numpy as np

from cstar_isometry import algebra, jordan, linalg
from cstar_isometry.algebra import AlgebraElement, AlgebraSignature
from cstar_isometry.errors import IncompatibleSignatures, NotJordanIso
from cstar_isometry.jordan import BlockForm, JordanStarIso
from cstar_isometry.linear_map import RealLinearMap, adjoint_map, identity_map, left_multiplication, \
    transpose_map

ROUNDTRIP_SIGNATURES = [(1,), (2,), (3,), (1, 2), (2, 2), (1, 1, 3)]


def single(sig: AlgebraSignature, block: np.ndarray) -> AlgebraElement:
    return AlgebraElement(sig, [block])


class TestApplyJordan(unittest.TestCase):
    def test_direct_conjugation_by_flip(self) -> None:
        sig = AlgebraSignature.of(2)
        flip = np.array([[0, 1], [1, 0]])
        iso = JordanStarIso(sig, sig, (0,), (BlockForm.DIRECT,), (flip,))
        image = jordan.apply_jordan(iso, single(sig, np.array([[1, 2], [3, 4]])))
        np.testing.assert_allclose(image.blocks[0], [[4, 3], [2, 1]])

    def test_transpose_form(self) -> None:
        sig = AlgebraSignature.of(2)
        iso = JordanStarIso(sig, sig, (0,), (BlockForm.TRANSPOSE,), (np.eye(2),))
        image = jordan.apply_jordan(iso, single(sig, np.array([[1, 2j], [0, 0]])))
        np.testing.assert_allclose(image.blocks[0], [[1, 0], [2j, 0]])

    def test_block_permutation(self) -> None:
        sig = AlgebraSignature.of(1, 1)
        iso = JordanStarIso(sig, sig, (1, 0), (BlockForm.DIRECT, BlockForm.DIRECT), (np.eye(1), np.eye(1)))
        image = jordan.apply_jordan(iso, AlgebraElement(sig, [[[2.0]], [[5.0]]]))
        self.assertEqual(image.blocks[0][0, 0], 5.0)
        self.assertEqual(image.blocks[1][0, 0], 2.0)

    def test_jordan_square_identity(self) -> None:
        sig = AlgebraSignature.of(2, 3)
        iso = jordan.random_jordan_iso(sig, sig, 4)
        x = algebra.random_element(sig, 8)
        image = jordan.apply_jordan(iso, x)
        self.assertLessEqual(algebra.op_norm(jordan.apply_jordan(iso, x @ x) - image @ image), 1e-10)

    def test_scalar_blocks_are_forced_direct(self) -> None:
        sig = AlgebraSignature.of(1)
        iso = JordanStarIso(sig, sig, (0,), (BlockForm.TRANSPOSE,), (np.eye(1),))
        self.assertEqual(iso.flags, (BlockForm.DIRECT,))

    def test_rejects_non_unitary(self) -> None:
        sig = AlgebraSignature.of(2)
        with self.assertRaises(NotJordanIso):
            JordanStarIso(sig, sig, (0,), (BlockForm.DIRECT,), (2 * np.eye(2),))

    def test_rejects_size_mismatch(self) -> None:
        with self.assertRaises(IncompatibleSignatures):
            JordanStarIso(AlgebraSignature.of(1, 2), AlgebraSignature.of(1, 2), (1, 0),
                          (BlockForm.DIRECT, BlockForm.DIRECT), (np.eye(1), np.eye(2)))


class TestRealLinearMap(unittest.TestCase):
    def test_identity_jordan_matrix(self) -> None:
        sig = AlgebraSignature.of(2)
        mapping = jordan.to_real_linear_map(jordan.identity_jordan(sig))
        np.testing.assert_array_equal(mapping.matrix, np.eye(8))

    def test_transpose_is_a_signed_permutation(self) -> None:
        sig = AlgebraSignature.of(2)
        iso = JordanStarIso(sig, sig, (0,), (BlockForm.TRANSPOSE,), (np.eye(2),))
        matrix = jordan.to_real_linear_map(iso).matrix
        np.testing.assert_array_equal(np.abs(matrix).sum(axis=0), np.ones(8))
        np.testing.assert_array_equal(matrix, transpose_map(sig).matrix)

    def test_isometric_on_random_elements(self) -> None:
        sig = AlgebraSignature.of(1, 2)
        iso = jordan.random_jordan_iso(sig, sig, 2)
        for seed in range(20):
            x = algebra.random_element(sig, seed)
            self.assertAlmostEqual(algebra.op_norm(jordan.apply_jordan(iso, x)), algebra.op_norm(x), delta=1e-10)


class TestVerifyJordan(unittest.TestCase):
    def test_identity_passes(self) -> None:
        report = jordan.verify_jordan_star_iso(identity_map(AlgebraSignature.of(1, 2)), 1e-10)
        self.assertTrue(report.passed)

    def test_conjugation_fails_complex_linearity_only(self) -> None:
        sig = AlgebraSignature.of(2)
        conjugation = RealLinearMap.from_function(sig, sig, AlgebraElement.conjugate)
        report = jordan.verify_jordan_star_iso(conjugation, 1e-10)
        self.assertFalse(report.passed)
        self.assertEqual(report.first_failure.name, "complex_linear")
        self.assertLessEqual(report.residual("star"), 1e-12)

    def test_unitary_conjugation_passes(self) -> None:
        sig = AlgebraSignature.of(3)
        u = algebra.random_unitary_element(sig, 7)
        mapping = RealLinearMap.from_function(sig, sig, lambda x: u @ x @ u.adjoint())
        self.assertTrue(jordan.verify_jordan_star_iso(mapping, 1e-10).passed)

    def test_non_unital_map_fails(self) -> None:
        sig = AlgebraSignature.of(2)
        doubled = RealLinearMap(sig, sig, 2.0 * np.eye(8))
        report = jordan.verify_jordan_star_iso(doubled, 1e-10)
        self.assertEqual(report.first_failure.name, "unital")

    def test_multiplication_by_non_central_element_fails(self) -> None:
        sig = AlgebraSignature.of(2)
        x = algebra.random_unitary_element(sig, 1)
        self.assertFalse(jordan.verify_jordan_star_iso(left_multiplication(x), 1e-10).passed)

    def test_zero_map_fails_bijectivity(self) -> None:
        sig = AlgebraSignature.of(1)
        report = jordan.verify_jordan_star_iso(RealLinearMap(sig, sig, np.zeros((2, 2))), 1e-10)
        bijective = [check for check in report.checks if check.name == "bijective"][0]
        self.assertFalse(bijective.passed)


class TestFactorJordan(unittest.TestCase):
    def test_identity(self) -> None:
        sig = AlgebraSignature.of(2)
        result = jordan.factor_jordan_iso(identity_map(sig), 1e-10)
        self.assertEqual(result.perm, (0,))
        self.assertEqual(result.flags, (BlockForm.DIRECT,))
        np.testing.assert_allclose(result.unitaries[0], np.eye(2), atol=1e-12)

    def test_transpose_on_three_by_three(self) -> None:
        sig = AlgebraSignature.of(3)
        result = jordan.factor_jordan_iso(transpose_map(sig), 1e-10)
        self.assertEqual(result.flags, (BlockForm.TRANSPOSE,))
        np.testing.assert_allclose(result.unitaries[0], np.eye(3), atol=1e-12)

    def test_random_roundtrip_on_two_blocks(self) -> None:
        sig = AlgebraSignature.of(2, 2)
        original = jordan.random_jordan_iso(sig, sig, 11)
        recovered = jordan.factor_jordan_iso(jordan.to_real_linear_map(original), 1e-9)
        self.assertTrue(jordan.jordan_equal(recovered, original, 1e-9))

    def test_roundtrip_across_signatures(self) -> None:
        count = 0
        for blocks in ROUNDTRIP_SIGNATURES:
            sig = AlgebraSignature(blocks)
            for child in linalg.derived_seeds(len(blocks) * 100 + sum(blocks), 34):
                original = jordan.random_jordan_iso(sig, sig, child)
                recovered = jordan.factor_jordan_iso(jordan.to_real_linear_map(original), 1e-9)
                self.assertTrue(jordan.jordan_equal(recovered, original, 1e-9), f"{sig}, seed {child}")
                count += 1
        self.assertGreaterEqual(count, 200)

    def test_adjoint_is_rejected(self) -> None:
        # a -> a* is a Jordan *-map but conjugate-linear.
        with self.assertRaises(NotJordanIso):
            jordan.factor_jordan_iso(adjoint_map(AlgebraSignature.of(2)), 1e-9)

    def test_phase_is_removed(self) -> None:
        sig = AlgebraSignature.of(2)
        w = linalg.random_unitary(2, 3)
        first = JordanStarIso(sig, sig, (0,), (BlockForm.DIRECT,), (w,))
        second = JordanStarIso(sig, sig, (0,), (BlockForm.DIRECT,), (np.exp(0.7j) * w,))
        self.assertTrue(jordan.jordan_equal(first, second, 1e-12))
        self.assertTrue(jordan.jordan_equal(first.canonical(), second, 1e-12))


class TestRandomJordan(unittest.TestCase):
    def test_permuted_signature(self) -> None:
        iso = jordan.random_jordan_iso(AlgebraSignature.of(2, 3), AlgebraSignature.of(3, 2), 0)
        self.assertEqual(iso.perm, (1, 0))

    def test_incompatible_block_multisets(self) -> None:
        with self.assertRaises(IncompatibleSignatures):
            jordan.random_jordan_iso(AlgebraSignature.of(2), AlgebraSignature.of(3), 0)

    def test_deterministic_per_seed(self) -> None:
        sig = AlgebraSignature.of(1, 2, 2)
        self.assertTrue(jordan.jordan_equal(jordan.random_jordan_iso(sig, sig, 9),
                                            jordan.random_jordan_iso(sig, sig, 9), 0.0))

    def test_unitaries_in_canonical_phase(self) -> None:
        sig = AlgebraSignature.of(3)
        w = jordan.random_jordan_iso(sig, sig, 5).unitaries[0]
        np.testing.assert_allclose(jordan.canonicalize_unitary(w), w, atol=1e-15)
        self.assertGreater(w[0, 0].real, 0.0)
        self.assertEqual(w[0, 0].imag, 0.0)

    def test_canonical_pivot_has_exactly_zero_imaginary_part(self) -> None:
        for seed in range(200):
            canonical = jordan.canonicalize_unitary(linalg.random_unitary(3, seed))
            self.assertEqual(canonical[0, 0].imag, 0.0, f"seed={seed}")
            self.assertGreater(canonical[0, 0].real, 0.0)
            np.testing.assert_allclose(canonical @ canonical.conj().T, np.eye(3), atol=1e-12)


if __name__ == '__main__':
    unittest.main()
