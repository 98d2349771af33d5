"""Module for real-linear maps between finite-dimensional C*-algebras in the fixed real basis."""
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from cstar_isometry.algebra import AlgebraElement, AlgebraSignature, real_basis
from cstar_isometry.errors import SignatureMismatch


@dataclass(frozen=True, eq=False)
class RealLinearMap:
    """A real-linear operator A -> B stored as a (2 dim_C B) x (2 dim_C A) real matrix."""

    domain: AlgebraSignature
    codomain: AlgebraSignature
    matrix: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=np.float64)
        expected = (self.codomain.real_dimension, self.domain.real_dimension)
        if matrix.shape != expected:
            raise SignatureMismatch(f"map matrix has shape {matrix.shape}, expected {expected}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_function(cls, domain: AlgebraSignature, codomain: AlgebraSignature,
                      fn: Callable[[AlgebraElement], AlgebraElement]) -> "RealLinearMap":
        """Assemble the matrix column by column from the images of the real basis elements."""
        columns = [fn(e).to_real_vector() for e in real_basis(domain)]
        return cls(domain, codomain, np.column_stack(columns))

    def apply(self, x: AlgebraElement) -> AlgebraElement:
        if x.signature != self.domain:
            raise SignatureMismatch(f"map expects {self.domain}, got {x.signature}")
        return AlgebraElement.from_real_vector(self.codomain, self.matrix @ x.to_real_vector())

    __call__ = apply

    def basis_images(self) -> List[AlgebraElement]:
        """Images of the real basis elements, i.e. the decoded columns."""
        return [AlgebraElement.from_real_vector(self.codomain, column) for column in self.matrix.T]

    def compose(self, inner: "RealLinearMap") -> "RealLinearMap":
        """self after inner."""
        if inner.codomain != self.domain:
            raise SignatureMismatch(f"cannot compose {self.domain} <- {inner.codomain}")
        return RealLinearMap(inner.domain, self.codomain, self.matrix @ inner.matrix)

    def __add__(self, other: "RealLinearMap") -> "RealLinearMap":
        self._check_same(other)
        return RealLinearMap(self.domain, self.codomain, self.matrix + other.matrix)

    def max_abs_difference(self, other: "RealLinearMap") -> float:
        """Entrywise distance between the two matrices."""
        self._check_same(other)
        return float(np.max(np.abs(self.matrix - other.matrix)))

    def _check_same(self, other: "RealLinearMap") -> None:
        if (self.domain, self.codomain) != (other.domain, other.codomain):
            raise SignatureMismatch(
                f"maps differ in shape: {self.domain}->{self.codomain} vs {other.domain}->{other.codomain}")


def identity_map(sig: AlgebraSignature) -> RealLinearMap:
    return RealLinearMap(sig, sig, np.eye(sig.real_dimension))


def left_multiplication(x: AlgebraElement) -> RealLinearMap:
    """The map y -> x y on the algebra of x."""
    return RealLinearMap.from_function(x.signature, x.signature, lambda y: x @ y)


def adjoint_map(sig: AlgebraSignature) -> RealLinearMap:
    """The conjugate-linear involution y -> y*."""
    return RealLinearMap.from_function(sig, sig, AlgebraElement.adjoint)


def transpose_map(sig: AlgebraSignature) -> RealLinearMap:
    """Blockwise transpose in the standard matrix units."""
    return RealLinearMap.from_function(sig, sig, AlgebraElement.transpose)
