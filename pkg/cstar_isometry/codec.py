"""Module for the JSON interchange formats of signatures, elements, Jordan maps, real-linear maps and certificates.

Complex matrices are flat row-major lists of ``[re, im]`` pairs. Floats are
written with Python's shortest round-trip representation, so a decoded
document reproduces every double exactly.
"""
import json
import math
from typing import List, Literal, Tuple, Type, TypeVar

import numpy as np
from pydantic import (BaseModel, ConfigDict, Field, FiniteFloat, NonNegativeInt, PositiveInt, StrictBool,
                      ValidationError, model_validator)

from cstar_isometry.algebra import AlgebraElement, AlgebraSignature, CentralProjection
from cstar_isometry.config import JSON_INDENT
from cstar_isometry.errors import CStarError, InvalidCertificate, MalformedInput, NotJordanIso
from cstar_isometry.isometry import BHClassification, DecomposeFailure, IsometryCertificate
from cstar_isometry.jordan import BlockForm, JordanStarIso
from cstar_isometry.linear_map import RealLinearMap
from cstar_isometry.reports import json_number

Pair = Tuple[FiniteFloat, FiniteFloat]
Model = TypeVar("Model", bound=BaseModel)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ElementModel(_Strict):
    signature: List[PositiveInt] = Field(min_length=1)
    blocks: List[List[Pair]]

    @model_validator(mode="after")
    def _check_shapes(self) -> "ElementModel":
        if len(self.blocks) != len(self.signature):
            raise ValueError(f"blocks: expected {len(self.signature)} blocks, got {len(self.blocks)}")
        for i, (n, block) in enumerate(zip(self.signature, self.blocks)):
            if len(block) != n * n:
                raise ValueError(f"blocks.{i}: expected {n * n} entries, got {len(block)}")
        return self


class JordanModel(_Strict):
    perm: List[NonNegativeInt] = Field(min_length=1)
    flags: List[Literal["direct", "transpose"]]
    unitaries: List[List[Pair]]

    @model_validator(mode="after")
    def _check_shapes(self) -> "JordanModel":
        k = len(self.perm)
        if len(self.flags) != k or len(self.unitaries) != k:
            raise ValueError(f"flags, unitaries: expected {k} entries each to match perm")
        if sorted(self.perm) != list(range(k)):
            raise ValueError(f"perm: {self.perm} is not a permutation of 0..{k - 1}")
        for i, w in enumerate(self.unitaries):
            n = math.isqrt(len(w))
            if n == 0 or n * n != len(w):
                raise ValueError(f"unitaries.{i}: {len(w)} entries do not form a square matrix")
        return self


class SignatureModel(_Strict):
    blocks: List[PositiveInt] = Field(min_length=1)


class MapModel(_Strict):
    domain: List[PositiveInt] = Field(min_length=1)
    codomain: List[PositiveInt] = Field(min_length=1)
    matrix: List[List[FiniteFloat]]

    @model_validator(mode="after")
    def _check_shape(self) -> "MapModel":
        rows = 2 * sum(n * n for n in self.codomain)
        cols = 2 * sum(n * n for n in self.domain)
        if len(self.matrix) != rows:
            raise ValueError(f"matrix: expected {rows} rows, got {len(self.matrix)}")
        for i, row in enumerate(self.matrix):
            if len(row) != cols:
                raise ValueError(f"matrix.{i}: expected {cols} columns, got {len(row)}")
        return self


class CertificateModel(_Strict):
    u: ElementModel
    P: List[StrictBool]
    J: JordanModel


def _validate(model: Type[Model], data, root: str) -> Model:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        error = e.errors()[0]
        field = ".".join([root] + [str(part) for part in error["loc"]])
        raise MalformedInput(field, error["msg"]) from e


def _pairs(m: np.ndarray) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(m).reshape(-1)]


def _matrix(pairs: List[Pair], n: int) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128).reshape(n, n)


def signature_to_json(sig: AlgebraSignature) -> dict:
    return {"blocks": list(sig.blocks)}


def signature_from_json(data, root: str = "signature") -> AlgebraSignature:
    return AlgebraSignature(tuple(_validate(SignatureModel, data, root).blocks))


def element_to_json(x: AlgebraElement) -> dict:
    return {"signature": list(x.signature.blocks), "blocks": [_pairs(b) for b in x.blocks]}


def element_from_json(data, root: str = "element") -> AlgebraElement:
    model = _validate(ElementModel, data, root)
    sig = AlgebraSignature(tuple(model.signature))
    return AlgebraElement(sig, [_matrix(block, n) for n, block in zip(sig.blocks, model.blocks)])


def matrix_to_json(m: np.ndarray) -> List[List[float]]:
    return _pairs(m)


def jordan_to_json(jordan: JordanStarIso) -> dict:
    return {
        "perm": list(jordan.perm),
        "flags": [flag.value for flag in jordan.flags],
        "unitaries": [_pairs(w) for w in jordan.unitaries],
    }


def jordan_from_json(data, root: str = "J") -> JordanStarIso:
    """Decode a Jordan map; both signatures follow from the unitary sizes and the permutation.

    Raises:
        MalformedInput: on schema violations.
        InvalidCertificate: if a unitary is not unitary.
    """
    model = _validate(JordanModel, data, root)
    sizes = [math.isqrt(len(w)) for w in model.unitaries]
    codomain_blocks = [0] * len(sizes)
    for i, j in enumerate(model.perm):
        codomain_blocks[j] = sizes[i]
    unitaries = [_matrix(w, n) for w, n in zip(model.unitaries, sizes)]
    try:
        return JordanStarIso(AlgebraSignature(tuple(sizes)), AlgebraSignature(tuple(codomain_blocks)),
                             tuple(model.perm), tuple(BlockForm(f) for f in model.flags), tuple(unitaries))
    except NotJordanIso as e:
        raise InvalidCertificate(f"{root}.unitaries: {e}", residual=e.residual) from e


def map_to_json(mapping: RealLinearMap) -> dict:
    return {
        "domain": list(mapping.domain.blocks),
        "codomain": list(mapping.codomain.blocks),
        "matrix": [[float(v) for v in row] for row in mapping.matrix],
    }


def map_from_json(data, root: str = "map") -> RealLinearMap:
    model = _validate(MapModel, data, root)
    return RealLinearMap(AlgebraSignature(tuple(model.domain)), AlgebraSignature(tuple(model.codomain)),
                         np.array(model.matrix, dtype=np.float64))


def certificate_to_json(cert: IsometryCertificate) -> dict:
    return {"u": element_to_json(cert.u), "P": list(cert.projection.flags), "J": jordan_to_json(cert.jordan)}


def certificate_from_json(data, root: str = "certificate") -> IsometryCertificate:
    model = _validate(CertificateModel, data, root)
    u = element_from_json(model.u.model_dump(), f"{root}.u")
    jordan = jordan_from_json(model.J.model_dump(), f"{root}.J")
    if len(model.P) != u.signature.num_blocks:
        raise MalformedInput(f"{root}.P", f"expected {u.signature.num_blocks} flags, got {len(model.P)}")
    if u.signature != jordan.codomain:
        raise MalformedInput(f"{root}.u.signature",
                             f"{u.signature} does not match the codomain {jordan.codomain} of J")
    return IsometryCertificate(u, CentralProjection(u.signature, tuple(model.P)), jordan)


def failure_to_json(failure: DecomposeFailure) -> dict:
    data = {"stage": failure.stage.value, "residual": json_number(failure.residual)}
    if failure.subcheck is not None:
        data["subcheck"] = failure.subcheck
    return data


def classification_to_json(classification: BHClassification) -> dict:
    return {
        "form": classification.form.value,
        "form_number": classification.form.number,
        "u": matrix_to_json(classification.u),
        "w": matrix_to_json(classification.w),
    }


def dumps(data) -> str:
    """Serialize deterministically; infinities are not valid JSON and are refused."""
    return json.dumps(data, indent=JSON_INDENT, allow_nan=False) + "\n"


def loads(text: str, root: str) -> object:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedInput(root, f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e


def describe_error(error: CStarError) -> str:
    """One-line description for CLI diagnostics."""
    return str(error).splitlines()[0] if str(error) else type(error).__name__
