"""Module for the batch command-line driver.

Subcommands read and write the JSON interchange formats of ``codec``. Exit
codes: 0 success, 1 malformed input, 2 a check or decomposition failed (the
failure document is still written).
"""
import argparse
import sys
from typing import Callable, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError, field_validator
from tqdm import tqdm

import internal_logging as logging
from cstar_isometry import codec, linalg
from cstar_isometry.algebra import AlgebraSignature, verify_norm_max_identity
from cstar_isometry.config import DEFAULT_SEED, DEFAULT_TOL, DEFAULT_TRIALS
from cstar_isometry.errors import CStarError, DecompositionError, MalformedInput, NotNormalized
from cstar_isometry.isometry import (DecomposeFailure, IsometryCertificate, build_isometry, certificates_equal,
                                     classify_bh, decompose_isometry, isometry_spot_check, normalize_map,
                                     random_certificate, symmetry_correspondence_check,
                                     verify_imaginary_unit_identities, verify_star_square, verify_triple_identity)
from cstar_isometry.linear_map import RealLinearMap
from cstar_isometry.reports import CheckResult, VerificationReport

logger = logging.get_logger(__name__)

CheckName = Literal["triple", "star", "square", "symmetry", "metric", "unit", "norm"]
DEFAULT_CHECKS = ("triple", "star", "square", "symmetry", "metric")


class RunConfig(BaseModel):
    """Validated command-line settings."""

    model_config = ConfigDict(frozen=True)

    subcommand: Literal["build", "decompose", "verify", "fuzz", "classify"]
    input_path: str = "-"
    output_path: str = "-"
    tol: PositiveFloat = DEFAULT_TOL
    trials: PositiveInt = DEFAULT_TRIALS
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2 ** 64)
    checks: Tuple[CheckName, ...] = DEFAULT_CHECKS
    signature: Optional[Tuple[PositiveInt, ...]] = None

    @field_validator("checks", mode="before")
    @classmethod
    def _split_checks(cls, value):
        if isinstance(value, str):
            return tuple(name.strip() for name in value.split(",") if name.strip())
        return value

    @field_validator("signature", mode="before")
    @classmethod
    def _split_signature(cls, value):
        if isinstance(value, str):
            return tuple(part.strip() for part in value.strip("[]() ").split(",") if part.strip())
        return value


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise MalformedInput("argv", message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="cstar-isometry",
                             description="Build, decompose and verify isometries of finite-dimensional C*-algebras")
    commands = parser.add_subparsers(dest="subcommand", required=True, parser_class=_ArgumentParser)

    def add(name: str, help_text: str, source: Optional[str]) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help_text)
        if source is not None:
            sub.add_argument(f"--{source}", dest="input_path", default="-",
                             help=f"{source} JSON path, '-' for stdin")
        sub.add_argument("--output", dest="output_path", default="-", help="output path, '-' for stdout")
        sub.add_argument("--tol", type=str, default=None)
        return sub

    add("build", "certificate JSON -> map JSON", "certificate")
    add("decompose", "map JSON -> certificate or failure JSON", "map")
    verify = add("verify", "run proof-identity checks on a map", "map")
    verify.add_argument("--checks", default=",".join(DEFAULT_CHECKS),
                        help="comma list of triple,star,square,symmetry,metric,unit,norm")
    verify.add_argument("--trials", type=str, default=None)
    verify.add_argument("--seed", type=str, default=None)
    fuzz = add("fuzz", "roundtrip and rejection properties on random certificates", None)
    fuzz.add_argument("--signature", required=True, help="block sizes, e.g. 2,2")
    fuzz.add_argument("--trials", type=str, default=None)
    fuzz.add_argument("--seed", type=str, default=None)
    add("classify", "classify an isometry of a single matrix algebra", "map")
    return parser


def parse_config(argv: List[str]) -> RunConfig:
    namespace = vars(_build_parser().parse_args(argv))
    settings = {key: value for key, value in namespace.items() if value is not None}
    try:
        return RunConfig(**settings)
    except ValidationError as e:
        error = e.errors()[0]
        field = "--" + ".".join(str(part) for part in error["loc"])
        raise MalformedInput(field, error["msg"]) from e


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def _load_map(config: RunConfig) -> RealLinearMap:
    return codec.map_from_json(codec.loads(_read(config.input_path), "map"))


def _run_build(config: RunConfig) -> int:
    cert = codec.certificate_from_json(codec.loads(_read(config.input_path), "certificate"))
    mapping = build_isometry(cert, config.tol)
    logger.info("built isometry %s -> %s", mapping.domain, mapping.codomain)
    _write(config.output_path, codec.dumps(codec.map_to_json(mapping)))
    return 0


def _run_decompose(config: RunConfig) -> int:
    result = decompose_isometry(_load_map(config), config.tol)
    if isinstance(result, DecomposeFailure):
        _write(config.output_path, codec.dumps(codec.failure_to_json(result)))
        return 2
    _write(config.output_path, codec.dumps(codec.certificate_to_json(result)))
    return 0


def _run_verify(config: RunConfig) -> int:
    mapping = _load_map(config)
    trials, seed, tol = config.trials, config.seed, config.tol
    reports: List[VerificationReport] = []
    normalized: Optional[RealLinearMap] = None
    needs_normal = {"star", "square", "symmetry", "unit"} & set(config.checks)
    if needs_normal:
        try:
            normalized = normalize_map(mapping, tol)
        except NotNormalized as e:
            reports.append(VerificationReport((CheckResult("normalized", e.residual, tol),)))
    star_square = None
    if normalized is not None and {"star", "square"} & set(config.checks):
        star_square = verify_star_square(normalized, trials, seed, tol)

    selected: Dict[str, Callable[[], VerificationReport]] = {
        "triple": lambda: verify_triple_identity(mapping, trials, seed, tol),
        "star": lambda: VerificationReport(tuple(c for c in star_square.checks if c.name == "star")),
        "square": lambda: VerificationReport(tuple(c for c in star_square.checks if c.name != "star")),
        "symmetry": lambda: symmetry_correspondence_check(normalized, trials, seed, tol),
        "unit": lambda: verify_imaginary_unit_identities(normalized, trials, seed, tol),
        "metric": lambda: isometry_spot_check(mapping, trials, seed, tol),
        "norm": lambda: verify_norm_max_identity(mapping.codomain, trials, seed, tol),
    }
    for name in config.checks:
        if name in needs_normal and normalized is None:
            continue
        reports.append(selected[name]())
    report = VerificationReport(()).merged(reports)
    _write(config.output_path, codec.dumps(report.to_dict()))
    return 0 if report.passed else 2


def _run_fuzz(config: RunConfig) -> int:
    if config.signature is None:
        raise MalformedInput("--signature", "required for fuzz")
    sig = AlgebraSignature(config.signature)
    roundtrip_failures, false_accepts = 0, 0
    stages: Dict[str, int] = {}
    children = linalg.derived_seeds(config.seed, config.trials)
    for child in tqdm(children, desc="fuzz", file=sys.stderr, disable=None):
        rng = linalg.make_rng(child)
        cert: IsometryCertificate = random_certificate(sig, sig, rng)
        result = decompose_isometry(build_isometry(cert, config.tol), config.tol)
        if not (isinstance(result, IsometryCertificate) and certificates_equal(result, cert, config.tol)):
            roundtrip_failures += 1
        gaussian = RealLinearMap(sig, sig, rng.standard_normal((sig.real_dimension, sig.real_dimension)))
        verdict = decompose_isometry(gaussian, config.tol)
        if isinstance(verdict, DecomposeFailure):
            stages[verdict.stage.value] = stages.get(verdict.stage.value, 0) + 1
        else:
            false_accepts += 1
    passed = roundtrip_failures == 0 and false_accepts == 0
    summary = {
        "signature": codec.signature_to_json(sig),
        "trials": config.trials,
        "seed": config.seed,
        "roundtrip_failures": roundtrip_failures,
        "false_accepts": false_accepts,
        "rejection_stages": dict(sorted(stages.items())),
        "passed": passed,
    }
    logger.info("fuzz on %s: %d roundtrip failures, %d false accepts", sig, roundtrip_failures, false_accepts)
    _write(config.output_path, codec.dumps(summary))
    return 0 if passed else 2


def _run_classify(config: RunConfig) -> int:
    try:
        classification = classify_bh(_load_map(config), config.tol)
    except DecompositionError as e:
        _write(config.output_path, codec.dumps(codec.failure_to_json(e.failure)))
        return 2
    _write(config.output_path, codec.dumps(codec.classification_to_json(classification)))
    return 0


_HANDLERS = {
    "build": _run_build,
    "decompose": _run_decompose,
    "verify": _run_verify,
    "fuzz": _run_fuzz,
    "classify": _run_classify,
}


def run_cli(argv: List[str]) -> int:
    """Run one subcommand and return its exit code.

    Parameters:
        argv (List[str]): Arguments without the program name.

    Returns:
        int: 0 on success, 1 on malformed input, 2 when a check or decomposition fails.
    """
    try:
        config = parse_config(argv)
        return _HANDLERS[config.subcommand](config)
    except MalformedInput as e:
        logger.error("malformed input: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        logger.error("cannot access %s: %s", e.filename, e.strerror)
        print(f"error: {e.filename}: {e.strerror}", file=sys.stderr)
        return 1
    except CStarError as e:
        print(f"failed: {codec.describe_error(e)}", file=sys.stderr)
        return 2
