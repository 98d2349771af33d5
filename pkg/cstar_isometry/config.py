"""Module for configuration constants of the isometry toolkit."""
import dotenv
import os

dotenv.load_dotenv()

# Defaults for the CLI and the verification operations.
DEFAULT_TOL = float(os.getenv("CSTAR_TOL", "1e-9"))
DEFAULT_TRIALS = int(os.getenv("CSTAR_TRIALS", "200"))
DEFAULT_SEED = int(os.getenv("CSTAR_SEED", "0"))

# Cyclic Jacobi eigensolver.
JACOBI_THRESHOLD = 1e-13
JACOBI_MAX_SWEEPS = 64
JACOBI_LARGE_THETA = 1e150  # rotation angle cutoff where theta**2 would overflow

SINGULAR_RTOL = 1e-12  # smallest/largest singular value below this is singular
INVERTIBLE_MIN_RATIO = 1e-6  # rejection threshold for sampled invertibles

PHASE_ZERO_TOL = 1e-8  # entries below this count as zero for phase fixing

OUTPUT_AMPLIFICATION = 10  # output residual bound is this multiple of tol

JSON_INDENT = 2
