# /usr/bin/env python3
"""
Command-line entry point for building, decomposing, verifying and classifying
surjective isometries between invertible groups of finite-dimensional
C*-algebras.

Usage:
    python main.py build --certificate cert.json --output map.json
    python main.py decompose --map map.json
    python main.py verify --map map.json --checks triple,star,square,symmetry,metric
    python main.py fuzz --signature 2,2 --trials 200 --seed 0
    python main.py classify --map map.json
"""

import sys

from cstar_isometry.cli import run_cli


def main() -> None:
    """Run the requested subcommand and exit with its status code."""
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == '__main__':
    main()
