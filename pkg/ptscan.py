#!/usr/bin/env python3
"""
ptscan - Main Entry Point

Adjoint-matrix spectra of quadratic Hamiltonians and PT-symmetry region scans
of the electromagnetic self-force model.
"""

import sys
import os

# Add the parent directory to path to allow importing modules
sys.path.insert(0, os.path.dirname(os.path.realpath(__file__)))

from modules.cli import CLI


def main():
    """Main entry point for ptscan."""
    try:
        cli = CLI()
        return cli.run()

    except KeyboardInterrupt:
        print("\nptscan was interrupted by the user.", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
