#!/usr/bin/env python3
"""
Command Line Interface Module

Handles command-line arguments and report output for ptscan.
"""

import sys
import argparse
import json
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from tabulate import tabulate

from .config_manager import ConfigManager, Settings
from .errors import ExitCode, PtscanError, UsageError, ModelIOError
from .gaussian_rational import format_rational, parse_rational
from .logger import get_logger, set_debug_mode
from .model_parser import bind_and_expand, load_model, resolve_binding
from .operator_algebra import AdjointMatrix, adjoint_matrix
from .region_scanner import GridSpec, run_scan, write_csv, write_pgm
from .selfforce_model import ModelReport, SelfForceParams, classify_params
from .spectral_engine import SpectralReport, SpectrumClassification, analyze_hamiltonian

__version__ = "1.0.0"

logger = get_logger('cli')


class _ArgumentParser(argparse.ArgumentParser):
    """argparse that raises instead of exiting with status 2 (2 means Boundary here)."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _parse_assignment(text: str) -> tuple:
    """'name=value' -> (name, Fraction)."""
    name, sep, value = text.partition('=')
    name = name.strip()
    if not sep or not name:
        raise UsageError(f"expected name=value, got {text!r}")
    try:
        return name, parse_rational(value.strip())
    except ValueError as e:
        raise UsageError(f"bad value for '{name}': {e}") from e


def _assignments(items: Optional[List[str]]) -> Dict[str, Fraction]:
    result: Dict[str, Fraction] = {}
    for item in items or []:
        name, value = _parse_assignment(item)
        result[name] = value
    return result


def _format_complex(z: complex) -> str:
    if abs(z.imag) == 0.0:
        return f"{z.real:.9g}"
    sign = '+' if z.imag >= 0 else '-'
    return f"{z.real:.9g}{sign}{abs(z.imag):.9g}i"


class CLI:
    """
    Command-line interface for ptscan.
    """

    def __init__(self, config_manager: Optional[ConfigManager] = None):
        """Initialize the CLI."""
        self.parser = self._create_parser()
        self.config_manager = config_manager or ConfigManager()

    def _create_parser(self) -> argparse.ArgumentParser:
        """
        Create the argument parser.

        Returns:
            Configured argument parser
        """
        parser = _ArgumentParser(
            prog='ptscan',
            description="ptscan - adjoint-matrix spectra and PT-symmetry regions of quadratic Hamiltonians",
            formatter_class=argparse.ArgumentDefaultsHelpFormatter
        )

        # General options
        parser.add_argument('--debug', action='store_true', help="Enable debug output")
        parser.add_argument('--version', action='store_true', help="Show version information")
        parser.add_argument('--list-models', action='store_true',
                            help="List model files and scan presets in the config directory")

        subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')

        analyze = subparsers.add_parser('analyze', help="Analyze a model file")
        analyze.add_argument('model', help="Model file path or name in the config directory")
        analyze.add_argument('--set', dest='assignments', action='append', metavar='NAME=VALUE',
                             help="Bind a model parameter (repeatable)")
        self._add_tolerance_group(analyze)
        analyze.add_argument('--json', dest='json_out', metavar='PATH', help="Write the JSON report ('-' for stdout)")

        selfforce = subparsers.add_parser('selfforce', help="Classify one self-force parameter point")
        params_group = selfforce.add_argument_group('Model Parameters')
        params_group.add_argument('-m', '--mass', dest='m', required=True, help="Mass m (> 0)")
        params_group.add_argument('-t', '--tau', dest='tau', required=True, help="Time constant tau (> 0)")
        params_group.add_argument('-k', dest='k', required=True, help="Coupling k")
        params_group.add_argument('-A', dest='A', default='0', help="Coupling A")
        params_group.add_argument('-B', dest='B', default='0', help="Coupling B")
        self._add_tolerance_group(selfforce)
        selfforce.add_argument('--symmetries', action='store_true', help="Also check the candidate PT maps")
        selfforce.add_argument('--json', dest='json_out', metavar='PATH', help="Write the JSON report ('-' for stdout)")

        scan = subparsers.add_parser('scan', help="Scan a 2-D self-force parameter grid")
        grid_group = scan.add_argument_group('Grid')
        grid_group.add_argument('--preset', help="Grid preset name from config/scans")
        grid_group.add_argument('--fix', dest='fixed', action='append', metavar='NAME=VALUE',
                                help="Fix a parameter (repeatable)")
        grid_group.add_argument('--axis1', metavar='NAME:MIN:MAX:STEPS', help="Horizontal axis")
        grid_group.add_argument('--axis2', metavar='NAME:MIN:MAX:STEPS', help="Vertical axis")
        output_group = scan.add_argument_group('Output')
        output_group.add_argument('--csv', required=True, metavar='PATH', help="Region table output")
        output_group.add_argument('--pgm', metavar='PATH', help="Region image output (binary PGM)")
        scan.add_argument('--workers', type=int, help="Worker processes (default from settings)")
        self._add_tolerance_group(scan)

        matrix = subparsers.add_parser('matrix', help="Print the exact adjoint matrix of a model")
        matrix.add_argument('model', help="Model file path or name in the config directory")
        matrix.add_argument('--set', dest='assignments', action='append', metavar='NAME=VALUE',
                            help="Bind a model parameter (repeatable)")

        return parser

    @staticmethod
    def _add_tolerance_group(parser: argparse.ArgumentParser) -> None:
        group = parser.add_argument_group('Tolerances')
        group.add_argument('--tol-im', type=float, help="Relative tolerance on Im(xi)")
        group.add_argument('--tol-boundary', type=float, help="Band around xi = 0")

    def parse_args(self, args: Optional[Sequence[str]] = None) -> argparse.Namespace:
        """
        Parse command-line arguments.

        Args:
            args: Command-line arguments (uses sys.argv if None)

        Returns:
            Parsed arguments
        """
        return self.parser.parse_args(args)

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        """
        Run the CLI with the given arguments.

        Args:
            argv: Command-line arguments (uses sys.argv if None)

        Returns:
            Exit code
        """
        debug = False
        try:
            args = self.parse_args(argv)
            debug = args.debug
            set_debug_mode(debug)

            # Show version and exit
            if args.version:
                print(f"ptscan v{__version__}")
                return int(ExitCode.UNBROKEN)

            if args.list_models:
                return int(self.list_available())

            handlers = {
                'analyze': self.cmd_analyze,
                'selfforce': self.cmd_selfforce,
                'scan': self.cmd_scan,
                'matrix': self.cmd_matrix,
            }
            if args.command not in handlers:
                raise UsageError("a command is required (analyze, selfforce, scan, matrix)")
            return int(handlers[args.command](args))

        except KeyboardInterrupt:
            print("\nOperation canceled by user", file=sys.stderr)
            return ExitCode.INTERRUPTED
        except PtscanError as e:
            print(f"Error: {e}", file=sys.stderr)
            if debug:
                import traceback
                traceback.print_exc()
            return int(e.exit_code)
        except Exception as e:
            print(f"Error: {e}", file=sys.stderr)
            if debug:
                import traceback
                traceback.print_exc()
            return int(ExitCode.INVALID_INPUT)

    def list_available(self) -> ExitCode:
        models = self.config_manager.list_models()
        presets = self.config_manager.list_presets()
        if not models and not presets:
            print("No models or scan presets found", file=sys.stderr)
            return ExitCode.IO_FAILURE

        print("Available models:")
        for name in models:
            print(f"  {name}")
        print("Available scan presets:")
        for name in presets:
            print(f"  {name}")
        return ExitCode.UNBROKEN

    def _settings(self) -> Settings:
        return self.config_manager.load_settings()

    def _tolerances(self, args: argparse.Namespace):
        return self._settings().tolerances(args.tol_im, args.tol_boundary)

    def _load_hamiltonian(self, args: argparse.Namespace):
        path = self.config_manager.resolve_model(args.model)
        definition = load_model(path)
        binding = resolve_binding(definition, _assignments(args.assignments))
        logger.debug(f"Model {path} bound to {{{', '.join(f'{k}={format_rational(v)}' for k, v in binding.items())}}}")
        return bind_and_expand(definition, binding)

    @staticmethod
    def _emit_json(document: Dict[str, Any], path: Optional[str]) -> None:
        if path is None:
            return
        text = json.dumps(document, indent=2)
        if path == '-':
            print(text)
            return
        try:
            with open(path, 'w', encoding='utf-8') as f:
                f.write(text + '\n')
        except OSError as e:
            raise ModelIOError(f"cannot write report {path}: {e}") from e
        logger.info(f"Wrote report to {path}")

    @staticmethod
    def _print_matrix(matrix: AdjointMatrix) -> None:
        basis = list(matrix.space.basis)
        rows = [[name] + row for name, row in zip(basis, matrix.to_strings())]
        print(tabulate(rows, headers=[''] + basis, tablefmt='simple', stralign='right'))

    @staticmethod
    def _print_classification(classification: SpectrumClassification) -> None:
        rows = [[i + 1, _format_complex(xi)] for i, xi in enumerate(classification.xis)]
        print(tabulate(rows, headers=['#', 'xi = lambda^2'], tablefmt='simple'))
        lambdas = ', '.join(_format_complex(z) for z in classification.lambdas)
        print(f"lambda: {lambdas}")
        suffix = " (degenerate)" if classification.degenerate else ""
        print(f"verdict: {classification.verdict.value}{suffix}")

    def cmd_analyze(self, args: argparse.Namespace) -> int:
        """Generic pipeline on a model file; exit code follows the verdict."""
        H = self._load_hamiltonian(args)
        report: SpectralReport = analyze_hamiltonian(H, self._tolerances(args))
        if args.json_out != '-':
            print(f"H = {report.hamiltonian}")
            self._print_matrix(report.matrix)
            print(f"xi polynomial (ascending): {', '.join(str(c) for c in report.xi_coeffs)}")
            self._print_classification(report.classification)
        self._emit_json(report.to_dict(), args.json_out)
        return report.classification.verdict.exit_code

    def cmd_selfforce(self, args: argparse.Namespace) -> int:
        """Self-force model at one parameter point."""
        try:
            params = SelfForceParams(args.m, args.tau, args.k, args.A, args.B)
        except ValueError as e:
            raise UsageError(str(e)) from e
        report: ModelReport = classify_params(params, tolerances=self._tolerances(args),
                                              with_symmetries=args.symmetries)
        if args.json_out != '-':
            print(tabulate([[name, value] for name, value in params.to_dict().items()],
                           headers=['param', 'value'], tablefmt='simple'))
            print(f"xi_linear: {format_rational(report.xi_linear)}")
            print(f"cubic: {', '.join(format_rational(c) for c in report.cubic)}")
            print(f"cubic discriminant: {format_rational(report.discriminant)}")
            self._print_classification(report.classification)
            print(f"predicate: {str(report.predicate).lower()}  agreement: {str(report.agreement).lower()}")
            for name, holds in report.symmetries.items():
                print(f"symmetry {name}: {'holds' if holds else 'fails'}")
        self._emit_json(report.to_dict(), args.json_out)
        return report.verdict.exit_code

    def cmd_scan(self, args: argparse.Namespace) -> int:
        """Region scan; writes CSV (and optionally PGM) and prints a summary line."""
        settings = self._settings()
        preset: Dict[str, Any] = self.config_manager.load_preset(args.preset) if args.preset else {}
        fixed: Dict[str, Any] = dict(preset.get('fixed', {}))
        fixed.update(_assignments(args.fixed))
        axis1 = args.axis1 or preset.get('axis1')
        axis2 = args.axis2 or preset.get('axis2')
        if not axis1 or not axis2:
            raise UsageError("scan needs --axis1 and --axis2 (or a --preset)")

        spec = GridSpec.build(axis1, axis2, fixed, settings.tolerances(args.tol_im, args.tol_boundary))
        workers = args.workers if args.workers is not None else settings.workers
        grid = run_scan(spec, workers=workers)
        write_csv(grid, args.csv)
        if args.pgm:
            write_pgm(grid, args.pgm)
        print(grid.summary_line())
        return ExitCode.UNBROKEN

    def cmd_matrix(self, args: argparse.Namespace) -> int:
        """Print the exact adjoint matrix of a model."""
        H = self._load_hamiltonian(args)
        self._print_matrix(adjoint_matrix(H))
        return ExitCode.UNBROKEN


def main() -> int:
    """
    Main entry point for the CLI.

    Returns:
        Exit code
    """
    cli = CLI()
    return cli.run()


if __name__ == "__main__":
    sys.exit(main())
