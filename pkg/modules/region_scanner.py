#!/usr/bin/env python3
"""
Region Scanner Module

Sweeps a 2-D grid of self-force parameters, classifies every cell and writes
the region map as CSV (pandas) and as a binary PGM image (Pillow).

Grid samples are exact rationals, cells are independent, and results are
assembled in index order, so the output bytes never depend on the worker count.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd
from PIL import Image

from .errors import InvalidGridError, MissingParameterError, ModelIOError, PtscanError
from .gaussian_rational import format_rational, parse_rational
from .logger import get_logger
from .selfforce_model import PARAMETER_NAMES, SelfForceParams, classify_params
from .spectral_engine import Tolerances, Verdict

logger = get_logger('region_scanner')

CSV_COLUMNS = ['axis1', 'axis2', 'verdict', 'predicate', 'agreement', 'min_im_xi', 'min_re_xi']
PGM_SHADES = {Verdict.UNBROKEN: 255, Verdict.BOUNDARY: 128, Verdict.BROKEN: 0}


@dataclass(frozen=True)
class Axis:
    name: str
    minimum: Fraction
    maximum: Fraction
    steps: int

    def __post_init__(self):
        object.__setattr__(self, 'minimum', Fraction(self.minimum))
        object.__setattr__(self, 'maximum', Fraction(self.maximum))
        if self.name not in PARAMETER_NAMES:
            raise InvalidGridError(f"unknown scan parameter '{self.name}' (expected one of {', '.join(PARAMETER_NAMES)})")
        if not isinstance(self.steps, int) or self.steps < 2:
            raise InvalidGridError(f"axis '{self.name}' needs at least 2 steps")
        if not self.minimum < self.maximum:
            raise InvalidGridError(f"axis '{self.name}' needs min < max")

    @classmethod
    def parse(cls, text: str) -> 'Axis':
        """Parse 'name:min:max:steps', e.g. 'A:-4:4:41'."""
        parts = text.split(':')
        if len(parts) != 4:
            raise InvalidGridError(f"axis must look like name:min:max:steps, got {text!r}")
        name, low, high, steps = (part.strip() for part in parts)
        try:
            return cls(name, parse_rational(low), parse_rational(high), int(steps))
        except ValueError as e:
            raise InvalidGridError(f"bad axis {text!r}: {e}") from e

    def values(self) -> List[Fraction]:
        """min + j*(max - min)/(steps - 1), exactly."""
        width = (self.maximum - self.minimum) / (self.steps - 1)
        return [self.minimum + j * width for j in range(self.steps)]

    def to_text(self) -> str:
        return f"{self.name}:{format_rational(self.minimum)}:{format_rational(self.maximum)}:{self.steps}"


@dataclass(frozen=True)
class GridSpec:
    axis1: Axis
    axis2: Axis
    fixed: Tuple[Tuple[str, Fraction], ...]
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        object.__setattr__(self, 'fixed', tuple(sorted((name, Fraction(value)) for name, value in self.fixed)))
        if self.axis1.name == self.axis2.name:
            raise InvalidGridError("scan axes must be different parameters")
        for name, _ in self.fixed:
            if name not in PARAMETER_NAMES:
                raise InvalidGridError(f"unknown fixed parameter '{name}'")
            if name in (self.axis1.name, self.axis2.name):
                raise InvalidGridError(f"'{name}' is both fixed and scanned")
        covered = {self.axis1.name, self.axis2.name} | {name for name, _ in self.fixed}
        for name in PARAMETER_NAMES:
            if name not in covered:
                raise MissingParameterError(name)
        # Corners catch m <= 0 or tau <= 0 anywhere on the grid (axes are monotone)
        for a in (self.axis1.minimum, self.axis1.maximum):
            for b in (self.axis2.minimum, self.axis2.maximum):
                self.binding(a, b)

    @classmethod
    def build(cls, axis1: str, axis2: str, fixed: Mapping[str, Any],
              tolerances: Optional[Tolerances] = None) -> 'GridSpec':
        """Build from axis strings and a name -> value mapping of fixed parameters."""
        values = {}
        for name, value in fixed.items():
            try:
                values[name] = parse_rational(value) if isinstance(value, str) else Fraction(value)
            except (ValueError, TypeError) as e:
                raise InvalidGridError(f"bad value for '{name}': {value!r}") from e
        return cls(Axis.parse(axis1), Axis.parse(axis2), tuple(values.items()), tolerances or Tolerances())

    @property
    def shape(self) -> Tuple[int, int]:
        return self.axis1.steps, self.axis2.steps

    def binding(self, value1: Fraction, value2: Fraction) -> SelfForceParams:
        binding = dict(self.fixed)
        binding[self.axis1.name] = value1
        binding[self.axis2.name] = value2
        try:
            return SelfForceParams.from_binding(binding)
        except PtscanError as e:
            raise InvalidGridError(f"grid point {self.axis1.name}={format_rational(value1)}, "
                                   f"{self.axis2.name}={format_rational(value2)} is invalid: {e}") from e

    def cell_points(self) -> List[Tuple[Fraction, Fraction]]:
        """Row-major cell coordinates: index = j2*steps1 + j1."""
        values1 = self.axis1.values()
        return [(v1, v2) for v2 in self.axis2.values() for v1 in values1]


@dataclass(frozen=True)
class RegionCell:
    axis1: Fraction
    axis2: Fraction
    verdict: Verdict
    predicate: bool
    agreement: bool
    min_im_xi: float
    min_re_xi: float


def classify_cell(task: Tuple[SelfForceParams, Fraction, Fraction, Tolerances]) -> RegionCell:
    """Classify one grid cell; a module-level function so process pools can pickle it."""
    params, value1, value2, tolerances = task
    report = classify_params(params, tolerances=tolerances)
    classification = report.classification
    return RegionCell(
        axis1=value1,
        axis2=value2,
        verdict=classification.verdict,
        predicate=report.predicate,
        agreement=report.agreement,
        min_im_xi=classification.min_abs_im_xi,
        min_re_xi=classification.min_re_xi,
    )


@dataclass(frozen=True)
class RegionGrid:
    spec: GridSpec
    cells: Tuple[RegionCell, ...]

    def cell(self, j1: int, j2: int) -> RegionCell:
        return self.cells[j2 * self.spec.axis1.steps + j1]

    def counts(self) -> Dict[str, int]:
        counts = {verdict.value: 0 for verdict in Verdict}
        for cell in self.cells:
            counts[cell.verdict.value] += 1
        return counts

    @property
    def disagreements(self) -> int:
        return sum(1 for cell in self.cells if not cell.agreement)

    def summary_line(self) -> str:
        counts = self.counts()
        verdicts = ' '.join(f"{name}={count}" for name, count in counts.items())
        return f"cells={len(self.cells)} {verdicts} disagreements={self.disagreements}"

    def to_dataframe(self) -> pd.DataFrame:
        rows = [
            {
                'axis1': float(cell.axis1),
                'axis2': float(cell.axis2),
                'verdict': cell.verdict.value,
                'predicate': 'true' if cell.predicate else 'false',
                'agreement': 'true' if cell.agreement else 'false',
                'min_im_xi': float(cell.min_im_xi),
                'min_re_xi': float(cell.min_re_xi),
            }
            for cell in self.cells
        ]
        return pd.DataFrame(rows, columns=CSV_COLUMNS)

    def to_image_array(self) -> np.ndarray:
        """One byte per cell; image rows run from the largest axis2 value down."""
        steps1, steps2 = self.spec.shape
        pixels = np.zeros((steps2, steps1), dtype=np.uint8)
        for j2 in range(steps2):
            for j1 in range(steps1):
                pixels[steps2 - 1 - j2, j1] = PGM_SHADES[self.cell(j1, j2).verdict]
        return pixels


def run_scan(spec: GridSpec, workers: int = 1) -> RegionGrid:
    """
    Classify every cell of a grid.

    Args:
        spec: Grid specification
        workers: Number of worker processes (1 = in-process)

    Returns:
        RegionGrid with cells in row-major order
    """
    if workers < 1:
        raise InvalidGridError("workers must be at least 1")
    tasks = [(spec.binding(v1, v2), v1, v2, spec.tolerances) for v1, v2 in spec.cell_points()]
    logger.debug(f"Scanning {len(tasks)} cells with {workers} worker(s)")
    if workers == 1:
        cells = [classify_cell(task) for task in tasks]
    else:
        chunksize = max(1, len(tasks) // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map() yields in submission order, so assembly stays index-ordered
            cells = list(pool.map(classify_cell, tasks, chunksize=chunksize))
    return RegionGrid(spec=spec, cells=tuple(cells))


def write_csv(grid: RegionGrid, path: str) -> None:
    """
    Write the region table: UTF-8, LF line endings, 9 significant digits.

    Raises:
        ModelIOError: If the file cannot be written
    """
    try:
        grid.to_dataframe().to_csv(path, index=False, float_format='%.9g', lineterminator='\n', encoding='utf-8')
    except OSError as e:
        raise ModelIOError(f"cannot write CSV {path}: {e}") from e
    logger.debug(f"Wrote {len(grid.cells)} rows to {path}")


def write_pgm(grid: RegionGrid, path: str) -> None:
    """
    Write the region image as binary P5 PGM, width steps1, height steps2, maxval 255.

    Raises:
        ModelIOError: If the file cannot be written
    """
    try:
        Image.fromarray(grid.to_image_array()).save(path, format='PPM')
    except OSError as e:
        raise ModelIOError(f"cannot write PGM {path}: {e}") from e
    logger.debug(f"Wrote {grid.spec.shape[0]}x{grid.spec.shape[1]} image to {path}")
