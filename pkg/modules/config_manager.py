#!/usr/bin/env python3
"""
Configuration Manager Module

Handles loading settings, model files and scan presets for ptscan.

Settings precedence (highest first): command-line flags, process environment,
.env.local, .env, config/defaults.json, built-in defaults.
"""

import os
import json
import glob
from dataclasses import dataclass
from typing import List, Dict, Any, Optional

from dotenv import load_dotenv

from .errors import InvalidToleranceError, ModelIOError, UsageError
from .logger import get_logger
from .spectral_engine import DEFAULT_TOL_BOUNDARY, DEFAULT_TOL_IM, MULTIPLICITY_TOL, Tolerances

logger = get_logger('config_manager')

DEFAULTS_FILE = 'defaults.json'
PRESET_DIR = 'scans'
MODEL_EXTENSION = '.model'
ENV_PREFIX = 'PTSCAN_'


@dataclass(frozen=True)
class Settings:
    """Resolved runtime settings."""
    tol_im: float = DEFAULT_TOL_IM
    tol_boundary: float = DEFAULT_TOL_BOUNDARY
    multiplicity_tol: float = MULTIPLICITY_TOL
    workers: int = 1

    def tolerances(self, tol_im: Optional[float] = None, tol_boundary: Optional[float] = None) -> Tolerances:
        """Tolerances with optional per-call overrides."""
        return Tolerances(
            tol_im=self.tol_im if tol_im is None else tol_im,
            tol_boundary=self.tol_boundary if tol_boundary is None else tol_boundary,
            multiplicity_tol=self.multiplicity_tol,
        )


class ConfigManager:
    """
    Manages settings, model files and scan presets.
    """

    def __init__(self, config_dir: Optional[str] = None, load_env: bool = True):
        """
        Initialize the configuration manager.

        Args:
            config_dir: Directory for configuration files (default: <app_dir>/config)
            load_env: Whether to read .env.local and .env from the working directory
        """
        if config_dir is None:
            # Get the application directory (directory where the module resides)
            app_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
            self.config_dir = os.path.join(app_dir, "config")
        else:
            self.config_dir = config_dir

        if load_env:
            self.load_environment()

    @staticmethod
    def load_environment() -> None:
        """
        Load .env.local, then .env. Variables already set are never overwritten,
        so the process environment wins over .env.local, which wins over .env.
        """
        for env_file in ('.env.local', '.env'):
            if os.path.exists(env_file):
                load_dotenv(env_file, override=False)
                logger.debug(f"Loaded environment from {env_file}")

    def _read_json(self, filepath: str) -> Dict[str, Any]:
        try:
            with open(filepath, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except OSError as e:
            raise ModelIOError(f"cannot read {filepath}: {e}") from e
        except json.JSONDecodeError as e:
            raise UsageError(f"{filepath} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise UsageError(f"{filepath} must contain a JSON object")
        return data

    def load_settings(self) -> Settings:
        """
        Resolve settings from defaults.json and PTSCAN_* environment variables.

        Returns:
            Settings

        Raises:
            InvalidToleranceError: If a tolerance is not a positive number
            UsageError: If PTSCAN_WORKERS is not a positive integer
        """
        values: Dict[str, Any] = {}
        defaults_path = os.path.join(self.config_dir, DEFAULTS_FILE)
        if os.path.exists(defaults_path):
            values.update(self._read_json(defaults_path))
        else:
            logger.debug(f"No {DEFAULTS_FILE} in {self.config_dir}; using built-in defaults")

        for key in ('tol_im', 'tol_boundary', 'multiplicity_tol', 'workers'):
            raw = os.environ.get(ENV_PREFIX + key.upper())
            if raw is not None and raw.strip():
                values[key] = raw.strip()

        settings = {}
        for key in ('tol_im', 'tol_boundary', 'multiplicity_tol'):
            if key in values:
                try:
                    settings[key] = float(values[key])
                except (TypeError, ValueError) as e:
                    raise InvalidToleranceError(f"{key} must be a positive number, got {values[key]!r}") from e
        if 'workers' in values:
            try:
                settings['workers'] = int(values['workers'])
            except (TypeError, ValueError) as e:
                raise UsageError(f"workers must be a positive integer, got {values['workers']!r}") from e
            if settings['workers'] < 1:
                raise UsageError(f"workers must be a positive integer, got {settings['workers']}")

        resolved = Settings(**settings)
        resolved.tolerances()
        return resolved

    def resolve_path(self, filename: str, extension: str, subdir: Optional[str] = None) -> str:
        """
        Resolve a file given as-is or by bare name inside the config directory.

        Raises:
            ModelIOError: If neither location exists
        """
        # First, try with the path as provided
        if os.path.exists(filename):
            return filename

        # Bare names are looked up in the config directory, extension optional
        if not os.path.dirname(filename):
            base = os.path.join(self.config_dir, subdir) if subdir else self.config_dir
            for candidate in (filename, filename + extension):
                filepath = os.path.join(base, candidate)
                if os.path.exists(filepath):
                    return filepath

        raise ModelIOError(f"file not found: {filename} (config directory is {self.config_dir})")

    def resolve_model(self, name: str) -> str:
        """Path of a model file, e.g. 'oscillator' -> config/oscillator.model."""
        return self.resolve_path(name, MODEL_EXTENSION)

    def list_models(self) -> List[str]:
        pattern = os.path.join(self.config_dir, "*" + MODEL_EXTENSION)
        return sorted(os.path.basename(f)[:-len(MODEL_EXTENSION)] for f in glob.glob(pattern))

    def list_presets(self) -> List[str]:
        """
        List all available scan presets.

        Returns:
            Preset names (file names without .json)
        """
        pattern = os.path.join(self.config_dir, PRESET_DIR, "*.json")
        return sorted(os.path.basename(f)[:-len('.json')] for f in glob.glob(pattern))

    def load_preset(self, name: str) -> Dict[str, Any]:
        """
        Load a scan preset: {"axis1": "A:-4:4:41", "axis2": ..., "fixed": {"m": "1", ...}}.

        Raises:
            ModelIOError: If the preset cannot be found or read
            UsageError: If the preset is malformed
        """
        filepath = self.resolve_path(name, '.json', subdir=PRESET_DIR)
        preset = self._read_json(filepath)
        for key in ('axis1', 'axis2'):
            if not isinstance(preset.get(key), str):
                raise UsageError(f"preset {name} needs a string '{key}'")
        if not isinstance(preset.get('fixed', {}), dict):
            raise UsageError(f"preset {name}: 'fixed' must be an object")
        logger.debug(f"Loaded preset {name} from {filepath}")
        return preset
