"""
Logger setup shared by the ptscan modules.
"""

import logging

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def get_logger(name: str, debug_mode: bool = False) -> logging.Logger:
    """
    Get a named component logger with a single stderr handler.

    Args:
        name: Logger name (one per component, e.g. 'spectral_engine')
        debug_mode: Whether to log at DEBUG level

    Returns:
        Configured logger
    """
    logger = logging.getLogger(name)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
        logger.setLevel(logging.WARNING)
    if debug_mode:
        logger.setLevel(logging.DEBUG)
    return logger


def set_debug_mode(debug_mode: bool) -> None:
    """Switch every ptscan component logger to DEBUG (or back to WARNING)."""
    level = logging.DEBUG if debug_mode else logging.WARNING
    for name in ('operator_algebra', 'model_parser', 'spectral_engine',
                 'selfforce_model', 'region_scanner', 'config_manager'):
        get_logger(name).setLevel(level)
    get_logger('cli').setLevel(logging.DEBUG if debug_mode else logging.INFO)
