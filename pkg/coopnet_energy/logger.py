"""Logging helpers."""

import logging
from typing import Optional

ROOT_LOGGER = "coopnet_energy"


def get_logger(module: Optional[str] = None) -> logging.Logger:
    """
    Get a logger under the coopnet_energy namespace.

    Args:
        module: Dotted module name (usually __name__)

    Returns:
        logging.Logger
    """
    if not module or module == ROOT_LOGGER:
        return logging.getLogger(ROOT_LOGGER)
    if not module.startswith(ROOT_LOGGER):
        module = f"{ROOT_LOGGER}.{module}"
    return logging.getLogger(module)


def log_error(message: str, title: str, module: Optional[str] = None) -> None:
    """
    Log an error with a short title, e.g. log_error("...", "Sweep Point Error").

    Args:
        message: Error details
        title: Short category title
        module: Logger name (defaults to the package logger)
    """
    get_logger(module).error("%s: %s", title, message)


def configure(verbose: bool = False) -> None:
    """Attach a stderr handler to the package logger (CLI entry only)."""
    logger = get_logger()
    if logger.handlers:
        logger.setLevel(logging.DEBUG if verbose else logging.INFO)
        return

    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
