#!/usr/bin/env python3
"""Module for configuring and providing the toolkit logger.

Library modules log through child loggers of ``cstar_isometry`` so that the
CLI can keep stdout for JSON output; all records go to stderr.
"""
import dotenv
import logging
import os

dotenv.load_dotenv()

LOGGER_NAME = "cstar_isometry"

log_level_str = os.getenv("LOG_LEVEL", "WARNING").upper()
log_level = getattr(logging, log_level_str, logging.WARNING)
logging.basicConfig(level=log_level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
logger = logging.getLogger(LOGGER_NAME)


def get_logger(name: str) -> logging.Logger:
    """Return a child of the toolkit logger for the given module name."""
    if name == LOGGER_NAME or name.startswith(LOGGER_NAME + "."):
        return logging.getLogger(name)
    return logger.getChild(name)
