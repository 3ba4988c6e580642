"""Simulate, estimate, and diagnose heterogeneous coefficients models with control variables"""

__author__ = """hetcoef developers"""
__version__ = "v0.3.0"
__description__ = "Simulate, estimate, and diagnose heterogeneous coefficients models with control variables"

__package_name__ = "hetcoef"

from hetcoef.system.logging.configure_logging import configure_logging, LogLevel

configure_logging(LogLevel.INFO)
import logging

logger = logging.getLogger(__name__)
logger.debug(f"Initializing {__package_name__} package, version: {__version__}, from file: {__file__}")
