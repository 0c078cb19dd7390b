"""
Log Handlers

This module contains utility functions to set up logging
consistently for command-line runs
"""
import logging
import sys

LOG_FORMAT = "[%(asctime)s] [%(levelname)s] [%(module)s] %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S %z"


def init_logging(app, logger_name: str):
    """
    Send the app log and the named command logger to stderr

    Artifacts are written to stdout, so no handler may point there.
    Warnings raised during a run (numpy overflow and the like) are
    routed through the same handler.
    """
    handler = logging.StreamHandler(sys.stderr)
    # Make all log formats consistent
    handler.setFormatter(logging.Formatter(app.config.get("LOG_FORMAT", LOG_FORMAT), DATE_FORMAT))
    level = app.config.get("LOG_LEVEL", "INFO")
    logging.captureWarnings(True)
    for logger in (app.logger, logging.getLogger(logger_name), logging.getLogger("py.warnings")):
        logger.handlers = [handler]
        logger.propagate = False
        logger.setLevel(level)
    app.logger.info("Logging to stderr at level %s", level)
