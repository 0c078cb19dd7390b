"""
Package: trotterlab
Package for the Trotter-error laboratory of interacting electrons
This module creates and configures the Flask app that carries the
configuration, the logger and the command line interface
"""
import sys
from flask import Flask
from trotterlab import config
from trotterlab.common import log_handlers, status

__version__ = "1.0"

# Create Flask application
app = Flask(__name__)
app.config.from_object(config)

# Dependencies require we import the commands AFTER the Flask app is created
# pylint: disable=wrong-import-position, wrong-import-order
from trotterlab import models  # noqa: E402, E261
# pylint: disable=wrong-import-position
from trotterlab.common import error_handlers, cli_commands  # noqa: F401, E402

# Set up logging for the command line
log_handlers.init_logging(app, "trotterlab.cli")

app.logger.info(70 * "*")
app.logger.info("  T R O T T E R   L A B   R E A D Y  ".center(70, "*"))
app.logger.info(70 * "*")

try:
    models.check_settings(app.config)
except models.DataValidationError as error:
    app.logger.critical("%s: Cannot continue", error)
    sys.exit(status.EXIT_2_SCHEMA_VIOLATION)

app.logger.info("Laboratory initialized!")
