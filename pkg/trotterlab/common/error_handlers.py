"""
Module: error_handlers

Maps the exceptions a command can raise onto exit statuses. Handlers are
registered per exception class, the way a web app registers them per
HTTP error.
"""
import json
import sys
from typing import Callable, Dict, Type

from trotterlab import app
from trotterlab.models import BudgetExceededError, DataValidationError, NumericalError
from . import status

HANDLERS: Dict[Type[BaseException], Callable[[BaseException], int]] = {}


def errorhandler(exception_class: Type[BaseException]):
    """Registers a handler for an exception class"""
    def register(function):
        HANDLERS[exception_class] = function
        return function
    return register


def _report(code: int, title: str, message: str) -> int:
    sys.stderr.write(json.dumps({"status": code, "error": title, "message": message}) + "\n")
    return code


def handle(error: BaseException) -> int:
    """Runs the handler of the closest registered class and returns its exit status"""
    for exception_class in type(error).__mro__:
        if exception_class in HANDLERS:
            return HANDLERS[exception_class](error)
    return internal_error(error)


######################################################################
# Error Handlers
######################################################################
@errorhandler(DataValidationError)
def schema_violation(error):
    """Handles invalid parameters and configs with EXIT_2_SCHEMA_VIOLATION"""
    message = str(error)
    app.logger.warning(message)
    return _report(status.EXIT_2_SCHEMA_VIOLATION, "Schema Violation", message)


@errorhandler(BudgetExceededError)
def budget_exceeded(error):
    """Handles instances beyond the configured guards with EXIT_3_BUDGET_EXCEEDED"""
    message = str(error)
    app.logger.warning(message)
    return _report(status.EXIT_3_BUDGET_EXCEEDED, "Budget Exceeded", message)


@errorhandler(NumericalError)
def numerical_failure(error):
    """Handles failed numerics and self-checks with EXIT_4_NUMERICAL_FAILURE"""
    message = str(error)
    app.logger.error(message)
    return _report(status.EXIT_4_NUMERICAL_FAILURE, "Numerical Failure", message)


@errorhandler(OSError)
def io_failure(error):
    """Handles unreadable configs and unwritable outputs with EXIT_2_SCHEMA_VIOLATION"""
    message = str(error)
    app.logger.warning(message)
    return _report(status.EXIT_2_SCHEMA_VIOLATION, "Input/Output Error", message)


def internal_error(error):
    """Handles anything unexpected with EXIT_1_INTERNAL_ERROR"""
    message = str(error)
    app.logger.error(message)
    return _report(status.EXIT_1_INTERNAL_ERROR, "Internal Error", message)
