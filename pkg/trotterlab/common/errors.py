"""
Module: errors

Exception classes shared by the laboratory. Each one maps onto a
distinct exit status in error_handlers.
"""


class DataValidationError(Exception):
    """Used for invalid parameters, shapes, sectors or config documents"""


class BudgetExceededError(Exception):
    """Used when an instance is too large for the configured guards"""


class NumericalError(Exception):
    """Used when a numerical routine fails or a checked identity breaks"""
