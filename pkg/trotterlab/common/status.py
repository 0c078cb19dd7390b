"""
Descriptive exit status codes, for code readability.
The values follow the BSD convention of small positive integers; any
status other than 0 tells a batch driver to stop the pipeline.
"""

# Success
EXIT_0_OK = 0

# Failure
EXIT_1_INTERNAL_ERROR = 1
EXIT_2_SCHEMA_VIOLATION = 2
EXIT_3_BUDGET_EXCEEDED = 3
EXIT_4_NUMERICAL_FAILURE = 4
