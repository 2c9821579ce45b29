"""Error classes shared by every msent module.

Each class carries the process exit code the CLI reports for it:
1 for usage problems, 2 for bad input, 3 for numeric failures.
"""

from typing import Optional


class MsentError(Exception):
    """Base class for msent errors"""

    exit_code = 3


class UsageError(MsentError):
    """Invalid command line usage or inconsistent request"""

    exit_code = 1


class ParameterError(MsentError):
    """Parameter outside the range an operation accepts"""

    exit_code = 1


class GraphParseError(MsentError):
    """Malformed edge-list input"""

    exit_code = 2

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GraphDomainError(MsentError):
    """Value outside the graph domain (non-positive weight, u = v, bad id)"""

    exit_code = 2


class CorpusInputError(MsentError):
    """Missing or invalid corpus manifest or input file"""

    exit_code = 2


class DecodeError(MsentError):
    """Truncated or inconsistent encoded stream"""

    exit_code = 2


class GenerationError(MsentError):
    """Random generator could not produce a valid graph"""

    exit_code = 3


class ContractError(MsentError):
    """Contraction set does not induce a connected subgraph"""

    exit_code = 3


class NumericError(MsentError):
    """Numerical routine failed to converge"""

    exit_code = 3


class EntropyUndefinedError(MsentError):
    """Rank entropy requested for a graph where it is not defined"""

    exit_code = 3


class NormalizationError(MsentError):
    """Baseline mean is zero, so the ratio is undefined"""

    exit_code = 3


class SingularDesignError(MsentError):
    """Regression design matrix is rank deficient"""

    exit_code = 3

    def __init__(self, column: str):
        self.column = column
        super().__init__(f"design matrix is rank deficient at column '{column}'")


class BudgetExceededError(MsentError):
    """Wall-clock budget for a computation ran out"""

    exit_code = 3
