"""Exception taxonomy and the shared enumeration budget.

The CLI maps these onto its exit codes: invalid parameters / bad files
exit 2, exceeded enumeration budgets exit 3.
"""

from __future__ import annotations

import os

DEFAULT_ENUMERATION_BUDGET = 10_000_000
BUDGET_ENV_VAR = "EXPANDER_CS_BUDGET"


class ExpanderCSError(Exception):
    """Base class for every error raised by this package."""


class InvalidParametersError(ExpanderCSError):
    """Arguments violate a documented precondition."""


class InadmissibleModelError(InvalidParametersError):
    """Almost-sparse model fails its admissibility condition."""


class DimensionMismatchError(ExpanderCSError):
    """Signal / sketch / graph dimensions do not agree."""


class GenerationError(ExpanderCSError):
    """Randomized graph construction failed to converge."""


class BudgetExceededError(ExpanderCSError):
    """A combinatorial enumeration would exceed the configured cap."""

    def __init__(self, required: int, cap: int, what: str = "subsets"):
        self.required = required
        self.cap = cap
        super().__init__(
            f"enumeration needs {required} {what} but the budget cap is {cap}; "
            f"raise {BUDGET_ENV_VAR} or use sampled mode"
        )


class FileFormatError(ExpanderCSError):
    """Problem with an on-disk artifact; carries a 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ParseError(FileFormatError):
    """File is structurally malformed (token counts, bad literals)."""


class ValidationError(FileFormatError):
    """File parsed but violates an invariant (range, ordering, degree)."""


class AmbiguousSolutionError(ExpanderCSError):
    """Exhaustive decoding found two distinct sparse preimages.

    Signals that the graph does not expand well enough for unique
    recovery at the requested sparsity.
    """

    def __init__(self, first, second):
        self.first = first
        self.second = second
        super().__init__("multiple distinct sparse solutions fit the sketch")


def enumeration_budget(override: int | None = None) -> int:
    """Resolve the subset-enumeration cap: explicit override, else the
    EXPANDER_CS_BUDGET environment variable, else the default."""
    if override is not None:
        return int(override)
    env = os.environ.get(BUDGET_ENV_VAR)
    if env:
        return int(env)
    return DEFAULT_ENUMERATION_BUDGET
