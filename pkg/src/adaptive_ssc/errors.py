"""Exception hierarchy shared by every module of the toolkit."""


class SSCError(Exception):
    """Base class for all toolkit errors."""


class ParseError(SSCError, ValueError):
    """A cell of an input file is not a valid number."""


class ShapeError(SSCError, ValueError):
    """Array or file shape does not match what the operation expects."""


class SizeError(SSCError, ValueError):
    """Too few points (or too few points per cluster) for the requested operation."""


class DegenerateInputError(SSCError, ValueError):
    """Input cannot be normalized, e.g. a zero column."""


class SpecError(SSCError, ValueError):
    """A configuration object violates its invariants."""


class RangeError(SSCError, ValueError):
    """A scalar parameter lies outside its allowed interval."""


class BudgetError(SSCError, ValueError):
    """Dictionary-size budget outside the admissible range."""


class ContractError(SSCError, ValueError):
    """Precondition of an operation does not hold."""


class UndefinedMetricError(SSCError, ValueError):
    """Metric is undefined for the given input (e.g. SEA of an all-zero C)."""


class NumericalError(SSCError, RuntimeError):
    """A numerical routine failed to converge."""


class TrialError(SSCError, RuntimeError):
    """Any failure inside one experiment trial, with the trial context attached."""

    def __init__(self, dataset: str, seed: int, trial: int, cause: Exception):
        self.dataset = dataset
        self.seed = seed
        self.trial = trial
        self.cause = cause
        super().__init__(f"Trial {trial} failed (dataset={dataset}, seed={seed}): {cause}")

    def __reduce__(self):
        return type(self), (self.dataset, self.seed, self.trial, self.cause)


__all__ = [
    "SSCError",
    "ParseError",
    "ShapeError",
    "SizeError",
    "DegenerateInputError",
    "SpecError",
    "RangeError",
    "BudgetError",
    "ContractError",
    "UndefinedMetricError",
    "NumericalError",
    "TrialError",
]
