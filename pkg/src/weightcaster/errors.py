"""Exception hierarchy. The CLI maps each family to an exit code."""


class WeightCasterError(Exception):
    pass


class ConfigError(WeightCasterError, ValueError):
    """Invalid configuration; ``problems`` lists every failed check."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DataError(WeightCasterError):
    pass


class DimensionError(WeightCasterError, ValueError):
    pass


class NumericalError(WeightCasterError, ArithmeticError):
    pass


class DecompositionError(NumericalError):
    def __init__(self, pivot, message=None):
        self.pivot = pivot
        super().__init__(message or f"matrix is not positive definite (failing pivot {pivot})")


class UnsupportedSizeError(NumericalError):
    pass


class DegenerateGeometryError(NumericalError):
    pass


class PartitionRangeError(WeightCasterError, ValueError):
    pass


class DivergenceError(NumericalError):
    """Training produced a non-finite loss; ``checkpoint`` is the last finite one."""

    def __init__(self, message, checkpoint=None):
        self.checkpoint = checkpoint
        super().__init__(message)
