"""Exception hierarchy shared by every ssopt module."""


class SsoptError(ValueError):
    """Base class for input and domain errors raised by ssopt."""


# pairwise-comparison algebra

class NonSquareError(SsoptError):
    pass


class NonPositiveEntryError(SsoptError):
    pass


class BrokenReciprocityError(SsoptError):
    pass


class BadDiagonalError(SsoptError):
    pass


class NoConvergenceError(SsoptError):
    pass


class NumericOverflowError(SsoptError):
    pass


class ZeroWeightError(SsoptError):
    pass


class DimensionMismatchError(SsoptError):
    pass


class SaatyScaleWarning(UserWarning):
    """An entry lies off the 1..9 judgment scale and its reciprocals."""


# procurement model

class InsufficientCapacityError(SsoptError):
    def __init__(self, material, demand, capacity):
        self.material = material
        self.demand = demand
        self.capacity = capacity
        self.shortfall = demand - capacity
        super().__init__(
            f"material {material!r}: demand {demand} exceeds combined capacity "
            f"{capacity} of the selected suppliers (shortfall {self.shortfall})"
        )


class UnknownModeError(SsoptError):
    pass


# annealing

class DegenerateProblemError(SsoptError):
    pass


class NonPositiveTemperatureError(SsoptError):
    pass


class InfeasibleInitialError(SsoptError):
    pass


class TooLargeError(SsoptError):
    pass


# design of experiments

class NonPositiveResponseError(SsoptError):
    pass
