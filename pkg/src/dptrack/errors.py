"""Exception hierarchy. The CLI maps each class to an exit status."""


class DPTrackError(Exception):
    exit_code = 1


class ContractError(DPTrackError, ValueError):
    """A precondition of an operation was violated by the caller."""

    exit_code = 1


class ParseError(DPTrackError, ValueError):
    """An input file or record could not be parsed."""

    exit_code = 2


class CapacityError(DPTrackError):
    """A problem is too large for the requested operation."""

    exit_code = 3


class EmbeddingInfeasible(CapacityError):
    def __init__(self, n_logical: int, capacity: int):
        super().__init__(
            f"cannot embed {n_logical} logical spins; "
            f"graph supports at most {capacity}"
        )
        self.n_logical = n_logical
        self.capacity = capacity
