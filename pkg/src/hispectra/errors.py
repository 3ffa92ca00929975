"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An argument violates a documented precondition."""


class ConvergenceError(RuntimeError):
    """An iterative kernel failed to converge within its sweep budget.

    Carries enough state to diagnose the failure: for the Hermitian solver
    the remaining off-diagonal norm, for the QR iteration the size of the
    unreduced block.
    """

    def __init__(self, message, *, off_norm=None, block_size=None):
        super().__init__(message)
        self.off_norm = off_norm
        self.block_size = block_size


class RankDeficientError(ValueError):
    """A least-squares matrix lost full column rank at working precision."""

    def __init__(self, message, *, column=None):
        super().__init__(message)
        self.column = column


class EmptySpectrumError(ValueError):
    """Rank reduction retained no eigenvalues (threshold too high or signal trivial)."""


class DegenerateSpectrumError(ValueError):
    """Spectral lines coincide closely enough that the requested quantity is undefined."""


class SignalFileError(ValueError):
    """A signal or model file failed to parse.

    ``line`` is the 1-based line number of the first offending line.
    """

    def __init__(self, message, *, line=None):
        super().__init__(message)
        self.line = line


class PipelineError(RuntimeError):
    """Wraps a failure inside the inversion pipeline, tagged with its stage."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
