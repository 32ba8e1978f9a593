"""Exception types shared across the package."""


class SamplingError(RuntimeError):
    """A sampler could not produce a draw under its stated contract."""


class BudgetExceededError(SamplingError):
    """A rejection loop ran out of trials.

    Carries the trial/acceptance counts so callers can report the observed
    acceptance rate in diagnostics.
    """

    def __init__(self, message, trials=None, accepted=None):
        super().__init__(message)
        self.trials = trials
        self.accepted = accepted


class NonNormalizableError(SamplingError):
    """The requested density has infinite mass on its support."""


class UnboundedError(SamplingError):
    """The objective is unbounded over the feasible set."""


class InfeasibleError(Exception):
    """A constraint set is empty (or a point violates it beyond tolerance)."""
