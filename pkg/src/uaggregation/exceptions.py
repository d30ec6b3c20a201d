"""Exception hierarchy for the aggregation pipeline."""


class UAggregationError(Exception):
    """Base class for every error raised by this package."""

    #: module the error originated from, surfaced by the CLI
    module = "uaggregation"


class InputError(UAggregationError, ValueError):
    """Malformed or inconsistent user input (bad CSV, mismatched ids...)."""

    module = "io"


class ConfigError(UAggregationError, ValueError):
    module = "config"


class ZeroNormRowError(UAggregationError, ValueError):
    """A model row has zero norm after optional centering."""

    module = "stabilize"

    def __init__(self, model_ids):
        self.model_ids = list(model_ids)
        super().__init__(
            "zero-norm row for model(s) %s (constant-prediction model)"
            % ", ".join(map(str, self.model_ids))
        )


class DegenerateSpectrumError(UAggregationError, ArithmeticError):
    module = "stabilize"


class DysonNormalizerError(UAggregationError, ArithmeticError):
    module = "stabilize"


class AmpDivergenceError(UAggregationError, ArithmeticError):
    module = "amp"

    def __init__(self, iteration):
        self.iteration = iteration
        super().__init__("AMP divergence: non-finite values at iteration %d" % iteration)
