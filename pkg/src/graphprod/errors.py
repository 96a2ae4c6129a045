class NotEquivalentError(ValueError):
    """Two words (or tensor layouts) do not belong to the same shuffle class."""


class BudgetError(RuntimeError):
    """A computation would leave the range where the truncated model is exact,
    or would exceed a configured size cap."""


class IncompleteFusionError(ValueError):
    """A fusion product needs a vertex fusion pair that is not flagged complete."""


class ConfigError(ValueError):
    """An input file or command-line value could not be parsed or is inconsistent."""
