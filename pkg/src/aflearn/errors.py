"""Exception types shared across the toolkit."""


class AflearnError(Exception):
    """Base class for all domain errors raised by this package."""


class NormalizationError(AflearnError):
    """Distribution masses are negative or do not sum to one."""


class DegenerateGroupError(AflearnError):
    """A conditioning event required by the fairness measure has zero mass."""


class DuplicateAtomError(AflearnError):
    """Two atoms of a distribution share the same (x, a, y) triple."""


class InputMismatchError(AflearnError):
    """A hypothesis and a distribution disagree on the input set."""


class TooLargeError(AflearnError):
    """Exact computation refused because the instance exceeds the brute-force guard."""


class ParameterError(AflearnError):
    """A numeric parameter is outside its valid range."""


class SampleTooSmallError(AflearnError):
    """The sample size is below the floor required by a guarantee."""


class AdversaryViolationError(AflearnError):
    """An adversary broke the corruption protocol contract."""


class ConfigError(AflearnError):
    """An experiment configuration is malformed or inconsistent."""


class NoDominantHypothesisError(AflearnError):
    """A component-wise experiment was given a space without a hypothesis that is optimal in both metrics."""


class NotRealizableError(AflearnError):
    """A fast-rate experiment was given a problem with no zero-risk hypothesis."""
