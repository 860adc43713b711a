"""
Exceptions raised by EOTSieve and their command line exit codes.

All errors derive from `EotError`. Argument errors additionally derive from
``ValueError`` and numerical failures from ``ArithmeticError`` so callers
that do not know this module can still catch them with the builtin classes.
"""

__all__ = ['EotError', 'InvalidArgument', 'InvalidConfig',
           'DegenerateMarginal', 'NumericalError', 'NumericalUnderflow',
           'NotConverged', 'NoisyNormalizer', 'PartitionBudgetExceeded',
           'AcceptanceBudgetExceeded', 'exit_code_for', 'EXIT_OK',
           'EXIT_INVALID', 'EXIT_NUMERICAL', 'EXIT_ACCEPTANCE']

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
EXIT_ACCEPTANCE = 4


class EotError(Exception):
    """Base class of all EOTSieve errors."""
    exit_code = EXIT_NUMERICAL

    def to_dict(self):
        return {'error': self.__class__.__name__,
                'message': str(self),
                'exit_code': self.exit_code}


class InvalidArgument(EotError, ValueError):
    """An argument is outside the domain of an operation."""
    exit_code = EXIT_INVALID


class InvalidConfig(InvalidArgument):
    """The experiment configuration document cannot be used."""


class DegenerateMarginal(InvalidArgument):
    """Both marginals are point masses at their support infima."""


class NumericalError(EotError, ArithmeticError):
    exit_code = EXIT_NUMERICAL


class NumericalUnderflow(NumericalError):
    """All Monte Carlo weights vanished at working precision."""


class NotConverged(NumericalError):
    """An iterative solver stopped before reaching its tolerance."""


class NoisyNormalizer(NumericalError):
    """The normalizer estimate is too noisy to be used."""


class PartitionBudgetExceeded(EotError, RuntimeError):
    """Partition refinement needs more cells than allowed."""
    exit_code = EXIT_NUMERICAL


class AcceptanceBudgetExceeded(EotError, RuntimeError):
    """
    Rejection sampling ran out of proposals. The observed acceptance rate is
    kept in `acceptance_rate`.
    """
    exit_code = EXIT_ACCEPTANCE

    def __init__(self, message, acceptance_rate=None):
        EotError.__init__(self, message)
        self.acceptance_rate = acceptance_rate

    def to_dict(self):
        res = EotError.to_dict(self)
        res['acceptance_rate'] = self.acceptance_rate
        return res


def exit_code_for(exc):
    """
    Return the command line exit code for exception `exc`. Foreign
    ``ValueError`` instances count as invalid arguments, anything else as a
    numerical failure.
    """
    if isinstance(exc, EotError):
        return exc.exit_code
    if isinstance(exc, ValueError):
        return EXIT_INVALID
    return EXIT_NUMERICAL
