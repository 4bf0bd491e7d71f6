"""Exception taxonomy shared by all modules.

Every error that can reach the CLI maps onto one of the documented exit
codes; see cli.EXIT_CODES.
"""


class CoupledModelError(Exception):
    """Base class for all library errors."""


class ConfigError(CoupledModelError):
    """Malformed or inconsistent configuration."""


class InvalidPotential(ConfigError):
    pass


class DivergentCoupling(ConfigError):
    pass


class DomainPoleOverlap(ConfigError):
    pass


class UnsupportedDomain(ConfigError):
    pass


class CoincidingPoints(ConfigError):
    pass


class PartitionOutsideBox(ConfigError):
    pass


class CoincidingVariables(ConfigError):
    pass


class InsufficientDegreeBound(ConfigError):
    pass


class NumericalError(CoupledModelError):
    """Singular, ill-conditioned or non-finite numerical situations."""


class NonFiniteIntegrand(NumericalError):
    pass


class SingularMinor(NumericalError):
    def __init__(self, k, msg=None):
        self.k = k
        super().__init__(msg or f"leading minor of order {k + 1} vanishes")


class DegreeOutOfRange(ConfigError):
    pass


class RankOutOfRange(ConfigError):
    pass


class PoleOnContour(NumericalError):
    pass


class TruncationNotConverged(NumericalError):
    pass


class SingularCauchyMatrix(NumericalError):
    pass


class GridTooLarge(ConfigError):
    pass


class NonFiniteObservable(NumericalError):
    pass


class DegenerateProposal(NumericalError):
    pass


class DivergentChain(NumericalError):
    pass


class UnsupportedForEnsemble(ConfigError):
    pass


class CacheError(CoupledModelError):
    """I/O or integrity failure of a cache artifact."""


class IllConditionedWarning(UserWarning):
    """Pivot decay past the configured threshold during factorization."""
