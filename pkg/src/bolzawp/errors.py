"""Exception types raised by the library."""


class BolzaError(Exception):
    pass


class BudgetExceeded(BolzaError):
    pass


class NonConvergence(BolzaError):
    pass


class RankDeficient(BolzaError):
    pass


class DegenerateMetric(BolzaError):
    pass


class OutOfChart(BolzaError):
    pass


class DegeneratePlane(BolzaError):
    pass


class SolverDivergence(BolzaError):
    pass


class MaxIterationsExceeded(BolzaError):
    pass


class LineSearchFailure(BolzaError):
    pass


class ConfigInvalid(BolzaError):
    pass


class CacheCorrupt(BolzaError):
    pass
