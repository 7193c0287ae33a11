"""Exception types. Every computation failure derives from ``CertError`` so the
CLI can map it to exit status 1."""


class CertError(Exception):
    """Base class for named computation failures."""


class QuadratureError(CertError):
    def __init__(self, message, best_estimate=float("nan"), location=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.location = location


class RootBracketError(CertError):
    def __init__(self, message, lo=None, hi=None, f_lo=None, f_hi=None):
        super().__init__(message)
        self.lo, self.hi, self.f_lo, self.f_hi = lo, hi, f_lo, f_hi


class DistributionError(CertError):
    pass


class AtomCapExceeded(DistributionError):
    """Exact convolution would exceed the atom cap; use Monte Carlo instead."""


class SpecError(CertError):
    """Array specification violates the STA conditions or parameter range."""


class WeightError(CertError):
    """Weight function is not a member of the admissible class."""


class ConsistencyError(CertError):
    """Two independent evaluation routes disagree beyond tolerance."""
