"""Exception hierarchy shared by every hktlab module."""


class HKTLabError(Exception):
    pass


class UnsupportedOrderError(HKTLabError, ValueError):
    """Requested jet order exceeds the supported maximum."""


class SingularPointError(HKTLabError, ArithmeticError):
    """A field was evaluated where it is not defined (division by zero value)."""


class JetDomainError(HKTLabError, ValueError):
    """log/sqrt/fractional power of a value outside the real domain."""


class DegenerateMetricError(HKTLabError, ArithmeticError):
    pass


class NotLCHKError(HKTLabError):
    """dF_r = theta ^ F_r has no solution within tolerance."""


class NotHKTError(HKTLabError):
    """The torsion 3-form is undefined because d_1F_1 = d_2F_2 = d_3F_3 fails."""


class PreconditionError(HKTLabError):
    """A construction or check was given input violating its hypotheses."""


class UnknownCheckError(HKTLabError, KeyError):
    pass


class SpecSyntaxError(HKTLabError, ValueError):
    """Malformed geometry spec string."""
