"""Exception hierarchy shared by every module of the package."""


class PurcellError(Exception):
    """Base class for all errors raised by :mod:`critpurcell`."""


class PhaseError(PurcellError, ValueError):
    """Reduced temperature lies in the wrong phase or below the divergence floor."""


class CriticalPoint(PurcellError, ValueError):
    """Raised when a rate is requested exactly at the critical point ``t == 0``."""


class PoleReached(PurcellError):
    """The one-loop vacuum polarization reached the Landau pole.

    Attributes
    ----------
    pi_value : float
        The offending value of the vacuum polarization.
    """

    def __init__(self, pi_value, guard):
        self.pi_value = float(pi_value)
        self.guard = float(guard)
        super().__init__(
            f"vacuum polarization {self.pi_value!r} is at or beyond the pole "
            f"guard 1 - {self.guard:g}"
        )


# spectral oracle
class ConvergenceFailure(PurcellError):
    """Adaptive quadrature exhausted its subdivision budget."""


class TailTooFat(PurcellError):
    """The k-space cutoff sits too close to the resonance to be extrapolated."""


class IllConditioned(PurcellError):
    """Broadening ladder cannot support the requested extrapolation."""


# exponent estimator
class InsufficientData(PurcellError, ValueError):
    """Fewer usable samples than the fit needs."""


class AllMasked(InsufficientData):
    """Every sample was excluded by the mask (gap plateau or ratio ~ 1)."""


class DegenerateJacobian(PurcellError):
    """The model is locally constant in at least one parameter direction."""


class NoConvergence(PurcellError):
    """Iteration budget exhausted before the convergence tests passed."""
