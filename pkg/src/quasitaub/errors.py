"""Exception hierarchy shared by every quasitaub module."""


class QuasitaubError(Exception):
    """Base class; the CLI maps any subclass to exit status 1."""

    def to_dict(self):
        return {"error": type(self).__name__, "message": str(self)}


class OutOfGrid(QuasitaubError):
    """Point lies outside a sampled Fourier grid."""


class UnsupportedDim(QuasitaubError):
    """Catalog entry is not defined in the requested dimension."""


class SingularFourierPoint(QuasitaubError):
    """Fourier transform is a singular distribution at this point."""


class GridTooCoarse(QuasitaubError):
    """Sampling grid has too few points for the requested check."""


class NumericallyUnstable(QuasitaubError):
    """Richardson levels disagree beyond tolerance."""


class DimMismatch(QuasitaubError):
    """Operands live in different spatial dimensions."""


class GridAliasing(QuasitaubError):
    """Kernel has not decayed at the edge of the Fourier grid."""


class ExponentRangeExceeded(QuasitaubError):
    """No growth exponents up to 16 bound the data."""


class NonIntegrable(QuasitaubError):
    """Admissibility integrand does not decay at the radial endpoints."""


class Degenerate(QuasitaubError):
    """Some ray carries a vanishing admissibility constant."""


class TruncationDominated(QuasitaubError):
    """Box truncation error exceeds the allowed fraction."""


class ZeroAdmissibility(QuasitaubError):
    """Cross-admissibility constant is zero or not constant."""


class AllZeroSheet(QuasitaubError):
    """Transform vanishes at the reference direction."""


class NoStableSlope(QuasitaubError):
    """Per-decade slopes disagree."""


class NoFiniteK(QuasitaubError):
    """No Tauberian exponent up to 16 bounds the sheet."""


class IllConditioned(QuasitaubError):
    """Least-squares design matrix is ill conditioned."""


class InsufficientRange(QuasitaubError):
    """Scale grid spans too few decades."""


class DegenerateKernel(QuasitaubError):
    """Kernel failed the non-degenerateness check."""


class NotStabilized(QuasitaubError):
    """Solution does not stabilize along d-curves."""


class SlowDecay(QuasitaubError):
    """Series tail is not negligible at this point."""


class ConfigInvalid(QuasitaubError):
    """Invalid command-line configuration."""
