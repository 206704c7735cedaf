"""Dipole-moment noise spectra of hydrogen eigenstates in conventional and Bohmian quantum mechanics."""

__version__ = "0.1.0"

from .hydrogen import HydrogenState  # noqa: E402
from .numerics import DEFAULT_QUAD, DomainError, QuadratureError, QuadSpec  # noqa: E402
from .sqm_spectra import DIVERGENT, SpectralFunction, SpectrumMethod  # noqa: E402
from .qm_spectra import LineSpectrum  # noqa: E402

__all__ = [
    "__version__",
    "HydrogenState",
    "DEFAULT_QUAD",
    "DomainError",
    "QuadratureError",
    "QuadSpec",
    "DIVERGENT",
    "SpectralFunction",
    "SpectrumMethod",
    "LineSpectrum",
]
