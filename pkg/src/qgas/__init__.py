"""Spectral actions for free q-particle gases (q in [-1, 1]).

Certified spectral sums over discrete spectra (d-torus, S^3, relativistic),
continuum-limit coefficients with condensation, and the zeta-regularized
asymptotic expansions in the natural cutoff 1/beta.
"""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    NATURAL,
    SI,
    Continuum,
    Dispersion,
    DispersionKind,
    Geometry,
    Sphere3,
    ThermoState,
    Torus,
    UnitSystem,
    cutoff_from_beta,
    is_admissible,
    massive,
    massless,
    relativistic,
    validate_state,
)
from .errors import (  # noqa: F401
    DegenerateFit,
    DivergentInput,
    DomainError,
    PoleViolation,
    PrecisionExhausted,
    QGasError,
    TailBoundFailure,
)
from .qstat import SpectralLine, occupation  # noqa: F401
from .spectra import (  # noqa: F401
    DiscreteSpectrum,
    ExplicitSpectrum,
    ShellTable,
    SphereSpectrum,
    TorusSpectrum,
    explicit_spectrum,
    shell_counts,
    sphere3_spectrum,
    torus_spectrum,
    truncation_radius,
)
from .spectral_sum import (  # noqa: F401
    SumResult,
    beta_sweep,
    geometric_grid,
    relativistic_sum,
    spectral_action,
)
