"""Spontaneous emission of an emitter embedded in a critical medium.

Closed-form rates on both sides of a second-order transition, a quadrature
cross-check, temperature sweeps, and critical-exponent estimation.
"""

from .errors import (
    AllMasked,
    ConvergenceFailure,
    CriticalPoint,
    DegenerateJacobian,
    IllConditioned,
    InsufficientData,
    NoConvergence,
    PhaseError,
    PoleReached,
    PurcellError,
    TailTooFat,
)
from .estimator import (
    CandidateSet,
    Classification,
    FitResult,
    SymmetricFit,
    classify,
    fit_broken,
    fit_symmetric,
    linearize_broken,
    tc_scan,
)
from .physics import (
    BrokenPhaseLaw,
    EmitterSpec,
    PhaseScenario,
    PhysicalConstants,
    SymmetricPhaseLaw,
    correlation_ratio,
    gamma_ratio,
    gamma_ratio_higgs,
    gamma_ratio_symmetric,
    gamma_vacuum,
    mass_ratio,
    pole_location,
    vacuum_polarization,
    z_factor,
)
from .spectral import EtaLadder, QuadratureConfig, dos_curve, oracle_check, oracle_ratio
from .sweep import (
    NoiseSpec,
    RateCurve,
    TemperatureGrid,
    add_noise,
    export_curve,
    import_curve,
    linear_grid,
    read_curve,
    sweep_broken,
    sweep_full,
    write_curve,
)

__version__ = "0.1.0"
