"""Thermodynamics and quantum phase transitions of an N-body two-level
model with an SU(2) pairing interaction.

The Hamiltonian is diagonal in the collective-spin basis, so every level
is affine in the coupling; the package exploits that to give exact
spectra, a stable canonical-ensemble engine, and three independent ways
of locating the ground-state level crossings.
"""

from .eigensolver import EigenResult, NonConvergenceError, jacobi_eigenvalues
from .model import (
    AffineLevel,
    CriticalPoint,
    ModelParams,
    Spectrum,
    analytic_spectrum,
    build_hamiltonian,
    critical_couplings,
    ground_slope,
    ground_state_energy,
)
from .spin_algebra import (
    Multiplet,
    OperatorMatrix,
    build_j2,
    build_jx,
    build_jy2,
    build_jz,
    build_ladder,
    commutator,
)
from .thermo import (
    N2ClosedForms,
    ThermalObservables,
    ceq_scaled_residual,
    log_partition,
    n2_closed_forms,
    observables,
    occupations,
    zero_t_c_star_lambda,
)
from .transitions import (
    CSV_HEADER,
    CeqSearchResult,
    IsoEnergyPoint,
    JumpPoint,
    PeakEstimate,
    SweepTable,
    TrackedPeak,
    TrackingResult,
    ceq_zero_t_coupling,
    detect_jumps,
    find_peaks,
    iso_energy_curve,
    phase_diagram,
    qpt_from_ceq,
    track_peaks_to_zero_t,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Multiplet",
    "OperatorMatrix",
    "build_jz",
    "build_ladder",
    "build_jx",
    "build_jy2",
    "build_j2",
    "commutator",
    "ModelParams",
    "AffineLevel",
    "Spectrum",
    "CriticalPoint",
    "build_hamiltonian",
    "analytic_spectrum",
    "critical_couplings",
    "ground_state_energy",
    "ground_slope",
    "EigenResult",
    "NonConvergenceError",
    "jacobi_eigenvalues",
    "ThermalObservables",
    "N2ClosedForms",
    "log_partition",
    "occupations",
    "observables",
    "zero_t_c_star_lambda",
    "n2_closed_forms",
    "ceq_scaled_residual",
    "PeakEstimate",
    "TrackedPeak",
    "TrackingResult",
    "JumpPoint",
    "CeqSearchResult",
    "IsoEnergyPoint",
    "SweepTable",
    "CSV_HEADER",
    "find_peaks",
    "track_peaks_to_zero_t",
    "detect_jumps",
    "qpt_from_ceq",
    "ceq_zero_t_coupling",
    "iso_energy_curve",
    "phase_diagram",
]
