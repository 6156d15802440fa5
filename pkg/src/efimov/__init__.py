"""Efimov trimer spectra from Yamaguchi separable potentials.

Two-body sector (form factor, amplitudes, effective-range maps), the
one-dimensional trimer integral equation in finite-range and short-range
form, a Nystrom bound-state solver, and universality analyses of the
resulting spectra.  Units are hbar = m = 1 throughout.
"""

from .errors import (
    EfimovError,
    ExtrapolationError,
    InfeasibleRangeError,
    InsufficientDataError,
    NoDimerError,
    NumericalFailureError,
    ParameterError,
    PoleError,
    StaleLevelError,
    ThresholdViolationError,
)
from .twobody import (
    DimerState,
    EREParams,
    PotentialParams,
    dimer_binding,
    form_factor,
    h_bound,
    k_cot_delta,
    k_cot_delta_from_ksq,
    map_ere_to_potential,
    map_potential_to_ere,
    off_shell_amplitude,
    potential_from_inv_a_r0,
)
from .kernels import (
    KernelSpec,
    TrialBinding,
    denominator,
    finite_range_kernel,
    limit_identity,
    reconstruct_wavefunction,
    short_range_kernel,
    subsystem_momentum,
)
from .solver import (
    KernelSystem,
    MomentumMesh,
    SpectatorFunction,
    TrimerSpectrum,
    assemble,
    build_mesh,
    find_levels,
    principal_eigenvalue,
    spectator,
)
from .universality import (
    UniversalityReport,
    beta_convergence,
    cutoff_study,
    efimov_s0,
    energy_ratio_target,
    ratio_study,
    scaling_ratios,
)

__version__ = "0.1.0"
