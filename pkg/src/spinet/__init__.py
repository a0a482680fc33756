"""Spin energy-transport simulation toolkit for ferromagnetic multilayers.

Modules
-------
pauli            2x2 Pauli-basis algebra (products, exponentials, spectral
                 functions, polarization congruence).
closures         Spinorial-Maxwellian moment closures for the three model
                 classes, with quadrature cross-checks.
device           Multilayer device profiles, presets, and grid sampling.
fvm              1D finite-volume scheme, semi-implicit stepping, steady
                 states, entropy trajectories.
entropy          Entropy functionals H1/H2/H3, discrete production,
                 monotonicity verdicts.
model2_elliptic  Damped fixed-point solver for the time-discrete second
                 model with a-posteriori certificates.
cli              `spinet` command-line interface and CSV emission.
"""

from .closures import (
    LagrangeParams,
    MomentSet,
    maxwellian_pauli,
    model1_closure,
    model1_moments,
    model2_Z,
    model2_coeffs,
    model2_lagrange,
    model2_moments,
    model3_closure,
    model3_moments,
    model3_s_rhs,
    moments_by_quadrature,
)
from .device import PRESETS, DeviceProfile, Region, sample_on_grid, scaled_spin_flip_time
from .entropy import (
    EntropyReport,
    entropy_H1,
    entropy_H2,
    entropy_H3,
    entropy_production_1,
    monotonicity_verdict,
)
from .fvm import (
    ConvergenceReport,
    Grid1D,
    Scheme,
    SimState,
    StepFailure,
    discrete_flux,
    entropy_trajectory_run,
    initial_state,
    perturbed_state,
    solve_poisson,
    steady_state,
    step,
)
from .model2_elliptic import (
    CertificateViolation,
    Model2Certificate,
    Model2Vars,
    lambda_mu,
    solve_time_step,
    transform_forward,
    transform_inverse,
    truncation,
)
from .pauli import PauliVec, pauli_exp, pauli_fn, pauli_mul, polarization_congruence, sinhc

__version__ = "0.1.0"
