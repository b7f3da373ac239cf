"""Numerical laboratory for radial singular solutions of
-laplace(u) = u^alpha |log u|^beta near an isolated singularity.

The package evaluates the model's closed-form quantities, integrates the
radial equation in the physical and log-radius (Emden-Fowler) frames,
classifies trajectories as singular-type or removable-type, locates the
separatrix between the two, and verifies the asymptotic identities along
computed trajectories.  A FastAPI service (``logemden.service``) exposes
the same operations over HTTP and the CLI (``logemden.cli``) is a thin
client of that service.
"""

from .errors import (
    BracketInvalid,
    DomainError,
    InsufficientSamples,
    LogEmdenError,
    NonpositiveSamples,
    NonpositiveTime,
    NoMonotoneRoot,
    OutOfRange,
    RegimeExit,
    SampleBudgetExceeded,
    StepUnderflow,
    TrajectoryTooShort,
    ZetaGuard,
)
from .params import (
    Exponents,
    LimitCoefficients,
    coeff_a,
    coeff_b,
    constant_A,
    eta,
    invert_growth,
    lambert_w,
    limit_coefficients,
    phi,
    upper_envelope,
    validate_exponents,
)
from .frames import (
    PsiState,
    RadialState,
    exact_profile,
    exact_profile_gradient,
    from_psi_state,
    to_psi_state,
    zeta,
)
from .ode import (
    EventKind,
    Frame,
    IntegratorConfig,
    IntegratorStats,
    Trajectory,
    detect_event,
    integrate,
    rhs_psi,
    rhs_radial_u,
)
from .classify import Classification, Thresholds, classify, find_separatrix, fit_decay_rate
from .analysis import (
    SweepConfig,
    VerificationReport,
    bound_monitors,
    derivative_limits,
    flux_identity_check,
    psi_residual,
    run_sweep,
)

__version__ = "0.1.0"
