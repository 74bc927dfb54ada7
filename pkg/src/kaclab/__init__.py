"""kaclab: a Fourier-space numerical laboratory for the non-cutoff Kac equation."""

from .errors import (
    AccuracyNotReached,
    ConfigError,
    DegenerateFit,
    DivergentMoment,
    DomainError,
    InsufficientSamples,
    KaclabError,
    KernelMismatch,
    OverflowGuard,
    ResolutionError,
    SingularPoint,
    StiffnessError,
    UnreliableEntropyWarning,
    UnsupportedRegime,
    WindowTooSmall,
)
from .kernel import KernelSpec, QuadratureRule, build_rule, eval_beta, integrate_singular, kernel_moment
from .spectral import (
    Gaussian,
    GridSpec,
    Indicator,
    PhysicalState,
    SpectralState,
    TwoBump,
    entropy,
    init_from_profile,
    norm,
    norm_gevrey,
    norm_hs,
    norm_l1k,
    norm_l2,
    to_physical,
    to_spectral,
)
from .collision import bobylev_rhs, coercivity_split, weak_pairing
from .evolve import Trajectory, moment_track, simulate, step
from .gevrey import (
    GevreyMultiplier,
    PolyMultiplier,
    apply_multiplier,
    apriori_tracker,
    gevrey_fit,
)
from .probes import (
    ProbeReport,
    probe_coercivity,
    probe_commutator,
    probe_interpolation,
    probe_upper_bound,
)
from .radial3d import (
    Kernel3D,
    RadialProfile3D,
    convert_kernel,
    lift_gevrey_bound,
    project_to_kac,
    rhs_consistency,
)

__version__ = "0.1.0"
