"""Random walks conditioned to stay in convex cones.

Exact survival-probability engines, conditioned-path Monte Carlo samplers,
the wedge meander endpoint law, tail-index diagnostics, and goodness-of-fit
statistics, behind one reproducible command-line interface.
"""

from .cones import (
    AdaptednessReport,
    Cone,
    HalfLine1D,
    HalfSpaceIntersection,
    Wedge2D,
    half_line,
    half_plane,
    is_adapted,
    meander_index,
    octant,
    parse_cone,
    pinched_cone_3d,
    pinched_half_cone_3d,
    quarter_plane,
)
from .exact import (
    MassMap,
    SandwichReport,
    TailSeries,
    compensated_sum,
    endpoint_law,
    exact_tail,
    sandwich_check,
    survival_from,
)
from .streams import child_rng, spawn_rngs
from .gof import (
    BoundaryReport,
    GofReport,
    boundary_occupation,
    endpoint_gof,
    ks_critical,
    ks_one_sample,
    ks_two_sample,
    rayleigh_check,
)
from .meander import MeanderEndpointLaw, rayleigh_cdf
from .sampling import (
    LevelExtinctionError,
    NormalizedPath,
    PathEnsemble,
    RejectionFloorError,
    default_schedule,
    path_functionals,
    rejection_sample,
    splitting_sample,
)
from .tails import (
    IndexEstimate,
    RatioLimitReport,
    VaropoulosReport,
    dominated_variation_stat,
    estimate_index,
    ratio_limit_check,
    varopoulos_check,
)
from .walks import (
    DiskStep,
    LatticeStep,
    WalkPath,
    convolve,
    lattice_from_atoms,
    moments,
    parse_walk,
    sample_step,
    scale_lattice,
    srw1d,
    srw2d,
    srw3d,
    two_step_srw2d,
)

__version__ = "0.1.0"
