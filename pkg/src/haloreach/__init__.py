"""Energy-optimal forced periodic trajectories near CR3BP reference orbits.

Builds the linearized optimal-control cost forms around a periodic
reference, bounds the energy-limited reachable set of forced periodic
deviations, and validates the linear analysis against full nonlinear
Newton shooting.
"""

from .catalog import OrbitCatalogEntry, SpacecraftEntry, get_orbit_entry, load_catalog
from .dynamics import (
    Cr3bpModel,
    ReferenceOrbit,
    SystemParams,
    augmented_field,
    augmented_jacobian,
    cr3bp_field,
    cr3bp_jacobian,
    potential_hessian,
)
from .errors import (
    ConfigError,
    HaloReachError,
    IllConditionedBvpError,
    PropagationError,
    ShootingError,
    SingularityError,
)
from .propagation import (
    AugmentedResult,
    ClosureReport,
    IntegratorConfig,
    StmHistory,
    StmRecord,
    build_stm_history,
    check_closure,
    history_cache_key,
    propagate_augmented,
    propagate_state,
)
from .reachability import (
    EForm,
    EStarForm,
    LinearTrajectory,
    ReachableSet,
    assemble_e,
    assemble_e_star,
    j_star_from_thrust,
    propagate_linear,
    quadratic_cost,
    reachable_set,
    sample_boundary,
)
from .shooting import (
    ShootingConfig,
    ShootingResult,
    SweepRow,
    shoot_nonlinear,
    solve_linear_costate,
    validation_sweep,
)

__version__ = "0.1.0"
