"""Iterated Moebius-power maps on the unit disk.

A numerical laboratory for the nested compact sets produced by composing
levels z -> ((1 - t_n/z)/(1 - t_n))^{q_n} with t_n = C p_n/q_n: escape-depth
rasters, component addressing by an odometer, real component centers, and
horizon-bounded verdicts for the explicit non-escape criteria.
"""

__version__ = "0.1.0"

from .addresses import (
    Address,
    AddressError,
    OdometerScale,
    address_of,
    component_label,
    scale_of,
    sector_index,
    sigma_succ,
)
from .criterion import (
    CandidateRule,
    CriterionError,
    CriterionReport,
    centers,
    check_arg_inequality,
    check_class_membership,
    check_levin,
    check_sector_bound,
    estimate_x0,
    sample_critical_component,
    solve_center,
    verify_monotonicity,
    verify_theorem_recursion,
)
from .model import (
    EscapeTrace,
    ModelError,
    ModelParams,
    compose_phi,
    membership_tolerance,
    moebius_apply,
    moebius_inverse_apply,
    moebius_preimage_disk,
    orbit,
    phi_apply,
)
from .numerics import (
    LogPolarComplex,
    NumericsError,
    auto_precision_bits,
    working_precision,
)
from .raster import (
    DepthGrid,
    Window,
    count_components,
    expected_component_count,
    render_depth_grid,
    write_image,
)
from .sequences import (
    GeneratorRule,
    QVal,
    Rotation,
    RotationSequence,
    SequenceError,
)

__all__ = [name for name in dir() if not name.startswith("_")]
