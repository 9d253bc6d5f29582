"""Ball convolutions, averages and filters on finite metric measure spaces.

The modules mirror the pieces of the theory: ``space`` (spaces and balls),
``operators`` (averages, convolutions, norms), ``besicovitch`` (the equal
radius constant), ``filters`` (signed-measure filters and adaptedness),
``verify`` (certified inequalities) and ``imaging`` (PGM pixel grids).
"""
from .besicovitch import (
    BesicovitchFamily,
    EConstantResult,
    check_family,
    equal_radius_constant,
    maximal_subfamily,
    multiplicity_at,
)
from .filters import (
    Filter,
    Stencil,
    adaptedness_constant,
    builtin_stencil,
    filter_convolve,
    filter_from_stencil,
    rn_density,
    total_variation,
)
from .imaging import GrayImage, convolve_image, read_image, write_image
from .operators import apply_average, assemble_kernel, lp_norm, metric_convolve, operator_norm
from .space import (
    Ball,
    BallKind,
    MetricMeasureSpace,
    ball_members,
    build_space,
    critical_radii,
    example_bigballs,
    example_tinyballs,
    from_distance_matrix,
    from_graph,
    grid,
    load_space,
    support,
    validate_metric,
)
from .verify import (
    certify_operator_bound,
    check_open_closed_agreement,
    check_pointwise_lemma,
    check_variation_lemma,
    reproduce_example,
)

__version__ = "0.1.0"
