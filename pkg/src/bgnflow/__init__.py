"""Transport-type BGN parametric finite elements for closed planar curves."""

from .diagnostics import ErrorReport, convergence_order, projection_error, track_mesh_quality
from .errors import (
    BGNFlowError,
    DegenerateNormalError,
    FieldDomainError,
    FlowAborted,
    InvalidDegreeError,
    InvalidGeometryError,
    MeshDegenerationError,
    NonconvergenceError,
    ProjectionDomainError,
    SingularSystemError,
)
from .experiments import (
    ExperimentRecord,
    FlowConfig,
    run_flow,
    run_mesh_ratio_study,
    run_spatial_convergence,
    run_temporal_convergence,
    temporal_order,
)
from .flows import (
    ELLIPSE_FLOW,
    ELLIPSE_RADIAL,
    EllipseRadialFlow,
    VelocityField,
    closest_point_exact,
    eval_field,
    exact_curve_point,
    parse_field,
)
from .geometry import averaged_normal, discrete_curvature, lumped_weights, piecewise_normal
from .mesh import (
    CurveMesh,
    build_initial_mesh,
    circle_curve,
    element_arclength,
    ellipse_curve,
    mesh_ratio,
    polygon_mesh,
    regular_polygon,
)
from .reference import ReferenceElement, build_reference_element, gauss_legendre_rule, gauss_lobatto_rule
from .solver import (
    BgnSystem,
    assemble_bgn_system,
    bgn_step,
    lagrangian_step,
    solve_linear,
    stabilization_rhs,
    stiffness_matrix,
)

__version__ = "0.1.0"
