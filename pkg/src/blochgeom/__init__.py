"""Geometry, Voronoi diagrams and channel capacity on the qubit Bloch ball."""
from .capacity import (
    CapacityReport,
    EnclosingBall,
    NonConvergenceError,
    holevo_capacity,
    meb_exact,
    meb_grid,
    meb_iterative,
)
from .channels import AffineChannel, InvalidChannelError, validate_image
from .core import (
    BlochVector,
    DensityMatrix,
    OutOfBallError,
    PurityError,
    SingularLogarithmError,
    SpectralDecomposition,
    entropy,
    from_bloch,
    log_density,
    potential,
    spectral,
    to_bloch,
)
from .geometry import (
    DualCoordinates,
    bures,
    conjugate_potential,
    divergence,
    divergence_closed,
    divergence_dual,
    divergence_matrix,
    euclidean,
    fubini_study,
    geodesic,
    grad_potential,
    inverse_grad,
    trace_inner,
)
from .sampling import sample_sphere
from .voronoi import (
    AffineBisector,
    DiagramAssignment,
    DiagramMode,
    ModeError,
    SiteSet,
    assign,
    bisector,
    classify,
    diagrams_equal,
    export_cells,
    pure_limit_section,
    spherical_diagram,
)

__version__ = "0.1.0"
