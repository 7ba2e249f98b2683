"""Drift (weighted) Hodge Laplacians on triangulated surfaces.

Discrete exterior calculus with weighted stars, sparse eigensolvers, and
evaluators for eigenvalue inequalities of the drift Hodge Laplacian on
submanifolds of Euclidean space.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AssemblyError,
    ConfigError,
    EstimatorError,
    MeshError,
    SolverError,
    WeightedHodgeError,
    WeightError,
)
from .mesh import (  # noqa: E402
    DomainMesh,
    SurfaceMesh,
    dual_volumes,
    extract_domain,
    load_mesh,
    make_disk,
    make_sphere,
    make_torus,
    write_mesh,
)
from .geometry import CurvatureField, estimate_curvature  # noqa: E402
from .weights import (  # noqa: E402
    WeightField,
    custom_weight,
    distance_weight,
    radial_weight,
    smooth_random_weight,
    zero_weight,
)
from .dec import assemble, assemble_twisted, dirichlet_restrict  # noqa: E402
from .spectra import classify, f_betti, first_exact_eigenvalue, solve  # noqa: E402
from .inequalities import InequalityReport, Setting, make_setting  # noqa: E402
