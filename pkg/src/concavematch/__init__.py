"""Graph matching over matching polytopes with conditionally concave and
probably conditionally concave quadratic energies."""

from .polytope import (
    MatchingState,
    PolytopeDescriptor,
    PolytopeKind,
    ZeroSumBasis,
    face_dimension,
    is_vertex,
    make_zero_sum_basis,
    random_direction_in_lin,
    random_interior_point,
    sinkhorn_project,
)
from .affinity import (
    AffinityMatrix,
    KernelSpec,
    PointCloud,
    WeightedGraph,
    apply_kernel,
    cpd_order1_test,
    geodesic_distances,
    pairwise_euclidean,
    spherical_distances,
)
from .energy import (
    KroneckerHessian,
    LinSpaceHessian,
    SegmentQuadratic,
    energy_E1,
    energy_value,
    gradient,
    hessian_E2,
    hessian_onesided,
    restricted_spectrum,
    segment_quadratic,
)
from .concavity import (
    BoundReport,
    ConcavityCertificate,
    EnsembleReport,
    SpectrumTemplate,
    certify_conditional_concavity,
    chernoff_bound,
    closed_form_bound,
    mc_convexity_probability,
    sample_omega_hessian,
    vertex_local_minima_experiment,
)
from .solver import (
    DiagonalRegularizer,
    SolverConfig,
    SolverResult,
    assignment_to_matrix,
    frank_wolfe,
    fw_concave_search,
    gershgorin_regularizer,
    lap_oracle,
    multi_start,
    row_argmin_lp,
)
from .pipeline import (
    DissimilarityMatrix,
    all_pairs_dissimilarity,
    classical_mds,
    pair_dissimilarity,
)
from .meshes import mesh_edge_graph, random_sphere_mesh
from . import errors

__version__ = "0.1.0"

__all__ = [
    "AffinityMatrix",
    "BoundReport",
    "ConcavityCertificate",
    "DiagonalRegularizer",
    "DissimilarityMatrix",
    "EnsembleReport",
    "KernelSpec",
    "KroneckerHessian",
    "LinSpaceHessian",
    "MatchingState",
    "PointCloud",
    "PolytopeDescriptor",
    "PolytopeKind",
    "SegmentQuadratic",
    "SolverConfig",
    "SolverResult",
    "SpectrumTemplate",
    "WeightedGraph",
    "ZeroSumBasis",
    "all_pairs_dissimilarity",
    "apply_kernel",
    "assignment_to_matrix",
    "certify_conditional_concavity",
    "chernoff_bound",
    "classical_mds",
    "closed_form_bound",
    "cpd_order1_test",
    "energy_E1",
    "energy_value",
    "errors",
    "face_dimension",
    "frank_wolfe",
    "fw_concave_search",
    "geodesic_distances",
    "gershgorin_regularizer",
    "gradient",
    "hessian_E2",
    "hessian_onesided",
    "is_vertex",
    "lap_oracle",
    "make_zero_sum_basis",
    "mc_convexity_probability",
    "mesh_edge_graph",
    "multi_start",
    "pair_dissimilarity",
    "pairwise_euclidean",
    "random_direction_in_lin",
    "random_interior_point",
    "random_sphere_mesh",
    "restricted_spectrum",
    "row_argmin_lp",
    "sample_omega_hessian",
    "segment_quadratic",
    "sinkhorn_project",
    "spherical_distances",
    "vertex_local_minima_experiment",
]
