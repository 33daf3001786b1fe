"""Sign-symmetric product norms built from convex generators on the
standard simplex: construction, duality, subdifferentials, and
geometric-constant verification."""

from .simplex import (
    SimplexError,
    SimplexGrid,
    SimplexPoint,
    default_resolution,
    face_projection,
    from_prime_domain,
    make_point,
    to_prime_domain,
    vertex,
)
from .generators import (
    CertificateReport,
    ConvexCombination,
    FaceRestriction,
    GeneratorError,
    PNormGenerator,
    PointwiseMax,
    PsiFunction,
    TabulatedGenerator,
    UncertifiedGenerator,
    certify,
    combine,
    eval_psi,
    psi_p,
    ratio_monotonicity_check,
    require_certified,
    restrict_to_face,
    sample_ratio_pairs,
    superadditivity_check,
    tabulate,
)
from .norms import (
    AxiomReport,
    BaseNorm,
    BlockVector,
    DimensionMismatch,
    ProductNorm,
    axiom_suite,
    norm_eval,
    pairing,
    psi_recovery,
    real_norm,
    sandwich_check,
)
from .duality import (
    BidualReport,
    ComparisonConstants,
    DualPsiResult,
    DualityReport,
    HolderReport,
    bidual_check,
    closed_form_dual,
    comparison_constants,
    dual_norm_eval,
    dual_norm_eval_many,
    dual_psi,
    holder_check,
    real_dual_norm,
    verify_duality_relations,
)
from .subdiff import (
    BlockSubdiffResult,
    InequalityReport,
    PsiSubgradient,
    RealSubdiffResult,
    SetDescription,
    SubdifferentialError,
    alignment_check,
    base_subgradient,
    base_subdiff_extremes,
    block_norm_many,
    norm_subdiff_block,
    norm_subdiff_real,
    psi_subgradient,
    psi_subdiff_extremes,
    real_norm_many,
    subgradient_inequality_verify,
)
from .njconst import (
    ClarksonParams,
    ClarksonReport,
    GeometryError,
    NJBounds,
    NJReport,
    clarkson_check,
    g_ratio,
    nj_bounds,
    nj_estimate,
    nj_exact_p,
    primal_dual_experiment,
)
from .compatibility import (
    CombinedBoundReport,
    CompatReport,
    CompatRow,
    c5_tightness,
    check_all,
    combined_bound,
)

__version__ = "0.1.0"
