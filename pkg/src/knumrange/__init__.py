"""k-numerical ranges W_k(c) and the spectral scale of a complex matrix."""

from .errors import (ArgumentError, DegeneratePencilError, DimensionError, IndeterminateError,
                     InputError, KNumRangeError, NonExposedDirectionError)
from .linalg import Operator, decompose, hermitian_eig, normalized_trace, top_k_sum
from .numrange import (RangeBoundary, classify, complement_identity_check, selfadjoint_interval,
                       support_wk, touch_set, trace_boundary)
from .oracle import (RandomSpec, conjecture_6_2_scan, random_matrix, random_rank_k_projection,
                     sample_wk_cloud)
from .pencil import char_poly_bivariate, critical_angles, discriminant_y, square_free_reduce
from .scale import (ScaleBody, build_scale, export_mesh, extreme_point, flat_faces,
                    isotrace_slice, scale_support)
from .structure import (commutant_basis, complex_slope, is_reducing_eigenvalue,
                        reducing_subspaces)

__version__ = "0.1.0"

__all__ = [
    "ArgumentError", "DegeneratePencilError", "DimensionError", "IndeterminateError",
    "InputError", "KNumRangeError", "NonExposedDirectionError",
    "Operator", "decompose", "hermitian_eig", "normalized_trace", "top_k_sum",
    "RangeBoundary", "classify", "complement_identity_check", "selfadjoint_interval",
    "support_wk", "touch_set", "trace_boundary",
    "RandomSpec", "conjecture_6_2_scan", "random_matrix", "random_rank_k_projection",
    "sample_wk_cloud",
    "char_poly_bivariate", "critical_angles", "discriminant_y", "square_free_reduce",
    "ScaleBody", "build_scale", "export_mesh", "extreme_point", "flat_faces",
    "isotrace_slice", "scale_support",
    "commutant_basis", "complex_slope", "is_reducing_eigenvalue", "reducing_subspaces",
]
