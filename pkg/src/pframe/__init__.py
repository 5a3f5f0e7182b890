"""p-frame potentials of unit vectors and of discrete measures on the sphere."""
from .bounds import (
    BoundReport,
    applicable_bounds,
    compare_bounds,
    dplus1_min,
    equiangular_bound,
    kcopies_min,
    phase_p0,
    venkov_bound,
    welch_bound,
)
from .certify import (
    CertificateReport,
    is_equiangular,
    is_equiangular_funtf,
    is_funtf,
    is_spherical_design,
    tyler_fixed_point,
)
from .gegenbauer import expand_power, pfp_via_expansion
from .optimize import OptimizerConfig, OptResult, brute_force_2d, minimize_fp
from .potentials import coherence, fp, fp_gradient, pframe_force, size_measure
from .prob import (
    DiscreteMeasure,
    canonical_dual,
    minimize_pfp,
    minimizer_support_check,
    pfp,
    pframe_check,
    reconstruct_measure,
    uniform_pfp,
)
from .sphere import (
    Configuration,
    frame_bounds,
    frame_operator,
    gram,
    procrustes_direction,
    reconstruct,
    unit_vector,
)

__version__ = "0.1.0"
