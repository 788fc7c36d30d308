"""Schwarzian derivative tensor of holomorphic maps in C^n and its Bergman-metric norms."""

from .bergman import MetricAtPoint, bergman_norm, metric_at, whiten
from .errors import (
    BranchPointError,
    ConfigError,
    DomainError,
    LocalUnivalenceError,
    SchwarzianError,
    SingularPointError,
)
from .jets import Jet3, compose, extract_derivatives, jet_analytic, jet_arith, jet_det, seed_variables
from .maps import (
    Composition,
    Coordinatewise,
    HolomorphicMap,
    Linear,
    Moebius,
    OneD,
    RoperSuffridge,
    evaluate_jet,
    map_from_dict,
    map_to_dict,
    moebius_from_matrix,
    one_d,
    roper_suffridge,
)
from .norms import (
    GridSpec,
    NormReport,
    ProofQuantities,
    cs_bound,
    domain_sup,
    h_function,
    optimize_h,
    pointwise_norm,
    restricted_axis_norm,
    rs_closed_form,
    theorem1_bound,
    theorem2_constant,
)
from .tensor import (
    SchwarzianTensor,
    canonical_trace_residual,
    chain_rule_residual,
    pde_residual,
    schwarzian_1d,
    schwarzian_apply,
    schwarzian_tensor,
)

__version__ = "0.1.0"
