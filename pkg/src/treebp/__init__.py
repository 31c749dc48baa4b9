"""Provable bounds for broadcasting on trees via quantized density evolution.

The library represents binary-input symmetric channels as finite mixtures of
symmetric-crossover atoms, iterates belief propagation level by level, and
brackets the limiting reconstruction error and root-leaf mutual information
between matched degraded and upgraded channel replacements.
"""

from .channels import (
    ChannelFunctionals,
    DeltaMeasure,
    TreeParams,
    bec,
    binary_entropy,
    bsc,
    delta_c,
    functionals,
    merge_atoms,
)
from .bp import (
    LayerSpec,
    chi2_entropy_bec,
    chi2_entropy_bsc,
    erasure_function_bec,
    error_function_bsc,
    f_percolation,
    layer_bp,
    serial_compose,
    star_combine,
)
from .quantize import QuantGrid, q_bec, q_bec_chi2, q_bsc, q_bsc_chi2, uniform_grid
from .dynamics import (
    DynamicsTrace,
    FixedPointConfig,
    TwoAtomResult,
    default_bsc_error_start,
    fixed_point,
    local_comparison,
    scalar_info_dynamics,
    scalar_pe_dynamics,
    two_atom_upper,
)
from .oracle import ExactResult, ResourceLimitError, exact_de, exact_tree
from .criticality import (
    ConjectureReport,
    SlopeFit,
    SweepResult,
    conjecture_report,
    find_threshold,
    fit_slope,
    tau_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelFunctionals",
    "ConjectureReport",
    "DeltaMeasure",
    "DynamicsTrace",
    "ExactResult",
    "FixedPointConfig",
    "LayerSpec",
    "QuantGrid",
    "ResourceLimitError",
    "SlopeFit",
    "SweepResult",
    "TreeParams",
    "TwoAtomResult",
    "bec",
    "binary_entropy",
    "bsc",
    "chi2_entropy_bec",
    "chi2_entropy_bsc",
    "conjecture_report",
    "default_bsc_error_start",
    "delta_c",
    "erasure_function_bec",
    "error_function_bsc",
    "exact_de",
    "exact_tree",
    "f_percolation",
    "find_threshold",
    "fit_slope",
    "fixed_point",
    "functionals",
    "layer_bp",
    "local_comparison",
    "merge_atoms",
    "q_bec",
    "q_bec_chi2",
    "q_bsc",
    "q_bsc_chi2",
    "scalar_info_dynamics",
    "scalar_pe_dynamics",
    "serial_compose",
    "star_combine",
    "tau_sweep",
    "two_atom_upper",
    "uniform_grid",
]
