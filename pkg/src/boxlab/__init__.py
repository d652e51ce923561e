"""Exact de Finetti reductions for conditional probability distributions."""
from .boxes import (
    Alphabet,
    Box,
    Undefined,
    Validation,
    chsh_box,
    combine,
    is_nonsignalling,
    is_permutation_invariant,
    marginal,
    permute,
    power,
    pr_box,
    random_box,
    symmetrize,
    tensor,
    uniform_box,
    validate,
)
from .channels import (
    Channel,
    Extension,
    Partition,
    PreconditionError,
    build_definetti_extension,
    channel_output,
    diamond_gap,
    grid_extension_search,
    is_invariant_channel,
    partition_check,
    remainder_state,
    trace_distance,
    verify_diamond_bound,
)
from .definetti import (
    DeFinettiState,
    beta_integral,
    count_vectors,
    lower_bound_general,
    materialize_tau_chsh,
    tau_chsh_entry,
    tau_general_entry,
)
from .reduction import (
    InvariantTest,
    ReductionReport,
    counting_bound,
    counting_oracle,
    random_symmetric_box,
    run_test,
    upper_bound_chsh,
    upper_bound_general,
    verify_reduction,
    verify_test_bound,
)
from .symmetry import (
    SymmetryTemplate,
    apply_mapping,
    chsh_template,
    color_counts,
    has_symmetry,
    is_chsh_symmetric,
    no_symmetry_template,
    s_project,
    validate_template,
)

__all__ = [
    "Alphabet",
    "apply_mapping",
    "beta_integral",
    "Box",
    "build_definetti_extension",
    "Channel",
    "channel_output",
    "chsh_box",
    "chsh_template",
    "color_counts",
    "combine",
    "count_vectors",
    "counting_bound",
    "counting_oracle",
    "DeFinettiState",
    "diamond_gap",
    "Extension",
    "grid_extension_search",
    "has_symmetry",
    "InvariantTest",
    "is_chsh_symmetric",
    "is_invariant_channel",
    "is_nonsignalling",
    "is_permutation_invariant",
    "lower_bound_general",
    "marginal",
    "materialize_tau_chsh",
    "no_symmetry_template",
    "Partition",
    "partition_check",
    "permute",
    "power",
    "pr_box",
    "PreconditionError",
    "random_box",
    "random_symmetric_box",
    "ReductionReport",
    "remainder_state",
    "run_test",
    "s_project",
    "symmetrize",
    "SymmetryTemplate",
    "tau_chsh_entry",
    "tau_general_entry",
    "tensor",
    "trace_distance",
    "Undefined",
    "uniform_box",
    "upper_bound_chsh",
    "upper_bound_general",
    "validate",
    "validate_template",
    "Validation",
    "verify_diamond_bound",
    "verify_reduction",
    "verify_test_bound",
]

__version__ = "0.1.0"
