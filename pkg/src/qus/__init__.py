"""Exact finite Markov kernels, causal Bayesian networks and independence queries."""

__version__ = "0.1.0"

from .errors import (
    CapExceeded,
    DistributionError,
    DrawReuseError,
    GraphError,
    NotDeterministic,
    QusError,
    ShapeMismatch,
    SpaceError,
)
from .spaces import (
    BOOL,
    UNIT,
    FinEvent,
    FinSpace,
    FnPoint,
    Tagged,
    atoms,
    coproduct,
    evaluate,
    event_to_indicator,
    exponential,
    indicator_to_event,
    nodes_space,
    product,
)
from .monad import (
    Dist,
    Kernel,
    bind,
    dirac,
    flatten,
    integrate,
    kernel_compose,
    kernel_product,
    marginal,
    strength,
)
from .sampling import Sampler, SampledKernel, Seed, empirical, from_dist, patch, split, uniform
from .kernels import (
    check_factorization,
    disintegrate,
    essential_uniqueness,
    extract_function,
    is_copy_deterministic,
    is_function_deterministic,
    is_zero_one_deterministic,
)
from .graph import Cdag, Walk, d_separated, extend_graph, is_d_blocked, relatives, topological_order
from .cbn import (
    CbnModel,
    TciWitness,
    gmp_sweep,
    joint_kernel,
    make_partially_generic,
    potential_outcome,
    separoid_suite,
    strong_ignorability_model,
    tci_check,
    tci_on_model,
)
from .extension import check_consistency, definetti_mixture, extend, is_exchangeable, prefix_marginal
from .dsl import ModelFile, ParseError, parse, serialize
