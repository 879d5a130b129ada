"""Coordination mechanisms for generalized principal-agent problems.

The core entry point is :func:`solve_optimal_mechanism`; instances for
contracts, persuasion, Stackelberg games and information selling are reduced
to :class:`PAInstance` by the ``*_to_pa`` helpers.
"""

from .applications import (
    ClassResult,
    ContractInstance,
    Graph,
    PersuasionInstance,
    SellingInfoInstance,
    SizeGuardError,
    StackelbergInstance,
    contract_to_pa,
    gen_stackelberg_hardness,
    no_information_value,
    persuasion_to_pa,
    selling_info_to_pa,
    solve_action_independent,
    solve_type_independent,
    stackelberg_to_pa,
)
from .info_acquisition import (
    EntropyApprox,
    Experiment,
    Partition,
    PiecewiseConvexCost,
    ZeroCost,
    gen_concavification_hardness,
    partition_costly_persuasion,
    partition_decision_problem,
    solve_info_acquisition,
)
from .lp import LPError, LPProblem, LPSolution, LPStatus, check_feasible, solve_lp
from .mechanism import (
    MechanismResult,
    NoMechanismError,
    UnboundedUtilityError,
    build_cp_closure,
    build_margin_cp,
    find_irregular_pairs,
    homogenize,
    recover_succinct,
    solve_optimal_mechanism,
)
from .model import (
    AffineForm,
    ConcavePWL,
    ConvexPWL,
    DomainError,
    PAInstance,
    Polyhedron,
    SuccinctMechanism,
    best_response,
    check_ic,
    eval_principal,
    validate_instance,
)

__version__ = "0.1.0"
