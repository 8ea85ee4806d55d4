"""regretlab: online regression forecasters with certified regret bounds,
plus an exact desk-scale engine for the quantities that drive them --
sequential and offset Rademacher complexities, covers, fat-shattering
dimensions, conjugate offset functions, rate formulas, and minimax values
of tiny discretized games.
"""

from .comparators import (
    ComparatorFamily,
    FiniteTableFamily,
    LinearFamily,
    SparseConvexFamily,
    best_comparator_loss,
    family_from_json,
    finite_table_from_csv,
)
from .complexity import (
    CoverReport,
    ShatterCertificate,
    cover_fat_bound,
    chained_offset_bound,
    dudley_bound,
    fat_shattering,
    finite_class_linear_bound,
    finite_class_offset_bound,
    khinchine_lower_bound,
    offset_rademacher,
    offset_rademacher_sup,
    offset_tree_max,
    rate_exponent,
    rate_lower,
    rate_upper,
    seq_cover_number,
    seq_rademacher,
    seq_rademacher_mc,
    sparse_cover_bound,
    sparse_rate_bound,
)
from .errors import (
    CapabilityError,
    ConfigError,
    DomainError,
    ProtocolError,
    ResourceGuardError,
    ShapeError,
)
from .forecasters import (
    AdmissibilityReport,
    ExpertsForecaster,
    FixedComparatorForecaster,
    GridSnapForecaster,
    RelaxationForecaster,
    RelaxationOracle,
    RoundRecord,
    VAWForecaster,
    check_admissibility,
    clip,
    conditional_rademacher_oracle,
    experts_forecast,
    experts_relaxation,
    experts_relaxation_oracle,
    regret_bound,
    relaxation_forecast,
    run_online,
    vaw_forecast,
    vaw_relaxation,
    vaw_relaxation_oracle,
)
from .harness import ExperimentConfig, generate_sequence, run_experiment
from .losses import (
    LossModel,
    absolute_loss,
    logistic_loss,
    power_conjugate,
    power_conjugate_bound,
    q_loss,
    square_loss,
)
from .minimax import GameSpec, SolvedGame, minimax_value, optimal_adversary, solve_game, value_monotonicity
from .trees import LabeledTree, SignPath, all_paths, compose, prefix_index
from .verify import run_suite

__version__ = "0.1.0"
