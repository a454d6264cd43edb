"""Bell inequalities under measurement dependence: closed-form fake bounds,
an LP oracle that checks them, rate analysis and a trial simulator."""
from .analysis import (
    CertificationVerdict, RateResult, certify_randomness, critical_alpha,
    critical_alpha_report, critical_p, rate, rate_curves, unknown_info_rate,
)
from .closedform import (
    Branch, FakeBound, InputDistribution, MDParams, Theorem, fake_max,
    fake_max_chain_fact, fake_max_chain_general, fake_max_pfb_fact,
    fake_max_pfb_general, validate,
)
from .errors import (
    BellMDError, DimensionError, DomainError, EmptyCell, InfeasibleParams,
    InfeasibleStrategy, InvariantViolation, NoSolution, RangeError, SolverError,
    UnsupportedFunctional,
)
from .functional import (
    BellFunctional, DeterministicStrategy, JointOutcomeDistribution, chain3,
    classical_bound, correlator_bounds, correlator_from_joint, enumerate_strategies,
    frechet_interval, nosignaling_bound, pfb, quantum_bound, strategy_value,
)
from .lp import LinearProgram, LpSolution, Status, solve
from .oracle import (
    BiasedStrategy, Classification, EveModel, ModelEntry, NOISE, NoiseStrategy,
    OracleResult, VerificationReport, evaluate_model, solve_factorizable,
    solve_general, table1_model, verify_theorem,
)
from .sim import BellEstimate, TrialRecord, Trials, empirical_input_marginals, estimate_bell, sample_trials

__version__ = "0.1.0"
