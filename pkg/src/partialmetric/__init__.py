"""Partial metric spaces, orbital contractions and certified Picard iteration."""
from .contraction import (
    ConditionKind,
    ConditionVerdict,
    OrbitRecord,
    PsiAudit,
    PsiSpec,
    SelfMap,
    audit_psi,
    certify_psi,
    check_condition_a,
    check_condition_b,
    check_kannan_chatterjea,
    linear_psi,
    orbit_diameter,
)
from .convergence import (
    ConvergenceReport,
    SequenceTrace,
    analyze_proper_convergence,
    analyze_tau_convergence,
    check_pairwise_limit_identity,
    detect_cauchy,
    enumerate_tau_limits,
)
from .core import (
    AxiomAuditReport,
    CarrierKind,
    ContractError,
    DomainError,
    PartialMetricSpace,
    audit_axioms,
    ball_contains,
    check_axioms_at,
    eval_p,
)
from .solver import FixedPointCertificate, dual_seed_diagnostic, picard_solve, verify_fixed_point
from .spaces import (
    CompletionView,
    TableRejected,
    load_table,
    make_finite_space,
    make_max_space,
    make_punctured_interval,
)
from .witness import (
    WitnessMap,
    apply_witness,
    audit_witness,
    partition_index,
    stabilization_index,
)

__version__ = "0.1.0"
