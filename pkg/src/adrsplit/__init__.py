"""adrsplit: adaptive Douglas-Rachford splitting with certified constants.

The package solves ``0 in Ax + Bx`` by the relaxed-resolvent fixed-point
iteration, tracks the shadow sequence ``J1(x_k)``, and ships the surrounding
verification machinery: weighted product-space projections, sampling
certifiers for operator moduli, balance-condition checkers, and premise
diagnostics for the demiclosedness arguments behind the shadow convergence.
"""

from .adr import (
    ADRParams,
    IterationTrace,
    adr_step,
    derive_relaxations,
    inclusion_residual,
    kappa_bound,
    run,
    shadow_premises,
    validate,
)
from .demiclosedness import (
    BalanceReport,
    ConditionDiagnostics,
    SequenceWindow,
    averaged_to_fne,
    balance_averaged,
    balance_cocoercive,
    check_averaged_premises,
    check_cocoercive_premises,
    fne_to_averaged,
    lift_to_product,
    verify_conclusion,
)
from .operators import (
    Certificate,
    ModulusClaim,
    OperatorSpec,
    affine,
    certify_cocoercive,
    certify_comonotone,
    certify_conically_averaged,
    certify_monotone,
    evaluate,
    normal_cone_ball,
    normal_cone_box,
    rotation2d,
    scaled_identity,
    scaled_identity_plus_rotation,
    sum_of_two,
)
from .resolvents import (
    ResolventHandle,
    expected_constant,
    reflected_resolve,
    relaxed_resolve,
    resolve,
)
from .vecspace import (
    ScaledDiagonal,
    WeightedSpace,
    inner_w,
    norm_w,
    project_affine_complement,
    project_scaled_diagonal,
)

__version__ = "0.1.0"
