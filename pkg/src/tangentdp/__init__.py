"""Tangent differential privacy of Gibbs (exponential-mechanism) risk minimizers
on finite spaces: exact tangent maps, induced norms, 2*beta*R certificates,
Monte Carlo estimators and leave-one-out audits."""

__version__ = "0.1.0"

from .certification import (  # noqa: E402
    Certificate,
    InputNorm,
    Interval,
    NormPair,
    OutputNorm,
    Theorem,
    certify,
    op_norm,
    theorem_R,
)
from .estimators import EstimateReport, estimate_R_T1, estimate_R_T3  # noqa: E402
from .mechanism import (  # noqa: E402
    GibbsMechanism,
    RiskTable,
    expected_risk,
    gibbs_output,
    log_output,
    sample_output,
    zero_one_risk_table,
)
from .spaces import (  # noqa: E402
    Distribution,
    FiniteSpace,
    GraphLaplacian,
    MetricGraph,
    TangentVector,
    build_laplacian,
    h1_norm,
    hm1_norm,
    leave_one_out,
    make_distribution,
    tv_norm,
)
from .tangent import KernelKind, TangentMapKernel, apply, dA, dlogA, fd_validate  # noqa: E402
