"""Mixed binary-continuous black-box optimization for layer-merge search."""

from .cma import CmaCore, DegenerateCovariance
from .conditional import ConditionalMixedSearch, MaskDistribution
from .harness import (
    ComparisonReport,
    Condition,
    ExperimentPlan,
    emit_traces,
    finding_metrics,
    render_report,
    run_comparison,
)
from .objectives import (
    MaskedSphere,
    PSMergeObjective,
    ToyMergeObjective,
    make_teacher_instance,
    masked_sphere_eval,
    ps_merge_eval,
    random_masked_sphere,
    toy_merge_eval,
)
from .protocol import SubprocessEvaluator
from .runlog import RunLog, RunRecord
from .space import (
    BinaryMask,
    Candidate,
    CandidateOrigin,
    DimensionMismatch,
    EvalResult,
    EvaluatorFailure,
    MixedSpace,
    Objective,
    ScalingVector,
    active_count,
    effective_reduction,
    make_space,
)
from .strategies import (
    CmaSearch,
    StructuredSampler,
    UnstructuredSampler,
    make_strategy,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryMask",
    "Candidate",
    "CandidateOrigin",
    "CmaCore",
    "CmaSearch",
    "ComparisonReport",
    "Condition",
    "ConditionalMixedSearch",
    "DegenerateCovariance",
    "DimensionMismatch",
    "EvalResult",
    "EvaluatorFailure",
    "ExperimentPlan",
    "MaskDistribution",
    "MaskedSphere",
    "MixedSpace",
    "Objective",
    "PSMergeObjective",
    "RunLog",
    "RunRecord",
    "ScalingVector",
    "StructuredSampler",
    "SubprocessEvaluator",
    "ToyMergeObjective",
    "UnstructuredSampler",
    "active_count",
    "effective_reduction",
    "emit_traces",
    "finding_metrics",
    "make_space",
    "make_strategy",
    "make_teacher_instance",
    "masked_sphere_eval",
    "ps_merge_eval",
    "random_masked_sphere",
    "render_report",
    "run",
    "run_comparison",
    "toy_merge_eval",
]
