"""Robust supervised dimensionality reduction by L1-norm scaling cut.

The package fits linear projections that separate labeled classes by
maximizing the ratio of L1-norm between-class to within-class projected
dispersions, which resists outliers better than the squared-distance
criteria it generalizes. L2 reference methods (classical LDA and the L2
scaling cut), synthetic data generation, two dataset interchange formats,
deterministic classifiers, and the repeated split/reduce/classify
measurement protocol are included, along with a CLI (`l1scut`).
"""

from .baselines import EigenResult, fit_l2sc, fit_lda, lda_scatters, sym_geig
from .data import (
    ClassPartition,
    GmmComponent,
    LabeledDataset,
    SplitSpec,
    inject_noise,
    load_dataset,
    load_matrix,
    random_blobs,
    save_dataset,
    save_matrix,
    stratified_split,
    synth_gmm,
)
from .errors import (
    DataFormatError,
    DimensionExhausted,
    DimensionMismatch,
    EmptyClass,
    InsufficientClassSize,
    InvalidClassCount,
    L1ScutError,
    MalformedHeader,
    MalformedValue,
    MissingLabelColumn,
    NonFiniteValue,
    NonPSDCovariance,
    NotPositiveDefinite,
    SingularDenominator,
    TruncatedPayload,
    ZeroDenominator,
    ZeroTrace,
    ZeroWithinDispersion,
)
from .evaluate import (
    EvalReport,
    Metrics,
    SvmModel,
    knn_classify,
    metrics,
    report_to_json,
    report_to_rows,
    run_protocol,
    train_linear_svm,
)
from .l1sc import (
    DirectionInfo,
    RestartInfo,
    SignState,
    SolverConfig,
    accumulators,
    ascent_direction,
    fit_l1sc,
    l1_objective,
    sign_state,
    solve_direction,
)
from .projection import (
    ColumnInfo,
    Projection,
    load_projection,
    save_projection,
    transform,
)
from .scatter import ScatterPair, scatter_pair, scut_ratio, trace_ratio

__version__ = "0.1.0"

__all__ = [
    "ClassPartition",
    "ColumnInfo",
    "DataFormatError",
    "DimensionExhausted",
    "DimensionMismatch",
    "DirectionInfo",
    "EigenResult",
    "EmptyClass",
    "EvalReport",
    "GmmComponent",
    "InsufficientClassSize",
    "InvalidClassCount",
    "L1ScutError",
    "LabeledDataset",
    "MalformedHeader",
    "MalformedValue",
    "Metrics",
    "MissingLabelColumn",
    "NonFiniteValue",
    "NonPSDCovariance",
    "NotPositiveDefinite",
    "Projection",
    "RestartInfo",
    "ScatterPair",
    "SignState",
    "SingularDenominator",
    "SolverConfig",
    "SplitSpec",
    "SvmModel",
    "TruncatedPayload",
    "ZeroDenominator",
    "ZeroTrace",
    "ZeroWithinDispersion",
    "accumulators",
    "ascent_direction",
    "fit_l1sc",
    "fit_l2sc",
    "fit_lda",
    "inject_noise",
    "knn_classify",
    "l1_objective",
    "lda_scatters",
    "load_dataset",
    "load_matrix",
    "load_projection",
    "metrics",
    "random_blobs",
    "report_to_json",
    "report_to_rows",
    "run_protocol",
    "save_dataset",
    "save_matrix",
    "save_projection",
    "scatter_pair",
    "scut_ratio",
    "sign_state",
    "solve_direction",
    "stratified_split",
    "sym_geig",
    "synth_gmm",
    "trace_ratio",
    "train_linear_svm",
    "transform",
]
