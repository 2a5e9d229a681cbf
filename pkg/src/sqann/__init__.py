"""Constructive, interpretable function approximators.

Two models built without gradient descent: a closed-form single-layer
network over linearly ordered scalar inputs (TNN) and a multi-layer
fingerprint network with semi-quantized activations (SQANN).  Both store
every fitting sample in an identifiable neuron, predict it back exactly
(SQANN) or within a provable bound (TNN), report the provenance of every
prediction, and absorb out-of-distribution samples without forgetting.
"""

from .absorption import (
    AbsorptionConfig,
    AbsorptionReport,
    OodCriterion,
    SqannBuilder,
    TnnBuilder,
    absorb_loop,
    cf_check,
    find_ood,
)
from .activations import DsaParams, dsa, selective_pi, sigmoid, super_gaussian
from .dataset import (
    Dataset,
    OrderedDataset,
    Sample,
    ScalingParams,
    ValidationResult,
    linear_order,
    min_max_scale,
    validate_dataset,
)
from .errors import (
    BudgetExceededError,
    ConstructionError,
    ContractViolationError,
    CsvParseError,
    DataError,
    DegenerateGapError,
    DimensionMismatchError,
    DuplicateInputError,
    IllDefinedDatasetError,
    InvalidToleranceError,
    ModelFileError,
    NonNumericCellError,
    RaggedRowsError,
    SchemaError,
    SqannError,
    UnresolvableCollisionError,
    VersionMismatchError,
)
from .model_io import load_csv, load_model, save_model
from .network import (
    ConstructionTrace,
    ExplanationReport,
    Interpolated,
    InterpolationRule,
    NeuronRef,
    PredictionOutcome,
    SqannConfig,
    SqannLayer,
    SqannModel,
    StrongActivation,
    build_sqann,
    explain,
    forward_to_layer,
    layer_activation,
    sqann_predict,
)
from .tnn import (
    DummyDeltaRule,
    TnnModel,
    build_tnn,
    required_sharpness,
    tnn_activation_pattern,
    tnn_error_bound,
    tnn_predict,
    tnn_predict_batch,
)

__version__ = "0.1.0"

__all__ = [
    "AbsorptionConfig",
    "AbsorptionReport",
    "BudgetExceededError",
    "ConstructionError",
    "ConstructionTrace",
    "ContractViolationError",
    "CsvParseError",
    "DataError",
    "Dataset",
    "DegenerateGapError",
    "DimensionMismatchError",
    "DsaParams",
    "DummyDeltaRule",
    "DuplicateInputError",
    "ExplanationReport",
    "IllDefinedDatasetError",
    "Interpolated",
    "InterpolationRule",
    "InvalidToleranceError",
    "ModelFileError",
    "NeuronRef",
    "NonNumericCellError",
    "OodCriterion",
    "OrderedDataset",
    "PredictionOutcome",
    "RaggedRowsError",
    "Sample",
    "ScalingParams",
    "SchemaError",
    "SqannBuilder",
    "SqannConfig",
    "SqannError",
    "SqannLayer",
    "SqannModel",
    "StrongActivation",
    "TnnBuilder",
    "TnnModel",
    "UnresolvableCollisionError",
    "ValidationResult",
    "VersionMismatchError",
    "absorb_loop",
    "build_sqann",
    "build_tnn",
    "cf_check",
    "dsa",
    "explain",
    "find_ood",
    "forward_to_layer",
    "layer_activation",
    "linear_order",
    "load_csv",
    "load_model",
    "min_max_scale",
    "required_sharpness",
    "save_model",
    "selective_pi",
    "sigmoid",
    "sqann_predict",
    "super_gaussian",
    "tnn_activation_pattern",
    "tnn_error_bound",
    "tnn_predict",
    "tnn_predict_batch",
    "validate_dataset",
]
