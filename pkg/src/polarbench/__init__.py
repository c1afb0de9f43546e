"""Polar encoding of attributes with missing values, with baselines, classifiers and evaluation."""

__version__ = "0.1.0"

from .barycentric import BarycentricValue, FuzzyPartitionMatrix, compact, expand, normalize, partition_from_attribute
from .distance import dist, norm, record_distance, similarity
from .encoding import (
    ENCODINGS,
    EncodedMatrix,
    EncodingSpec,
    encode_baseline,
    encode_polar,
    fit_encoder,
    fit_imputation,
    one_hot_compact,
    one_hot_redundant,
    polar_encode_boscovich,
    polar_encode_euclidean,
)
from .evaluation import (
    FoldPlan,
    auroc_binary,
    auroc_multiclass,
    run_benchmark,
    stratified_folds,
    wilcoxon_one_sided,
)
from .ingest import AttributeSchema, Dataset, apply_scaling, fit_scaling, load_csv
