"""Neighborhood collaborative filtering with co-rated-count similarity levels.

The package covers the full offline-benchmark loop: parse delimited rating
files, compute user-user similarities (plain and damped Pearson variants, a
static two-branch adjustment, and a multi-level adjustment whose bands are
derived from the dataset's own shape), predict ratings from k-nearest
neighborhoods, and score everything with error and top-N quality metrics
under seeded holdout or k-fold splits.
"""

from .errors import (CfLevelsError, ConfigError, EmptyInputError,
                     EmptySetError, FingerprintMismatchError,
                     MalformedLineError, OutOfScaleRatingError,
                     TooFewItemsError, TooFewUsersError, UnknownItemError,
                     UnknownUserError)
from .ratings import (RatingRecord, RatingScale, RatingsMatrix, build_matrix,
                      co_rated_items, raters_of, user_mean_over)
from .similarity import (METHOD_NAMES, PlusParams, SimilarityMethod,
                         StaticParams, apply_spcc, apply_static, apply_wpcc,
                         make_method, pcc, plus_adjust, spcc, static_proposed,
                         wpcc)
from .levels import (MIN_CO_RATED, NEGATIVE_FORMS, Band, LevelTable,
                     apply_dynamic, build_level_table, derive_dvi, derive_dvu,
                     derive_step, dynamic_method, dynamic_sim, level_table_for)
from .predict import (PREDICTION_MODES, Neighborhood, Prediction,
                      neighborhood_for_item, predict, recommend_top_n)
from .cache import (SimilarityCache, cache_fingerprint, candidate_pairs,
                    get_or_compute, load_cache, precompute, save_cache)
from .evaluate import (CSV_COLUMNS, EvalReport, PredictionPair, SplitSpec,
                       average_report, default_relevance_threshold,
                       evaluate_split, hit_rate, kfold_split, mae, nmae,
                       precision_recall_f1, render_csv, render_json, rmse,
                       run_experiment, split_holdout)
from .ingest import DatasetFormat, DatasetStats, FORMATS, dataset_stats, parse_ratings

__version__ = "1.0.0"

__all__ = [
    "CfLevelsError", "ConfigError", "EmptyInputError", "EmptySetError",
    "FingerprintMismatchError", "MalformedLineError", "OutOfScaleRatingError",
    "TooFewItemsError", "TooFewUsersError", "UnknownItemError", "UnknownUserError",
    "RatingRecord", "RatingScale", "RatingsMatrix", "build_matrix",
    "co_rated_items", "raters_of", "user_mean_over",
    "METHOD_NAMES", "PlusParams", "SimilarityMethod", "StaticParams",
    "apply_spcc", "apply_static", "apply_wpcc", "make_method", "pcc",
    "plus_adjust", "spcc", "static_proposed", "wpcc",
    "MIN_CO_RATED", "NEGATIVE_FORMS", "Band", "LevelTable", "apply_dynamic",
    "build_level_table", "derive_dvi", "derive_dvu", "derive_step",
    "dynamic_method", "dynamic_sim", "level_table_for",
    "PREDICTION_MODES", "Neighborhood", "Prediction", "neighborhood_for_item",
    "predict", "recommend_top_n",
    "SimilarityCache", "cache_fingerprint", "candidate_pairs", "get_or_compute",
    "load_cache", "precompute", "save_cache",
    "CSV_COLUMNS", "EvalReport", "PredictionPair", "SplitSpec",
    "average_report", "default_relevance_threshold", "evaluate_split",
    "hit_rate", "kfold_split", "mae", "nmae", "precision_recall_f1",
    "render_csv", "render_json", "rmse", "run_experiment", "split_holdout",
    "DatasetFormat", "DatasetStats", "FORMATS", "dataset_stats", "parse_ratings",
    "__version__",
]
