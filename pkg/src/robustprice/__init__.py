"""Outlier-robust day-ahead electricity price forecasting.

Hourly prices are screened with Tukey IQR fences and robust PCA
(low-rank plus sparse decomposition), turned into day-ahead features,
optionally projected with PCA, and compared across four OLS models.
"""
__version__ = "0.1.0"

from .ingest import (  # noqa: E402
    ColumnSchema,
    PriceMatrix,
    SeriesTable,
    StatsRow,
    build_price_matrix,
    parse_hourly_csv,
    pearson_correlation,
    yearly_descriptive_stats,
)
from .outliers import (  # noqa: E402
    IQRBounds,
    KDEConfig,
    OutlierReport,
    SparseDecomposition,
    default_lambda,
    iqr_bounds,
    iqr_filter,
    kde_anomalies,
    kde_score,
    rpca_decompose,
    singular_value_threshold,
    sparse_outliers,
)
from .features import (  # noqa: E402
    FeatureMatrix,
    PCAModel,
    Standardizer,
    build_features,
    explained_variance_ratio,
    fit_standardizer,
    pca_fit,
    pca_transform,
    transform_standardize,
)
from .regression import EvalReport, RegressionModel, chronological_split, ols_fit, predict, r2, rmse, run_model_suite  # noqa: E402
from .config import PipelineConfig  # noqa: E402
from .synth import SynthSpec, synth_generate  # noqa: E402
from .boxplot import BoxplotStats, boxplot_stats  # noqa: E402
