//! Summary statistics, trends and the outlier machinery.

pub mod boxplot;
pub mod dbscan;
pub mod outliers;
pub mod pca;
pub mod stats;
pub mod summary;

pub use boxplot::{boxplot_stats, group_boxplots, BoxStats};
pub use dbscan::{dbscan, ClusterLabels, NOISE};
pub use outliers::{detect_outliers, ClusterSpace, OutlierConfig, OutlierReport, DEFAULT_FEATURES};
pub use pca::{pca, standardize, PcaResult, Standardized};
pub use summary::{
    country_share, cumulative_by_year, resolution_trend, summary_distribution, Bucket, CumulativeSeries, Share,
    TrendPoint, MISSING,
};
