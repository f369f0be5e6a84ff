//! Scoring, softmax-average fusion, PAD metrics, rank-1 accuracy and the
//! distribution statistics behind boxplots and score histograms.

mod metrics;
mod scores;
mod stats;

pub use metrics::{pad_metrics, rank1, MetricsReport};
pub use scores::{fuse_scores, read_scores_csv, score_dataset, write_scores_csv, Probe, ScoreModality, ScoreRecord};
pub use stats::{boxplot_stats, histogram_csv, histogram_value, quantile, score_histogram, BoxplotStats, HistogramBin};
