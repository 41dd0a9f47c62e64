//! Cross-validated classification of feature vectors and the grid search
//! over patch configurations.

mod classifier;
mod cv;
mod folds;
mod grid;
mod metrics;
mod scaler;

pub use classifier::{
    fit_predict, hyper_grid, train_predict, ClassifierKind, Depth, Hyper, Prediction,
};
pub use cv::{cross_validate, cv_csv, CvOptions, CvReport, Dataset, FoldResult};
pub use folds::{split, stratified_kfold};
pub use grid::{
    grid_csv, parse_grid_ids, pca_trials, rank, run_trials, select_top, stage1_trials,
    stat_combinations, top_count, RankMetric, TrialResult, TrialSpec, PCA_COMPONENTS, TOP_FRACTION,
};
pub use metrics::{auc, metrics, Metrics};
pub use scaler::Standardizer;

/// Independent seed for stream `stream` of a master seed (SplitMix64).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
