//! Experimental protocol: split generation for both modes, the training
//! loop with early stopping, and per-modality experiment orchestration.

mod experiment;
mod splits;
mod train;

pub use experiment::{
    check_dataset, make_plans, run_experiment, run_plans, score_split, train_modality, ExperimentData,
    ExperimentSettings, Mode, SplitRun, SplitScores, TrainedModel,
};
pub use splits::{
    balance_real_pairs, closed_set_plans, make_closed_set_splits, make_open_set_splits, Ratios, SplitMode, SplitPlan,
};
pub use train::{train, train_prepared, EarlyStopping, EpochRecord, LabelMap, Prepared, Progress, TrainingHistory};
