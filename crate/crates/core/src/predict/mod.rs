//! Predicting agent scores from backstory and neighbor features, with a
//! built-in linear baseline behind [`LearnerPort`].

mod dataset;
mod features;
mod learner;
mod metrics;
mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dataset::{build_dataset, dataset_from_bundles, write_dataset_csv, Dataset, SplitSpec, MAX_PER_SIDE, MIN_PER_SIDE};
pub use features::{build_bundles, synthetic_bundles, FeatureBundle, NeighborMode, SyntheticSpec};
pub use learner::{sigmoid, LearnerConfig, LearnerPort, LinearLearner, Standardizer};
pub use metrics::{evaluate, rmse, Confusion, Metrics};
pub use report::{incremental_report, run_level, HarnessConfig, IncrementalReport, LevelRow, MeanSd};

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("{positives} positive and {negatives} negative rows, need {needed} per side")]
    InsufficientBalance { positives: usize, negatives: usize, needed: usize },
    #[error("normal equations are singular; use lambda > 0")]
    SingularSystem,
    #[error("test split is empty")]
    EmptyTest,
    #[error("no rows")]
    EmptyInput,
    #[error("rows have inconsistent widths or lengths")]
    ShapeMismatch,
    #[error("non-finite value in features or targets")]
    NonFinite,
    #[error("model has not been fitted")]
    NotFitted,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Text(#[from] crate::text::TextError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which feature blocks enter the design matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    #[serde(rename = "B")]
    B,
    #[serde(rename = "B+NP")]
    BNp,
    #[serde(rename = "B+NO")]
    BNo,
    #[serde(rename = "B+NP+NO")]
    BNpNo,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::B, Level::BNp, Level::BNo, Level::BNpNo];

    pub fn name(self) -> &'static str {
        match self {
            Level::B => "B",
            Level::BNp => "B+NP",
            Level::BNo => "B+NO",
            Level::BNpNo => "B+NP+NO",
        }
    }

    pub fn has_posts(self) -> bool {
        matches!(self, Level::BNp | Level::BNpNo)
    }

    pub fn has_opinions(self) -> bool {
        matches!(self, Level::BNo | Level::BNpNo)
    }

    pub fn width(self, dim: usize) -> usize {
        dim + if self.has_posts() { dim } else { 0 } + usize::from(self.has_opinions())
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Level {
    type Err = PredictError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Level::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| PredictError::InvalidConfig(format!("unknown level `{s}`")))
    }
}
