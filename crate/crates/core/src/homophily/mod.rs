//! Homophily and influence measurements over follow graphs and post text.

mod community;
mod convergence;
mod corpus;
mod drift;
mod follow;

use std::collections::BTreeMap;

use chrono::{DateTime, Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Timestamp;
use crate::text::TextError;

pub use community::{community_homophily, AgentHomophily, CommunityConfig, HomophilyReport};
pub use convergence::{neighbor_convergence, Cohort, ConvergenceConfig, ConvergenceReport, PostWindowing};
pub use corpus::EncodedCorpus;
pub use drift::{backstory_drift, DriftConfig, DriftMeasure};
pub use follow::{individual_follow_homophily, FollowConfig, FollowHomophilyReport, WindowStat};

#[derive(Debug, Error)]
pub enum HomophilyError {
    #[error("no community is large enough to analyze")]
    NoCommunities,
    #[error("community {community} has {available} outside agents with posts, fewer than n_random = {n_random}")]
    InsufficientOutsiders { community: usize, available: usize, n_random: usize },
    #[error("no follow events to analyze")]
    NoFollowEvents,
    #[error("no agent with a backstory has posts")]
    NoBackstoryAgents,
    #[error("no follow edges to analyze")]
    NoEdges,
    #[error("every similarity baseline is zero; the ratio is undefined")]
    ZeroBaseline,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

/// Mean and count for one bucket of a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BucketStat {
    pub mean: f64,
    pub n: usize,
}

/// Bucketed similarity means. Buckets with fewer than the configured
/// minimum count are left out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilaritySeries {
    pub measure: String,
    pub buckets: BTreeMap<u64, BucketStat>,
}

impl SimilaritySeries {
    fn from_sums(measure: &str, sums: BTreeMap<u64, (f64, usize)>, min_n: usize) -> Self {
        let buckets = sums
            .into_iter()
            .filter(|(_, (_, n))| *n >= min_n.max(1))
            .map(|(b, (s, n))| (b, BucketStat { mean: s / n as f64, n }))
            .collect();
        Self { measure: measure.to_owned(), buckets }
    }

    /// `mean(last bucket) / mean(first bucket)`.
    pub fn last_first_ratio(&self) -> Option<f64> {
        let first = self.buckets.values().next()?;
        let last = self.buckets.values().next_back()?;
        (first.mean != 0.0).then(|| last.mean / first.mean)
    }

    /// Spearman correlation between bucket index and bucket mean.
    pub fn trend(&self) -> Option<f64> {
        let x: Vec<f64> = self.buckets.keys().map(|&k| k as f64).collect();
        let y: Vec<f64> = self.buckets.values().map(|b| b.mean).collect();
        crate::stats::spearman(&x, &y)
    }

    /// `bucket,mean,n` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bucket,mean,n\n");
        for (b, s) in &self.buckets {
            out.push_str(&format!("{b},{},{}\n", s.mean, s.n));
        }
        out
    }
}

/// How follow events are grouped in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "ms")]
pub enum Window {
    /// UTC calendar months.
    CalendarMonth,
    /// Fixed-length windows aligned to the epoch.
    FixedMs(i64),
}

impl Window {
    /// `[start, end)` of the window containing `t`.
    pub fn bounds(&self, t: Timestamp) -> (Timestamp, Timestamp) {
        match *self {
            Window::FixedMs(w) => {
                let start = t.div_euclid(w) * w;
                (start, start + w)
            }
            Window::CalendarMonth => {
                let d = DateTime::from_timestamp_millis(t).expect("timestamp in chrono range").date_naive();
                let start = NaiveDate::from_ymd_opt(d.year(), d.month(), 1).expect("valid month start");
                let next = if d.month() == 12 {
                    NaiveDate::from_ymd_opt(d.year() + 1, 1, 1)
                } else {
                    NaiveDate::from_ymd_opt(d.year(), d.month() + 1, 1)
                }
                .expect("valid month start");
                let ms = |n: NaiveDate| n.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp_millis();
                (ms(start), ms(next))
            }
        }
    }

    fn validate(&self) -> Result<(), HomophilyError> {
        match self {
            Window::FixedMs(w) if *w <= 0 => Err(HomophilyError::InvalidConfig("window length must be positive".into())),
            _ => Ok(()),
        }
    }
}
