use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{build_bundles, FeatureBundle, Level, NeighborMode, PredictError};
use crate::model::{AgentId, Snapshot};
use crate::text::EncoderPort;
use crate::util::substream;

pub const MIN_PER_SIDE: usize = 10;
pub const MAX_PER_SIDE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub seed: u64,
    /// Train, validation and test shares.
    pub fractions: [f64; 3],
    /// Draw the same number of positive and negative rows.
    pub balanced: bool,
    pub max_per_side: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { seed: 0, fractions: [0.8, 0.1, 0.1], balanced: true, max_per_side: MAX_PER_SIDE }
    }
}

impl SplitSpec {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    fn validate(&self) -> Result<(), PredictError> {
        let sum: f64 = self.fractions.iter().sum();
        if self.fractions.iter().any(|f| !(0.0..=1.0).contains(f)) || (sum - 1.0).abs() > 1e-9 {
            return Err(PredictError::InvalidConfig(format!("split fractions {:?} must sum to 1", self.fractions)));
        }
        if self.max_per_side == 0 {
            return Err(PredictError::InvalidConfig("max_per_side must be positive".into()));
        }
        Ok(())
    }
}

/// Sampled rows and a train/validation/test partition of their indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub level: Level,
    pub split: SplitSpec,
    pub rows: Vec<FeatureBundle>,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Dataset {
    pub fn width(&self) -> usize {
        self.rows.first().map_or(0, |r| self.level.width(r.dim()))
    }

    pub fn features(&self, idx: &[usize]) -> Vec<Vec<f64>> {
        idx.iter().map(|&i| self.rows[i].features(self.level)).collect()
    }

    pub fn targets(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().map(|&i| self.rows[i].target).collect()
    }

    pub fn labels(&self, idx: &[usize]) -> Vec<i8> {
        idx.iter().map(|&i| self.rows[i].class_label).collect()
    }

    pub fn split_of(&self, i: usize) -> &'static str {
        if self.train.contains(&i) {
            "train"
        } else if self.val.contains(&i) {
            "val"
        } else {
            "test"
        }
    }
}

pub fn build_dataset(
    snap: &Snapshot,
    scores: &BTreeMap<AgentId, f64>,
    enc: &dyn EncoderPort,
    level: Level,
    split: SplitSpec,
    mode: NeighborMode,
) -> Result<Dataset, PredictError> {
    dataset_from_bundles(&build_bundles(snap, scores, enc, mode)?, level, split)
}

/// Sample rows (balanced if requested) and split them by `split.seed`.
pub fn dataset_from_bundles(bundles: &[FeatureBundle], level: Level, split: SplitSpec) -> Result<Dataset, PredictError> {
    split.validate()?;
    let mut sorted: Vec<&FeatureBundle> = bundles.iter().collect();
    sorted.sort_by(|a, b| a.agent_id.cmp(&b.agent_id));
    let (mut pos, mut neg): (Vec<&FeatureBundle>, Vec<&FeatureBundle>) = sorted.into_iter().partition(|b| b.class_label > 0);
    if pos.len() < MIN_PER_SIDE || neg.len() < MIN_PER_SIDE {
        return Err(PredictError::InsufficientBalance { positives: pos.len(), negatives: neg.len(), needed: MIN_PER_SIDE });
    }
    let mut picked: Vec<FeatureBundle> = if split.balanced {
        let m = pos.len().min(neg.len()).min(split.max_per_side);
        pos.shuffle(&mut substream(split.seed, "predict/positives"));
        neg.shuffle(&mut substream(split.seed, "predict/negatives"));
        pos[..m].iter().chain(&neg[..m]).map(|b| (*b).clone()).collect()
    } else {
        pos.iter().chain(&neg).map(|b| (*b).clone()).collect()
    };
    picked.shuffle(&mut substream(split.seed, "predict/split"));
    let n = picked.len();
    let n_train = (split.fractions[0] * n as f64).round() as usize;
    let n_val = ((split.fractions[1] * n as f64).round() as usize).min(n - n_train);
    Ok(Dataset {
        level,
        split,
        train: (0..n_train).collect(),
        val: (n_train..n_train + n_val).collect(),
        test: (n_train + n_val..n).collect(),
        rows: picked,
    })
}

/// Header: `agent_id,split,target,class_label,f0..f{w-1}`.
pub fn write_dataset_csv(out: impl Write, ds: &Dataset) -> Result<(), PredictError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["agent_id".to_string(), "split".into(), "target".into(), "class_label".into()];
    header.extend((0..ds.width()).map(|i| format!("f{i}")));
    w.write_record(&header)?;
    for (i, row) in ds.rows.iter().enumerate() {
        let mut rec = vec![row.agent_id.0.clone(), ds.split_of(i).into(), row.target.to_string(), row.class_label.to_string()];
        rec.extend(row.features(ds.level).iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
