use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ToxicityError;
use crate::model::{lexical_features, FeatureRecord};
use crate::stats::{welch_t, StatResult};

pub const FEATURES: [&str; 6] = ["hashtags", "mentions", "words", "chars", "emojis", "pct_with_emoji"];

fn feature_values(f: &FeatureRecord) -> [f64; 6] {
    [
        f.hashtags as f64,
        f.mentions as f64,
        f.words as f64,
        f.chars as f64,
        f.emojis as f64,
        if f.has_emoji { 1.0 } else { 0.0 },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureComparison {
    pub mean_toxic: f64,
    pub mean_nontoxic: f64,
    pub delta: f64,
    /// Absent when a side has fewer than two posts or both sides are constant.
    pub welch_t: Option<StatResult>,
}

/// Mean lexical features of toxic vs non-toxic posts. `pct_with_emoji` is the
/// share of posts with at least one emoji.
pub fn linguistic_comparison(
    toxic: &[&str],
    nontoxic: &[&str],
) -> Result<BTreeMap<&'static str, FeatureComparison>, ToxicityError> {
    if toxic.is_empty() {
        return Err(ToxicityError::EmptySet("toxic"));
    }
    if nontoxic.is_empty() {
        return Err(ToxicityError::EmptySet("non-toxic"));
    }
    let columns = |texts: &[&str]| {
        let mut cols = vec![Vec::with_capacity(texts.len()); FEATURES.len()];
        for t in texts {
            for (c, v) in cols.iter_mut().zip(feature_values(&lexical_features(t))) {
                c.push(v);
            }
        }
        cols
    };
    let (a, b) = (columns(toxic), columns(nontoxic));
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(FEATURES
        .iter()
        .zip(a.iter().zip(&b))
        .map(|(name, (x, y))| {
            let (mx, my) = (mean(x), mean(y));
            (*name, FeatureComparison { mean_toxic: mx, mean_nontoxic: my, delta: mx - my, welch_t: welch_t(x, y).ok() })
        })
        .collect())
}
