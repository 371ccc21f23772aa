use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    dataset_from_bundles, evaluate, rmse, Dataset, FeatureBundle, LearnerConfig, LearnerPort, Level, LinearLearner,
    Metrics, PredictError, SplitSpec, Standardizer,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessConfig {
    /// Ridge penalties tried on the validation split; the first wins ties.
    pub lambda_grid: Vec<f64>,
    pub logistic_max_iter: usize,
    pub split: SplitSpec,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self { lambda_grid: vec![1.0], logistic_max_iter: 2000, split: SplitSpec::default() }
    }
}

/// Standardize on train, pick λ on validation, fit ridge for targets and
/// logistic for labels, score on test.
pub fn run_level(ds: &Dataset, cfg: &HarnessConfig) -> Result<Metrics, PredictError> {
    if ds.test.is_empty() {
        return Err(PredictError::EmptyTest);
    }
    if cfg.lambda_grid.is_empty() {
        return Err(PredictError::InvalidConfig("lambda_grid is empty".into()));
    }
    let scaler = Standardizer::fit(&ds.features(&ds.train));
    let x_train = scaler.apply(&ds.features(&ds.train));
    let x_val = scaler.apply(&ds.features(&ds.val));
    let x_test = scaler.apply(&ds.features(&ds.test));
    let y_train = ds.targets(&ds.train);

    let mut best: Option<(f64, f64)> = None;
    for &lambda in &cfg.lambda_grid {
        let mut ridge = LinearLearner::new(LearnerConfig::Ridge { lambda });
        ridge.fit(&x_train, &y_train)?;
        let score = if x_val.is_empty() { 0.0 } else { rmse(&ridge.predict(&x_val)?, &ds.targets(&ds.val))? };
        if best.map_or(true, |(_, s)| score < s) {
            best = Some((lambda, score));
        }
    }
    let lambda = best.expect("grid is non-empty").0;

    let mut ridge = LinearLearner::new(LearnerConfig::Ridge { lambda });
    ridge.fit(&x_train, &y_train)?;
    let mut logit = LinearLearner::new(LearnerConfig::Logistic { lambda, max_iter: cfg.logistic_max_iter });
    let label_train: Vec<f64> = ds.labels(&ds.train).iter().map(|&l| f64::from(l)).collect();
    logit.fit(&x_train, &label_train)?;
    let predicted_labels: Vec<i8> =
        logit.predict(&x_test)?.iter().map(|&p| if p > 0.5 { 1 } else { -1 }).collect();
    evaluate(&ridge.predict(&x_test)?, &ds.targets(&ds.test), &predicted_labels, &ds.labels(&ds.test))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    /// Sample standard deviation across seeds.
    pub sd: f64,
}

impl MeanSd {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = if xs.len() > 1 { (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: Level,
    pub rmse: MeanSd,
    pub accuracy: MeanSd,
    pub f1: MeanSd,
    /// Per-seed metrics in seed order.
    pub runs: Vec<Metrics>,
    /// Whether mean RMSE dropped relative to the previous row.
    pub improved_rmse: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementalReport {
    pub seeds: Vec<u64>,
    pub rows: Vec<LevelRow>,
}

impl IncrementalReport {
    pub fn row(&self, level: Level) -> Option<&LevelRow> {
        self.rows.iter().find(|r| r.level == level)
    }

    /// One row per level: `level,rmse_mean,rmse_sd,accuracy_mean,...,improved_rmse`.
    pub fn write_csv(&self, out: impl Write) -> Result<(), PredictError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "level", "rmse_mean", "rmse_sd", "accuracy_mean", "accuracy_sd", "f1_mean", "f1_sd", "improved_rmse",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.level.name().to_string(),
                r.rmse.mean.to_string(),
                r.rmse.sd.to_string(),
                r.accuracy.mean.to_string(),
                r.accuracy.sd.to_string(),
                r.f1.mean.to_string(),
                r.f1.sd.to_string(),
                r.improved_rmse.map_or(String::new(), |b| b.to_string()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluate each level on the same seeded splits. Rows keep the order of `levels`.
pub fn incremental_report(
    bundles: &[FeatureBundle],
    levels: &[Level],
    seeds: &[u64],
    cfg: &HarnessConfig,
) -> Result<IncrementalReport, PredictError> {
    if seeds.len() < 3 {
        return Err(PredictError::InvalidConfig(format!("need at least 3 seeds, got {}", seeds.len())));
    }
    if levels.is_empty() {
        return Err(PredictError::InvalidConfig("no levels".into()));
    }
    let jobs: Vec<(usize, u64)> = (0..levels.len()).flat_map(|l| seeds.iter().map(move |&s| (l, s))).collect();
    let results: Vec<Metrics> = jobs
        .par_iter()
        .map(|&(l, seed)| {
            let ds = dataset_from_bundles(bundles, levels[l], cfg.split.with_seed(seed))?;
            run_level(&ds, cfg)
        })
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<LevelRow> = Vec::with_capacity(levels.len());
    for (l, runs) in results.chunks(seeds.len()).enumerate() {
        let pick = |f: fn(&Metrics) -> f64| MeanSd::of(&runs.iter().map(f).collect::<Vec<_>>());
        let rmse = pick(|m| m.rmse);
        let improved_rmse = rows.last().map(|prev| rmse.mean < prev.rmse.mean);
        rows.push(LevelRow {
            level: levels[l],
            rmse,
            accuracy: pick(|m| m.accuracy),
            f1: pick(|m| m.f1),
            runs: runs.to_vec(),
            improved_rmse,
        });
    }
    Ok(IncrementalReport { seeds: seeds.to_vec(), rows })
}
