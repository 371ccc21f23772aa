//! Significance tests shared by the analysis modules.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal, StudentsT};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("group {group} has {n} observations; need at least {min}")]
    TooFewObservations { group: usize, n: usize, min: usize },
    #[error("need at least {0} groups")]
    TooFewGroups(usize),
    #[error("every group has zero variance")]
    DegenerateGroup,
    #[error("non-finite observation")]
    NonFinite,
    #[error("empty contingency table")]
    EmptyTable,
}

/// Test statistic with p-value and effect size. `df2` is set for F tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Cohen's d, η², or a risk difference depending on the test.
    pub effect_size: f64,
    pub df: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub df2: Option<f64>,
}

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn check_groups(groups: &[&[f64]]) -> Result<(), StatsError> {
    for (i, g) in groups.iter().enumerate() {
        if g.len() < 2 {
            return Err(StatsError::TooFewObservations { group: i, n: g.len(), min: 2 });
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(StatsError::NonFinite);
        }
    }
    Ok(())
}

/// Two-sided p-value of a t statistic.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// Welch's t test of `a` vs `b` with Welch–Satterthwaite df and pooled-sd Cohen's d.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<StatResult, StatsError> {
    check_groups(&[a, b])?;
    let (m1, v1) = moments(a);
    let (m2, v2) = moments(b);
    if v1 == 0.0 && v2 == 0.0 {
        return Err(StatsError::DegenerateGroup);
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (s1, s2) = (v1 / n1, v2 / n2);
    let t = (m1 - m2) / (s1 + s2).sqrt();
    let df = (s1 + s2).powi(2) / (s1 * s1 / (n1 - 1.0) + s2 * s2 / (n2 - 1.0));
    let pooled = (((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / (n1 + n2 - 2.0)).sqrt();
    Ok(StatResult { statistic: t, p_value: t_two_sided(t, df), effect_size: (m1 - m2) / pooled, df, df2: None })
}

/// One-way ANOVA; effect size is η².
pub fn anova(groups: &[&[f64]]) -> Result<StatResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(2));
    }
    check_groups(groups)?;
    let total_n: usize = groups.iter().map(|g| g.len()).sum();
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / total_n as f64;
    let (mut ssb, mut ssw) = (0.0, 0.0);
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += g.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    }
    if ssw == 0.0 {
        return Err(StatsError::DegenerateGroup);
    }
    let df1 = (groups.len() - 1) as f64;
    let df2 = (total_n - groups.len()) as f64;
    let f = (ssb / df1) / (ssw / df2);
    let p = FisherSnedecor::new(df1, df2).expect("positive df").sf(f);
    Ok(StatResult { statistic: f, p_value: p.clamp(0.0, 1.0), effect_size: ssb / (ssb + ssw), df: df1, df2: Some(df2) })
}

/// Two-proportion z test with pooled variance; effect size is `p1 − p2`.
pub fn two_proportion_z(x1: u64, n1: u64, x2: u64, n2: u64) -> Result<StatResult, StatsError> {
    if n1 == 0 || n2 == 0 {
        return Err(StatsError::EmptyTable);
    }
    let (p1, p2) = (x1 as f64 / n1 as f64, x2 as f64 / n2 as f64);
    let pooled = (x1 + x2) as f64 / (n1 + n2) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let (z, p) = if se == 0.0 {
        (0.0, 1.0)
    } else {
        let z = (p1 - p2) / se;
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        (z, (2.0 * normal.sf(z.abs())).min(1.0))
    };
    Ok(StatResult { statistic: z, p_value: p, effect_size: p1 - p2, df: 1.0, df2: None })
}

/// Two-sided Fisher exact test on `[[a, b], [c, d]]`: total probability of
/// tables with the same margins that are no more likely than the observed one.
pub fn fisher_exact(a: u64, b: u64, c: u64, d: u64) -> Result<f64, StatsError> {
    let n = a + b + c + d;
    if n == 0 {
        return Err(StatsError::EmptyTable);
    }
    let (r1, r2, c1) = (a + b, c + d, a + c);
    let lf: Vec<f64> = {
        let mut v = vec![0.0; n as usize + 1];
        for k in 2..=n as usize {
            v[k] = v[k - 1] + (k as f64).ln();
        }
        v
    };
    let fixed = lf[r1 as usize] + lf[r2 as usize] + lf[c1 as usize] + lf[(n - c1) as usize] - lf[n as usize];
    let log_p = |x: u64| {
        fixed - lf[x as usize] - lf[(r1 - x) as usize] - lf[(c1 - x) as usize] - lf[(r2 + x - c1) as usize]
    };
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    let observed = log_p(a);
    let mut p = 0.0;
    for x in lo..=hi {
        let lp = log_p(x);
        if lp <= observed + 1e-7 {
            p += lp.exp();
        }
    }
    Ok(p.min(1.0))
}

/// Average ranks (1-based); ties share the mean of their positions.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Pearson correlation; `None` if fewer than two points or a constant input.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (mx, _) = moments(x);
    let (my, _) = moments(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Spearman's rank correlation (Pearson on average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() {
        return None;
    }
    pearson(&ranks(x), &ranks(y))
}
