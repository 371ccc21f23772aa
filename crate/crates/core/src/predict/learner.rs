use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::PredictError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerConfig {
    /// Least squares with an L2 penalty on the weights (never the intercept).
    Ridge { lambda: f64 },
    /// L2-penalized logistic regression on labels `y > 0`.
    Logistic { lambda: f64, max_iter: usize },
}

pub trait LearnerPort: Send {
    fn fit(&mut self, x: &[Vec<f64>], y: &[f64]) -> Result<(), PredictError>;
    /// Regression output, or `P(y = +1)` for classifiers.
    fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>, PredictError>;
}

/// Per-column mean and scale learned on training rows; constant columns keep scale 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; d];
        for row in x {
            for ((s, v), m) in scale.iter_mut().zip(row).zip(&mean) {
                *s += (v - m).powi(2) / n;
            }
        }
        for s in &mut scale {
            *s = if *s > 1e-24 { s.sqrt() } else { 1.0 };
        }
        Self { mean, scale }
    }

    pub fn apply(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|row| row.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()).collect()
    }
}

fn check_shape(x: &[Vec<f64>], y: Option<&[f64]>, d: Option<usize>) -> Result<usize, PredictError> {
    let width = x.first().map(Vec::len).ok_or(PredictError::EmptyInput)?;
    if x.iter().any(|r| r.len() != width) || d.is_some_and(|d| d != width) {
        return Err(PredictError::ShapeMismatch);
    }
    if y.is_some_and(|y| y.len() != x.len()) {
        return Err(PredictError::ShapeMismatch);
    }
    if x.iter().flatten().chain(y.into_iter().flatten()).any(|v| !v.is_finite()) {
        return Err(PredictError::NonFinite);
    }
    Ok(width)
}

/// Rows with a leading 1 for the intercept.
fn design(x: &[Vec<f64>]) -> DMatrix<f64> {
    let d = x[0].len();
    DMatrix::from_fn(x.len(), d + 1, |i, j| if j == 0 { 1.0 } else { x[i][j - 1] })
}

/// Linear baseline learner. Weights are `[intercept, w_1 .. w_d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearLearner {
    pub config: LearnerConfig,
    pub weights: Option<Vec<f64>>,
}

impl LinearLearner {
    pub fn new(config: LearnerConfig) -> Self {
        Self { config, weights: None }
    }
}

/// Nesterov-accelerated gradient ascent with the fixed step `1 / L`, where
/// `L = ‖X‖₂² / 4 + λ` bounds the curvature of the penalized log-likelihood.
/// Momentum restarts whenever it points against the gradient. Stops when the
/// gradient's max-norm falls below 1e-12 · n.
fn fit_logistic(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, max_iter: usize) -> Result<Vec<f64>, PredictError> {
    let (n, p) = x.shape();
    let mut penalty = DVector::from_element(p, lambda);
    penalty[0] = 0.0;
    let xt = x.transpose();
    let top = x.clone().singular_values().max();
    let step = 1.0 / (0.25 * top * top + lambda);
    let grad = |w: &DVector<f64>| &xt * (y - (x * w).map(sigmoid)) - penalty.component_mul(w);
    let mut w = DVector::zeros(p);
    let mut look = w.clone();
    let mut k = 0.0;
    for _ in 0..max_iter {
        let g = grad(&w);
        if g.amax() < 1e-12 * n as f64 {
            return Ok(w.iter().copied().collect());
        }
        let gl = grad(&look);
        let next = &look + &gl * step;
        let moved = &next - &w;
        if gl.dot(&moved) < 0.0 {
            k = 0.0;
            look = next.clone();
        } else {
            k += 1.0;
            look = &next + moved * ((k - 1.0) / (k + 2.0));
        }
        w = next;
    }
    log::warn!("logistic regression stopped after {max_iter} iterations");
    Ok(w.iter().copied().collect())
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LearnerPort for LinearLearner {
    fn fit(&mut self, x: &[Vec<f64>], y: &[f64]) -> Result<(), PredictError> {
        check_shape(x, Some(y), None)?;
        let xm = design(x);
        let p = xm.ncols();
        let w = match self.config {
            LearnerConfig::Ridge { lambda } => {
                if lambda < 0.0 {
                    return Err(PredictError::InvalidConfig("lambda must be non-negative".into()));
                }
                let mut a = xm.transpose() * &xm;
                for j in 1..p {
                    a[(j, j)] += lambda;
                }
                if lambda == 0.0 {
                    let sv = a.clone().singular_values();
                    if sv.min() <= sv.max() * 1e-12 * p as f64 {
                        return Err(PredictError::SingularSystem);
                    }
                }
                let b = xm.transpose() * DVector::from_column_slice(y);
                let sol = match a.clone().cholesky() {
                    Some(c) => c.solve(&b),
                    None => a.lu().solve(&b).ok_or(PredictError::SingularSystem)?,
                };
                if sol.iter().any(|v| !v.is_finite()) {
                    return Err(PredictError::SingularSystem);
                }
                sol.iter().copied().collect()
            }
            LearnerConfig::Logistic { lambda, max_iter } => {
                if lambda < 0.0 {
                    return Err(PredictError::InvalidConfig("lambda must be non-negative".into()));
                }
                let labels = DVector::from_iterator(y.len(), y.iter().map(|v| if *v > 0.0 { 1.0 } else { 0.0 }));
                fit_logistic(&xm, &labels, lambda, max_iter)?
            }
        };
        self.weights = Some(w);
        Ok(())
    }

    fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>, PredictError> {
        let w = self.weights.as_ref().ok_or(PredictError::NotFitted)?;
        check_shape(x, None, Some(w.len() - 1))?;
        Ok(x.iter()
            .map(|row| {
                let z = w[0] + row.iter().zip(&w[1..]).map(|(a, b)| a * b).sum::<f64>();
                match self.config {
                    LearnerConfig::Ridge { .. } => z,
                    LearnerConfig::Logistic { .. } => sigmoid(z),
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;

    /// Gaussian elimination with partial pivoting on an explicit augmented matrix.
    fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            for r in col + 1..n {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            x[r] = (b[r] - (r + 1..n).map(|c| a[r][c] * x[c]).sum::<f64>()) / a[r][r];
        }
        x
    }

    /// Ridge by centering: (XcᵀXc + λI) w = Xcᵀ yc, intercept ȳ − x̄ᵀw.
    fn ridge_oracle(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Vec<f64> {
        let (n, d) = (x.len(), x[0].len());
        let xbar: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
        let ybar = y.iter().sum::<f64>() / n as f64;
        let mut a = vec![vec![0.0; d]; d];
        let mut b = vec![0.0; d];
        for (row, yi) in x.iter().zip(y) {
            for i in 0..d {
                b[i] += (row[i] - xbar[i]) * (yi - ybar);
                for j in 0..d {
                    a[i][j] += (row[i] - xbar[i]) * (row[j] - xbar[j]);
                }
            }
        }
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += lambda;
        }
        let w = solve(a, b);
        let b0 = ybar - xbar.iter().zip(&w).map(|(m, w)| m * w).sum::<f64>();
        std::iter::once(b0).chain(w).collect()
    }

    fn random_problem(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = crate::util::rng(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        (x, y)
    }

    #[test]
    fn ridge_matches_normal_equations() {
        for seed in 0..10 {
            let (x, y) = random_problem(5, 3, seed);
            for lambda in [0.0, 0.3, 2.0] {
                let mut l = LinearLearner::new(LearnerConfig::Ridge { lambda });
                l.fit(&x, &y).unwrap();
                let want = ridge_oracle(&x, &y, lambda);
                for (a, b) in l.weights.as_ref().unwrap().iter().zip(&want) {
                    assert!((a - b).abs() < 1e-9, "seed {seed} λ {lambda}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn exact_linear_targets_are_recovered() {
        let (x, _) = random_problem(40, 4, 1);
        let y: Vec<f64> = x.iter().map(|r| 0.3 + r[0] - 2.0 * r[1] + 0.5 * r[3]).collect();
        let mut l = LinearLearner::new(LearnerConfig::Ridge { lambda: 1e-12 });
        l.fit(&x, &y).unwrap();
        let pred = l.predict(&x).unwrap();
        let rmse = (pred.iter().zip(&y).map(|(p, y)| (p - y).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
        assert!(rmse < 1e-6);
    }

    #[test]
    fn rank_deficient_without_penalty_is_singular() {
        let x = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        let y = vec![1.0, 2.0, 3.0];
        let mut l = LinearLearner::new(LearnerConfig::Ridge { lambda: 0.0 });
        assert!(matches!(l.fit(&x, &y), Err(PredictError::SingularSystem)));
        let mut l = LinearLearner::new(LearnerConfig::Ridge { lambda: 0.1 });
        l.fit(&x, &y).unwrap();
    }

    /// Newton's method on the same penalized likelihood.
    fn logistic_oracle(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Vec<f64> {
        let p = x[0].len() + 1;
        let rows: Vec<Vec<f64>> = x.iter().map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect()).collect();
        let mut w = vec![0.0; p];
        for _ in 0..100 {
            let mut g = vec![0.0; p];
            let mut h = vec![vec![0.0; p]; p];
            for (r, yi) in rows.iter().zip(y) {
                let z: f64 = r.iter().zip(&w).map(|(a, b)| a * b).sum();
                let mu = 1.0 / (1.0 + (-z).exp());
                let t = if *yi > 0.0 { 1.0 } else { 0.0 };
                for i in 0..p {
                    g[i] += r[i] * (t - mu);
                    for j in 0..p {
                        h[i][j] += r[i] * r[j] * mu * (1.0 - mu);
                    }
                }
            }
            for i in 1..p {
                g[i] -= lambda * w[i];
                h[i][i] += lambda;
            }
            let step = solve(h, g);
            for i in 0..p {
                w[i] += step[i];
            }
        }
        w
    }

    #[test]
    fn logistic_matches_newton() {
        for seed in 0..5 {
            let (x, y) = random_problem(30, 3, seed + 100);
            let mut l = LinearLearner::new(LearnerConfig::Logistic { lambda: 1.0, max_iter: 100_000 });
            l.fit(&x, &y).unwrap();
            let want = logistic_oracle(&x, &y, 1.0);
            for (a, b) in l.weights.as_ref().unwrap().iter().zip(&want) {
                assert!((a - b).abs() < 1e-9, "seed {seed}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn separable_points() {
        let x = vec![vec![-1.0], vec![1.0]];
        let y = vec![-1.0, 1.0];
        let mut l = LinearLearner::new(LearnerConfig::Logistic { lambda: 0.01, max_iter: 1000 });
        l.fit(&x, &y).unwrap();
        let p = l.predict(&x).unwrap();
        assert!(p[0] < 0.5 && p[1] > 0.5);
    }

    #[test]
    fn standardizer() {
        let x = vec![vec![1.0, 5.0], vec![3.0, 5.0]];
        let s = Standardizer::fit(&x);
        assert_eq!(s.apply(&x), vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn predict_before_fit() {
        let l = LinearLearner::new(LearnerConfig::Ridge { lambda: 1.0 });
        assert!(matches!(l.predict(&[vec![1.0]]), Err(PredictError::NotFitted)));
    }
}
