//! L2-regularized logistic regression fit by gradient descent, one-vs-rest
//! for more than two classes.
//!
//! Objective per binary problem, on standardized features x̃:
//!
//!   (1/n) Σ [log(1 + exp(z)) - y·z] + (reg / 2n)·‖w‖²,   z = w·x̃ + b
//!
//! The intercept is not penalized.

use alloc::vec;
use alloc::vec::Vec;

use super::{argmax_first, Classifier, Dataset, LearnError, Matrix, Predictions};
use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct LogisticConfig {
    pub reg_strength: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            reg_strength: 1.0,
            max_iters: 1000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryWeights {
    pub bias: f64,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    classes: Vec<Label>,
    mean: Vec<f64>,
    /// Training std per feature; 0 marks a constant feature.
    scale: Vec<f64>,
    /// One entry for the larger class in the binary case, else one per class.
    weights: Vec<BinaryWeights>,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Regularized mean negative log-likelihood and its gradient
/// `(loss, grad_w, grad_b)` for 0/1 targets.
pub fn logistic_loss_and_grad(x: &Matrix, y: &[f64], w: &[f64], bias: f64, reg: f64) -> (f64, Vec<f64>, f64) {
    let n = x.n_rows() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (row, &t) in x.rows().zip(y) {
        let z = dot(row, w) + bias;
        loss += softplus(z) - t * z;
        let r = sigmoid(z) - t;
        gb += r;
        for (g, v) in gw.iter_mut().zip(row) {
            *g += r * v;
        }
    }
    let sq: f64 = w.iter().map(|v| v * v).sum();
    loss = loss / n + reg / (2.0 * n) * sq;
    for (g, v) in gw.iter_mut().zip(w) {
        *g = *g / n + reg / n * v;
    }
    (loss, gw, gb / n)
}

fn loss_only(x: &Matrix, y: &[f64], w: &[f64], bias: f64, reg: f64) -> f64 {
    let n = x.n_rows() as f64;
    let nll: f64 = x
        .rows()
        .zip(y)
        .map(|(row, &t)| {
            let z = dot(row, w) + bias;
            softplus(z) - t * z
        })
        .sum();
    nll / n + reg / (2.0 * n) * w.iter().map(|v| v * v).sum::<f64>()
}

/// Gradient descent with Armijo backtracking, stopping on gradient norm.
fn fit_binary(x: &Matrix, y: &[f64], cfg: &LogisticConfig) -> BinaryWeights {
    let d = x.n_cols();
    let mut w = vec![0.0; d];
    let mut bias = 0.0;
    let mut step = 1.0;
    for _ in 0..cfg.max_iters {
        let (loss, gw, gb) = logistic_loss_and_grad(x, y, &w, bias, cfg.reg_strength);
        let gnorm2 = gw.iter().map(|g| g * g).sum::<f64>() + gb * gb;
        if libm::sqrt(gnorm2) < cfg.tol {
            break;
        }
        let mut accepted = false;
        while step > 1e-12 {
            let cand: Vec<f64> = w.iter().zip(&gw).map(|(v, g)| v - step * g).collect();
            let cand_b = bias - step * gb;
            if loss_only(x, y, &cand, cand_b, cfg.reg_strength) <= loss - 0.5 * step * gnorm2 {
                w = cand;
                bias = cand_b;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        step = (step * 2.0).min(1e3);
    }
    BinaryWeights { bias, w }
}

impl LogisticModel {
    pub fn fit(train: &Dataset, cfg: &LogisticConfig) -> Result<Self, LearnError> {
        let classes = train.require_classes()?;
        if [cfg.reg_strength, cfg.tol].iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(LearnError::InvalidHyperParams(
                "reg_strength and tol must be non-negative",
            ));
        }
        let d = train.n_features();
        let n = train.len() as f64;
        let mut mean = vec![0.0; d];
        let mut scale = vec![0.0; d];
        for j in 0..d {
            let col = || train.x.rows().map(|r| r[j]);
            mean[j] = col().sum::<f64>() / n;
            let var = col().map(|v| (v - mean[j]) * (v - mean[j])).sum::<f64>() / n;
            let sd = libm::sqrt(var);
            let magnitude = train.x.rows().fold(0.0f64, |m, r| m.max(r[j].abs()));
            scale[j] = if sd > 1e-12 * magnitude { sd } else { 0.0 };
        }
        let mut model = Self {
            classes,
            mean,
            scale,
            weights: Vec::new(),
        };
        let xs = model.standardize(&train.x);
        let targets: Vec<Label> = if model.classes.len() == 2 {
            vec![model.classes[1]]
        } else {
            model.classes.clone()
        };
        model.weights = targets
            .iter()
            .map(|&c| {
                let y: Vec<f64> = train.y.iter().map(|&l| f64::from(u8::from(l == c))).collect();
                fit_binary(&xs, &y, cfg)
            })
            .collect();
        Ok(model)
    }

    pub fn from_parts(
        classes: Vec<Label>,
        mean: Vec<f64>,
        scale: Vec<f64>,
        weights: Vec<BinaryWeights>,
    ) -> Result<Self, LearnError> {
        let d = mean.len();
        let expected = if classes.len() == 2 { 1 } else { classes.len() };
        let ok = classes.len() >= 2
            && classes.windows(2).all(|p| p[0] < p[1])
            && scale.len() == d
            && weights.len() == expected
            && weights.iter().all(|bw| bw.w.len() == d);
        if !ok {
            return Err(LearnError::InvalidModel("inconsistent logistic model parts"));
        }
        Ok(Self {
            classes,
            mean,
            scale,
            weights,
        })
    }

    pub fn means(&self) -> &[f64] {
        &self.mean
    }

    pub fn scales(&self) -> &[f64] {
        &self.scale
    }

    pub fn weights(&self) -> &[BinaryWeights] {
        &self.weights
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    fn standardize(&self, x: &Matrix) -> Matrix {
        let mut data = Vec::with_capacity(x.n_rows() * x.n_cols());
        for row in x.rows() {
            for (j, v) in row.iter().enumerate() {
                data.push(if self.scale[j] == 0.0 {
                    0.0
                } else {
                    (v - self.mean[j]) / self.scale[j]
                });
            }
        }
        if x.n_rows() == 0 {
            return Matrix::empty(x.n_cols());
        }
        Matrix::new(data, x.n_cols()).expect("same width")
    }
}

impl Classifier for LogisticModel {
    fn classes(&self) -> &[Label] {
        &self.classes
    }

    fn predict(&self, x: &Matrix) -> Result<Predictions, LearnError> {
        x.check_width(self.n_features())?;
        let xs = self.standardize(x);
        let mut labels = Vec::with_capacity(x.n_rows());
        let mut proba = Vec::with_capacity(x.n_rows());
        for row in xs.rows() {
            let scores: Vec<f64> = self
                .weights
                .iter()
                .map(|bw| sigmoid(dot(row, &bw.w) + bw.bias))
                .collect();
            let p = if self.classes.len() == 2 {
                vec![1.0 - scores[0], scores[0]]
            } else {
                let total: f64 = scores.iter().sum();
                scores.iter().map(|s| s / total).collect()
            };
            labels.push(self.classes[argmax_first(&p)]);
            proba.push(p);
        }
        Ok(Predictions {
            classes: self.classes.clone(),
            labels,
            proba,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn separable_1d() -> Dataset {
        let xs = [-3.0, -2.5, -2.0, -1.5, -1.0, 1.0, 1.5, 2.0, 2.5, 3.0];
        let y = xs.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect();
        Dataset::new(Matrix::new(xs.to_vec(), 1).unwrap(), y).unwrap()
    }

    #[test]
    fn separable_training_accuracy() {
        let data = separable_1d();
        let m = LogisticModel::fit(&data, &LogisticConfig::default()).unwrap();
        let p = m.predict(&data.x).unwrap();
        assert_eq!(p.labels, data.y);
    }

    #[test]
    fn zero_weights_give_half() {
        let data = separable_1d();
        let (_, _, _) = logistic_loss_and_grad(&data.x, &[0.0; 10], &[0.0], 0.0, 1.0);
        let m = LogisticModel::from_parts(
            vec![-1, 1],
            vec![0.0],
            vec![1.0],
            vec![BinaryWeights {
                bias: 0.0,
                w: vec![0.0],
            }],
        )
        .unwrap();
        let p = m.predict(&data.x).unwrap();
        assert!(p.proba.iter().all(|r| r[1] == 0.5 && r[0] == 0.5));
        // tie goes to the smaller label
        assert!(p.labels.iter().all(|&l| l == -1));
    }

    #[test]
    fn bias_ln3_gives_three_quarters() {
        let m = LogisticModel::from_parts(
            vec![-1, 1],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![BinaryWeights {
                bias: libm::log(3.0),
                w: vec![0.0, 0.0],
            }],
        )
        .unwrap();
        let p = m.predict(&Matrix::new(vec![5.0, -2.0], 2).unwrap()).unwrap();
        assert!((p.proba[0][1] - 0.75).abs() < 1e-15);
        assert_eq!(p.labels, vec![1]);
        assert!(matches!(
            m.predict(&Matrix::new(vec![1.0; 3], 3).unwrap()),
            Err(LearnError::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn monotone_in_positive_weight() {
        let m = LogisticModel::from_parts(
            vec![-1, 1],
            vec![0.0],
            vec![2.0],
            vec![BinaryWeights {
                bias: -0.3,
                w: vec![0.7],
            }],
        )
        .unwrap();
        let grid: Vec<f64> = (-50..=50).map(|i| f64::from(i) * 0.3).collect();
        let p = m.predict(&Matrix::new(grid, 1).unwrap()).unwrap();
        assert!(p.proba.windows(2).all(|w| w[0][1] <= w[1][1]));
    }

    fn finite_difference_check(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Matrix::new((0..50).map(|_| rng.random_range(-2.0..2.0)).collect(), 5).unwrap();
        let y: Vec<f64> = (0..10).map(|_| f64::from(u8::from(rng.random_bool(0.5)))).collect();
        let w: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b = rng.random_range(-1.0..1.0);
        let reg = rng.random_range(0.0..3.0);
        let (_, gw, gb) = logistic_loss_and_grad(&x, &y, &w, b, reg);
        let h = 1e-6;
        for j in 0..=5 {
            let (mut wp, mut wm) = (w.clone(), w.clone());
            let (mut bp, mut bm) = (b, b);
            if j < 5 {
                wp[j] += h;
                wm[j] -= h;
            } else {
                bp += h;
                bm -= h;
            }
            let numeric = (logistic_loss_and_grad(&x, &y, &wp, bp, reg).0
                - logistic_loss_and_grad(&x, &y, &wm, bm, reg).0)
                / (2.0 * h);
            let analytic = if j < 5 { gw[j] } else { gb };
            let rel = (numeric - analytic).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
            assert!(rel < 1e-5, "seed {seed} coord {j}: {analytic} vs {numeric}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..20 {
            finite_difference_check(seed);
        }
    }

    #[test]
    fn multiclass_rows_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<f64> = (0..90).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<Label> = (0..30).map(|i| [-1, 0, 1][i % 3]).collect();
        let data = Dataset::new(Matrix::new(rows, 3).unwrap(), y).unwrap();
        let m = LogisticModel::fit(&data, &LogisticConfig::default()).unwrap();
        assert_eq!(m.weights().len(), 3);
        let p = m.predict(&data.x).unwrap();
        for r in &p.proba {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(r.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn constant_feature_passes_through_as_zero() {
        let x = Matrix::new(vec![1.0, 7.0, 2.0, 7.0, 3.0, 7.0, 4.0, 7.0], 2).unwrap();
        let data = Dataset::new(x, vec![-1, -1, 1, 1]).unwrap();
        let m = LogisticModel::fit(&data, &LogisticConfig::default()).unwrap();
        assert_eq!(m.scales()[1], 0.0);
        assert_eq!(m.weights()[0].w[1], 0.0);
        let single = Dataset::new(Matrix::new(vec![1.0, 2.0], 1).unwrap(), vec![1, 1]).unwrap();
        assert_eq!(
            LogisticModel::fit(&single, &LogisticConfig::default()),
            Err(LearnError::SingleClassDataset)
        );
    }
}
