use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::data::Matrix;
use crate::error::{Error, Result};

/// Per-column mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ColumnStats {
    pub fn of(z: &Matrix) -> Self {
        let (n, d) = (z.rows(), z.cols());
        let mut mean = vec![0.0; d];
        for i in 0..n {
            for (m, v) in mean.iter_mut().zip(z.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; d];
        for i in 0..n {
            for ((s, v), m) in var.iter_mut().zip(z.row(i)).zip(&mean) {
                *s += (v - m).powi(2);
            }
        }
        let std = var.into_iter().map(|s| (s / n as f64).sqrt()).collect();
        Self { mean, std }
    }
}

/// Ridge solution in the original feature scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RidgeFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Coefficients on the standardized columns (zero for constant columns).
    pub standardized_weights: Vec<f64>,
}

impl RidgeFit {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + row.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>()
    }

    pub fn predict(&self, z: &Matrix) -> Vec<f64> {
        (0..z.rows()).map(|i| self.predict_row(z.row(i))).collect()
    }
}

/// Minimize ‖Xs·w + b − y‖² + α‖w‖² over standardized columns Xs, with an
/// unpenalized intercept, then map the coefficients back to the original scale.
pub fn ridge_fit(z: &Matrix, y: &[f64], alpha: f64) -> Result<RidgeFit> {
    let (n, d) = (z.rows(), z.cols());
    if y.len() != n {
        return Err(Error::LengthMismatch {
            what: "ridge rows vs targets",
            left: n,
            right: y.len(),
        });
    }
    if n < 2 {
        return Err(Error::invalid("ridge needs at least 2 samples"));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!(
            "ridge alpha must be finite and >= 0, got {alpha}"
        )));
    }
    let stats = ColumnStats::of(z);
    let constant: Vec<bool> = stats.std.iter().map(|s| *s == 0.0).collect();
    if alpha == 0.0 {
        if let Some(j) = constant.iter().position(|c| *c) {
            return Err(Error::Singular(format!("column {j} has zero variance and alpha = 0")));
        }
    }
    let y_mean = y.iter().sum::<f64>() / n as f64;

    let mut gram = DMatrix::<f64>::zeros(d, d);
    let mut rhs = DVector::<f64>::zeros(d);
    let mut xs = vec![0.0; d];
    for (i, &yi) in y.iter().enumerate() {
        for (j, x) in xs.iter_mut().enumerate() {
            *x = if constant[j] {
                0.0
            } else {
                (z.get(i, j) - stats.mean[j]) / stats.std[j]
            };
        }
        let yc = yi - y_mean;
        for a in 0..d {
            rhs[a] += xs[a] * yc;
            for b in 0..=a {
                gram[(a, b)] += xs[a] * xs[b];
            }
        }
    }
    for a in 0..d {
        gram[(a, a)] += alpha;
        for b in 0..a {
            gram[(b, a)] = gram[(a, b)];
        }
    }
    let w_std: DVector<f64> = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => return Err(Error::Singular("normal equations are not positive definite".into())),
    };
    if w_std.iter().any(|w| !w.is_finite()) {
        return Err(Error::Singular("ridge solution is not finite".into()));
    }
    let standardized_weights: Vec<f64> = w_std.iter().copied().collect();
    let weights: Vec<f64> = standardized_weights
        .iter()
        .zip(&stats.std)
        .zip(&constant)
        .map(|((w, s), c)| if *c { 0.0 } else { w / s })
        .collect();
    let intercept = y_mean - weights.iter().zip(&stats.mean).map(|(w, m)| w * m).sum::<f64>();
    Ok(RidgeFit {
        weights,
        intercept,
        standardized_weights,
    })
}

/// 1 − Σ(y − ŷ)² / Σ(y − ȳ)².
pub fn r2_score(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            what: "r2 targets vs predictions",
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.len() < 2 {
        return Err(Error::invalid("r2 needs at least 2 samples"));
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ZeroVariance("r2 target is constant".into()));
    }
    let ss_res: f64 = y_true.iter().zip(y_pred).map(|(y, p)| (y - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}
