//! Cross-validated linear (ridge) and nonlinear (MLP) probes that predict each
//! factor from the representation.
//!
//! Fold assignment: one shuffle of `0..N` seeded by `derive_seed(seed, 0)`, then
//! contiguous blocks (the first `N % folds` blocks one row larger). The MLP for
//! factor `f`, fold `k` is seeded with `derive_seed(derive_seed(seed, 1 + f), k)`,
//! so results do not depend on scheduling.

mod mlp;
mod ridge;

use rayon::prelude::*;
use serde::Serialize;

pub use mlp::{mlp_probe_fit, Activation, Mlp, MlpPredictor};
pub use ridge::{r2_score, ridge_fit, ColumnStats, RidgeFit};

use crate::data::{Dataset, Matrix};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, permutation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Linear,
    Mlp,
}

impl ProbeKind {
    pub fn name(self) -> &'static str {
        match self {
            ProbeKind::Linear => "linear",
            ProbeKind::Mlp => "mlp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeConfig {
    pub kind: ProbeKind,
    pub folds: usize,
    pub ridge_alpha: f64,
    pub mlp_hidden: usize,
    pub mlp_epochs: usize,
    pub mlp_learning_rate: f64,
    pub mlp_patience: usize,
    pub mlp_batch_size: usize,
    pub mlp_activation: Activation,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            kind: ProbeKind::Linear,
            folds: 5,
            ridge_alpha: 1.0,
            mlp_hidden: 64,
            mlp_epochs: 200,
            mlp_learning_rate: 1e-3,
            mlp_patience: 20,
            mlp_batch_size: 64,
            mlp_activation: Activation::Tanh,
            seed: 0,
        }
    }
}

impl ProbeConfig {
    pub fn linear(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn mlp(seed: u64) -> Self {
        Self {
            kind: ProbeKind::Mlp,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::invalid(format!("folds must be >= 2, got {}", self.folds)));
        }
        if self.mlp_hidden < 1 {
            return Err(Error::invalid("mlp_hidden must be >= 1"));
        }
        if !(self.ridge_alpha >= 0.0 && self.ridge_alpha.is_finite()) {
            return Err(Error::invalid("ridge_alpha must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Held-out index sets for `folds`-fold CV over `n` rows.
pub fn kfold_indices(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::invalid(format!("folds must be >= 2, got {folds}")));
    }
    if n < folds {
        return Err(Error::invalid(format!("{n} rows is fewer than {folds} folds")));
    }
    let perm = permutation(n, derive_seed(seed, 0));
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for k in 0..folds {
        let size = n / folds + usize::from(k < n % folds);
        out.push(perm[start..start + size].to_vec());
        start += size;
    }
    Ok(out)
}

/// Complement of a held-out set, in ascending order.
pub fn train_indices(n: usize, test: &[usize]) -> Vec<usize> {
    let mut mask = vec![true; n];
    for &i in test {
        mask[i] = false;
    }
    (0..n).filter(|&i| mask[i]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorScore {
    pub factor: String,
    /// Mean of the fold scores.
    pub r2: f64,
    pub folds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub kind: ProbeKind,
    pub factors: Vec<FactorScore>,
    /// Unweighted mean of the per-factor scores.
    pub overall_r2: f64,
}

impl ProbeResult {
    pub fn r2(&self, factor: &str) -> Option<f64> {
        self.factors.iter().find(|f| f.factor == factor).map(|f| f.r2)
    }
}

fn fit_predict(train_x: &Matrix, train_y: &[f64], test_x: &Matrix, cfg: &ProbeConfig, seed: u64) -> Result<Vec<f64>> {
    match cfg.kind {
        ProbeKind::Linear => Ok(ridge_fit(train_x, train_y, cfg.ridge_alpha)?.predict(test_x)),
        ProbeKind::Mlp => {
            let cfg = ProbeConfig { seed, ..cfg.clone() };
            Ok(mlp_probe_fit(train_x, train_y, &cfg)?.predict(test_x))
        }
    }
}

/// Out-of-fold R² per factor and fold.
pub fn cv_probe(dataset: &Dataset, config: &ProbeConfig) -> Result<ProbeResult> {
    config.validate()?;
    let n = dataset.rows();
    let folds = kfold_indices(n, config.folds, config.seed)?;
    let z = dataset.repr().matrix();
    let splits: Vec<(Matrix, Matrix, Vec<usize>, Vec<usize>)> = folds
        .iter()
        .map(|test| {
            let train = train_indices(n, test);
            Ok((z.select_rows(&train)?, z.select_rows(test)?, train, test.clone()))
        })
        .collect::<Result<_>>()?;
    let factor_cols: Vec<Vec<f64>> = (0..dataset.factor_count()).map(|f| dataset.factor(f)).collect();

    let tasks: Vec<(usize, usize)> = (0..factor_cols.len())
        .flat_map(|f| (0..folds.len()).map(move |k| (f, k)))
        .collect();
    let scores: Vec<Result<f64>> = tasks
        .par_iter()
        .map(|&(f, k)| {
            let (train_x, test_x, train, test) = &splits[k];
            let y = &factor_cols[f];
            let train_y: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let test_y: Vec<f64> = test.iter().map(|&i| y[i]).collect();
            let seed = derive_seed(derive_seed(config.seed, 1 + f as u64), k as u64);
            let pred = fit_predict(train_x, &train_y, test_x, config, seed)?;
            r2_score(&test_y, &pred)
        })
        .collect();

    let mut it = scores.into_iter();
    let mut factors = Vec::with_capacity(factor_cols.len());
    for name in dataset.factors().factor_names() {
        let fold_scores = (0..folds.len())
            .map(|_| it.next().expect("one score per task"))
            .collect::<Result<Vec<f64>>>()?;
        let r2 = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
        factors.push(FactorScore {
            factor: name.clone(),
            r2,
            folds: fold_scores,
        });
    }
    let overall_r2 = factors.iter().map(|f| f.r2).sum::<f64>() / factors.len() as f64;
    Ok(ProbeResult {
        kind: config.kind,
        factors,
        overall_r2,
    })
}

/// Pooled out-of-fold ridge predictions for target `y`.
pub fn cv_ridge_predictions(z: &Matrix, y: &[f64], folds: &[Vec<usize>], alpha: f64) -> Result<Vec<f64>> {
    let n = z.rows();
    let mut pred = vec![0.0; n];
    for test in folds {
        let train = train_indices(n, test);
        let train_y: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let fit = ridge_fit(&z.select_rows(&train)?, &train_y, alpha)?;
        for &i in test {
            pred[i] = fit.predict_row(z.row(i));
        }
    }
    Ok(pred)
}
