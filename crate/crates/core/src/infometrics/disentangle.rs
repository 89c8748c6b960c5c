//! MIG, DCI, and SAP.

use rayon::prelude::*;
use serde::Serialize;

use super::hist::{bin_indices, entropy_of_bins, mi_of_bins};
use super::pearson;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::probes::{cv_ridge_predictions, kfold_indices, ridge_fit};
use crate::rng::{derive_seed, stream};

pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MigFactor {
    pub factor: String,
    pub gap: f64,
    pub top_dim: usize,
    pub top_mi: f64,
    pub second_mi: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MigReport {
    pub mig: f64,
    pub bins: usize,
    pub per_factor: Vec<MigFactor>,
    /// Factors whose binned entropy is zero.
    pub skipped: Vec<String>,
}

/// Top and runner-up of `values` with the argmax; the runner-up is 0 with one entry.
fn top_two(values: &[f64]) -> (usize, f64, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    let mut second = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > best.1 {
            second = best.1;
            best = (i, v);
        } else if v > second {
            second = v;
        }
    }
    (best.0, best.1, if second.is_finite() { second } else { 0.0 })
}

/// Mutual information gap on uniform histograms.
pub fn mig(dataset: &Dataset, bins: usize) -> Result<MigReport> {
    if bins < 2 {
        return Err(Error::invalid(format!("bins must be >= 2, got {bins}")));
    }
    if dataset.rows() < bins {
        return Err(Error::invalid(format!(
            "{} samples is fewer than {bins} bins",
            dataset.rows()
        )));
    }
    // Constant dims carry no information: MI 0 with every factor.
    let dims: Vec<Option<Vec<usize>>> = (0..dataset.dims())
        .into_par_iter()
        .map(|d| bin_indices(&dataset.dim(d), bins))
        .collect();
    let names = dataset.factors().factor_names();
    let results: Vec<Option<MigFactor>> = (0..dataset.factor_count())
        .into_par_iter()
        .map(|f| {
            let bf = bin_indices(&dataset.factor(f), bins)?;
            let entropy = entropy_of_bins(&bf, bins);
            if entropy <= 0.0 {
                return None;
            }
            let mis: Vec<f64> = dims
                .iter()
                .map(|bd| bd.as_ref().map_or(0.0, |bd| mi_of_bins(bd, &bf, bins)))
                .collect();
            let (top_dim, top_mi, second_mi) = top_two(&mis);
            Some(MigFactor {
                factor: names[f].clone(),
                gap: ((top_mi - second_mi) / entropy).clamp(0.0, 1.0),
                top_dim,
                top_mi,
                second_mi,
                entropy,
            })
        })
        .collect();
    let mut per_factor = Vec::new();
    let mut skipped = Vec::new();
    for (f, r) in results.into_iter().enumerate() {
        match r {
            Some(m) => per_factor.push(m),
            None => skipped.push(names[f].clone()),
        }
    }
    if per_factor.is_empty() {
        return Err(Error::Degenerate("every factor has zero histogram entropy".into()));
    }
    let mig = per_factor.iter().map(|m| m.gap).sum::<f64>() / per_factor.len() as f64;
    Ok(MigReport {
        mig,
        bins,
        per_factor,
        skipped,
    })
}

/// Nonnegative `D × F` importances, each nonzero column summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceMatrix {
    pub dims: usize,
    pub factors: usize,
    /// Row-major, `values[d * factors + f]`.
    pub values: Vec<f64>,
}

impl ImportanceMatrix {
    pub fn get(&self, d: usize, f: usize) -> f64 {
        self.values[d * self.factors + f]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DciReport {
    pub disentanglement: f64,
    pub completeness: f64,
    /// Mean out-of-fold MSE over factor variance; lower is better.
    pub informativeness: f64,
    pub per_factor_informativeness: Vec<(String, f64)>,
    pub importance: ImportanceMatrix,
}

/// 1 − H(p)/ln(n) for a probability vector `p` of length `n`; 1 when `n` is 1.
fn one_minus_norm_entropy(p: &[f64]) -> f64 {
    if p.len() < 2 {
        return 1.0;
    }
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let h: f64 = -p
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| {
            let q = v / total;
            q * q.ln()
        })
        .sum::<f64>();
    (1.0 - h / (p.len() as f64).ln()).clamp(0.0, 1.0)
}

pub fn dci(dataset: &Dataset, folds: usize, alpha: f64, seed: u64) -> Result<DciReport> {
    let (d, f_count) = (dataset.dims(), dataset.factor_count());
    let z = dataset.repr().matrix();
    let names = dataset.factors().factor_names();
    let fold_sets = kfold_indices(dataset.rows(), folds, derive_seed(seed, stream::DCI_FOLDS))?;

    let per: Vec<(Vec<f64>, f64)> = (0..f_count)
        .into_par_iter()
        .map(|f| {
            let y = dataset.factor(f);
            let n = y.len() as f64;
            let mean = y.iter().sum::<f64>() / n;
            let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            if !(var > 0.0) {
                return Err(Error::ZeroVariance(format!("factor {:?} is constant", names[f])));
            }
            let fit = ridge_fit(z, &y, alpha)?;
            let imp: Vec<f64> = fit.standardized_weights.iter().map(|w| w.abs()).collect();
            let pred = cv_ridge_predictions(z, &y, &fold_sets, alpha)?;
            let mse = y.iter().zip(&pred).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n;
            Ok((imp, mse / var))
        })
        .collect::<Result<_>>()?;

    let mut values = vec![0.0; d * f_count];
    for (f, (imp, _)) in per.iter().enumerate() {
        let total: f64 = imp.iter().sum();
        if total > 0.0 {
            for (dd, v) in imp.iter().enumerate() {
                values[dd * f_count + f] = v / total;
            }
        }
    }
    let importance = ImportanceMatrix {
        dims: d,
        factors: f_count,
        values,
    };

    let total_mass: f64 = importance.values.iter().sum();
    let disentanglement = if total_mass > 0.0 {
        (0..d)
            .map(|dd| {
                let row = &importance.values[dd * f_count..(dd + 1) * f_count];
                row.iter().sum::<f64>() / total_mass * one_minus_norm_entropy(row)
            })
            .sum::<f64>()
            .clamp(0.0, 1.0)
    } else {
        0.0
    };
    let completeness = (0..f_count)
        .map(|f| {
            let col: Vec<f64> = (0..d).map(|dd| importance.get(dd, f)).collect();
            one_minus_norm_entropy(&col)
        })
        .sum::<f64>()
        / f_count as f64;
    let per_factor_informativeness: Vec<(String, f64)> =
        names.iter().cloned().zip(per.iter().map(|(_, e)| *e)).collect();
    let informativeness = per_factor_informativeness.iter().map(|(_, e)| e).sum::<f64>() / f_count as f64;
    Ok(DciReport {
        disentanglement,
        completeness,
        informativeness,
        per_factor_informativeness,
        importance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SapReport {
    pub sap: f64,
    pub per_factor: Vec<(String, f64)>,
}

/// Separated attribute predictability with single-dim R² scores.
pub fn sap(dataset: &Dataset) -> Result<SapReport> {
    let names = dataset.factors().factor_names();
    let dims: Vec<Vec<f64>> = (0..dataset.dims()).map(|d| dataset.dim(d)).collect();
    let per_factor: Vec<(String, f64)> = (0..dataset.factor_count())
        .into_par_iter()
        .map(|f| {
            let y = dataset.factor(f);
            if y.iter().all(|v| *v == y[0]) {
                return Err(Error::ZeroVariance(format!("factor {:?} is constant", names[f])));
            }
            // single-regressor OLS R² is the squared correlation
            let scores: Vec<f64> = dims.iter().map(|z| pearson(z, &y).powi(2)).collect();
            let (_, top, second) = top_two(&scores);
            Ok((names[f].clone(), (top - second).clamp(0.0, 1.0)))
        })
        .collect::<Result<_>>()?;
    let sap = per_factor.iter().map(|(_, g)| g).sum::<f64>() / per_factor.len() as f64;
    Ok(SapReport { sap, per_factor })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisentanglementReport {
    pub mig: f64,
    pub dci_disent: f64,
    pub dci_complete: f64,
    pub dci_inform: f64,
    pub sap: f64,
}

impl DisentanglementReport {
    pub fn from_parts(mig: &MigReport, dci: &DciReport, sap: &SapReport) -> Self {
        Self {
            mig: mig.mig,
            dci_disent: dci.disentanglement,
            dci_complete: dci.completeness,
            dci_inform: dci.informativeness,
            sap: sap.sap,
        }
    }
}
