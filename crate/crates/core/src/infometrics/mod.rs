//! Mutual-information and disentanglement metrics over a dataset.

mod alignment;
mod disentangle;
mod hist;
mod kdtree;
mod ksg;

use rayon::prelude::*;
use serde::Serialize;

pub use alignment::{factor_alignment, AlignmentReport};
pub use disentangle::{
    dci, mig, sap, DciReport, DisentanglementReport, ImportanceMatrix, MigFactor, MigReport, SapReport, DEFAULT_BINS,
};
pub use hist::{bin_indices, hist_entropy, hist_mi};
pub use kdtree::{chebyshev, KdTree};
pub use ksg::{ksg_mi, ksg_mi_multi, ksg_mi_seeded, DEFAULT_K, JITTER};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Pearson correlation; 0 when either side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MiMode {
    /// Max over dims of scalar KSG.
    #[default]
    MaxDim,
    /// One KSG over the full representation.
    Joint,
}

impl std::str::FromStr for MiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max_dim" | "max-dim" => Ok(MiMode::MaxDim),
            "joint" => Ok(MiMode::Joint),
            other => Err(Error::invalid(format!("unknown MI mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorMi {
    pub factor: String,
    pub mi: f64,
    /// Argmax dim in `max_dim` mode.
    pub best_dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiReport {
    pub k: usize,
    pub mode: MiMode,
    pub per_factor: Vec<FactorMi>,
    /// Sum of the per-factor values.
    pub overall_mi: f64,
    /// Factors with a negative estimate (kept unclipped).
    pub negative: Vec<String>,
}

impl MiReport {
    pub fn mi(&self, factor: &str) -> Option<f64> {
        self.per_factor.iter().find(|f| f.factor == factor).map(|f| f.mi)
    }
}

/// KSG MI between each factor and the representation.
///
/// In `max_dim` mode constant dims are skipped; a factor is an error if it is
/// constant or every dim is.
pub fn mi_per_factor(dataset: &Dataset, k: usize, mode: MiMode, seed: u64) -> Result<MiReport> {
    let n = dataset.rows();
    if k == 0 || n <= k {
        return Err(Error::invalid(format!("ksg needs N > k >= 1, got N = {n}, k = {k}")));
    }
    let names = dataset.factors().factor_names();
    let factors: Vec<Vec<f64>> = (0..dataset.factor_count())
        .into_par_iter()
        .map(|f| ksg::prepare(&dataset.factor(f), seed, &format!("factor {:?}", names[f])))
        .collect::<Result<_>>()?;

    let per_factor: Vec<FactorMi> = match mode {
        MiMode::MaxDim => {
            let dims: Vec<Option<Vec<f64>>> = (0..dataset.dims())
                .into_par_iter()
                .map(|d| ksg::prepare(&dataset.dim(d), seed, "dim").ok())
                .collect();
            if dims.iter().all(Option::is_none) {
                return Err(Error::ZeroVariance("every representation dim is constant".into()));
            }
            let sorted_f: Vec<ksg::SortedAxis> = factors.iter().map(|v| ksg::SortedAxis::new(v)).collect();
            let sorted_d: Vec<Option<ksg::SortedAxis>> =
                dims.iter().map(|v| v.as_deref().map(ksg::SortedAxis::new)).collect();
            let tasks: Vec<(usize, usize)> = (0..factors.len())
                .flat_map(|f| (0..dims.len()).filter(|&d| dims[d].is_some()).map(move |d| (f, d)))
                .collect();
            let values: Vec<f64> = tasks
                .par_iter()
                .map(|&(f, d)| {
                    let x = dims[d].as_ref().expect("filtered");
                    let sx = sorted_d[d].as_ref().expect("filtered");
                    ksg::ksg_prepared(x, &factors[f], sx, &sorted_f[f], k)
                })
                .collect();
            let mut out: Vec<FactorMi> = names
                .iter()
                .map(|name| FactorMi {
                    factor: name.clone(),
                    mi: f64::NEG_INFINITY,
                    best_dim: None,
                })
                .collect();
            for (&(f, d), v) in tasks.iter().zip(values) {
                if v > out[f].mi {
                    out[f].mi = v;
                    out[f].best_dim = Some(d);
                }
            }
            out
        }
        MiMode::Joint => (0..dataset.factor_count())
            .into_par_iter()
            .map(|f| {
                Ok(FactorMi {
                    factor: names[f].clone(),
                    mi: ksg_mi_multi(dataset.repr().matrix(), &dataset.factor(f), k, seed)?,
                    best_dim: None,
                })
            })
            .collect::<Result<_>>()?,
    };
    let overall_mi = per_factor.iter().map(|f| f.mi).sum();
    let negative = per_factor
        .iter()
        .filter(|f| f.mi < 0.0)
        .map(|f| f.factor.clone())
        .collect();
    Ok(MiReport {
        k,
        mode,
        per_factor,
        overall_mi,
        negative,
    })
}
