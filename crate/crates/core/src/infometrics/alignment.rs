use serde::Serialize;

use super::pearson;
use crate::data::{Dataset, FactorPartition};
use crate::error::{Error, Result};

/// Within-factor correlation ratio per representation dim.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentReport {
    pub score: f64,
    /// `None` for dims outside the partition.
    pub per_dim_ratio: Vec<Option<f64>>,
    pub chance_level: f64,
    /// Covered dims whose correlations with every factor are all zero.
    pub zero_denominator_dims: Vec<usize>,
}

/// For dim d assigned to factor f:
/// ratio_d = |r(z_d, θ_f)| / Σ_f' |r(z_d, θ_f')|, and the score is the mean ratio.
pub fn factor_alignment(dataset: &Dataset, partition: &FactorPartition) -> Result<AlignmentReport> {
    let f_count = dataset.factor_count();
    if f_count < 2 {
        return Err(Error::invalid("factor alignment needs at least 2 factors"));
    }
    partition.check_dims(dataset.dims())?;
    let assigned: Vec<(usize, usize)> = partition
        .entries()
        .iter()
        .map(|e| {
            let f = dataset
                .factors()
                .index_of(&e.factor)
                .ok_or_else(|| Error::UnknownFactor(e.factor.clone()))?;
            Ok(e.dims().map(move |d| (d, f)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let factors: Vec<Vec<f64>> = (0..f_count).map(|f| dataset.factor(f)).collect();
    let mut per_dim_ratio = vec![None; dataset.dims()];
    let mut zero_denominator_dims = Vec::new();
    for &(d, f) in &assigned {
        let z = dataset.dim(d);
        let r: Vec<f64> = factors.iter().map(|t| pearson(&z, t).abs()).collect();
        let denom: f64 = r.iter().sum();
        let ratio = if denom > 0.0 {
            r[f] / denom
        } else {
            zero_denominator_dims.push(d);
            0.0
        };
        per_dim_ratio[d] = Some(ratio);
    }
    zero_denominator_dims.sort_unstable();
    let score = assigned
        .iter()
        .map(|&(d, _)| per_dim_ratio[d].unwrap_or(0.0))
        .sum::<f64>()
        / assigned.len() as f64;
    Ok(AlignmentReport {
        score,
        per_dim_ratio,
        chance_level: 1.0 / f_count as f64,
        zero_denominator_dims,
    })
}
