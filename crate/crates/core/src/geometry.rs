//! SVD-based representation geometry and gradient-series diagnostics.

use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::data::{load_bin, Matrix, RepresentationSet, Table};
use crate::error::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryReport {
    pub effective_rank: f64,
    pub participation_ratio: f64,
    pub condition_number: f64,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// Singular values above `rel_tol · σ_max`.
    pub retained: usize,
}

/// Singular values of `m` (optionally column-centered), sorted descending.
pub fn singular_values(m: &Matrix, center: bool) -> Vec<f64> {
    let mut a: DMatrix<f64> = m.to_dmatrix();
    if center {
        for mut col in a.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
    }
    // Thin SVD of a tall matrix via its R factor keeps the work at O(N·D²).
    let r = if a.nrows() > a.ncols() { a.qr().r() } else { a };
    let mut sv: Vec<f64> = r.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Metrics of a singular spectrum; entries at or below `rel_tol · σ_max` are dropped.
pub fn spectrum_metrics(singular_values: Vec<f64>, rel_tol: f64) -> Result<GeometryReport> {
    let max = singular_values.first().copied().unwrap_or(0.0);
    if !(max > 0.0) {
        return Err(Error::Degenerate("all-zero matrix has no geometry".into()));
    }
    let cutoff = rel_tol * max;
    let kept: Vec<f64> = singular_values.iter().copied().filter(|&s| s > cutoff).collect();
    let total: f64 = kept.iter().sum();
    let entropy: f64 = kept
        .iter()
        .map(|s| s / total)
        .filter(|p| *p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    let lambda_sum: f64 = kept.iter().map(|s| s * s).sum();
    let lambda_sq: f64 = kept.iter().map(|s| (s * s).powi(2)).sum();
    let min = kept.last().copied().unwrap_or(max);
    Ok(GeometryReport {
        effective_rank: entropy.exp(),
        participation_ratio: lambda_sum * lambda_sum / lambda_sq,
        condition_number: max / min,
        retained: kept.len(),
        singular_values,
    })
}

pub fn svd_geometry(repr: &RepresentationSet, center: bool, rel_tol: f64) -> Result<GeometryReport> {
    if repr.rows() < 2 {
        return Err(Error::invalid("geometry needs at least 2 samples"));
    }
    spectrum_metrics(singular_values(repr.matrix(), center), rel_tol)
}

/// Gradient vectors captured at ascending training iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSeries {
    steps: Vec<u64>,
    grads: Matrix,
}

impl GradientSeries {
    pub fn new(steps: Vec<u64>, grads: Matrix) -> Result<Self> {
        if steps.len() != grads.rows() {
            return Err(Error::LengthMismatch {
                what: "gradient steps vs rows",
                left: steps.len(),
                right: grads.rows(),
            });
        }
        if steps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("gradient steps must be strictly ascending"));
        }
        if let Some((row, col)) = grads.first_non_finite() {
            return Err(Error::NonFinite { row, col });
        }
        Ok(Self { steps, grads })
    }

    /// Binary gradient matrix plus a steps CSV with a `step` column.
    pub fn load(grads: &Path, steps: &Path) -> Result<Self> {
        Self::new(load_steps(steps)?, load_bin(grads)?)
    }

    pub fn steps(&self) -> &[u64] {
        &self.steps
    }

    pub fn grads(&self) -> &Matrix {
        &self.grads
    }

    fn check_aligned(&self, other: &Self) -> Result<()> {
        if self.steps != other.steps {
            return Err(Error::invalid("gradient series have different steps"));
        }
        if self.grads.cols() != other.grads.cols() {
            return Err(Error::LengthMismatch {
                what: "gradient dimensions",
                left: self.grads.cols(),
                right: other.grads.cols(),
            });
        }
        Ok(())
    }
}

pub fn load_steps(path: &Path) -> Result<Vec<u64>> {
    let t = Table::read(path)?;
    let c = t.column_index("step")?;
    (0..t.rows.len())
        .map(|r| {
            let v = t.int(r, c)?;
            u64::try_from(v).map_err(|_| Error::invalid(format!("negative step {v}")))
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CosineSeries {
    pub per_step: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

pub fn cosine_series(a: &GradientSeries, b: &GradientSeries) -> Result<CosineSeries> {
    a.check_aligned(b)?;
    let mut per_step = Vec::with_capacity(a.steps.len());
    for (i, &step) in a.steps.iter().enumerate() {
        let (ra, rb) = (a.grads.row(i), b.grads.row(i));
        let (na, nb) = (norm(ra), norm(rb));
        if na == 0.0 || nb == 0.0 {
            return Err(Error::ZeroNorm { step });
        }
        per_step.push((dot(ra, rb) / (na * nb)).clamp(-1.0, 1.0));
    }
    let n = per_step.len() as f64;
    let mean = per_step.iter().sum::<f64>() / n;
    let var = per_step.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
    Ok(CosineSeries {
        per_step,
        mean,
        std: var.sqrt(),
    })
}

/// Per-step ‖part‖ / ‖total‖.
pub fn norm_fraction(part: &GradientSeries, total: &GradientSeries) -> Result<Vec<f64>> {
    part.check_aligned(total)?;
    part.steps
        .iter()
        .enumerate()
        .map(|(i, &step)| {
            let nt = norm(total.grads.row(i));
            if nt == 0.0 {
                return Err(Error::ZeroNorm { step });
            }
            Ok(norm(part.grads.row(i)) / nt)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rows ±e_j: zero column means, ten equal singular values √2.
    fn uniform_spectrum() -> RepresentationSet {
        let m = Matrix::from_fn(20, 10, |i, j| {
            if i % 10 == j {
                if i < 10 {
                    1.0
                } else {
                    -1.0
                }
            } else {
                0.0
            }
        })
        .unwrap();
        RepresentationSet::unnamed(m)
    }

    #[test]
    fn uniform_spectrum_is_exact() {
        let g = svd_geometry(&uniform_spectrum(), true, DEFAULT_REL_TOL).unwrap();
        assert!((g.effective_rank - 10.0).abs() < 1e-12);
        assert!((g.participation_ratio - 10.0).abs() < 1e-12);
        assert!((g.condition_number - 1.0).abs() < 1e-12);
        assert_eq!(g.retained, 10);
    }

    #[test]
    fn all_zero_rejected() {
        let z = RepresentationSet::unnamed(Matrix::from_fn(5, 3, |_, _| 0.0).unwrap());
        assert!(matches!(
            svd_geometry(&z, false, DEFAULT_REL_TOL),
            Err(Error::Degenerate(_))
        ));
        // constant columns are all-zero once centered
        let c = RepresentationSet::unnamed(Matrix::from_fn(5, 3, |_, j| j as f64).unwrap());
        assert!(svd_geometry(&c, true, DEFAULT_REL_TOL).is_err());
        assert!(svd_geometry(&c, false, DEFAULT_REL_TOL).is_ok());
    }

    #[test]
    fn rank_deficient_cutoff() {
        let m = Matrix::from_fn(6, 3, |i, j| (i as f64 + 1.0) * (j as f64 + 1.0)).unwrap();
        let g = svd_geometry(&RepresentationSet::unnamed(m), false, DEFAULT_REL_TOL).unwrap();
        assert_eq!(g.retained, 1);
        assert!((g.effective_rank - 1.0).abs() < 1e-12);
        assert_eq!(g.condition_number, 1.0);
    }

    fn series(rows: Vec<Vec<f64>>) -> GradientSeries {
        let steps = (0..rows.len() as u64).map(|s| s * 10).collect();
        GradientSeries::new(steps, Matrix::from_rows(&rows).unwrap()).unwrap()
    }

    #[test]
    fn cosine_of_scaled_and_orthogonal() {
        let a = series(vec![vec![1.0, 2.0, 3.0], vec![-1.0, 0.5, 2.0]]);
        let b = series(vec![vec![2.0, 4.0, 6.0], vec![-2.0, 1.0, 4.0]]);
        let c = cosine_series(&a, &b).unwrap();
        assert!(c.per_step.iter().all(|v| (v - 1.0).abs() < 1e-15));
        let o = series(vec![vec![-2.0, 1.0, 0.0], vec![2.0, 4.0, 0.0]]);
        let c = cosine_series(&a, &o).unwrap();
        assert_eq!(c.per_step, vec![0.0, 0.0]);
        assert_eq!((c.mean, c.std), (0.0, 0.0));
    }

    #[test]
    fn zero_norm_row_reports_step() {
        let a = series(vec![vec![1.0, 0.0], vec![0.0, 0.0]]);
        let b = series(vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(cosine_series(&a, &b), Err(Error::ZeroNorm { step: 10 })));
    }

    #[test]
    fn norm_fractions() {
        let total = series(vec![vec![3.0, 4.0], vec![1.0, 1.0]]);
        assert_eq!(norm_fraction(&total, &total).unwrap(), vec![1.0, 1.0]);
        let part = series(vec![vec![0.9, 1.2], vec![0.3, 0.3]]);
        for f in norm_fraction(&part, &total).unwrap() {
            assert!((f - 0.3).abs() < 1e-15);
        }
        // total = u + v with u ⟂ v, ‖u‖ = 3, ‖v‖ = 4
        let u = series(vec![vec![3.0, 0.0], vec![0.0, 3.0]]);
        let t = series(vec![vec![3.0, 4.0], vec![4.0, 3.0]]);
        for f in norm_fraction(&u, &t).unwrap() {
            assert!((f - 0.6).abs() < 1e-15);
        }
    }

    #[test]
    fn mismatched_steps_rejected() {
        let a = series(vec![vec![1.0], vec![1.0]]);
        let b = GradientSeries::new(vec![0, 11], Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap()).unwrap();
        assert!(cosine_series(&a, &b).is_err());
    }
}
