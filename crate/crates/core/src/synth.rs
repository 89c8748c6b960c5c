//! Synthetic datasets with analytically known metric values.
//!
//! All draws come from [`crate::rng`] (ChaCha8 seeded via SplitMix64-derived
//! sub-streams) and `rand_distr`'s standard normal sampler, so a given
//! `(spec, seed)` produces the same dataset on every platform. The factor,
//! noise, and rotation streams are separate: a rotated dataset is exactly the
//! axis-aligned dataset of the same seed times Q.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{default_factor_names, validate_dataset, Dataset, FactorSet, Matrix, RepresentationSet};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng, stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub n_samples: usize,
    pub n_factors: usize,
    pub n_dims: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SynthSpec {
    fn check(&self, aligned: bool) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::invalid("synthetic data needs n_samples >= 2"));
        }
        if self.n_factors == 0 || self.n_dims == 0 {
            return Err(Error::invalid("synthetic data needs at least one factor and one dim"));
        }
        if aligned && self.n_dims < self.n_factors {
            return Err(Error::invalid(format!(
                "n_dims ({}) must be >= n_factors ({})",
                self.n_dims, self.n_factors
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid("noise_sigma must be finite and non-negative"));
        }
        Ok(())
    }
}

fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut r = rng(seed);
    let data: Vec<f64> = (0..rows * cols).map(|_| StandardNormal.sample(&mut r)).collect();
    Matrix::new(rows, cols, data).expect("non-empty shape")
}

fn dim_names(n: usize) -> Vec<String> {
    (0..n).map(|j| format!("z{j}")).collect()
}

fn assemble(repr: Matrix, factors: Matrix) -> Result<Dataset> {
    let r = RepresentationSet::new(repr.clone(), dim_names(repr.cols()))?;
    let f = FactorSet::new(factors.clone(), default_factor_names(factors.cols()))?;
    validate_dataset(r, f)
}

/// Factors ~ N(0, I); dim j = factor j + σ·ε for j < F, remaining dims pure noise.
pub fn gen_axis_aligned(spec: &SynthSpec) -> Result<Dataset> {
    spec.check(true)?;
    let factors = gaussian_matrix(
        spec.n_samples,
        spec.n_factors,
        derive_seed(spec.seed, stream::SYNTH_FACTORS),
    );
    let noise = gaussian_matrix(spec.n_samples, spec.n_dims, derive_seed(spec.seed, stream::SYNTH_NOISE));
    let repr = Matrix::from_fn(spec.n_samples, spec.n_dims, |i, j| {
        if j < spec.n_factors {
            factors.get(i, j) + spec.noise_sigma * noise.get(i, j)
        } else {
            noise.get(i, j)
        }
    })?;
    assemble(repr, factors)
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with R's diagonal made positive.
pub fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    let g = gaussian_matrix(n, n, seed).to_dmatrix();
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// The rotation applied by [`gen_rotated`] for this spec.
pub fn rotation_for(spec: &SynthSpec) -> DMatrix<f64> {
    random_orthogonal(spec.n_dims, derive_seed(spec.seed, stream::SYNTH_ROTATION))
}

/// [`gen_axis_aligned`] with the representation multiplied by a random orthogonal Q.
pub fn gen_rotated(spec: &SynthSpec) -> Result<Dataset> {
    let base = gen_axis_aligned(spec)?;
    let q = rotation_for(spec);
    let (repr, factors) = base.into_parts();
    let rotated = repr.matrix().to_dmatrix() * q;
    assemble(Matrix::from_dmatrix(&rotated)?, factors.matrix().clone())
}

/// Independent Gaussian representation and factors.
pub fn gen_null(spec: &SynthSpec) -> Result<Dataset> {
    spec.check(false)?;
    let repr = gaussian_matrix(spec.n_samples, spec.n_dims, derive_seed(spec.seed, stream::SYNTH_REPR));
    let factors = gaussian_matrix(
        spec.n_samples,
        spec.n_factors,
        derive_seed(spec.seed, stream::SYNTH_FACTORS),
    );
    assemble(repr, factors)
}

/// Samples G·A with G Gaussian (n × rank) and A having orthonormal rows.
pub fn gen_lowrank(n_samples: usize, n_dims: usize, rank: usize, seed: u64) -> Result<RepresentationSet> {
    if rank == 0 || rank > n_dims {
        return Err(Error::invalid(format!("rank {rank} outside [1, {n_dims}]")));
    }
    if n_samples < 2 {
        return Err(Error::invalid("n_samples must be >= 2"));
    }
    let g = gaussian_matrix(n_samples, rank, derive_seed(seed, stream::SYNTH_REPR)).to_dmatrix();
    let basis = random_orthogonal(n_dims, derive_seed(seed, stream::SYNTH_ROTATION));
    let a = basis.columns(0, rank).transpose();
    let m = Matrix::from_dmatrix(&(g * a))?;
    RepresentationSet::new(m, dim_names(n_dims))
}

/// Standard bivariate Gaussian pair with correlation `rho`.
pub fn gen_gaussian_pair(n_samples: usize, rho: f64, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(rho.abs() < 1.0) {
        return Err(Error::invalid(format!("|rho| must be < 1, got {rho}")));
    }
    let mut r = rng(derive_seed(seed, stream::SYNTH_REPR));
    let s = (1.0 - rho * rho).sqrt();
    let mut x = Vec::with_capacity(n_samples);
    let mut y = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let a: f64 = StandardNormal.sample(&mut r);
        let b: f64 = StandardNormal.sample(&mut r);
        x.push(a);
        y.push(rho * a + s * b);
    }
    Ok((x, y))
}

/// MI in nats of a standard bivariate Gaussian with correlation `rho`.
pub fn gaussian_mi(rho: f64) -> f64 {
    -0.5 * (1.0 - rho * rho).ln()
}
