//! Kraskov-Stögbauer-Grassberger mutual information (algorithm 1).
//!
//! Each variable is centered, scaled to unit variance, and perturbed by a
//! Gaussian jitter of amplitude 1e-10 to break ties. The jitter stream of a
//! column is keyed by `derive_seed(seed, hash(column))`, so the same column
//! always receives the same jitter and the estimate is exactly symmetric.

use rand_distr::{Distribution, StandardNormal};

use super::kdtree::KdTree;
use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, hash_values, rng};
use crate::special::digamma;

pub const JITTER: f64 = 1e-10;
pub const DEFAULT_K: usize = 5;

/// Standardized, jittered copy of one variable.
pub(crate) fn prepare(values: &[f64], seed: u64, what: &str) -> Result<Vec<f64>> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if !(std > 0.0) {
        return Err(Error::ZeroVariance(format!("{what} is constant")));
    }
    let mut r = rng(derive_seed(seed, hash_values(values)));
    Ok(values
        .iter()
        .map(|v| {
            let e: f64 = StandardNormal.sample(&mut r);
            (v - mean) / std + JITTER * e
        })
        .collect())
}

/// Sorted copy of a 1-d variable for strict radius counts.
pub(crate) struct SortedAxis(Vec<f64>);

impl SortedAxis {
    pub(crate) fn new(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Self(v)
    }

    /// #{j : |v_j − v| < r}, including `v` itself if present.
    fn count(&self, v: f64, r: f64) -> usize {
        let lo = self.0.partition_point(|&u| v - u >= r);
        let hi = self.0.partition_point(|&u| u - v < r);
        hi.saturating_sub(lo)
    }
}

fn check_sizes(n: usize, other: usize, k: usize) -> Result<()> {
    if n != other {
        return Err(Error::LengthMismatch {
            what: "ksg x vs y",
            left: n,
            right: other,
        });
    }
    if k == 0 {
        return Err(Error::invalid("ksg needs k >= 1"));
    }
    if n <= k {
        return Err(Error::invalid(format!("ksg needs more than k = {k} samples, got {n}")));
    }
    Ok(())
}

fn combine(n: usize, k: usize, digamma_sum: f64) -> f64 {
    digamma(k as f64) + digamma(n as f64) - digamma_sum / n as f64
}

/// KSG estimate for two prepared scalar variables.
pub(crate) fn ksg_prepared(x: &[f64], y: &[f64], sx: &SortedAxis, sy: &SortedAxis, k: usize) -> f64 {
    let n = x.len();
    let joint: Vec<f64> = x.iter().zip(y).flat_map(|(a, b)| [*a, *b]).collect();
    let tree = KdTree::new(&joint, 2);
    let mut acc = 0.0;
    for i in 0..n {
        let eps = tree.kth_distance(&joint[2 * i..2 * i + 2], k, i);
        let nx = sx.count(x[i], eps).saturating_sub(1);
        let ny = sy.count(y[i], eps).saturating_sub(1);
        acc += digamma(nx as f64 + 1.0) + digamma(ny as f64 + 1.0);
    }
    combine(n, k, acc)
}

/// MI in nats between two scalar variables, default jitter seed 0.
pub fn ksg_mi(x: &[f64], y: &[f64], k: usize) -> Result<f64> {
    ksg_mi_seeded(x, y, k, 0)
}

pub fn ksg_mi_seeded(x: &[f64], y: &[f64], k: usize, seed: u64) -> Result<f64> {
    check_sizes(x.len(), y.len(), k)?;
    let px = prepare(x, seed, "x")?;
    let py = prepare(y, seed, "y")?;
    Ok(ksg_prepared(&px, &py, &SortedAxis::new(&px), &SortedAxis::new(&py), k))
}

/// MI between a multivariate `x` (rows = samples) and scalar `y`, Chebyshev
/// metric over the joint space.
pub fn ksg_mi_multi(x: &Matrix, y: &[f64], k: usize, seed: u64) -> Result<f64> {
    let n = x.rows();
    check_sizes(n, y.len(), k)?;
    let d = x.cols();
    let cols: Vec<Vec<f64>> = (0..d)
        .map(|j| prepare(&x.column(j), seed, &format!("x dim {j}")))
        .collect::<Result<_>>()?;
    let py = prepare(y, seed, "y")?;
    let mut xs = Vec::with_capacity(n * d);
    let mut joint = Vec::with_capacity(n * (d + 1));
    for i in 0..n {
        for c in &cols {
            xs.push(c[i]);
            joint.push(c[i]);
        }
        joint.push(py[i]);
    }
    let jt = KdTree::new(&joint, d + 1);
    let xt = KdTree::new(&xs, d);
    let sy = SortedAxis::new(&py);
    let mut acc = 0.0;
    for i in 0..n {
        let eps = jt.kth_distance(&joint[i * (d + 1)..(i + 1) * (d + 1)], k, i);
        let nx = xt.count_within(&xs[i * d..(i + 1) * d], eps, i);
        let ny = sy.count(py[i], eps).saturating_sub(1);
        acc += digamma(nx as f64 + 1.0) + digamma(ny as f64 + 1.0);
    }
    Ok(combine(n, k, acc))
}
