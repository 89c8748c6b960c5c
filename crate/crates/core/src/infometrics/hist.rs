//! Plug-in histogram entropy and mutual information on uniform-width bins.

use crate::error::{Error, Result};

/// Bin index of every value on `bins` uniform bins over `[min, max]`; the
/// maximum falls into the last bin. `None` when the range is zero.
pub fn bin_indices(x: &[f64], bins: usize) -> Option<Vec<usize>> {
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let range = hi - lo;
    if !(range > 0.0) || !range.is_finite() {
        return None;
    }
    let scale = bins as f64 / range;
    Some(x.iter().map(|&v| (((v - lo) * scale) as usize).min(bins - 1)).collect())
}

fn check(n: usize, bins: usize) -> Result<()> {
    if bins < 2 {
        return Err(Error::invalid(format!("bins must be >= 2, got {bins}")));
    }
    if n < bins {
        return Err(Error::invalid(format!("{n} samples is fewer than {bins} bins")));
    }
    Ok(())
}

fn binned(x: &[f64], bins: usize, what: &str) -> Result<Vec<usize>> {
    bin_indices(x, bins).ok_or_else(|| Error::ZeroVariance(format!("{what} has zero range")))
}

pub(crate) fn entropy_of_bins(idx: &[usize], bins: usize) -> f64 {
    let mut counts = vec![0usize; bins];
    for &i in idx {
        counts[i] += 1;
    }
    let n = idx.len() as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

pub(crate) fn mi_of_bins(bx: &[usize], by: &[usize], bins: usize) -> f64 {
    let mut joint = vec![0usize; bins * bins];
    let mut cx = vec![0usize; bins];
    let mut cy = vec![0usize; bins];
    for (&a, &b) in bx.iter().zip(by) {
        joint[a * bins + b] += 1;
        cx[a] += 1;
        cy[b] += 1;
    }
    let n = bx.len() as f64;
    let mut mi = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            let c = joint[a * bins + b];
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (cx[a] as f64 * cy[b] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Histogram entropy in nats.
pub fn hist_entropy(x: &[f64], bins: usize) -> Result<f64> {
    check(x.len(), bins)?;
    Ok(entropy_of_bins(&binned(x, bins, "x")?, bins))
}

/// Plug-in mutual information in nats.
pub fn hist_mi(x: &[f64], y: &[f64], bins: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            what: "hist_mi x vs y",
            left: x.len(),
            right: y.len(),
        });
    }
    check(x.len(), bins)?;
    let bx = binned(x, bins, "x")?;
    let by = binned(y, bins, "y")?;
    Ok(mi_of_bins(&bx, &by, bins))
}
