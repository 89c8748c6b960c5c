use rand_distr::{Distribution, StandardNormal};
use repdiag::data::{validate_dataset, FactorSet, Matrix, RepresentationSet};
use repdiag::error::Error;
use repdiag::probes::{cv_probe, mlp_probe_fit, r2_score, ridge_fit, Activation, ColumnStats, Mlp, ProbeConfig};
use repdiag::rng::rng;
use repdiag::synth::{gen_axis_aligned, gen_null, SynthSpec};

fn spec(n: usize, f: usize, d: usize, noise: f64, seed: u64) -> SynthSpec {
    SynthSpec {
        n_samples: n,
        n_factors: f,
        n_dims: d,
        noise_sigma: noise,
        seed,
    }
}

fn gaussian(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut r = rng(seed);
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut r)).unwrap()
}

/// Gradient of ‖Xs·w + b − y‖² + α‖w‖² at the fitted (w, b), in standardized coordinates.
fn ridge_objective_gradient(z: &Matrix, y: &[f64], alpha: f64) -> f64 {
    let fit = ridge_fit(z, y, alpha).unwrap();
    let stats = ColumnStats::of(z);
    let resid: Vec<f64> = fit.predict(z).iter().zip(y).map(|(p, t)| p - t).collect();
    let mut sq = (2.0 * resid.iter().sum::<f64>()).powi(2);
    for j in 0..z.cols() {
        let g: f64 = (0..z.rows())
            .map(|i| (z.get(i, j) - stats.mean[j]) / stats.std[j] * resid[i])
            .sum::<f64>()
            * 2.0
            + 2.0 * alpha * fit.standardized_weights[j];
        sq += g * g;
    }
    sq.sqrt()
}

#[test]
fn ridge_zeroes_objective_gradient() {
    for (seed, alpha) in [(1u64, 0.0), (2, 1.0), (3, 10.0), (4, 0.01)] {
        let z = gaussian(60, 6, seed);
        let mut r = rng(seed + 100);
        let y: Vec<f64> = (0..60)
            .map(|i| {
                1.5 * z.get(i, 0) - 0.7 * z.get(i, 3) + {
                    let e: f64 = StandardNormal.sample(&mut r);
                    e
                }
            })
            .collect();
        let g = ridge_objective_gradient(&z, &y, alpha);
        assert!(g <= 1e-8, "seed {seed}, alpha {alpha}: {g}");
    }
}

fn finite_difference_check(activation: Activation, seed: u64) {
    let (n, inputs, hidden) = (5, 3, 4);
    let mut r = rng(seed);
    let net = Mlp::init(inputs, hidden, activation, &mut r);
    let x: Vec<f64> = (0..n * inputs).map(|_| StandardNormal.sample(&mut r)).collect();
    let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
    let (_, grad) = net.loss_and_grad(&x, &y);
    let p0 = net.params();
    let h = 1e-6;
    for k in 0..p0.len() {
        let mut probe = net.clone();
        let mut p = p0.clone();
        p[k] += h;
        probe.set_params(&p);
        let plus = probe.loss_and_grad(&x, &y).0;
        p[k] -= 2.0 * h;
        probe.set_params(&p);
        let minus = probe.loss_and_grad(&x, &y).0;
        let fd = (plus - minus) / (2.0 * h);
        let scale = grad[k].abs().max(fd.abs());
        assert!(
            (grad[k] - fd).abs() <= 1e-4 * scale + 1e-10,
            "param {k}: analytic {} vs numeric {fd}",
            grad[k]
        );
    }
}

#[test]
fn mlp_gradient_matches_finite_differences() {
    for seed in 0..4 {
        finite_difference_check(Activation::Tanh, seed);
    }
}

#[test]
fn mlp_learns_a_quadratic_that_ridge_cannot() {
    let n = 10_000;
    let z = gaussian(n, 1, 5);
    let y: Vec<f64> = (0..n).map(|i| z.get(i, 0).powi(2)).collect();
    let (train, test): (Vec<usize>, Vec<usize>) = (0..n).partition(|i| i % 5 != 0);
    let pick = |idx: &[usize]| -> Vec<f64> { idx.iter().map(|&i| y[i]).collect() };
    let zt = z.select_rows(&train).unwrap();
    let zh = z.select_rows(&test).unwrap();

    let mlp = mlp_probe_fit(&zt, &pick(&train), &ProbeConfig::mlp(6)).unwrap();
    let mlp_r2 = r2_score(&pick(&test), &mlp.predict(&zh)).unwrap();
    let lin = ridge_fit(&zt, &pick(&train), 1.0).unwrap();
    let lin_r2 = r2_score(&pick(&test), &lin.predict(&zh)).unwrap();
    assert!(mlp_r2 >= 0.8, "mlp {mlp_r2}");
    assert!(lin_r2 <= 0.1, "linear {lin_r2}");
}

#[test]
fn mlp_fits_a_noiseless_linear_target() {
    let n = 4000;
    let z = gaussian(n, 3, 7);
    let y: Vec<f64> = (0..n).map(|i| 2.0 * z.get(i, 0) - z.get(i, 2) + 0.5).collect();
    let (train, test): (Vec<usize>, Vec<usize>) = (0..n).partition(|i| i % 5 != 0);
    let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
    let yh: Vec<f64> = test.iter().map(|&i| y[i]).collect();
    let fit = mlp_probe_fit(&z.select_rows(&train).unwrap(), &yt, &ProbeConfig::mlp(8)).unwrap();
    let r2 = r2_score(&yh, &fit.predict(&z.select_rows(&test).unwrap())).unwrap();
    assert!(r2 >= 0.99, "{r2}");
}

#[test]
fn mlp_on_null_data_stays_near_zero() {
    let ds = gen_null(&spec(5000, 1, 8, 0.0, 9)).unwrap();
    let r = cv_probe(&ds, &ProbeConfig::mlp(10)).unwrap();
    assert!(r.overall_r2.abs() <= 0.1, "{}", r.overall_r2);
}

#[test]
fn cv_probe_axis_aligned_and_null() {
    let aligned = gen_axis_aligned(&spec(5000, 5, 8, 0.0, 11)).unwrap();
    let r = cv_probe(&aligned, &ProbeConfig::linear(0)).unwrap();
    for f in &r.factors {
        assert!(f.r2 >= 0.999, "{f:?}");
        assert_eq!(f.folds.len(), 5);
        assert!((f.r2 - f.folds.iter().sum::<f64>() / 5.0).abs() < 1e-15);
    }
    let mean = r.factors.iter().map(|f| f.r2).sum::<f64>() / 5.0;
    assert!((r.overall_r2 - mean).abs() < 1e-15);

    let null = gen_null(&spec(10_000, 5, 24, 0.0, 12)).unwrap();
    let r = cv_probe(&null, &ProbeConfig::linear(0)).unwrap();
    assert!(r.overall_r2.abs() <= 0.05, "{}", r.overall_r2);
}

#[test]
fn probe_recovers_signal_fraction() {
    // dim = factor + N(0, 1) noise: R² = var(f) / (var(f) + σ²) = 0.5
    let ds = gen_axis_aligned(&spec(20_000, 1, 1, 1.0, 13)).unwrap();
    let r = cv_probe(&ds, &ProbeConfig::linear(0)).unwrap();
    assert!((r.overall_r2 - 0.5).abs() <= 0.02, "{}", r.overall_r2);
}

#[test]
fn linear_no_better_than_mlp() {
    let ds = gen_axis_aligned(&spec(10_000, 2, 4, 0.5, 14)).unwrap();
    let lin = cv_probe(&ds, &ProbeConfig::linear(1)).unwrap();
    let mlp = cv_probe(&ds, &ProbeConfig::mlp(1)).unwrap();
    assert!(
        lin.overall_r2 <= mlp.overall_r2 + 0.05,
        "{} vs {}",
        lin.overall_r2,
        mlp.overall_r2
    );
}

#[test]
fn cv_probe_is_deterministic_across_thread_counts() {
    let ds = gen_axis_aligned(&spec(600, 2, 3, 0.3, 15)).unwrap();
    let cfg = ProbeConfig {
        mlp_epochs: 20,
        ..ProbeConfig::mlp(2)
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| cv_probe(&ds, &cfg).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a, b);
}

#[test]
fn probe_errors() {
    let z = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
    let ds = validate_dataset(RepresentationSet::unnamed(z.clone()), FactorSet::unnamed(z)).unwrap();
    assert!(cv_probe(&ds, &ProbeConfig::linear(0)).is_err());
    let bad = ProbeConfig {
        folds: 1,
        ..ProbeConfig::default()
    };
    assert!(bad.validate().is_err());

    let z = gaussian(20, 2, 16);
    let cfg = ProbeConfig {
        mlp_learning_rate: f64::INFINITY,
        ..ProbeConfig::mlp(0)
    };
    let y: Vec<f64> = (0..20).map(f64::from).collect();
    assert!(matches!(
        mlp_probe_fit(&z, &y, &cfg),
        Err(Error::NonFiniteLoss { epoch: 1 })
    ));
    assert!(matches!(
        mlp_probe_fit(&z, &y[..5], &cfg),
        Err(Error::LengthMismatch { .. })
    ));
}
