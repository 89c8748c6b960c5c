use rand::Rng as _;
use repdiag::data::{
    default_partition, validate_dataset, Dataset, FactorPartition, FactorSet, Matrix, PartitionEntry, RepresentationSet,
};
use repdiag::infometrics::{
    dci, factor_alignment, hist_entropy, hist_mi, ksg_mi, ksg_mi_multi, mi_per_factor, mig, sap, MiMode,
};
use repdiag::rng::rng;
use repdiag::synth::{gaussian_mi, gen_axis_aligned, gen_gaussian_pair, gen_null, gen_rotated, SynthSpec};

fn spec(n: usize, f: usize, d: usize, noise: f64, seed: u64) -> SynthSpec {
    SynthSpec {
        n_samples: n,
        n_factors: f,
        n_dims: d,
        noise_sigma: noise,
        seed,
    }
}

fn dataset(repr: Vec<Vec<f64>>, factors: Vec<Vec<f64>>) -> Dataset {
    validate_dataset(
        RepresentationSet::unnamed(Matrix::from_columns(&repr).unwrap()),
        FactorSet::unnamed(Matrix::from_columns(&factors).unwrap()),
    )
    .unwrap()
}

fn uniform(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.random::<f64>()).collect()
}

#[test]
fn ksg_independent_and_correlated_gaussians() {
    let (x, y) = gen_gaussian_pair(10_000, 0.0, 1).unwrap();
    assert!(ksg_mi(&x, &y, 5).unwrap().abs() <= 0.02);
    let (x, y) = gen_gaussian_pair(10_000, 0.9, 2).unwrap();
    let mi = ksg_mi(&x, &y, 5).unwrap();
    assert!((mi - gaussian_mi(0.9)).abs() <= 0.05, "{mi}");
    assert!((gaussian_mi(0.9) - 0.8304).abs() < 1e-4);
}

#[test]
fn ksg_self_information_is_large() {
    let x = uniform(1000, 3);
    assert!(ksg_mi(&x, &x, 5).unwrap() >= 2.0);
}

#[test]
fn ksg_monotone_rescale() {
    let (x, y) = gen_gaussian_pair(10_000, 0.6, 4).unwrap();
    let y2: Vec<f64> = y.iter().map(|v| 3.0 * v + 7.0).collect();
    let a = ksg_mi(&x, &y, 5).unwrap();
    let b = ksg_mi(&x, &y2, 5).unwrap();
    assert!((a - b).abs() <= 0.02, "{a} vs {b}");
    // a nonlinear strictly monotone map only moves the estimate by estimator noise
    let y3: Vec<f64> = y.iter().map(|v| v.exp()).collect();
    assert!((a - ksg_mi(&x, &y3, 5).unwrap()).abs() <= 0.05);
}

#[test]
fn ksg_symmetry_is_exact() {
    let (x, y) = gen_gaussian_pair(2000, 0.4, 5).unwrap();
    let a = ksg_mi(&x, &y, 5).unwrap();
    let b = ksg_mi(&y, &x, 5).unwrap();
    assert!((a - b).abs() <= 1e-9);
}

#[test]
fn mi_per_factor_null_and_aligned() {
    let null = gen_null(&spec(10_000, 5, 5, 0.0, 6)).unwrap();
    let r = mi_per_factor(&null, 5, MiMode::MaxDim, 0).unwrap();
    assert!(r.overall_mi <= 0.05, "{}", r.overall_mi);
    assert!((r.overall_mi - r.per_factor.iter().map(|f| f.mi).sum::<f64>()).abs() < 1e-12);

    // At D = 24 the max over dims picks up selection bias (about +2 sd of the
    // per-pair noise) but every factor stays under 0.02.
    let wide = gen_null(&spec(10_000, 5, 24, 0.0, 6)).unwrap();
    let r = mi_per_factor(&wide, 5, MiMode::MaxDim, 0).unwrap();
    assert!(r.per_factor.iter().all(|f| f.mi <= 0.02), "{r:?}");

    let aligned = gen_axis_aligned(&spec(10_000, 3, 3, 0.0, 7)).unwrap();
    let r = mi_per_factor(&aligned, 5, MiMode::MaxDim, 0).unwrap();
    for (j, f) in r.per_factor.iter().enumerate() {
        assert!(f.mi >= 1.5, "{f:?}");
        assert_eq!(f.best_dim, Some(j));
    }
}

#[test]
fn rotation_preserves_joint_mi() {
    let s = spec(3000, 2, 2, 0.5, 8);
    let a = gen_axis_aligned(&s).unwrap();
    let b = gen_rotated(&s).unwrap();
    let ra = mi_per_factor(&a, 5, MiMode::Joint, 0).unwrap();
    let rb = mi_per_factor(&b, 5, MiMode::Joint, 0).unwrap();
    for (fa, fb) in ra.per_factor.iter().zip(&rb.per_factor) {
        // true value: 0.5 ln(1 + 1/σ²) = 0.805
        assert!((fa.mi - fb.mi).abs() <= 0.1, "{fa:?} {fb:?}");
        assert!((fa.mi - 0.5 * 5f64.ln()).abs() <= 0.1);
    }
    let x = a.repr().matrix();
    assert!(ksg_mi_multi(x, &a.factor(0), 5, 1).is_ok());
}

#[test]
fn hist_mi_examples() {
    let x = uniform(100_000, 9);
    let h = hist_mi(&x, &x, 20).unwrap();
    assert!((h - 20f64.ln()).abs() <= 0.05, "{h}");
    let y = uniform(100_000, 10);
    assert!(hist_mi(&x, &y, 20).unwrap() <= 0.01);
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    assert!((hist_mi(&x, &neg, 20).unwrap() - h).abs() < 1e-12);
    assert!(hist_mi(&x, &y, 20).unwrap() <= hist_entropy(&x, 20).unwrap().min(hist_entropy(&y, 20).unwrap()));
}

#[test]
fn mig_examples() {
    let aligned = gen_axis_aligned(&spec(10_000, 5, 5, 0.0, 11)).unwrap();
    assert!(mig(&aligned, 20).unwrap().mig >= 0.9);
    let null = gen_null(&spec(10_000, 5, 24, 0.0, 12)).unwrap();
    assert!(mig(&null, 20).unwrap().mig <= 0.02);

    // dim F duplicates dim 0, so factor 0 has a tie at the top
    let base = gen_axis_aligned(&spec(5000, 3, 3, 0.0, 13)).unwrap();
    let mut cols: Vec<Vec<f64>> = (0..3).map(|d| base.dim(d)).collect();
    cols.push(base.dim(0));
    let dup = dataset(cols, (0..3).map(|f| base.factor(f)).collect());
    let r = mig(&dup, 20).unwrap();
    assert!(r.per_factor[0].gap.abs() < 1e-12);
    assert!(r.per_factor[1].gap >= 0.9);
}

#[test]
fn mig_skips_constant_factors() {
    let x = uniform(200, 14);
    let d = dataset(vec![x.clone()], vec![x.clone(), vec![1.0; 200]]);
    let r = mig(&d, 20).unwrap();
    assert_eq!(r.skipped, vec!["factor1".to_string()]);
    assert_eq!(r.per_factor.len(), 1);
    let all_const = dataset(vec![x], vec![vec![2.0; 200]]);
    assert!(mig(&all_const, 20).is_err());
}

#[test]
fn dci_examples() {
    let s = spec(5000, 5, 5, 0.0, 15);
    let aligned = gen_axis_aligned(&s).unwrap();
    let a = dci(&aligned, 5, 1.0, 0).unwrap();
    assert!(a.disentanglement >= 0.95, "{a:?}");
    assert!(a.completeness >= 0.95);
    assert!(a.informativeness <= 0.01);
    for f in 0..5 {
        let col: f64 = (0..5).map(|d| a.importance.get(d, f)).sum();
        assert!((col - 1.0).abs() < 1e-12);
    }

    let rotated = gen_rotated(&s).unwrap();
    let b = dci(&rotated, 5, 1.0, 0).unwrap();
    assert!((a.informativeness - b.informativeness).abs() <= 0.02);
    assert!(b.disentanglement < a.disentanglement);

    let null = gen_null(&spec(5000, 5, 24, 0.0, 16)).unwrap();
    let c = dci(&null, 5, 1.0, 0).unwrap();
    assert!((c.informativeness - 1.0).abs() <= 0.05, "{}", c.informativeness);
}

#[test]
fn dci_rejects_constant_factor() {
    let x = uniform(50, 17);
    let d = dataset(vec![x.clone()], vec![x, vec![0.5; 50]]);
    assert!(dci(&d, 5, 1.0, 0).unwrap_err().is_numeric());
}

#[test]
fn sap_examples() {
    let aligned = gen_axis_aligned(&spec(5000, 4, 4, 0.0, 18)).unwrap();
    assert!(sap(&aligned).unwrap().sap >= 0.95);
    let null = gen_null(&spec(10_000, 5, 24, 0.0, 19)).unwrap();
    assert!(sap(&null).unwrap().sap <= 0.02);

    let base = gen_axis_aligned(&spec(2000, 2, 2, 0.0, 20)).unwrap();
    let dup = dataset(
        vec![base.dim(0), base.dim(1), base.dim(0)],
        vec![base.factor(0), base.factor(1)],
    );
    let r = sap(&dup).unwrap();
    assert!(r.per_factor[0].1.abs() < 1e-12);
}

fn two_dim_partition() -> FactorPartition {
    FactorPartition::new(vec![
        PartitionEntry {
            factor: "factor0".into(),
            start: 0,
            end: 1,
        },
        PartitionEntry {
            factor: "factor1".into(),
            start: 1,
            end: 2,
        },
    ])
    .unwrap()
}

#[test]
fn alignment_examples() {
    let base = gen_axis_aligned(&spec(500, 2, 2, 0.0, 21)).unwrap();
    let r = factor_alignment(&base, &two_dim_partition()).unwrap();
    // dims equal their factors, so cross-correlations are sampling noise only
    assert!(r.score > 0.9);
    assert_eq!(r.chance_level, 0.5);

    // each dim correlates with exactly one factor: sign patterns that are orthogonal
    let n = 400;
    let f0: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let f1: Vec<f64> = (0..n).map(|i| if (i / 2) % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let d = dataset(vec![f0.clone(), f1.clone()], vec![f0.clone(), f1.clone()]);
    let r = factor_alignment(&d, &two_dim_partition()).unwrap();
    assert!((r.score - 1.0).abs() < 1e-12);

    // a dim tied equally to two of five factors
    let f2: Vec<f64> = (0..n).map(|i| if (i / 4) % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let f3: Vec<f64> = (0..n).map(|i| if (i / 8) % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let f4: Vec<f64> = (0..n).map(|i| if (i / 16) % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let z: Vec<f64> = f0.iter().zip(&f1).map(|(a, b)| a + b).collect();
    let d = dataset(vec![z], vec![f0, f1, f2, f3, f4]);
    let p = FactorPartition::new(vec![PartitionEntry {
        factor: "friction".into(),
        start: 0,
        end: 1,
    }])
    .unwrap();
    let r = factor_alignment(&d, &p).unwrap();
    assert!((r.per_dim_ratio[0].unwrap() - 0.5).abs() < 1e-12);
    assert!((r.chance_level - 0.2).abs() < 1e-15);
}

#[test]
fn alignment_null_is_near_chance() {
    let null = gen_null(&spec(10_000, 5, 24, 0.0, 22)).unwrap();
    let r = factor_alignment(&null, &default_partition()).unwrap();
    assert!((r.score - 0.2).abs() < 0.06, "{}", r.score);
    assert_eq!(r.per_dim_ratio.len(), 24);
}

#[test]
fn alignment_flags_and_errors() {
    let x = uniform(100, 23);
    let d = dataset(vec![vec![1.0; 100], x.clone()], vec![x.clone(), uniform(100, 24)]);
    let r = factor_alignment(&d, &two_dim_partition()).unwrap();
    assert_eq!(r.zero_denominator_dims, vec![0]);
    assert_eq!(r.per_dim_ratio[0], Some(0.0));

    let short = dataset(vec![x.clone()], vec![x.clone(), uniform(100, 25)]);
    assert!(factor_alignment(&short, &two_dim_partition()).is_err());
    let one = dataset(vec![x.clone(), x.clone()], vec![x]);
    assert!(factor_alignment(&one, &two_dim_partition()).is_err());
}

#[test]
fn joint_mode_null_at_full_width() {
    let null = gen_null(&spec(10_000, 5, 24, 0.0, 6)).unwrap();
    let r = mi_per_factor(&null, 5, MiMode::Joint, 0).unwrap();
    assert!(r.overall_mi <= 0.05, "{}", r.overall_mi);
    assert!(r.per_factor.iter().all(|f| f.best_dim.is_none()));
}
