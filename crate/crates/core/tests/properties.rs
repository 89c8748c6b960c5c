//! Property tests for the invariants every module promises.

use proptest::prelude::*;
use repdiag::data::{
    clamp_subspace, decode_bin, default_partition, encode_bin, validate_dataset, FactorSet, Matrix, RepresentationSet,
};
use repdiag::geometry::{cosine_series, svd_geometry, GradientSeries, DEFAULT_REL_TOL};
use repdiag::infometrics::{dci, factor_alignment, hist_entropy, hist_mi, ksg_mi_seeded, mig, sap};
use repdiag::protocol::{
    crossover, degradation, recovery_time, sensitivity, severe_mean, worst_case, EpisodeTrace, SweepCurve,
};
use repdiag::stats::{factorial_effects, holm_bonferroni, paired_t, FactorialRow, FactorialTable, PairedSample};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1e3f64..1e3, rows * cols).prop_map(move |v| Matrix::new(rows, cols, v).unwrap())
}

fn sized_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| matrix(r, c))
}

fn dataset(n: usize, d: usize, f: usize) -> impl Strategy<Value = repdiag::data::Dataset> {
    (matrix(n, d), matrix(n, f))
        .prop_map(|(z, t)| validate_dataset(RepresentationSet::unnamed(z), FactorSet::unnamed(t)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bin_round_trip_is_bit_exact(m in sized_matrix(12, 9)) {
        let back = decode_bin(&encode_bin(&m)).unwrap();
        prop_assert_eq!(
            back.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        prop_assert_eq!((back.rows(), back.cols()), (m.rows(), m.cols()));
    }

    #[test]
    fn clamp_is_idempotent_and_local(m in (1usize..20).prop_flat_map(|r| matrix(r, 24)), idx in 0usize..5, v in -5.0f64..5.0) {
        let p = default_partition();
        let name = p.entries()[idx].factor.clone();
        let repr = RepresentationSet::unnamed(m.clone());
        let once = clamp_subspace(&repr, &p, &name, v).unwrap();
        let twice = clamp_subspace(&once, &p, &name, v).unwrap();
        prop_assert_eq!(once.matrix(), twice.matrix());
        prop_assert_eq!(once.rows(), m.rows());
        let range = p.entries()[idx].dims();
        for i in 0..m.rows() {
            for j in 0..24 {
                let want = if range.contains(&j) { v } else { m.get(i, j) };
                prop_assert_eq!(once.matrix().get(i, j), want);
            }
        }
    }

    #[test]
    fn disentanglement_scores_are_bounded(ds in dataset(40, 4, 3)) {
        let m = mig(&ds, 5).unwrap().mig;
        prop_assert!((0.0..=1.0).contains(&m));
        let s = sap(&ds).unwrap().sap;
        prop_assert!((0.0..=1.0).contains(&s));
        let d = dci(&ds, 3, 1.0, 0).unwrap();
        prop_assert!((0.0..=1.0).contains(&d.disentanglement));
        prop_assert!((0.0..=1.0).contains(&d.completeness));
        prop_assert!(d.informativeness >= 0.0);
        prop_assert!(d.importance.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn hist_mi_below_marginal_entropies(
        x in prop::collection::vec(-10.0f64..10.0, 30..200),
        seed in any::<u64>(),
        bins in 2usize..25,
    ) {
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v * ((seed >> (i % 64)) & 1) as f64 + i as f64).collect();
        prop_assume!(x.len() >= bins);
        prop_assume!(x.iter().any(|v| *v != x[0]));
        let mi = hist_mi(&x, &y, bins).unwrap();
        let h = hist_entropy(&x, bins).unwrap().min(hist_entropy(&y, bins).unwrap());
        prop_assert!(mi <= h + 1e-9);
        prop_assert!(mi >= 0.0);
    }

    #[test]
    fn ksg_is_symmetric(x in prop::collection::vec(-5.0f64..5.0, 20..120), shift in -3.0f64..3.0, seed in any::<u64>()) {
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| (v + shift * (i as f64).sin()).tanh()).collect();
        prop_assume!(x.iter().any(|v| *v != x[0]) && y.iter().any(|v| *v != y[0]));
        let a = ksg_mi_seeded(&x, &y, 3, seed).unwrap();
        let b = ksg_mi_seeded(&y, &x, 3, seed).unwrap();
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn alignment_ignores_positive_column_scale(ds in dataset(30, 24, 5), col in 0usize..24, scale in 0.01f64..100.0) {
        let p = default_partition();
        let base = factor_alignment(&ds, &p).unwrap();
        let mut m = ds.repr().matrix().clone();
        for i in 0..m.rows() {
            m.set(i, col, m.get(i, col) * scale);
        }
        let scaled = validate_dataset(RepresentationSet::unnamed(m), ds.factors().clone()).unwrap();
        let r = factor_alignment(&scaled, &p).unwrap();
        prop_assert!((r.score - base.score).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&r.score));
    }

    #[test]
    fn geometry_invariances(m in matrix(15, 4), scale in 0.1f64..50.0, rot in 1usize..15) {
        let base = RepresentationSet::unnamed(m.clone());
        prop_assume!(svd_geometry(&base, true, DEFAULT_REL_TOL).is_ok());
        let g = svd_geometry(&base, true, DEFAULT_REL_TOL).unwrap();
        prop_assert!(g.effective_rank >= 1.0 - 1e-12 && g.effective_rank <= 4.0 + 1e-12);
        prop_assert!(g.participation_ratio >= 1.0 - 1e-12 && g.participation_ratio <= 4.0 + 1e-12);
        prop_assert!(g.condition_number >= 1.0);

        let perm: Vec<usize> = (0..15).map(|i| (i + rot) % 15).collect();
        let p = svd_geometry(&RepresentationSet::unnamed(m.select_rows(&perm).unwrap()), true, DEFAULT_REL_TOL).unwrap();
        prop_assert!((p.effective_rank - g.effective_rank).abs() < 1e-9);
        prop_assert!((p.participation_ratio - g.participation_ratio).abs() < 1e-9);

        let scaled = Matrix::from_fn(15, 4, |i, j| m.get(i, j) * scale).unwrap();
        let s = svd_geometry(&RepresentationSet::unnamed(scaled), true, DEFAULT_REL_TOL).unwrap();
        prop_assert!((s.effective_rank - g.effective_rank).abs() < 1e-9);
        prop_assert!((s.participation_ratio - g.participation_ratio).abs() < 1e-9);
    }

    #[test]
    fn cosines_bounded_and_scale_free(a in matrix(6, 5), b in matrix(6, 5), scales in prop::collection::vec(0.01f64..100.0, 6)) {
        let norm_ok = |m: &Matrix| (0..m.rows()).all(|i| m.row(i).iter().any(|v| *v != 0.0));
        prop_assume!(norm_ok(&a) && norm_ok(&b));
        let steps: Vec<u64> = (0..6).map(|s| s * 10).collect();
        let ga = GradientSeries::new(steps.clone(), a.clone()).unwrap();
        let gb = GradientSeries::new(steps.clone(), b).unwrap();
        let c = cosine_series(&ga, &gb).unwrap();
        prop_assert!(c.per_step.iter().all(|v| (-1.0..=1.0).contains(v)));
        let rescaled = Matrix::from_fn(6, 5, |i, j| a.get(i, j) * scales[i]).unwrap();
        let c2 = cosine_series(&GradientSeries::new(steps, rescaled).unwrap(), &gb).unwrap();
        for (x, y) in c.per_step.iter().zip(&c2.per_step) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_invariants(r in prop::collection::vec(-10.0f64..-0.1, 2..8), k in 0.1f64..10.0) {
        let c = SweepCurve::from_rewards("m", &r).unwrap();
        let s = sensitivity(&c);
        prop_assert!(s >= 0.0);
        prop_assert_eq!(s == 0.0, r.iter().all(|v| *v == r[0]));
        prop_assert!(severe_mean(&c).unwrap() >= worst_case(&c));
        prop_assert_eq!(crossover(&c, &c).unwrap(), Some(0));
        let d1 = degradation(r[0], r[r.len() - 1]).unwrap();
        let d2 = degradation(r[0] * k, r[r.len() - 1] * k).unwrap();
        prop_assert!((d1.pct - d2.pct).abs() < 1e-9 * d1.pct.abs().max(1.0));
    }

    #[test]
    fn recovery_monotone_in_threshold(
        errs in prop::collection::vec(0.0f64..4.0, 3..60),
        lo in 0.1f64..3.0,
        extra in 0.0f64..2.0,
    ) {
        let trace = EpisodeTrace::new(errs, 0, 40).unwrap();
        let a = recovery_time(&trace, lo);
        let b = recovery_time(&trace, lo + extra);
        prop_assert!(b.steps <= a.steps);
    }

    #[test]
    fn holm_properties(p in prop::collection::vec(0.0f64..=1.0, 1..12)) {
        let adj = holm_bonferroni(&p).unwrap();
        let m = p.len() as f64;
        for (a, q) in adj.iter().zip(&p) {
            prop_assert!(a >= q && *a <= 1.0);
        }
        // smallest p gets exactly the Bonferroni factor
        let (imin, pmin) = p.iter().enumerate().fold((0, f64::INFINITY), |b, (i, v)| if *v < b.1 { (i, *v) } else { b });
        prop_assert_eq!(adj[imin], (m * pmin).min(1.0));
        // order of adjusted values follows the order of raw values
        for i in 0..p.len() {
            for j in 0..p.len() {
                if p[i] < p[j] {
                    prop_assert!(adj[i] <= adj[j]);
                }
            }
        }
    }

    #[test]
    fn paired_t_antisymmetric(a in prop::collection::vec(-5.0f64..5.0, 3..15), d in prop::collection::vec(-2.0f64..2.0, 15)) {
        let b: Vec<f64> = a.iter().zip(&d).map(|(x, y)| x + y).collect();
        let s = PairedSample::unlabeled(a, b).unwrap();
        let x = paired_t(&s).unwrap();
        let y = paired_t(&s.swapped()).unwrap();
        prop_assert!(x.t_stat == -y.t_stat || (x.t_stat.is_nan() && y.t_stat.is_nan()));
        prop_assert_eq!(x.p_two_sided, y.p_two_sided);
        prop_assert!((0.0..=1.0).contains(&x.p_two_sided));
        prop_assert!(x.ci95.0 <= x.mean_diff && x.mean_diff <= x.ci95.1);
    }

    #[test]
    fn additive_factorial_has_zero_interaction(
        fa in prop::collection::vec(-8i32..8, 2),
        fb in prop::collection::vec(-8i32..8, 2),
        offsets in prop::collection::vec(-100i32..100, 2..8),
    ) {
        // quarter-integer values keep every sum exact in binary floating point
        let mut rows = Vec::new();
        for (s, off) in offsets.iter().enumerate() {
            for a in 0..2u8 {
                for b in 0..2u8 {
                    rows.push(FactorialRow {
                        seed: format!("s{s}"),
                        level_a: a,
                        level_b: b,
                        value: (*off as f64 + fa[a as usize] as f64 + fb[b as usize] as f64) / 4.0,
                    });
                }
            }
        }
        let e = factorial_effects(&FactorialTable::new(&rows).unwrap()).unwrap();
        prop_assert_eq!(e.interaction.mean_diff, 0.0);
    }
}
