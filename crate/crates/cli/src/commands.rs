use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde_json::{json, Map, Value};

use repdiag::data::{
    clamp_subspace, default_partition, load_factors, load_repr, save_bin, validate_dataset, write_csv_matrix, Dataset,
    FactorPartition, Matrix, Table,
};
use repdiag::geometry::{cosine_series, norm_fraction, svd_geometry, GradientSeries};
use repdiag::infometrics::{dci, factor_alignment, mi_per_factor, mig, sap, MiMode};
use repdiag::probes::{cv_probe, Activation, ProbeConfig, ProbeKind};
use repdiag::protocol::{
    crossover, curves_by_seed, degradation, intervention_delta, load_interventions, load_sweep_rows, load_traces,
    mean_curves, peak_error, recovery_time_from, sensitivity, severe_mean, worst_case,
};
use repdiag::rng::{derive_seed, stream};
use repdiag::stats::{factorial_effects, holm_bonferroni, paired_t, FactorialTable, PairedSample};
use repdiag::synth::{gaussian_mi, gen_axis_aligned, gen_gaussian_pair, gen_lowrank, gen_null, gen_rotated, SynthSpec};

use crate::args::{ActivationArg, Cli, Command, DataArgs, MiModeArg, ProbeArgs, ProbeKindArg, SynthKind};
use crate::report::{
    alignment_section, dci_section, full_report, geometry_section, mi_section, mig_section, number, probe_section,
    sap_section, test_value, ReportBundle, ReportConfig,
};
use crate::{usage, CliError};

type Out = Result<ReportBundle, CliError>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(usage(msg()))
    }
}

fn finite_nonneg(name: &str, v: f64) -> Result<(), CliError> {
    ensure(v.is_finite() && v >= 0.0, || {
        format!("{name} must be finite and >= 0, got {v}")
    })
}

fn load_dataset(d: &DataArgs) -> Result<Dataset, CliError> {
    Ok(validate_dataset(load_repr(&d.repr)?, load_factors(&d.factors)?)?)
}

fn mi_mode(m: MiModeArg) -> MiMode {
    match m {
        MiModeArg::MaxDim => MiMode::MaxDim,
        MiModeArg::Joint => MiMode::Joint,
    }
}

fn probe_template(p: &ProbeArgs) -> Result<ProbeConfig, CliError> {
    finite_nonneg("--alpha", p.alpha)?;
    ensure(p.learning_rate.is_finite() && p.learning_rate > 0.0, || {
        format!("--learning-rate must be finite and > 0, got {}", p.learning_rate)
    })?;
    Ok(ProbeConfig {
        folds: p.folds as usize,
        ridge_alpha: p.alpha,
        mlp_hidden: p.hidden as usize,
        mlp_epochs: p.epochs as usize,
        mlp_learning_rate: p.learning_rate,
        mlp_patience: p.patience as usize,
        mlp_activation: match p.activation {
            ActivationArg::Tanh => Activation::Tanh,
            ActivationArg::Relu => Activation::Relu,
        },
        ..ProbeConfig::default()
    })
}

fn rel_tol_ok(v: f64) -> Result<(), CliError> {
    ensure(v.is_finite() && v > 0.0 && v < 1.0, || {
        format!("--rel-tol must lie in (0, 1), got {v}")
    })
}

pub fn dispatch(cli: &Cli, invocation: Vec<String>) -> Out {
    let seed = cli.global.seed;
    let mut b = ReportBundle::new(invocation, seed);
    match &cli.command {
        Command::Synth {
            kind,
            n_samples,
            n_factors,
            n_dims,
            noise,
            rank,
            rho,
            out_repr,
            out_factors,
        } => {
            let spec = SynthSpec {
                n_samples: *n_samples,
                n_factors: *n_factors,
                n_dims: *n_dims,
                noise_sigma: *noise,
                seed,
            };
            synth(&mut b, *kind, &spec, *rank, *rho, out_repr, out_factors.as_deref())?;
        }
        Command::Probe { data, kind, probe } => {
            let ds = load_dataset(data)?;
            let template = ProbeConfig {
                seed: derive_seed(seed, stream::PROBE),
                ..probe_template(probe)?
            };
            let kinds: &[ProbeKind] = match kind {
                ProbeKindArg::Linear => &[ProbeKind::Linear],
                ProbeKindArg::Mlp => &[ProbeKind::Mlp],
                ProbeKindArg::Both => &[ProbeKind::Linear, ProbeKind::Mlp],
            };
            let results = kinds
                .iter()
                .map(|k| {
                    cv_probe(
                        &ds,
                        &ProbeConfig {
                            kind: *k,
                            ..template.clone()
                        },
                    )
                })
                .collect::<repdiag::Result<Vec<_>>>()?;
            b.section("probe", probe_section(&results)?);
        }
        Command::Mi { data, k, mode } => {
            let ds = load_dataset(data)?;
            let r = mi_per_factor(&ds, *k as usize, mi_mode(*mode), derive_seed(seed, stream::MI_JITTER))?;
            let v = mi_section(&r, &mut b);
            b.section("mi", v);
        }
        Command::Mig { data, bins } => {
            let ds = load_dataset(data)?;
            let r = mig(&ds, *bins as usize)?;
            let v = mig_section(&r, &mut b);
            b.section("mig", v);
        }
        Command::Dci { data, folds, alpha } => {
            finite_nonneg("--alpha", *alpha)?;
            let ds = load_dataset(data)?;
            let r = dci(&ds, *folds as usize, *alpha, seed)?;
            b.section("dci", dci_section(&r, &ds, *folds as usize, *alpha));
        }
        Command::Sap { data } => {
            let ds = load_dataset(data)?;
            b.section("sap", sap_section(&sap(&ds)?));
        }
        Command::Alignment { data, partition } => {
            let ds = load_dataset(data)?;
            let p = partition_for(partition.as_deref(), ds.dims())?;
            let r = factor_alignment(&ds, &p)?;
            let v = alignment_section(&r, &p, &mut b);
            b.section("alignment", v);
        }
        Command::Geometry {
            repr,
            no_center,
            rel_tol,
        } => {
            rel_tol_ok(*rel_tol)?;
            let g = svd_geometry(&load_repr(repr)?, !no_center, *rel_tol)?;
            b.section("geometry", geometry_section(&g, !no_center, *rel_tol));
        }
        Command::Gradients {
            steps,
            grads,
            reference,
            total,
        } => gradients(&mut b, steps, grads, reference, total.as_deref())?,
        Command::Sweep {
            input,
            id_reward,
            reference,
        } => sweep(&mut b, input, id_reward, reference.as_deref())?,
        Command::Recovery {
            input,
            threshold,
            window,
            include_push_step,
        } => {
            ensure(threshold.is_finite() && *threshold > 0.0, || {
                format!("--threshold must be finite and > 0, got {threshold}")
            })?;
            recovery(&mut b, input, *threshold, *window as usize, *include_push_step)?;
        }
        Command::Intervene {
            input,
            repr,
            partition,
            clamp,
            value,
            out_repr,
        } => intervene(
            &mut b,
            input.as_deref(),
            repr.as_deref(),
            partition.as_deref(),
            clamp.as_deref(),
            *value,
            out_repr.as_deref(),
        )?,
        Command::Ttest { input } => {
            let r = paired_t(&PairedSample::load(input)?)?;
            if r.zero_variance {
                b.flag("ttest: differences have zero variance, t is infinite");
            }
            b.section("ttest", test_value(&r));
        }
        Command::Holm { p, input } => holm(&mut b, p.as_deref(), input.as_deref())?,
        Command::Factorial { input } => {
            let e = factorial_effects(&FactorialTable::load(input)?)?;
            for (name, t) in [
                ("effect_a", &e.effect_a),
                ("effect_b", &e.effect_b),
                ("interaction", &e.interaction),
            ] {
                if t.zero_variance {
                    b.flag(format!("factorial: {name} has zero variance across seeds"));
                }
            }
            b.section(
                "factorial",
                json!({
                    "effect_a": test_value(&e.effect_a),
                    "effect_b": test_value(&e.effect_b),
                    "interaction": test_value(&e.interaction),
                    "cell_means": e.cell_means,
                    "interaction_contrast": "v11 - v10 - v01 + v00",
                }),
            );
        }
        Command::Report {
            data,
            partition,
            k,
            mode,
            bins,
            probe,
            no_center,
            rel_tol,
        } => {
            rel_tol_ok(*rel_tol)?;
            let template = probe_template(probe)?;
            let cfg = ReportConfig {
                seed,
                k: *k as usize,
                mode: mi_mode(*mode),
                bins: *bins as usize,
                folds: template.folds,
                alpha: template.ridge_alpha,
                center: !no_center,
                rel_tol: *rel_tol,
                probe: template,
            };
            let ds = load_dataset(data)?;
            let p = partition.as_deref().map(FactorPartition::load).transpose()?;
            return Ok(full_report(&ds, p.as_ref(), &cfg, b.invocation)?);
        }
    }
    Ok(b)
}

fn partition_for(path: Option<&Path>, dims: usize) -> Result<FactorPartition, CliError> {
    match path {
        Some(p) => Ok(FactorPartition::load(p)?),
        None => {
            ensure(dims == 24, || {
                format!("--partition is required for a {dims}-d representation (the default layout covers 24)")
            })?;
            Ok(default_partition())
        }
    }
}

fn write_matrix(path: &Path, names: &[String], m: &Matrix) -> repdiag::Result<()> {
    if path.extension().is_some_and(|e| e == "bin") {
        save_bin(m, path)
    } else {
        write_csv_matrix(path, names, m)
    }
}

fn synth(
    b: &mut ReportBundle,
    kind: SynthKind,
    spec: &SynthSpec,
    rank: usize,
    rho: f64,
    out_repr: &Path,
    out_factors: Option<&Path>,
) -> Result<(), CliError> {
    ensure(spec.n_samples >= 2, || "--n-samples must be at least 2".into())?;
    ensure(spec.n_factors >= 1 && spec.n_dims >= 1, || {
        "--n-factors and --n-dims must be at least 1".into()
    })?;
    finite_nonneg("--noise", spec.noise_sigma)?;
    let name = kind
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string();
    let mut meta = json!({ "kind": name, "n_samples": spec.n_samples, "out_repr": out_repr });

    match kind {
        SynthKind::Lowrank => {
            ensure((1..=spec.n_dims).contains(&rank), || {
                format!("--rank must lie in 1..={}, got {rank}", spec.n_dims)
            })?;
            ensure(out_factors.is_none(), || {
                "--out-factors does not apply to lowrank data".into()
            })?;
            let r = gen_lowrank(spec.n_samples, spec.n_dims, rank, spec.seed)?;
            write_matrix(out_repr, r.dim_names(), r.matrix())?;
            meta["n_dims"] = json!(spec.n_dims);
            meta["rank"] = json!(rank);
        }
        SynthKind::GaussianPair => {
            ensure(rho.is_finite() && rho.abs() < 1.0, || {
                format!("--rho must satisfy |rho| < 1, got {rho}")
            })?;
            let out_f = out_factors.ok_or_else(|| usage("--out-factors is required for gaussian-pair"))?;
            let (x, y) = gen_gaussian_pair(spec.n_samples, rho, spec.seed)?;
            write_matrix(out_repr, &["x".to_string()], &Matrix::from_columns(&[x])?)?;
            write_matrix(out_f, &["y".to_string()], &Matrix::from_columns(&[y])?)?;
            meta["rho"] = json!(rho);
            meta["true_mi"] = json!(gaussian_mi(rho));
            meta["out_factors"] = json!(out_f);
        }
        SynthKind::AxisAligned | SynthKind::Rotated | SynthKind::Null => {
            if kind != SynthKind::Null {
                ensure(spec.n_dims >= spec.n_factors, || {
                    format!("--n-dims ({}) must be >= --n-factors ({})", spec.n_dims, spec.n_factors)
                })?;
            }
            let out_f = out_factors.ok_or_else(|| usage(format!("--out-factors is required for {name}")))?;
            let ds = match kind {
                SynthKind::AxisAligned => gen_axis_aligned(spec)?,
                SynthKind::Rotated => gen_rotated(spec)?,
                _ => gen_null(spec)?,
            };
            write_matrix(out_repr, ds.repr().dim_names(), ds.repr().matrix())?;
            write_matrix(out_f, ds.factors().factor_names(), ds.factors().matrix())?;
            meta["n_dims"] = json!(spec.n_dims);
            meta["n_factors"] = json!(spec.n_factors);
            meta["noise"] = json!(spec.noise_sigma);
            meta["factor_names"] = json!(ds.factors().factor_names());
            meta["out_factors"] = json!(out_f);
        }
    }
    b.section("synth", meta);
    Ok(())
}

fn gradients(
    b: &mut ReportBundle,
    steps: &Path,
    grads: &Path,
    reference: &Path,
    total: Option<&Path>,
) -> Result<(), CliError> {
    let g = GradientSeries::load(grads, steps)?;
    let r = GradientSeries::load(reference, steps)?;
    let c = cosine_series(&g, &r)?;
    let mut v = json!({
        "steps": g.steps(),
        "cosine": c.per_step,
        "cosine_mean": c.mean,
        "cosine_std": c.std,
    });
    if let Some(t) = total {
        let t = GradientSeries::load(t, steps)?;
        let f = norm_fraction(&g, &t)?;
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        v["norm_fraction"] = json!(f);
        v["norm_fraction_mean"] = json!(mean);
    }
    b.section("gradients", v);
    Ok(())
}

fn parse_id_rewards(items: &[String]) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for item in items {
        let (m, v) = item
            .rsplit_once('=')
            .ok_or_else(|| usage(format!("--id-reward expects MODEL=VALUE, got {item:?}")))?;
        let x: f64 = v
            .trim()
            .parse()
            .map_err(|_| usage(format!("--id-reward value {v:?} is not a number")))?;
        ensure(x.is_finite() && x != 0.0, || {
            format!("--id-reward for {m:?} must be finite and nonzero")
        })?;
        ensure(out.insert(m.to_string(), x).is_none(), || {
            format!("--id-reward given twice for {m:?}")
        })?;
    }
    Ok(out)
}

fn sweep(b: &mut ReportBundle, input: &Path, id_reward: &[String], reference: Option<&str>) -> Result<(), CliError> {
    let ids = parse_id_rewards(id_reward)?;
    let rows = load_sweep_rows(input)?;
    let means = mean_curves(&rows)?;
    let seeds = curves_by_seed(&rows)?;
    for m in ids.keys() {
        if !means.iter().any(|c| &c.model == m) {
            return Err(repdiag::Error::Invalid(format!("--id-reward names model {m:?} absent from the sweep")).into());
        }
    }
    let ref_curve = match reference {
        Some(r) => Some(
            means
                .iter()
                .find(|c| c.model == r)
                .ok_or_else(|| repdiag::Error::Invalid(format!("--reference model {r:?} absent from the sweep")))?,
        ),
        None => None,
    };

    let mut models = Map::new();
    for c in &means {
        let levels: Vec<Value> = c
            .levels()
            .iter()
            .map(|l| json!({ "severity": l.severity, "mean_reward": l.mean_reward }))
            .collect();
        let severe = severe_mean(c)?;
        let per_seed: Map<String, Value> = seeds
            .iter()
            .filter(|s| s.model == c.model)
            .filter_map(|s| s.seed.as_ref().map(|id| (id.clone(), json!(sensitivity(s)))))
            .collect();
        let mut entry = json!({
            "levels": levels,
            "sensitivity": sensitivity(c),
            "severe_mean": severe,
            "worst_case": worst_case(c),
            "per_seed_sensitivity": per_seed,
        });
        if let Some(id) = ids.get(&c.model) {
            let d = degradation(*id, severe)?;
            if d.improved {
                b.flag(format!(
                    "sweep: model {:?} improves under shift (severe mean above ID reward)",
                    c.model
                ));
            }
            entry["id_reward"] = json!(id);
            entry["degradation"] = json!({ "abs": d.abs, "pct": d.pct, "improved": d.improved });
        }
        if let Some(r) = ref_curve {
            entry["crossover"] = json!(crossover(c, r)?);
        }
        models.insert(c.model.clone(), entry);
    }
    let mut v = json!({ "models": models });
    if let Some(r) = reference {
        v["reference"] = json!(r);
    }
    b.section("sweep", v);
    Ok(())
}

fn recovery(b: &mut ReportBundle, input: &Path, threshold: f64, window: usize, include: bool) -> Result<(), CliError> {
    let traces = load_traces(input, window)?;
    let mut episodes = Map::new();
    let (mut steps, mut peaks, mut censored) = (0.0, 0.0, 0usize);
    for (id, t) in &traces {
        let r = recovery_time_from(t, threshold, include);
        let peak = peak_error(t);
        if r.censored {
            censored += 1;
            b.flag(format!(
                "recovery: episode {id:?} did not recover within {window} steps (censored)"
            ));
        }
        steps += r.steps as f64;
        peaks += peak;
        episodes.insert(
            id.clone(),
            json!({ "steps": r.steps, "censored": r.censored, "peak_error": peak }),
        );
    }
    let n = traces.len() as f64;
    b.section(
        "recovery",
        json!({
            "threshold": threshold,
            "window": window,
            "include_push_step": include,
            "episodes": episodes,
            "summary": {
                "episodes": traces.len(),
                "censored": censored,
                "mean_steps": steps / n,
                "mean_peak_error": peaks / n,
            },
        }),
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn intervene(
    b: &mut ReportBundle,
    input: Option<&Path>,
    repr: Option<&Path>,
    partition: Option<&Path>,
    clamp: Option<&str>,
    value: Option<f64>,
    out_repr: Option<&Path>,
) -> Result<(), CliError> {
    let clamping = repr.is_some() || clamp.is_some() || value.is_some() || out_repr.is_some();
    ensure(input.is_some() || clamping, || {
        "intervene needs --input, or --repr with --clamp, --value and --out-repr".into()
    })?;
    if let Some(path) = input {
        let records = load_interventions(path)?;
        let deltas = intervention_delta(&records)?;
        b.section(
            "intervene",
            json!({ "records": records.len(), "mean_abs_delta": deltas }),
        );
    }
    if clamping {
        let (Some(repr), Some(factor), Some(value), Some(out)) = (repr, clamp, value, out_repr) else {
            return Err(usage("clamping needs all of --repr, --clamp, --value and --out-repr"));
        };
        ensure(value.is_finite(), || format!("--value must be finite, got {value}"))?;
        let r = load_repr(repr)?;
        let p = partition_for(partition, r.dims())?;
        let clamped = clamp_subspace(&r, &p, factor, value)?;
        write_matrix(out, clamped.dim_names(), clamped.matrix())?;
        let e = p.get(factor).expect("clamp_subspace checked the factor");
        b.section(
            "clamp",
            json!({
                "factor": factor,
                "value": number(value),
                "start": e.start,
                "end": e.end,
                "rows": clamped.rows(),
                "out_repr": PathBuf::from(out),
            }),
        );
    }
    Ok(())
}

fn holm(b: &mut ReportBundle, p: Option<&str>, input: Option<&Path>) -> Result<(), CliError> {
    let values: Vec<f64> = match (p, input) {
        (Some(list), None) => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| usage(format!("--p entry {s:?} is not a number")))
            })
            .collect::<Result<_, _>>()?,
        (None, Some(path)) => {
            let t = Table::read(path)?;
            let c = t.column_index("p")?;
            (0..t.rows.len())
                .map(|r| t.float(r, c))
                .collect::<repdiag::Result<_>>()?
        }
        _ => return Err(usage("holm takes exactly one of --p or --input")),
    };
    let adjusted = holm_bonferroni(&values)?;
    b.section("holm", json!({ "p": values, "adjusted": adjusted }));
    Ok(())
}
