//! The report bundle and the section payloads every subcommand emits.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Map, Value};

use repdiag::data::{default_partition, Dataset, FactorPartition};
use repdiag::geometry::{svd_geometry, GeometryReport, DEFAULT_REL_TOL};
use repdiag::infometrics::{
    dci, factor_alignment, mi_per_factor, mig, sap, AlignmentReport, DciReport, DisentanglementReport, MiMode,
    MiReport, MigReport, SapReport, DEFAULT_BINS, DEFAULT_K,
};
use repdiag::probes::{cv_probe, ProbeConfig, ProbeKind, ProbeResult};
use repdiag::rng::{derive_seed, stream};
use repdiag::stats::TestResult;
use repdiag::{Error, Result};

pub const TOOL_VERSION: &str = concat!("repdiag ", env!("CARGO_PKG_VERSION"));

/// Everything a run reports. Serialized with sorted keys, so field order here is irrelevant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub tool_version: String,
    pub invocation: Vec<String>,
    pub seed: u64,
    pub sections: BTreeMap<String, Value>,
    pub flags: Vec<String>,
}

impl ReportBundle {
    pub fn new(invocation: Vec<String>, seed: u64) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            invocation,
            seed,
            sections: BTreeMap::new(),
            flags: Vec::new(),
        }
    }

    pub fn section(&mut self, name: &str, payload: Value) {
        self.sections.insert(name.to_string(), payload);
    }

    /// Record a warning once; repeats are dropped, first-seen order kept.
    pub fn flag(&mut self, message: impl Into<String>) {
        let m = message.into();
        if !self.flags.contains(&m) {
            self.flags.push(m);
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        crate::json::to_bytes(self).expect("bundle is always representable as JSON")
    }
}

/// Finite floats as numbers, the rest as "inf", "-inf" or "nan".
pub fn number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn test_value(t: &TestResult) -> Value {
    json!({
        "n": t.n,
        "mean_diff": number(t.mean_diff),
        "t_stat": number(t.t_stat),
        "df": t.df,
        "p_two_sided": number(t.p_two_sided),
        "ci95": [number(t.ci95.0), number(t.ci95.1)],
        "zero_variance": t.zero_variance,
    })
}

/// `{factor: {linear, mlp}, overall: {..}, folds: {factor: {linear: [..], mlp: [..]}}}`.
pub fn probe_section(results: &[ProbeResult]) -> Result<Value> {
    let mut out = Map::new();
    let mut overall = Map::new();
    let mut folds: Map<String, Value> = Map::new();
    for r in results {
        let kind = r.kind.name();
        overall.insert(kind.into(), json!(r.overall_r2));
        for f in &r.factors {
            if f.factor == "overall" || f.factor == "folds" {
                return Err(Error::Invalid(format!(
                    "factor name {:?} collides with a probe report key",
                    f.factor
                )));
            }
            let entry = out.entry(f.factor.clone()).or_insert_with(|| json!({}));
            entry[kind] = json!(f.r2);
            let fe = folds.entry(f.factor.clone()).or_insert_with(|| json!({}));
            fe[kind] = json!(f.folds);
        }
    }
    out.insert("overall".into(), Value::Object(overall));
    out.insert("folds".into(), Value::Object(folds));
    Ok(Value::Object(out))
}

pub fn mi_section(r: &MiReport, bundle: &mut ReportBundle) -> Value {
    let mut per = Map::new();
    for f in &r.per_factor {
        per.insert(f.factor.clone(), json!({ "mi": f.mi, "best_dim": f.best_dim }));
    }
    for f in &r.negative {
        bundle.flag(format!("mi: negative estimate for factor {f:?}"));
    }
    json!({
        "k": r.k,
        "mode": r.mode,
        "per_factor": per,
        "overall_mi": r.overall_mi,
        "negative": r.negative,
    })
}

pub fn mig_section(r: &MigReport, bundle: &mut ReportBundle) -> Value {
    let mut per = Map::new();
    for f in &r.per_factor {
        per.insert(
            f.factor.clone(),
            json!({
                "gap": f.gap,
                "top_dim": f.top_dim,
                "top_mi": f.top_mi,
                "second_mi": f.second_mi,
                "entropy": f.entropy,
            }),
        );
    }
    for f in &r.skipped {
        bundle.flag(format!("mig: skipped factor {f:?} with zero binned entropy"));
    }
    json!({ "mig": r.mig, "bins": r.bins, "per_factor": per, "skipped": r.skipped })
}

pub fn dci_section(r: &DciReport, ds: &Dataset, folds: usize, alpha: f64) -> Value {
    let imp = &r.importance;
    let rows: Vec<Vec<f64>> = (0..imp.dims)
        .map(|d| (0..imp.factors).map(|f| imp.get(d, f)).collect())
        .collect();
    let per: Map<String, Value> = r
        .per_factor_informativeness
        .iter()
        .map(|(f, v)| (f.clone(), json!(v)))
        .collect();
    json!({
        "disentanglement": r.disentanglement,
        "completeness": r.completeness,
        "informativeness": r.informativeness,
        "per_factor_informativeness": per,
        "folds": folds,
        "alpha": alpha,
        "importance": {
            "dims": ds.repr().dim_names(),
            "factors": ds.factors().factor_names(),
            "rows": rows,
        },
    })
}

pub fn sap_section(r: &SapReport) -> Value {
    let per: Map<String, Value> = r.per_factor.iter().map(|(f, v)| (f.clone(), json!(v))).collect();
    json!({ "sap": r.sap, "per_factor": per })
}

pub fn alignment_section(r: &AlignmentReport, partition: &FactorPartition, bundle: &mut ReportBundle) -> Value {
    for d in &r.zero_denominator_dims {
        bundle.flag(format!(
            "alignment: dim {d} is uncorrelated with every factor, ratio set to 0"
        ));
    }
    let entries: Vec<Value> = partition
        .entries()
        .iter()
        .map(|e| json!({ "factor": e.factor, "start": e.start, "end": e.end }))
        .collect();
    json!({
        "score": r.score,
        "chance_level": r.chance_level,
        "per_dim_ratio": r.per_dim_ratio,
        "zero_denominator_dims": r.zero_denominator_dims,
        "partition": entries,
    })
}

pub fn geometry_section(g: &GeometryReport, center: bool, rel_tol: f64) -> Value {
    json!({
        "effective_rank": g.effective_rank,
        "participation_ratio": g.participation_ratio,
        "condition_number": g.condition_number,
        "singular_values": g.singular_values,
        "retained": g.retained,
        "centered": center,
        "rel_tol": rel_tol,
    })
}

/// Knobs for [`full_report`]. Probe settings other than kind and seed come from `probe`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportConfig {
    pub seed: u64,
    pub k: usize,
    pub mode: MiMode,
    pub bins: usize,
    pub folds: usize,
    pub alpha: f64,
    pub center: bool,
    pub rel_tol: f64,
    pub probe: ProbeConfig,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            k: DEFAULT_K,
            mode: MiMode::MaxDim,
            bins: DEFAULT_BINS,
            folds: 5,
            alpha: 1.0,
            center: true,
            rel_tol: DEFAULT_REL_TOL,
            probe: ProbeConfig::default(),
        }
    }
}

/// Sub-seeds: both probe kinds share `derive_seed(seed, PROBE)` so they see the
/// same folds, KSG jitter uses `derive_seed(seed, MI_JITTER)`, and DCI derives
/// its own fold stream from `seed`.
pub fn probe_configs(cfg: &ReportConfig) -> [ProbeConfig; 2] {
    let seed = derive_seed(cfg.seed, stream::PROBE);
    let base = ProbeConfig {
        folds: cfg.folds,
        ridge_alpha: cfg.alpha,
        seed,
        ..cfg.probe.clone()
    };
    [
        ProbeConfig {
            kind: ProbeKind::Linear,
            ..base.clone()
        },
        ProbeConfig {
            kind: ProbeKind::Mlp,
            ..base
        },
    ]
}

/// Probes, MI, MIG, DCI, SAP, alignment and geometry over one dataset.
///
/// Alignment needs a partition; without one the default layout is used when the
/// representation is 24-d and its factor names match, otherwise the section is
/// skipped with a flag.
pub fn full_report(
    dataset: &Dataset,
    partition: Option<&FactorPartition>,
    cfg: &ReportConfig,
    invocation: Vec<String>,
) -> Result<ReportBundle> {
    let mut b = ReportBundle::new(invocation, cfg.seed);

    let probes = probe_configs(cfg)
        .iter()
        .map(|c| cv_probe(dataset, c))
        .collect::<Result<Vec<_>>>()?;
    b.section("probe", probe_section(&probes)?);

    let mi = mi_per_factor(dataset, cfg.k, cfg.mode, derive_seed(cfg.seed, stream::MI_JITTER))?;
    let v = mi_section(&mi, &mut b);
    b.section("mi", v);

    let mg = mig(dataset, cfg.bins)?;
    let v = mig_section(&mg, &mut b);
    b.section("mig", v);

    let d = dci(dataset, cfg.folds, cfg.alpha, cfg.seed)?;
    b.section("dci", dci_section(&d, dataset, cfg.folds, cfg.alpha));

    let s = sap(dataset)?;
    b.section("sap", sap_section(&s));

    b.section(
        "disentanglement",
        serde_json::to_value(DisentanglementReport::from_parts(&mg, &d, &s)).expect("plain floats"),
    );

    match partition {
        Some(p) => {
            let r = factor_alignment(dataset, p)?;
            let v = alignment_section(&r, p, &mut b);
            b.section("alignment", v);
        }
        None => alignment_with_default(dataset, &mut b),
    }

    let g = svd_geometry(dataset.repr(), cfg.center, cfg.rel_tol)?;
    b.section("geometry", geometry_section(&g, cfg.center, cfg.rel_tol));
    Ok(b)
}

fn alignment_with_default(dataset: &Dataset, b: &mut ReportBundle) {
    if dataset.dims() != 24 {
        b.flag(format!(
            "alignment: skipped, no partition given and the representation has {} dims (default layout needs 24)",
            dataset.dims()
        ));
        return;
    }
    let p = default_partition();
    match factor_alignment(dataset, &p) {
        Ok(r) => {
            let v = alignment_section(&r, &p, b);
            b.section("alignment", v);
        }
        Err(e) => b.flag(format!("alignment: skipped with the default partition: {e}")),
    }
}
