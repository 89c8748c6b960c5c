//! Evaluation-protocol metrics over OOD sweep curves, push-recovery traces,
//! and latent intervention records.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::data::Table;
use crate::error::{Error, Result};

/// Recovery threshold on velocity tracking error.
pub const DEFAULT_RECOVERY_THRESHOLD: f64 = 1.5;
/// Post-push step budget.
pub const DEFAULT_RECOVERY_WINDOW: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepLevel {
    pub severity: i64,
    pub mean_reward: f64,
}

/// Mean reward per severity level for one model (and optionally one seed).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    pub model: String,
    pub seed: Option<String>,
    levels: Vec<SweepLevel>,
}

impl SweepCurve {
    /// At least two levels with strictly ascending severity and finite rewards.
    pub fn new(model: impl Into<String>, seed: Option<String>, levels: Vec<SweepLevel>) -> Result<Self> {
        let model = model.into();
        if levels.len() < 2 {
            return Err(Error::invalid(format!("sweep curve {model:?} needs at least 2 levels")));
        }
        if levels.windows(2).any(|w| w[1].severity <= w[0].severity) {
            return Err(Error::invalid(format!(
                "sweep curve {model:?}: severity indices must be strictly ascending"
            )));
        }
        if levels.iter().any(|l| !l.mean_reward.is_finite()) {
            return Err(Error::invalid(format!("sweep curve {model:?}: non-finite reward")));
        }
        Ok(Self { model, seed, levels })
    }

    /// Levels `0..rewards.len()`.
    pub fn from_rewards(model: impl Into<String>, rewards: &[f64]) -> Result<Self> {
        let levels = rewards
            .iter()
            .enumerate()
            .map(|(i, &r)| SweepLevel {
                severity: i as i64,
                mean_reward: r,
            })
            .collect();
        Self::new(model, None, levels)
    }

    pub fn levels(&self) -> &[SweepLevel] {
        &self.levels
    }

    fn rewards(&self) -> impl Iterator<Item = f64> + '_ {
        self.levels.iter().map(|l| l.mean_reward)
    }
}

/// max − min of the level means.
pub fn sensitivity(curve: &SweepCurve) -> f64 {
    let max = curve.rewards().fold(f64::NEG_INFINITY, f64::max);
    let min = curve.rewards().fold(f64::INFINITY, f64::min);
    max - min
}

/// Mean reward over the two highest severity levels.
pub fn severe_mean(curve: &SweepCurve) -> Result<f64> {
    let n = curve.levels.len();
    if n < 2 {
        return Err(Error::invalid("severe mean needs at least 2 levels"));
    }
    Ok((curve.levels[n - 1].mean_reward + curve.levels[n - 2].mean_reward) / 2.0)
}

pub fn worst_case(curve: &SweepCurve) -> f64 {
    curve.rewards().fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Degradation {
    pub abs: f64,
    pub pct: f64,
    /// Severe reward is above the ID reward.
    pub improved: bool,
}

/// `|severe − id|` and the same as a percentage of `|id|`.
pub fn degradation(id_reward: f64, severe: f64) -> Result<Degradation> {
    if id_reward == 0.0 {
        return Err(Error::invalid("degradation percentage undefined for zero ID reward"));
    }
    let abs = (severe - id_reward).abs();
    Ok(Degradation {
        abs,
        pct: 100.0 * abs / id_reward.abs(),
        improved: severe > id_reward,
    })
}

/// First severity index where `a` matches or exceeds `b`.
pub fn crossover(a: &SweepCurve, b: &SweepCurve) -> Result<Option<i64>> {
    let same =
        a.levels.len() == b.levels.len() && a.levels.iter().zip(&b.levels).all(|(x, y)| x.severity == y.severity);
    if !same {
        return Err(Error::invalid(format!(
            "crossover: severity levels of {:?} and {:?} differ",
            a.model, b.model
        )));
    }
    Ok(a.levels
        .iter()
        .zip(&b.levels)
        .find(|(x, y)| x.mean_reward >= y.mean_reward)
        .map(|(x, _)| x.severity))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub model: String,
    pub seed: Option<String>,
    pub level: i64,
    pub mean_reward: f64,
}

/// Rows of a sweep CSV (`model,seed,level,mean_reward`; `seed` may be blank).
pub fn load_sweep_rows(path: &Path) -> Result<Vec<SweepRow>> {
    let t = Table::read(path)?;
    let (cm, cs, cl, cr) = (
        t.column_index("model")?,
        t.column_index("seed")?,
        t.column_index("level")?,
        t.column_index("mean_reward")?,
    );
    (0..t.rows.len())
        .map(|r| {
            let seed = t.rows[r][cs].clone();
            Ok(SweepRow {
                model: t.rows[r][cm].clone(),
                seed: (!seed.is_empty()).then_some(seed),
                level: t.int(r, cl)?,
                mean_reward: t.float(r, cr)?,
            })
        })
        .collect()
}

/// One curve per (model, seed), levels sorted ascending, keyed in sorted order.
pub fn curves_by_seed(rows: &[SweepRow]) -> Result<Vec<SweepCurve>> {
    let mut groups: BTreeMap<(String, Option<String>), Vec<SweepLevel>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.model.clone(), r.seed.clone()))
            .or_default()
            .push(SweepLevel {
                severity: r.level,
                mean_reward: r.mean_reward,
            });
    }
    groups
        .into_iter()
        .map(|((model, seed), mut levels)| {
            levels.sort_by_key(|l| l.severity);
            SweepCurve::new(model, seed, levels)
        })
        .collect()
}

/// Per-model curve of level means averaged over seeds.
pub fn mean_curves(rows: &[SweepRow]) -> Result<Vec<SweepCurve>> {
    let mut groups: BTreeMap<String, BTreeMap<i64, Vec<f64>>> = BTreeMap::new();
    for r in rows {
        groups
            .entry(r.model.clone())
            .or_default()
            .entry(r.level)
            .or_default()
            .push(r.mean_reward);
    }
    groups
        .into_iter()
        .map(|(model, levels)| {
            let levels = levels
                .into_iter()
                .map(|(severity, v)| SweepLevel {
                    severity,
                    mean_reward: v.iter().sum::<f64>() / v.len() as f64,
                })
                .collect();
            SweepCurve::new(model, None, levels)
        })
        .collect()
}

/// Per-step tracking error of one episode with a push at `push_step`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeTrace {
    errors: Vec<f64>,
    push_step: usize,
    window: usize,
}

impl EpisodeTrace {
    pub fn new(errors: Vec<f64>, push_step: usize, window: usize) -> Result<Self> {
        if push_step + 1 > errors.len() {
            return Err(Error::invalid(format!(
                "push step {push_step} outside trace of length {}",
                errors.len()
            )));
        }
        if window == 0 {
            return Err(Error::invalid("recovery window must be at least 1"));
        }
        if errors.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::invalid("tracking errors must be finite and non-negative"));
        }
        Ok(Self {
            errors,
            push_step,
            window,
        })
    }

    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    pub fn push_step(&self) -> usize {
        self.push_step
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Errors at steps push_step + 1 ..= push_step + window that exist in the trace.
    fn post_push(&self) -> &[f64] {
        let start = self.push_step + 1;
        let end = (self.push_step + self.window + 1).min(self.errors.len());
        &self.errors[start.min(end)..end]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Recovery {
    pub steps: usize,
    pub censored: bool,
}

/// Smallest n ≥ 1 with `errors[push_step + n] < threshold`, or the window
/// length flagged as censored when the error never drops below it.
pub fn recovery_time(trace: &EpisodeTrace, threshold: f64) -> Recovery {
    recovery_time_from(trace, threshold, false)
}

/// As [`recovery_time`]; with `include_push_step` the push step itself counts as n = 0.
pub fn recovery_time_from(trace: &EpisodeTrace, threshold: f64, include_push_step: bool) -> Recovery {
    if include_push_step && trace.errors[trace.push_step] < threshold {
        return Recovery {
            steps: 0,
            censored: false,
        };
    }
    match trace.post_push().iter().position(|&e| e < threshold) {
        Some(i) => Recovery {
            steps: i + 1,
            censored: false,
        },
        None => Recovery {
            steps: trace.window,
            censored: true,
        },
    }
}

/// Max error over (push_step, push_step + window]; 0 if the trace ends at the push.
pub fn peak_error(trace: &EpisodeTrace) -> f64 {
    trace.post_push().iter().copied().fold(0.0, f64::max)
}

/// Traces from a CSV with columns `episode_id,step,tracking_error,push_step`.
/// Returned in sorted episode order; steps are sorted within an episode and
/// must be contiguous from their minimum.
pub fn load_traces(path: &Path, window: usize) -> Result<Vec<(String, EpisodeTrace)>> {
    let t = Table::read(path)?;
    let (ce, cs, ct, cp) = (
        t.column_index("episode_id")?,
        t.column_index("step")?,
        t.column_index("tracking_error")?,
        t.column_index("push_step")?,
    );
    let mut episodes: BTreeMap<String, (i64, Vec<(i64, f64)>)> = BTreeMap::new();
    for r in 0..t.rows.len() {
        let push = t.int(r, cp)?;
        let entry = episodes
            .entry(t.rows[r][ce].clone())
            .or_insert_with(|| (push, Vec::new()));
        if entry.0 != push {
            return Err(Error::invalid(format!(
                "episode {:?} has inconsistent push_step values",
                t.rows[r][ce]
            )));
        }
        entry.1.push((t.int(r, cs)?, t.float(r, ct)?));
    }
    episodes
        .into_iter()
        .map(|(id, (push, mut steps))| {
            steps.sort_by_key(|s| s.0);
            let first = steps[0].0;
            if steps.iter().enumerate().any(|(i, s)| s.0 != first + i as i64) {
                return Err(Error::invalid(format!("episode {id:?}: steps are not contiguous")));
            }
            let push_idx = usize::try_from(push - first)
                .map_err(|_| Error::invalid(format!("episode {id:?}: push step before first step")))?;
            let errors = steps.into_iter().map(|s| s.1).collect();
            Ok((id, EpisodeTrace::new(errors, push_idx, window)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterventionRecord {
    pub factor: String,
    pub dr_level: String,
    pub seed: String,
    pub baseline_reward: f64,
    pub clamped_reward: f64,
}

/// Mean |clamped − baseline| per factor.
pub fn intervention_delta(records: &[InterventionRecord]) -> Result<BTreeMap<String, f64>> {
    if records.is_empty() {
        return Err(Error::invalid("no intervention records"));
    }
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in records {
        if !r.baseline_reward.is_finite() || !r.clamped_reward.is_finite() {
            return Err(Error::invalid(format!("non-finite reward for factor {:?}", r.factor)));
        }
        let e = acc.entry(r.factor.clone()).or_default();
        e.0 += (r.clamped_reward - r.baseline_reward).abs();
        e.1 += 1;
    }
    Ok(acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect())
}

/// Records from a CSV with columns `factor,dr_level,seed,baseline_reward,clamped_reward`.
pub fn load_interventions(path: &Path) -> Result<Vec<InterventionRecord>> {
    let t = Table::read(path)?;
    let (cf, cd, cs, cb, cc) = (
        t.column_index("factor")?,
        t.column_index("dr_level")?,
        t.column_index("seed")?,
        t.column_index("baseline_reward")?,
        t.column_index("clamped_reward")?,
    );
    (0..t.rows.len())
        .map(|r| {
            Ok(InterventionRecord {
                factor: t.rows[r][cf].clone(),
                dr_level: t.rows[r][cd].clone(),
                seed: t.rows[r][cs].clone(),
                baseline_reward: t.float(r, cb)?,
                clamped_reward: t.float(r, cc)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const DYNAMITE_PUSH: [f64; 6] = [-4.37, -4.44, -4.50, -4.56, -4.63, -4.78];
    const LSTM_PUSH: [f64; 6] = [-3.58, -4.05, -4.23, -4.45, -4.70, -5.09];

    #[test]
    fn sensitivity_of_push_sweeps() {
        let dm = SweepCurve::from_rewards("dynamite", &DYNAMITE_PUSH).unwrap();
        let lstm = SweepCurve::from_rewards("lstm", &LSTM_PUSH).unwrap();
        assert!((sensitivity(&dm) - 0.41).abs() < 1e-12);
        assert!((sensitivity(&lstm) - 1.52).abs() <= 0.02);
        assert_eq!(sensitivity(&SweepCurve::from_rewards("c", &[-3.0; 4]).unwrap()), 0.0);
    }

    #[test]
    fn severe_and_worst() {
        let dm = SweepCurve::from_rewards("dynamite", &DYNAMITE_PUSH).unwrap();
        assert!((severe_mean(&dm).unwrap() + 4.705).abs() < 1e-12);
        let lstm = SweepCurve::from_rewards("lstm", &LSTM_PUSH).unwrap();
        assert_eq!(worst_case(&lstm), -5.09);
        let two = SweepCurve::from_rewards("two", &[-1.0, -2.0]).unwrap();
        assert_eq!(severe_mean(&two).unwrap(), -1.5);
        let dip = SweepCurve::from_rewards("dip", &[-1.0, -7.0, -2.0]).unwrap();
        assert_eq!(worst_case(&dip), -7.0);
    }

    #[test]
    fn degradation_examples() {
        let d = degradation(-4.48, -4.58).unwrap();
        assert!((d.abs - 0.10).abs() < 1e-12);
        assert!((d.pct - 2.232_142_857).abs() < 1e-6);
        assert!(!d.improved);
        let l = degradation(-4.18, -4.88).unwrap();
        assert!((l.pct - 16.746_411_48).abs() < 1e-6);
        assert_eq!(degradation(-3.0, -3.0).unwrap().pct, 0.0);
        assert!(degradation(-4.0, -3.9).unwrap().improved);
        assert!(degradation(0.0, -1.0).is_err());
    }

    #[test]
    fn crossover_cases() {
        let a = SweepCurve::from_rewards("a", &[-2.0, -3.0]).unwrap();
        let b = SweepCurve::from_rewards("b", &[-1.0, -1.0]).unwrap();
        assert_eq!(crossover(&a, &b).unwrap(), None);
        let c = SweepCurve::from_rewards("c", &[-1.0, -5.0]).unwrap();
        assert_eq!(crossover(&c, &b).unwrap(), Some(0));
        assert_eq!(crossover(&a, &a).unwrap(), Some(0));
        let short = SweepCurve::from_rewards("s", &[-1.0, -1.0, -1.0]).unwrap();
        assert!(crossover(&a, &short).is_err());
    }

    #[test]
    fn curve_validation() {
        assert!(SweepCurve::from_rewards("x", &[-1.0]).is_err());
        let levels = vec![
            SweepLevel {
                severity: 1,
                mean_reward: 0.0,
            },
            SweepLevel {
                severity: 1,
                mean_reward: 0.0,
            },
        ];
        assert!(SweepCurve::new("x", None, levels).is_err());
    }

    fn trace(post: &[f64], window: usize) -> EpisodeTrace {
        let mut errors = vec![0.5; 30];
        errors.push(0.7); // push step
        errors.extend_from_slice(post);
        EpisodeTrace::new(errors, 30, window).unwrap()
    }

    #[test]
    fn recovery_examples() {
        let t = trace(&[4.0, 3.0, 2.0, 1.4, 1.0], 40);
        assert_eq!(
            recovery_time(&t, 1.5),
            Recovery {
                steps: 4,
                censored: false
            }
        );
        let t = trace(&[1.2, 3.0], 40);
        assert_eq!(recovery_time(&t, 1.5).steps, 1);
        let t = trace(&[2.0; 45], 40);
        assert_eq!(
            recovery_time(&t, 1.5),
            Recovery {
                steps: 40,
                censored: true
            }
        );
        // push step itself is below threshold but excluded by default
        assert_eq!(recovery_time_from(&t, 1.5, true).steps, 0);
    }

    #[test]
    fn recovery_threshold_is_strict() {
        let t = trace(&[1.5, 1.49], 40);
        assert_eq!(recovery_time(&t, 1.5).steps, 2);
    }

    #[test]
    fn peak_examples() {
        assert_eq!(peak_error(&trace(&[4.0, 3.0, 2.0], 40)), 4.0);
        assert_eq!(peak_error(&trace(&[1.0, 2.0, 5.0, 3.0, 1.0], 40)), 5.0);
        // beyond the window is ignored
        assert_eq!(peak_error(&trace(&[1.0, 2.0, 9.0], 2)), 2.0);
    }

    #[test]
    fn intervention_examples() {
        let rec = |f: &str, b: f64, c: f64| InterventionRecord {
            factor: f.into(),
            dr_level: "0".into(),
            seed: "42".into(),
            baseline_reward: b,
            clamped_reward: c,
        };
        let d = intervention_delta(&[rec("mass", -4.5, -4.5), rec("mass", -4.5, -4.5)]).unwrap();
        assert_eq!(d["mass"], 0.0);
        let d = intervention_delta(&[rec("friction", -4.5, -4.48), rec("friction", -4.5, -4.54)]).unwrap();
        assert!((d["friction"] - 0.03).abs() < 1e-12);
        assert!(intervention_delta(&[]).is_err());
    }
}
