//! Descriptive statistics, t-based intervals and tests, Holm-Bonferroni, and
//! the paired 2x2 factorial design.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::data::Table;
use crate::error::{Error, Result};
use crate::special::{student_t_quantile, student_t_two_sided_p};

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean and sample standard deviation (n − 1 denominator).
pub fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 values for a sample std, got {}",
            values.len()
        )));
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    Ok((m, (ss / (values.len() - 1) as f64).sqrt()))
}

/// `mean ± t_{0.975, n−1} · std / √n`.
pub fn ci95(values: &[f64]) -> Result<(f64, f64)> {
    let (m, s) = mean_std(values)?;
    let half = t_multiplier(values.len() - 1) * s / (values.len() as f64).sqrt();
    Ok((m - half, m + half))
}

/// Two-sided 95% critical value t_{0.975, df}.
pub fn t_multiplier(df: usize) -> f64 {
    student_t_quantile(0.975, df as f64)
}

fn serialize_t<S: Serializer>(t: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if t.is_finite() {
        s.serialize_f64(*t)
    } else if t.is_nan() {
        s.serialize_str("nan")
    } else if *t > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub n: usize,
    pub mean_diff: f64,
    #[serde(serialize_with = "serialize_t")]
    pub t_stat: f64,
    pub df: usize,
    pub p_two_sided: f64,
    pub ci95: (f64, f64),
    /// Differences had zero spread; `t_stat` is then 0 or ±∞ by convention.
    pub zero_variance: bool,
}

/// One-sample two-sided t-test of `values` against 0.
pub fn one_sample_t(values: &[f64]) -> Result<TestResult> {
    let n = values.len();
    let (m, s) = mean_std(values)?;
    let df = n - 1;
    let se = s / (n as f64).sqrt();
    let zero_variance = s == 0.0;
    let (t, p) = if zero_variance {
        if m == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(m), 0.0)
        }
    } else {
        let t = m / se;
        (t, student_t_two_sided_p(t, df as f64))
    };
    let half = t_multiplier(df) * se;
    Ok(TestResult {
        n,
        mean_diff: m,
        t_stat: t,
        df,
        p_two_sided: p,
        ci95: (m - half, m + half),
        zero_variance,
    })
}

/// Values of two conditions matched by label (e.g. training seed).
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    labels: Vec<String>,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl PairedSample {
    pub fn new(labels: Vec<String>, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                what: "paired sample a vs b",
                left: a.len(),
                right: b.len(),
            });
        }
        if labels.len() != a.len() {
            return Err(Error::LengthMismatch {
                what: "paired sample labels vs values",
                left: labels.len(),
                right: a.len(),
            });
        }
        if a.len() < 2 {
            return Err(Error::invalid("paired sample needs at least 2 pairs"));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateName(l.clone()));
            }
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::invalid("paired sample contains non-finite values"));
        }
        Ok(Self { labels, a, b })
    }

    /// Labels `0..n`.
    pub fn unlabeled(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let labels = (0..a.len()).map(|i| i.to_string()).collect();
        Self::new(labels, a, b)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn swapped(&self) -> Self {
        Self {
            labels: self.labels.clone(),
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    /// CSV with columns `label,a,b`.
    pub fn load(path: &Path) -> Result<Self> {
        let t = Table::read(path)?;
        let (cl, ca, cb) = (t.column_index("label")?, t.column_index("a")?, t.column_index("b")?);
        let mut labels = Vec::new();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for r in 0..t.rows.len() {
            labels.push(t.rows[r][cl].clone());
            a.push(t.float(r, ca)?);
            b.push(t.float(r, cb)?);
        }
        Self::new(labels, a, b)
    }
}

/// Paired t-test on `d = a − b`.
pub fn paired_t(sample: &PairedSample) -> Result<TestResult> {
    let d: Vec<f64> = sample.a.iter().zip(&sample.b).map(|(a, b)| a - b).collect();
    one_sample_t(&d)
}

/// Holm step-down adjusted p-values, returned in input order.
pub fn holm_bonferroni(p_values: &[f64]) -> Result<Vec<f64>> {
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid(format!("p-value {p} outside [0, 1]")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]).then(i.cmp(&j)));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        let scaled = ((m - rank) as f64 * p_values[i]).min(1.0);
        running = running.max(scaled);
        adjusted[i] = running;
    }
    Ok(adjusted)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorialRow {
    pub seed: String,
    pub level_a: u8,
    pub level_b: u8,
    pub value: f64,
}

/// Per-seed values for all four cells of a 2x2 design.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorialTable {
    seeds: Vec<String>,
    /// `cells[s] = [v00, v01, v10, v11]` indexed by `2 * level_a + level_b`.
    cells: Vec<[f64; 4]>,
}

impl FactorialTable {
    pub fn new(rows: &[FactorialRow]) -> Result<Self> {
        let mut seeds: Vec<String> = Vec::new();
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut cells: Vec<[Option<f64>; 4]> = Vec::new();
        for r in rows {
            if r.level_a > 1 || r.level_b > 1 {
                return Err(Error::invalid(format!(
                    "seed {:?}: levels must be 0 or 1, got ({}, {})",
                    r.seed, r.level_a, r.level_b
                )));
            }
            if !r.value.is_finite() {
                return Err(Error::invalid(format!("seed {:?}: non-finite value", r.seed)));
            }
            let s = *index.entry(r.seed.as_str()).or_insert_with(|| {
                seeds.push(r.seed.clone());
                cells.push([None; 4]);
                seeds.len() - 1
            });
            let c = usize::from(2 * r.level_a + r.level_b);
            if cells[s][c].replace(r.value).is_some() {
                return Err(Error::invalid(format!(
                    "seed {:?} has more than one value for cell ({}, {})",
                    r.seed, r.level_a, r.level_b
                )));
            }
        }
        let mut full = Vec::with_capacity(cells.len());
        for (s, c) in cells.iter().enumerate() {
            let mut out = [0.0; 4];
            for (k, v) in c.iter().enumerate() {
                out[k] = v.ok_or_else(|| Error::MissingCell {
                    seed: seeds[s].clone(),
                    level_a: (k / 2) as u8,
                    level_b: (k % 2) as u8,
                })?;
            }
            full.push(out);
        }
        if full.len() < 2 {
            return Err(Error::invalid("factorial table needs at least 2 seeds"));
        }
        Ok(Self { seeds, cells: full })
    }

    /// CSV with columns `seed,level_a,level_b,value`.
    pub fn load(path: &Path) -> Result<Self> {
        let t = Table::read(path)?;
        let (cs, ca, cb, cv) = (
            t.column_index("seed")?,
            t.column_index("level_a")?,
            t.column_index("level_b")?,
            t.column_index("value")?,
        );
        let level = |r: usize, c: usize| -> Result<u8> {
            let v = t.int(r, c)?;
            u8::try_from(v).map_err(|_| Error::invalid(format!("row {}: level {v} is not 0 or 1", r + 1)))
        };
        let mut rows = Vec::new();
        for r in 0..t.rows.len() {
            rows.push(FactorialRow {
                seed: t.rows[r][cs].clone(),
                level_a: level(r, ca)?,
                level_b: level(r, cb)?,
                value: t.float(r, cv)?,
            });
        }
        Self::new(&rows)
    }

    pub fn seeds(&self) -> &[String] {
        &self.seeds
    }

    /// Mean value of each cell over seeds, keyed `"a{level_a}b{level_b}"`.
    pub fn cell_means(&self) -> BTreeMap<String, f64> {
        (0..4)
            .map(|k| {
                let v: Vec<f64> = self.cells.iter().map(|c| c[k]).collect();
                (format!("a{}b{}", k / 2, k % 2), mean(&v))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorialEffects {
    pub effect_a: TestResult,
    pub effect_b: TestResult,
    /// Double difference v11 − v10 − v01 + v00, not halved.
    pub interaction: TestResult,
    pub cell_means: BTreeMap<String, f64>,
}

pub fn factorial_effects(table: &FactorialTable) -> Result<FactorialEffects> {
    let mut a = Vec::with_capacity(table.cells.len());
    let mut b = Vec::with_capacity(table.cells.len());
    let mut ab = Vec::with_capacity(table.cells.len());
    for &[v00, v01, v10, v11] in &table.cells {
        a.push((v11 + v10) / 2.0 - (v01 + v00) / 2.0);
        b.push((v11 + v01) / 2.0 - (v10 + v00) / 2.0);
        ab.push(v11 - v10 - v01 + v00);
    }
    Ok(FactorialEffects {
        effect_a: one_sample_t(&a)?,
        effect_b: one_sample_t(&b)?,
        interaction: one_sample_t(&ab)?,
        cell_means: table.cell_means(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_examples() {
        assert_eq!(mean_std(&[1.0, 2.0, 3.0]).unwrap(), (2.0, 1.0));
        assert_eq!(mean_std(&[4.5; 6]).unwrap(), (4.5, 0.0));
        let (m, s) = mean_std(&[0.0, 0.0, 3.0]).unwrap();
        assert_eq!(m, 1.0);
        assert!((s - 3f64.sqrt()).abs() < 1e-15);
        assert!(mean_std(&[1.0]).is_err());
    }

    #[test]
    fn paired_t_equal_samples() {
        let s = PairedSample::unlabeled(vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]).unwrap();
        let r = paired_t(&s).unwrap();
        assert_eq!((r.t_stat, r.p_two_sided), (0.0, 1.0));
        assert!(r.zero_variance);
    }

    #[test]
    fn paired_t_constant_shift_is_infinite() {
        let s = PairedSample::unlabeled(vec![2.0, 3.0, 4.0], vec![1.0, 2.0, 3.0]).unwrap();
        let r = paired_t(&s).unwrap();
        assert_eq!(r.t_stat, f64::INFINITY);
        assert_eq!(r.p_two_sided, 0.0);
        assert_eq!(r.ci95, (1.0, 1.0));
    }

    #[test]
    fn paired_sample_validation() {
        assert!(PairedSample::unlabeled(vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(PairedSample::new(vec!["s".into(), "s".into()], vec![1.0, 2.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn holm_examples() {
        let adj = holm_bonferroni(&[0.01, 0.04, 0.03]).unwrap();
        let expect = [0.03, 0.06, 0.06];
        for (a, e) in adj.iter().zip(expect) {
            assert!((a - e).abs() < 1e-15, "{adj:?}");
        }
        assert_eq!(holm_bonferroni(&[0.5]).unwrap(), vec![0.5]);
        assert_eq!(holm_bonferroni(&[0.9, 0.9]).unwrap(), vec![1.0, 1.0]);
        assert!(holm_bonferroni(&[1.2]).is_err());
    }

    fn table(values: impl Fn(usize, u8, u8) -> f64, seeds: usize) -> FactorialTable {
        let mut rows = Vec::new();
        for s in 0..seeds {
            for a in 0..2u8 {
                for b in 0..2u8 {
                    rows.push(FactorialRow {
                        seed: format!("s{s}"),
                        level_a: a,
                        level_b: b,
                        value: values(s, a, b),
                    });
                }
            }
        }
        FactorialTable::new(&rows).unwrap()
    }

    #[test]
    fn factorial_symmetric_construction() {
        let t = table(|_, a, _| if a == 1 { -4.0 } else { -5.0 }, 10);
        let e = factorial_effects(&t).unwrap();
        assert_eq!(e.effect_a.mean_diff, 1.0);
        assert!(e.effect_a.t_stat.is_infinite() && e.effect_a.zero_variance);
        assert_eq!(e.effect_b.mean_diff, 0.0);
        assert_eq!(e.interaction.mean_diff, 0.0);
    }

    #[test]
    fn factorial_missing_cell_reported() {
        let rows = vec![
            FactorialRow {
                seed: "s0".into(),
                level_a: 0,
                level_b: 0,
                value: 1.0,
            },
            FactorialRow {
                seed: "s0".into(),
                level_a: 0,
                level_b: 1,
                value: 1.0,
            },
            FactorialRow {
                seed: "s0".into(),
                level_a: 1,
                level_b: 0,
                value: 1.0,
            },
        ];
        match FactorialTable::new(&rows) {
            Err(Error::MissingCell {
                seed,
                level_a: 1,
                level_b: 1,
            }) => assert_eq!(seed, "s0"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ci95_constant_is_degenerate() {
        assert_eq!(ci95(&[2.5; 4]).unwrap(), (2.5, 2.5));
    }
}
