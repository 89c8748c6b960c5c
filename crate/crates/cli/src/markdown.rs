//! Markdown rendering of a bundle. Derived from the JSON payloads only, never parsed back.

use std::fmt::Write;

use serde_json::{Map, Value};

use repdiag::data::DEFAULT_FACTORS;

use crate::report::ReportBundle;

/// Default factors in their canonical order first, everything else alphabetically.
fn order_factors<'a>(keys: impl Iterator<Item = &'a String>) -> Vec<&'a String> {
    let mut v: Vec<&String> = keys.collect();
    v.sort_by_key(|k| {
        let rank = DEFAULT_FACTORS
            .iter()
            .position(|d| d == k)
            .unwrap_or(DEFAULT_FACTORS.len());
        (rank, k.as_str())
    });
    v
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.4}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Array(a) if a.len() <= 8 && a.iter().all(is_scalar) => {
            format!("[{}]", a.iter().map(cell).collect::<Vec<_>>().join(", "))
        }
        other => other.to_string(),
    }
}

fn is_scalar(v: &Value) -> bool {
    !v.is_object() && !v.is_array()
}

/// Scalars and short arrays of scalars fit in one table cell.
fn inline(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.len() <= 8 && a.iter().all(is_scalar),
        other => is_scalar(other),
    }
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", header.iter().map(|_| "---|").collect::<String>());
    for r in rows {
        let _ = writeln!(out, "| {} |", r.join(" | "));
    }
    out.push('\n');
}

fn probe(out: &mut String, v: &Value) {
    let obj = v.as_object().cloned().unwrap_or_default();
    let kinds: Vec<&str> = ["linear", "mlp"]
        .into_iter()
        .filter(|k| obj.get("overall").and_then(|o| o.get(*k)).is_some())
        .collect();
    let factors = order_factors(obj.keys().filter(|k| *k != "overall" && *k != "folds"));
    let mut rows: Vec<Vec<String>> = factors
        .iter()
        .map(|f| {
            let mut r = vec![f.to_string()];
            r.extend(kinds.iter().map(|k| cell(&obj[*f][*k])));
            r
        })
        .collect();
    let mut overall = vec!["Overall".to_string()];
    overall.extend(kinds.iter().map(|k| cell(&obj["overall"][*k])));
    rows.push(overall);
    let mut header = vec!["Factor"];
    header.extend(
        kinds
            .iter()
            .map(|k| if *k == "linear" { "Linear R²" } else { "MLP R²" }),
    );
    table(out, &header, &rows);
}

fn mi(out: &mut String, v: &Value) {
    let per = v["per_factor"].as_object().cloned().unwrap_or_default();
    let mut rows: Vec<Vec<String>> = order_factors(per.keys())
        .into_iter()
        .map(|f| vec![f.clone(), cell(&per[f]["mi"]), cell(&per[f]["best_dim"])])
        .collect();
    rows.push(vec!["Overall".into(), cell(&v["overall_mi"]), "-".into()]);
    let _ = writeln!(out, "k = {}, mode = {}\n", cell(&v["k"]), cell(&v["mode"]));
    table(out, &["Factor", "MI (nats)", "Best dim"], &rows);
}

fn per_factor_scalar(out: &mut String, v: &Value, key: &str, total: &str, column: &str) {
    let per = v["per_factor"].as_object().cloned().unwrap_or_default();
    let mut rows: Vec<Vec<String>> = order_factors(per.keys())
        .into_iter()
        .map(|f| {
            let x = per[f].get(key).unwrap_or(&per[f]);
            vec![f.clone(), cell(x)]
        })
        .collect();
    rows.push(vec!["Overall".into(), cell(&v[total])]);
    table(out, &["Factor", column], &rows);
}

fn geometry(out: &mut String, v: &Value) {
    let rows: Vec<Vec<String>> = [
        ("Effective rank", "effective_rank"),
        ("Participation ratio", "participation_ratio"),
        ("Condition number", "condition_number"),
    ]
    .iter()
    .map(|(label, key)| vec![label.to_string(), cell(&v[*key])])
    .collect();
    table(out, &["Metric", "Value"], &rows);
}

fn dci(out: &mut String, v: &Value) {
    let rows: Vec<Vec<String>> = ["disentanglement", "completeness", "informativeness"]
        .iter()
        .map(|k| vec![k.to_string(), cell(&v[*k])])
        .collect();
    table(out, &["Metric", "Value"], &rows);
}

/// Scalars as a key/value table; objects of scalars as a row-per-key table; anything else as JSON.
fn generic(out: &mut String, v: &Value) {
    let Some(obj) = v.as_object() else {
        let _ = writeln!(out, "{}\n", cell(v));
        return;
    };
    let (flat, nested): (Vec<_>, Vec<_>) = obj.iter().partition(|(_, x)| inline(x));
    if !flat.is_empty() {
        let rows: Vec<Vec<String>> = flat.iter().map(|(k, x)| vec![k.to_string(), cell(x)]).collect();
        table(out, &["Key", "Value"], &rows);
    }
    for (k, x) in nested {
        let _ = writeln!(out, "**{k}**\n");
        match x {
            Value::Object(inner)
                if inner
                    .values()
                    .all(|y| y.as_object().is_some_and(|o| o.values().all(inline))) =>
            {
                nested_table(out, inner)
            }
            Value::Object(inner) if inner.values().all(inline) => {
                let rows: Vec<Vec<String>> = inner.iter().map(|(a, y)| vec![a.clone(), cell(y)]).collect();
                table(out, &["Key", "Value"], &rows);
            }
            _ => {
                let _ = writeln!(out, "```json\n{}\n```\n", serde_json::to_string(x).unwrap_or_default());
            }
        }
    }
}

fn nested_table(out: &mut String, inner: &Map<String, Value>) {
    let mut cols: Vec<&String> = Vec::new();
    for y in inner.values() {
        for c in y.as_object().into_iter().flat_map(|o| o.keys()) {
            if !cols.contains(&c) {
                cols.push(c);
            }
        }
    }
    let rows: Vec<Vec<String>> = order_factors(inner.keys())
        .into_iter()
        .map(|r| {
            let mut row = vec![r.clone()];
            row.extend(
                cols.iter()
                    .map(|c| cell(inner[r].get(c.as_str()).unwrap_or(&Value::Null))),
            );
            row
        })
        .collect();
    let mut header = vec![""];
    header.extend(cols.iter().map(|c| c.as_str()));
    table(out, &header, &rows);
}

fn sweep(out: &mut String, v: &Value) {
    let models = v["models"].as_object().cloned().unwrap_or_default();
    let rows: Vec<Vec<String>> = models
        .iter()
        .map(|(m, e)| {
            vec![
                m.clone(),
                cell(&e["sensitivity"]),
                cell(&e["severe_mean"]),
                cell(&e["worst_case"]),
                cell(&e["degradation"]["abs"]),
                cell(&e["degradation"]["pct"]),
                cell(&e["crossover"]),
            ]
        })
        .collect();
    if let Some(r) = v["reference"].as_str() {
        let _ = writeln!(out, "Crossover against {r}.\n");
    }
    table(
        out,
        &[
            "Model",
            "Sensitivity",
            "Severe mean",
            "Worst case",
            "Degradation",
            "Degradation %",
            "Crossover",
        ],
        &rows,
    );
}

fn alignment(out: &mut String, v: &Value) {
    let empty = Vec::new();
    let ratios = v["per_dim_ratio"].as_array().unwrap_or(&empty);
    let rows: Vec<Vec<String>> = v["partition"]
        .as_array()
        .unwrap_or(&empty)
        .iter()
        .map(|e| {
            let (start, end) = (
                e["start"].as_u64().unwrap_or(0) as usize,
                e["end"].as_u64().unwrap_or(0) as usize,
            );
            let got: Vec<f64> = ratios
                .get(start..end)
                .unwrap_or_default()
                .iter()
                .filter_map(Value::as_f64)
                .collect();
            let mean = if got.is_empty() {
                "-".to_string()
            } else {
                format!("{:.4}", got.iter().sum::<f64>() / got.len() as f64)
            };
            vec![cell(&e["factor"]), format!("{start}-{}", end.saturating_sub(1)), mean]
        })
        .collect();
    table(out, &["Factor", "Dims", "Mean ratio"], &rows);
    let _ = writeln!(
        out,
        "Score {} (chance {})\n",
        cell(&v["score"]),
        cell(&v["chance_level"])
    );
}

fn holm(out: &mut String, v: &Value) {
    let empty = Vec::new();
    let p = v["p"].as_array().unwrap_or(&empty);
    let adj = v["adjusted"].as_array().unwrap_or(&empty);
    let rows: Vec<Vec<String>> = p
        .iter()
        .zip(adj)
        .enumerate()
        .map(|(i, (a, b))| vec![i.to_string(), cell(a), cell(b)])
        .collect();
    table(out, &["#", "p", "Holm p"], &rows);
}

const TEST_COLUMNS: [&str; 6] = ["mean_diff", "t_stat", "df", "p_two_sided", "ci95", "n"];

fn test_row(label: &str, t: &Value) -> Vec<String> {
    let mut r = vec![label.to_string()];
    r.extend(TEST_COLUMNS.iter().map(|c| cell(&t[*c])));
    r
}

fn tests_table(out: &mut String, rows: Vec<Vec<String>>) {
    table(out, &["", "Mean diff", "t", "df", "p", "95% CI", "n"], &rows);
}

fn factorial(out: &mut String, v: &Value) {
    let rows = ["effect_a", "effect_b", "interaction"]
        .iter()
        .map(|k| test_row(k, &v[*k]))
        .collect();
    tests_table(out, rows);
    let _ = writeln!(out, "Interaction contrast: {}\n", cell(&v["interaction_contrast"]));
    let means = v["cell_means"].as_object().cloned().unwrap_or_default();
    let rows: Vec<Vec<String>> = means.iter().map(|(k, x)| vec![k.clone(), cell(x)]).collect();
    table(out, &["Cell", "Mean"], &rows);
}

pub fn report_markdown(bundle: &ReportBundle) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}\n", bundle.tool_version);
    let _ = writeln!(out, "Seed: {}\n", bundle.seed);
    for (name, v) in &bundle.sections {
        let _ = writeln!(out, "## {name}\n");
        match name.as_str() {
            "probe" => probe(&mut out, v),
            "mi" => mi(&mut out, v),
            "mig" => per_factor_scalar(&mut out, v, "gap", "mig", "MIG"),
            "sap" => per_factor_scalar(&mut out, v, "sap", "sap", "SAP"),
            "dci" => dci(&mut out, v),
            "geometry" => geometry(&mut out, v),
            "sweep" => sweep(&mut out, v),
            "alignment" => alignment(&mut out, v),
            "holm" => holm(&mut out, v),
            "factorial" => factorial(&mut out, v),
            "ttest" => tests_table(&mut out, vec![test_row("a - b", v)]),
            _ => generic(&mut out, v),
        }
    }
    if !bundle.flags.is_empty() {
        let _ = writeln!(out, "## Flags\n");
        for f in &bundle.flags {
            let _ = writeln!(out, "- {f}");
        }
    }
    out
}
