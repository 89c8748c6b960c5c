//! Browser bindings for three small demos. Every export returns a JSON string;
//! the plain-Rust `*_json` functions behind them are what the tests exercise.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use repdiag::geometry::{svd_geometry, DEFAULT_REL_TOL};
use repdiag::infometrics::ksg_mi;
use repdiag::protocol::{degradation, sensitivity, severe_mean, worst_case, SweepCurve};
use repdiag::synth::{gaussian_mi, gen_gaussian_pair, gen_lowrank};

// Keeps the page responsive; KSG is O(N log N) per point.
const MAX_SAMPLES: usize = 20_000;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// KSG estimate against the closed form for `points` correlations in [-0.95, 0.95].
pub fn mi_curve_json(n_samples: usize, k: usize, points: usize, seed: u64) -> Result<Value, String> {
    if !(2..=MAX_SAMPLES).contains(&n_samples) {
        return Err(format!("n_samples must be in [2, {MAX_SAMPLES}]"));
    }
    if points < 2 {
        return Err("need at least 2 points".into());
    }
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let rho = -0.95 + 1.9 * i as f64 / (points - 1) as f64;
        let (x, y) = gen_gaussian_pair(n_samples, rho, seed.wrapping_add(i as u64)).map_err(err)?;
        let estimate = ksg_mi(&x, &y, k).map_err(err)?;
        rows.push(json!({"rho": rho, "ksg": estimate, "exact": gaussian_mi(rho)}));
    }
    Ok(json!({"k": k, "n_samples": n_samples, "points": rows}))
}

/// Spectrum and summary metrics of a rank-`rank` Gaussian cloud in `n_dims` dims.
pub fn lowrank_json(n_samples: usize, n_dims: usize, rank: usize, seed: u64) -> Result<Value, String> {
    if n_samples > MAX_SAMPLES {
        return Err(format!("n_samples must be at most {MAX_SAMPLES}"));
    }
    let repr = gen_lowrank(n_samples, n_dims, rank, seed).map_err(err)?;
    let g = svd_geometry(&repr, true, DEFAULT_REL_TOL).map_err(err)?;
    Ok(json!({
        "singular_values": g.singular_values,
        "effective_rank": g.effective_rank,
        "participation_ratio": g.participation_ratio,
        "condition_number": g.condition_number,
        "retained": g.retained,
    }))
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split([',', ' ', '\n', '\t'])
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("not a number: {s:?}")))
        .collect()
}

/// Sweep metrics for a reward curve given as text, severity 0 first.
pub fn sweep_json(rewards: &str, id_reward: f64) -> Result<Value, String> {
    let curve = SweepCurve::from_rewards("demo", &parse_list(rewards)?).map_err(err)?;
    let severe = severe_mean(&curve).map_err(err)?;
    let d = degradation(id_reward, severe).map_err(err)?;
    Ok(json!({
        "sensitivity": sensitivity(&curve),
        "severe_mean": severe,
        "worst_case": worst_case(&curve),
        "degradation": d.abs,
        "degradation_pct": d.pct,
        "improved": d.improved,
    }))
}

fn to_js(v: Result<Value, String>) -> Result<String, JsValue> {
    v.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn mi_curve(n_samples: usize, k: usize, points: usize, seed: u64) -> Result<String, JsValue> {
    to_js(mi_curve_json(n_samples, k, points, seed))
}

#[wasm_bindgen]
pub fn lowrank_geometry(n_samples: usize, n_dims: usize, rank: usize, seed: u64) -> Result<String, JsValue> {
    to_js(lowrank_json(n_samples, n_dims, rank, seed))
}

#[wasm_bindgen]
pub fn sweep_metrics(rewards: &str, id_reward: f64) -> Result<String, JsValue> {
    to_js(sweep_json(rewards, id_reward))
}
