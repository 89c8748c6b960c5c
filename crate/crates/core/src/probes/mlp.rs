//! One-hidden-layer regression MLP trained with Adam and early stopping.

use rand::Rng as _;
use serde::Serialize;

use super::ridge::ColumnStats;
use super::ProbeConfig;
use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::rng::{rng, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the activation output `a`.
    fn grad_from_output(self, pre: f64, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Parameters of `x ↦ w2·σ(W1 x + b1) + b2`. `W1` is `hidden × inputs`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    inputs: usize,
    hidden: usize,
    activation: Activation,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

impl Mlp {
    /// Uniform init in ±1/√fan_in for every layer.
    pub fn init(inputs: usize, hidden: usize, activation: Activation, rng: &mut Rng) -> Self {
        let s1 = 1.0 / (inputs as f64).sqrt();
        let s2 = 1.0 / (hidden as f64).sqrt();
        let mut u = |s: f64| rng.random_range(-s..s);
        let w1 = (0..hidden * inputs).map(|_| u(s1)).collect();
        let b1 = (0..hidden).map(|_| u(s1)).collect();
        let w2 = (0..hidden).map(|_| u(s2)).collect();
        let b2 = u(s2);
        Self {
            inputs,
            hidden,
            activation,
            w1,
            b1,
            w2,
            b2,
        }
    }

    pub fn param_count(&self) -> usize {
        self.hidden * self.inputs + 2 * self.hidden + 1
    }

    /// Flattened as `[W1, b1, w2, b2]`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        p.extend_from_slice(&self.w1);
        p.extend_from_slice(&self.b1);
        p.extend_from_slice(&self.w2);
        p.push(self.b2);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.param_count());
        let (w1, rest) = p.split_at(self.w1.len());
        let (b1, rest) = rest.split_at(self.hidden);
        let (w2, rest) = rest.split_at(self.hidden);
        self.w1.copy_from_slice(w1);
        self.b1.copy_from_slice(b1);
        self.w2.copy_from_slice(w2);
        self.b2 = rest[0];
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        let mut out = self.b2;
        for h in 0..self.hidden {
            let row = &self.w1[h * self.inputs..(h + 1) * self.inputs];
            let pre = self.b1[h] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            out += self.w2[h] * self.activation.apply(pre);
        }
        out
    }

    /// Mean squared error over the rows of `x` (`n × inputs`, row-major) and its gradient.
    pub fn loss_and_grad(&self, x: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.param_count()];
        let loss = self.accumulate(x, y, &mut grad);
        (loss, grad)
    }

    fn accumulate(&self, x: &[f64], y: &[f64], grad: &mut [f64]) -> f64 {
        let n = y.len();
        grad.iter_mut().for_each(|g| *g = 0.0);
        let (gw1, rest) = grad.split_at_mut(self.w1.len());
        let (gb1, rest) = rest.split_at_mut(self.hidden);
        let (gw2, gb2) = rest.split_at_mut(self.hidden);
        let mut pre = vec![0.0; self.hidden];
        let mut act = vec![0.0; self.hidden];
        let mut loss = 0.0;
        let scale = 2.0 / n as f64;
        for (i, &target) in y.iter().enumerate() {
            let xi = &x[i * self.inputs..(i + 1) * self.inputs];
            let mut out = self.b2;
            for h in 0..self.hidden {
                let row = &self.w1[h * self.inputs..(h + 1) * self.inputs];
                pre[h] = self.b1[h] + row.iter().zip(xi).map(|(w, v)| w * v).sum::<f64>();
                act[h] = self.activation.apply(pre[h]);
                out += self.w2[h] * act[h];
            }
            let err = out - target;
            loss += err * err;
            let d_out = scale * err;
            gb2[0] += d_out;
            for h in 0..self.hidden {
                gw2[h] += d_out * act[h];
                let d_pre = d_out * self.w2[h] * self.activation.grad_from_output(pre[h], act[h]);
                gb1[h] += d_pre;
                let g_row = &mut gw1[h * self.inputs..(h + 1) * self.inputs];
                for (g, v) in g_row.iter_mut().zip(xi) {
                    *g += d_pre * v;
                }
            }
        }
        loss / n as f64
    }

    fn mse(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = y.len();
        (0..n)
            .map(|i| (self.forward(&x[i * self.inputs..(i + 1) * self.inputs]) - y[i]).powi(2))
            .sum::<f64>()
            / n as f64
    }
}

struct Adam {
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * grad[i];
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * grad[i] * grad[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (vh.sqrt() + Self::EPS);
        }
    }
}

/// Trained network together with its input/target standardization.
#[derive(Debug, Clone)]
pub struct MlpPredictor {
    net: Mlp,
    x_mean: Vec<f64>,
    x_scale: Vec<f64>,
    y_mean: f64,
    y_scale: f64,
    /// Epochs actually run before early stopping.
    pub epochs_run: usize,
    /// Best validation MSE on the standardized target.
    pub best_val_mse: f64,
}

impl MlpPredictor {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let x: Vec<f64> = row
            .iter()
            .zip(&self.x_mean)
            .zip(&self.x_scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect();
        self.y_mean + self.y_scale * self.net.forward(&x)
    }

    pub fn predict(&self, z: &Matrix) -> Vec<f64> {
        (0..z.rows()).map(|i| self.predict_row(z.row(i))).collect()
    }

    pub fn network(&self) -> &Mlp {
        &self.net
    }
}

fn nonzero_scale(s: f64) -> f64 {
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Fit the probe network on `(z, y)`. A seeded 10% of the rows is held out for
/// early stopping on validation MSE; the best parameters seen are returned.
pub fn mlp_probe_fit(z: &Matrix, y: &[f64], cfg: &ProbeConfig) -> Result<MlpPredictor> {
    let (n, d) = (z.rows(), z.cols());
    if y.len() != n {
        return Err(Error::LengthMismatch {
            what: "mlp rows vs targets",
            left: n,
            right: y.len(),
        });
    }
    if n < 2 {
        return Err(Error::invalid("mlp probe needs at least 2 samples"));
    }
    let stats = ColumnStats::of(z);
    let x_scale: Vec<f64> = stats.std.iter().map(|s| nonzero_scale(*s)).collect();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let y_scale = nonzero_scale((y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n as f64).sqrt());

    let mut rng = rng(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let n_val = ((n as f64 * 0.1).round() as usize).clamp(1, n - 1);
    let gather = |idx: &[usize]| -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::with_capacity(idx.len() * d);
        let mut ys = Vec::with_capacity(idx.len());
        for &i in idx {
            xs.extend(
                z.row(i)
                    .iter()
                    .enumerate()
                    .map(|(j, v)| (v - stats.mean[j]) / x_scale[j]),
            );
            ys.push((y[i] - y_mean) / y_scale);
        }
        (xs, ys)
    };
    let (x_val, y_val) = gather(&order[..n_val]);
    let (x_train, y_train) = gather(&order[n_val..]);
    let n_train = y_train.len();

    let mut net = Mlp::init(d, cfg.mlp_hidden, cfg.mlp_activation, &mut rng);
    let mut params = net.params();
    let mut best = params.clone();
    let mut best_val = f64::INFINITY;
    let mut adam = Adam::new(params.len(), cfg.mlp_learning_rate);
    let mut grad = vec![0.0; params.len()];
    let batch = cfg.mlp_batch_size.max(1);
    let mut idx: Vec<usize> = (0..n_train).collect();
    let mut bx = Vec::with_capacity(batch * d);
    let mut by = Vec::with_capacity(batch);
    let mut wait = 0;
    let mut epochs_run = 0;

    for epoch in 1..=cfg.mlp_epochs {
        epochs_run = epoch;
        for i in (1..n_train).rev() {
            idx.swap(i, rng.random_range(0..=i));
        }
        for chunk in idx.chunks(batch) {
            bx.clear();
            by.clear();
            for &i in chunk {
                bx.extend_from_slice(&x_train[i * d..(i + 1) * d]);
                by.push(y_train[i]);
            }
            let loss = net.accumulate(&bx, &by, &mut grad);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            adam.step(&mut params, &grad);
            net.set_params(&params);
        }
        let val = net.mse(&x_val, &y_val);
        if !val.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        if val < best_val {
            best_val = val;
            best.copy_from_slice(&params);
            wait = 0;
        } else {
            wait += 1;
            if wait >= cfg.mlp_patience {
                break;
            }
        }
    }
    net.set_params(&best);
    Ok(MlpPredictor {
        net,
        x_mean: stats.mean,
        x_scale,
        y_mean,
        y_scale,
        epochs_run,
        best_val_mse: best_val,
    })
}
