//! Single-layer multivariate LSTM with a scalar output head, trained by
//! exact backpropagation through time and Adam.
//!
//! Cell recurrence, gate order [i, f, g, o]:
//! ```text
//! i = sigmoid(W_i x + U_i h + b_i)    f, o analogous
//! g = tanh(W_g x + U_g h + b_g)
//! c' = f .* c + i .* g
//! h' = o .* tanh(c')
//! yhat = w_y . h_L + b_y
//! ```
//! Parameters live in one flat vector so the optimizer and the
//! finite-difference gradient check can treat them uniformly.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::WindowedDataset;
use crate::features::{FeatureMatrix, Scaler, SplitSpec};
use crate::{Error, Result};

pub const GATES: usize = 4;
const GATE_I: usize = 0;
const GATE_F: usize = 1;
const GATE_G: usize = 2;
const GATE_O: usize = 3;

/// All weights of the network in one flat vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub input_dim: usize,
    pub hidden: usize,
    pub theta: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden: usize) -> LstmParams {
        let n = Self::param_count(input_dim, hidden);
        LstmParams { input_dim, hidden, theta: vec![0.0; n] }
    }

    pub fn param_count(input_dim: usize, hidden: usize) -> usize {
        GATES * hidden * input_dim + GATES * hidden * hidden + GATES * hidden + hidden + 1
    }

    #[inline]
    fn w(&self, gate: usize, h: usize, f: usize) -> f64 {
        self.theta[gate * self.hidden * self.input_dim + h * self.input_dim + f]
    }

    #[inline]
    fn u(&self, gate: usize, h: usize, k: usize) -> f64 {
        let off = GATES * self.hidden * self.input_dim;
        self.theta[off + gate * self.hidden * self.hidden + h * self.hidden + k]
    }

    #[inline]
    fn b(&self, gate: usize, h: usize) -> f64 {
        let off = GATES * self.hidden * (self.input_dim + self.hidden);
        self.theta[off + gate * self.hidden + h]
    }

    #[inline]
    fn wy(&self, h: usize) -> f64 {
        let off = GATES * self.hidden * (self.input_dim + self.hidden) + GATES * self.hidden;
        self.theta[off + h]
    }

    #[inline]
    fn by(&self) -> f64 {
        *self.theta.last().unwrap()
    }

    fn idx_w(&self, gate: usize, h: usize, f: usize) -> usize {
        gate * self.hidden * self.input_dim + h * self.input_dim + f
    }

    fn idx_u(&self, gate: usize, h: usize, k: usize) -> usize {
        GATES * self.hidden * self.input_dim + gate * self.hidden * self.hidden + h * self.hidden + k
    }

    fn idx_b(&self, gate: usize, h: usize) -> usize {
        GATES * self.hidden * (self.input_dim + self.hidden) + gate * self.hidden + h
    }

    fn idx_wy(&self, h: usize) -> usize {
        GATES * self.hidden * (self.input_dim + self.hidden) + GATES * self.hidden + h
    }

    fn idx_by(&self) -> usize {
        self.theta.len() - 1
    }

    /// Seeded uniform(-k, k) initialization with k = 1/sqrt(H); the
    /// forget-gate biases are then set to 1.0 for gradient flow at the
    /// start of a sequence.
    pub fn init(input_dim: usize, hidden: usize, rng: &mut impl Rng) -> LstmParams {
        let mut p = LstmParams::zeros(input_dim, hidden);
        let k = 1.0 / (hidden as f64).sqrt();
        for v in &mut p.theta {
            *v = rng.gen_range(-k..k);
        }
        for h in 0..hidden {
            let idx = p.idx_b(GATE_F, h);
            p.theta[idx] = 1.0;
        }
        let by = p.idx_by();
        p.theta[by] = 0.0;
        p
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Per-step activations kept for backpropagation through time.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub gates: Vec<[Vec<f64>; GATES]>, // i, f, g, o per step
    pub cells: Vec<Vec<f64>>,
    pub tanh_cells: Vec<Vec<f64>>,
    pub hiddens: Vec<Vec<f64>>,
}

/// Runs the recurrence over the window rows (h_0 = c_0 = 0) and returns
/// the prediction with the cache needed for the backward pass.
pub fn lstm_forward(params: &LstmParams, window: &[Vec<f64>]) -> Result<(f64, ForwardCache)> {
    let hidden = params.hidden;
    let steps = window.len();
    if steps == 0 {
        return Err(Error::Shape("empty input window".into()));
    }
    for row in window {
        if row.len() != params.input_dim {
            return Err(Error::Shape(format!(
                "feature row has {} columns, model expects {}",
                row.len(),
                params.input_dim
            )));
        }
    }
    let mut cache = ForwardCache {
        gates: Vec::with_capacity(steps),
        cells: Vec::with_capacity(steps),
        tanh_cells: Vec::with_capacity(steps),
        hiddens: Vec::with_capacity(steps),
    };
    let mut h_prev = vec![0.0; hidden];
    let mut c_prev = vec![0.0; hidden];
    for x in window {
        let mut step_gates: [Vec<f64>; GATES] = Default::default();
        let mut c = vec![0.0; hidden];
        for gate in 0..GATES {
            let mut acts = vec![0.0; hidden];
            for (h, act) in acts.iter_mut().enumerate() {
                let mut a = params.b(gate, h);
                for (f, &xf) in x.iter().enumerate() {
                    a += params.w(gate, h, f) * xf;
                }
                for (k, &hk) in h_prev.iter().enumerate() {
                    a += params.u(gate, h, k) * hk;
                }
                *act = if gate == GATE_G { a.tanh() } else { sigmoid(a) };
            }
            step_gates[gate] = acts;
        }
        for h in 0..hidden {
            c[h] = step_gates[GATE_F][h] * c_prev[h] + step_gates[GATE_I][h] * step_gates[GATE_G][h];
        }
        let tc: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let h_new: Vec<f64> = (0..hidden).map(|h| step_gates[GATE_O][h] * tc[h]).collect();
        cache.gates.push(step_gates);
        cache.cells.push(c.clone());
        cache.tanh_cells.push(tc);
        cache.hiddens.push(h_new.clone());
        c_prev = c;
        h_prev = h_new;
    }
    let h_last = cache.hiddens.last().unwrap();
    let pred = (0..hidden).map(|h| params.wy(h) * h_last[h]).sum::<f64>() + params.by();
    Ok((pred, cache))
}

/// Accumulates d(loss)/d(theta) for one sample into `grads`, given
/// d(loss)/d(prediction).
fn backward_into(
    params: &LstmParams,
    window: &[Vec<f64>],
    cache: &ForwardCache,
    dy: f64,
    grads: &mut [f64],
) {
    let hidden = params.hidden;
    let steps = window.len();
    let h_last = cache.hiddens.last().unwrap();
    for h in 0..hidden {
        grads[params.idx_wy(h)] += dy * h_last[h];
    }
    grads[params.idx_by()] += dy;

    let mut dh: Vec<f64> = (0..hidden).map(|h| dy * params.wy(h)).collect();
    let mut dc = vec![0.0; hidden];
    for t in (0..steps).rev() {
        let gates = &cache.gates[t];
        let tc = &cache.tanh_cells[t];
        let (i, f, g, o) = (&gates[GATE_I], &gates[GATE_F], &gates[GATE_G], &gates[GATE_O]);
        let zero = vec![0.0; hidden];
        let c_prev = if t == 0 { &zero } else { &cache.cells[t - 1] };
        let h_prev = if t == 0 { &zero } else { &cache.hiddens[t - 1] };

        let mut das: [Vec<f64>; GATES] = Default::default();
        for arr in &mut das {
            *arr = vec![0.0; hidden];
        }
        for h in 0..hidden {
            let do_ = dh[h] * tc[h];
            let dct = dc[h] + dh[h] * o[h] * (1.0 - tc[h] * tc[h]);
            let di = dct * g[h];
            let dg = dct * i[h];
            let df = dct * c_prev[h];
            dc[h] = dct * f[h]; // carried to step t-1
            das[GATE_I][h] = di * i[h] * (1.0 - i[h]);
            das[GATE_F][h] = df * f[h] * (1.0 - f[h]);
            das[GATE_G][h] = dg * (1.0 - g[h] * g[h]);
            das[GATE_O][h] = do_ * o[h] * (1.0 - o[h]);
        }
        let x = &window[t];
        let mut dh_prev = vec![0.0; hidden];
        for gate in 0..GATES {
            for h in 0..hidden {
                let da = das[gate][h];
                if da == 0.0 {
                    continue;
                }
                for (f_idx, &xf) in x.iter().enumerate() {
                    grads[params.idx_w(gate, h, f_idx)] += da * xf;
                }
                for (k, &hk) in h_prev.iter().enumerate() {
                    grads[params.idx_u(gate, h, k)] += da * hk;
                    dh_prev[k] += params.u(gate, h, k) * da;
                }
                grads[params.idx_b(gate, h)] += da;
            }
        }
        if t == 0 {
            break;
        }
        dh = dh_prev;
    }
}

/// Mean squared error over a batch plus its exact analytic gradient.
/// The mean makes the result invariant to batch ordering.
pub fn lstm_loss_grad(
    params: &LstmParams,
    dataset: &WindowedDataset,
    sample_indices: &[usize],
) -> Result<(f64, Vec<f64>)> {
    if sample_indices.is_empty() {
        return Err(Error::Shape("empty batch".into()));
    }
    let n = sample_indices.len() as f64;
    let mut loss = 0.0;
    let mut grads = vec![0.0; params.theta.len()];
    for &i in sample_indices {
        let window = dataset.window(i);
        let label = dataset.labels[i];
        let (pred, cache) = lstm_forward(params, window)?;
        let resid = pred - label;
        loss += resid * resid / n;
        backward_into(params, window, &cache, 2.0 * resid / n, &mut grads);
    }
    Ok((loss, grads))
}

/// Training hyperparameters. Defaults: one day of hourly context,
/// H = 32, 50 Adam epochs at 1e-3 with global-norm clipping at 5.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(default = "d_window")]
    pub window_len: usize,
    #[serde(default = "d_hidden")]
    pub hidden: usize,
    #[serde(default = "d_epochs")]
    pub epochs: usize,
    #[serde(default = "d_batch")]
    pub batch: usize,
    #[serde(default = "d_lr")]
    pub learning_rate: f64,
    #[serde(default = "d_clip")]
    pub grad_clip_norm: f64,
    #[serde(default)]
    pub seed: u64,
}

fn d_window() -> usize {
    24
}
fn d_hidden() -> usize {
    32
}
fn d_epochs() -> usize {
    50
}
fn d_batch() -> usize {
    32
}
fn d_lr() -> f64 {
    1e-3
}
fn d_clip() -> f64 {
    5.0
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            window_len: d_window(),
            hidden: d_hidden(),
            epochs: d_epochs(),
            batch: d_batch(),
            learning_rate: d_lr(),
            grad_clip_norm: d_clip(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_len < 1 || self.hidden < 1 || self.batch < 1 {
            return Err(Error::Config("window_len, hidden, and batch must be >= 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(self.grad_clip_norm.is_finite() && self.grad_clip_norm > 0.0) {
            return Err(Error::Config("grad_clip_norm must be positive".into()));
        }
        Ok(())
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub params: LstmParams,
    /// Mean training loss per epoch, in scaled units.
    pub epoch_losses: Vec<f64>,
}

/// Trains by shuffled minibatch Adam. Deterministic: identical seed,
/// data, and config give identical parameters. With epochs = 0 the
/// seeded initialization is returned unchanged.
pub fn lstm_train(dataset: &WindowedDataset, cfg: &TrainConfig) -> Result<TrainResult> {
    cfg.validate()?;
    if dataset.n_samples() == 0 {
        return Err(Error::Shape("empty training dataset".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = LstmParams::init(dataset.input_dim(), cfg.hidden, &mut rng);

    let n_params = params.theta.len();
    let mut m = vec![0.0; n_params];
    let mut v = vec![0.0; n_params];
    let mut step = 0u64;
    let mut indices: Vec<usize> = (0..dataset.n_samples()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for _epoch in 0..cfg.epochs {
        indices.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut n_batches = 0usize;
        for batch in indices.chunks(cfg.batch) {
            let (loss, grads) = lstm_loss_grad(&params, dataset, batch)?;
            if !loss.is_finite() {
                return Err(Error::Diverged);
            }
            epoch_loss += loss;
            n_batches += 1;

            let norm: f64 = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
            let scale = if norm > cfg.grad_clip_norm { cfg.grad_clip_norm / norm } else { 1.0 };
            step += 1;
            let bc1 = 1.0 - ADAM_BETA1.powi(step as i32);
            let bc2 = 1.0 - ADAM_BETA2.powi(step as i32);
            for j in 0..n_params {
                let g = grads[j] * scale;
                m[j] = ADAM_BETA1 * m[j] + (1.0 - ADAM_BETA1) * g;
                v[j] = ADAM_BETA2 * v[j] + (1.0 - ADAM_BETA2) * g * g;
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                params.theta[j] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPS);
            }
        }
        epoch_losses.push(epoch_loss / n_batches as f64);
    }
    if params.theta.iter().any(|p| !p.is_finite()) {
        return Err(Error::Diverged);
    }
    Ok(TrainResult { params, epoch_losses })
}

/// One-step-ahead rolling forecast over the test window.
///
/// For test period j (global period t = train_periods + j) the input is
/// the actually observed scaled feature rows [t - L, t); the scaled
/// prediction is inverse-transformed and clamped at zero.
pub fn rolling_forecast(
    params: &LstmParams,
    scaled_features: &FeatureMatrix,
    target_scaler: &Scaler,
    spec: &SplitSpec,
    window_len: usize,
) -> Result<Vec<f64>> {
    let t_total = scaled_features.n_rows();
    spec.validate_for(t_total)?;
    if spec.train_periods < window_len {
        return Err(Error::Shape(format!(
            "training history ({}) shorter than window length ({window_len})",
            spec.train_periods
        )));
    }
    let mut out = Vec::with_capacity(spec.test_periods);
    for j in 0..spec.test_periods {
        let t = spec.train_periods + j;
        let window = &scaled_features.values[t - window_len..t];
        let (pred_scaled, _) = lstm_forward(params, window)?;
        let pred = target_scaler.inverse_scalar(pred_scaled).max(0.0);
        out.push(pred);
    }
    Ok(out)
}

/// Everything needed to forecast with a trained network, including the
/// train-fit scalers.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    pub params: LstmParams,
    pub window_len: usize,
    pub feature_scaler: Scaler,
    pub target_scaler: Scaler,
}

impl LstmModel {
    /// Text serialization: a shape header followed by whitespace-separated
    /// numbers (f64 shortest round-trip formatting, so reload is exact).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("slicecast-lstm v1\n");
        s.push_str(&format!(
            "{} {} {}\n",
            self.params.input_dim, self.params.hidden, self.window_len
        ));
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        s.push_str(&format!("feature_means {}\n", join(&self.feature_scaler.means)));
        s.push_str(&format!("feature_stds {}\n", join(&self.feature_scaler.stds)));
        s.push_str(&format!("target_mean {}\n", self.target_scaler.means[0]));
        s.push_str(&format!("target_std {}\n", self.target_scaler.stds[0]));
        s.push_str("theta\n");
        s.push_str(&join(&self.params.theta));
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<LstmModel> {
        let bad = |msg: &str| Error::Model(msg.to_string());
        let mut lines = text.lines();
        if lines.next() != Some("slicecast-lstm v1") {
            return Err(bad("expected header `slicecast-lstm v1`"));
        }
        let shape: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("missing shape line"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad shape line")))
            .collect::<Result<_>>()?;
        let [input_dim, hidden, window_len] = shape[..] else {
            return Err(bad("shape line must be `F H L`"));
        };
        let parse_tagged = |line: Option<&str>, tag: &str| -> Result<Vec<f64>> {
            let line = line.ok_or_else(|| bad(&format!("missing {tag} line")))?;
            let rest = line
                .strip_prefix(tag)
                .ok_or_else(|| bad(&format!("expected `{tag}` line")))?;
            rest.split_whitespace()
                .map(|t| t.parse().map_err(|_| bad(&format!("bad number in {tag}"))))
                .collect()
        };
        let feature_means = parse_tagged(lines.next(), "feature_means")?;
        let feature_stds = parse_tagged(lines.next(), "feature_stds")?;
        let target_mean = parse_tagged(lines.next(), "target_mean")?;
        let target_std = parse_tagged(lines.next(), "target_std")?;
        if lines.next() != Some("theta") {
            return Err(bad("expected `theta` line"));
        }
        let theta: Vec<f64> = lines
            .next()
            .ok_or_else(|| bad("missing theta values"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad number in theta")))
            .collect::<Result<_>>()?;
        if theta.len() != LstmParams::param_count(input_dim, hidden) {
            return Err(bad("theta length inconsistent with shape header"));
        }
        if feature_means.len() != input_dim || feature_stds.len() != input_dim {
            return Err(bad("feature scaler length inconsistent with shape header"));
        }
        if target_mean.len() != 1 || target_std.len() != 1 {
            return Err(bad("target scaler must be a single column"));
        }
        Ok(LstmModel {
            params: LstmParams { input_dim, hidden, theta },
            window_len,
            feature_scaler: Scaler { means: feature_means, stds: feature_stds },
            target_scaler: Scaler { means: target_mean, stds: target_std },
        })
    }
}
