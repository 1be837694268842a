//! Least squares with a path-norm penalty on synthetic regression data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::ActivationKind;
use crate::approximators::AnalyticTarget;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::Network;

const STREAM_DATA: u64 = 0;
const STREAM_INIT: u64 = 1;
const STREAM_HOLDOUT: u64 = 2;
const STREAM_ORACLE: u64 = 3;

/// Samples per block in gradient reductions; fixed so sums do not depend on threads.
const CHUNK: usize = 64;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `c log2^3(n) (sum_{i=1}^{L} log2 p_i)^{1/2} / sqrt(n)` for widths `(p_0, ..., p_{L+1})`.
pub fn lambda_auto(n: usize, widths: &[usize], c: f64) -> f64 {
    let nf = n as f64;
    let hidden = widths.get(1..widths.len().saturating_sub(1)).unwrap_or(&[]);
    let s: f64 = hidden.iter().map(|&p| (p as f64).log2()).sum();
    c * nf.log2().powi(3) * s.sqrt() / nf.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lambda {
    Auto { c: f64 },
    Fixed(f64),
}

impl Lambda {
    pub fn resolve(self, n: usize, widths: &[usize]) -> f64 {
        match self {
            Lambda::Auto { c } => lambda_auto(n, widths, c),
            Lambda::Fixed(v) => v,
        }
    }
}

impl std::str::FromStr for Lambda {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Lambda::Auto { c: 1.0 });
        }
        match s.parse::<f64>() {
            Ok(v) if v >= 0.0 && v.is_finite() => Ok(Lambda::Fixed(v)),
            _ => Err(Error::InvalidParameter(format!(
                "lambda must be \"auto\" or a finite number >= 0, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// First trial step of the backtracking line search.
    pub initial_step: f64,
    pub max_epochs: usize,
    /// Stop once an accepted step improves the objective by less than this fraction.
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            max_epochs: 2000,
            rel_tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegressionConfig {
    pub n: usize,
    pub target: AnalyticTarget,
    pub noise_sd: f64,
    /// Hidden widths `(p_1, ..., p_L)`; the input is `(1, x)` and the output scalar.
    pub hidden: Vec<usize>,
    pub lambda: Lambda,
    pub optimizer: OptimizerConfig,
    pub activation: ActivationKind,
    /// Constant `C` of the remainder term in the oracle bound.
    pub remainder_c: f64,
    /// Monte Carlo sample size for `||f - f_0||^2` estimates.
    pub holdout: usize,
}

impl RegressionConfig {
    pub fn new(target: AnalyticTarget, n: usize, hidden: Vec<usize>) -> Self {
        Self {
            n,
            target,
            noise_sd: 0.0,
            hidden,
            lambda: Lambda::Auto { c: 1.0 },
            optimizer: OptimizerConfig::default(),
            activation: ActivationKind::Abs,
            remainder_c: 1.0,
            holdout: 10_000,
        }
    }

    pub fn d(&self) -> usize {
        self.target.dim()
    }

    /// `(d + 1, p_1, ..., p_L, 1)`.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.d() + 1)
            .chain(self.hidden.iter().copied())
            .chain(std::iter::once(1))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.hidden.contains(&0) {
            return Err(Error::InvalidParameter("n and hidden widths must be >= 1".into()));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise sd {}", self.noise_sd)));
        }
        let lam_ok = match self.lambda {
            Lambda::Auto { c } => c >= 0.0 && c.is_finite(),
            Lambda::Fixed(v) => v >= 0.0 && v.is_finite(),
        };
        if !lam_ok {
            return Err(Error::InvalidParameter(format!("lambda {:?}", self.lambda)));
        }
        if !(self.optimizer.initial_step > 0.0) || self.holdout == 0 {
            return Err(Error::InvalidParameter("step and holdout must be positive".into()));
        }
        Ok(())
    }

    pub fn lambda_value(&self) -> f64 {
        self.lambda.resolve(self.n, &self.widths())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

fn uniform_points(rng: &mut ChaCha8Rng, count: usize, d: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect()
}

/// `X_i` uniform on `[0, 1]^d`, `Y_i = f_0(X_i) + N(0, noise_sd^2)`.
pub fn generate_data(config: &RegressionConfig, seed: u64) -> Result<Dataset> {
    config.validate()?;
    let mut rng = rng_for(seed, STREAM_DATA);
    let x = uniform_points(&mut rng, config.n, config.d());
    let noise = Normal::new(0.0, config.noise_sd).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let y = x
        .iter()
        .map(|xi| {
            let f = config.target.eval(xi);
            if config.noise_sd > 0.0 {
                f + noise.sample(&mut rng)
            } else {
                f
            }
        })
        .collect();
    Ok(Dataset { x, y })
}

/// Dense weights `W_i` of shape `rows x cols`, row-major.
#[derive(Debug, Clone, PartialEq)]
struct Params {
    shapes: Vec<(usize, usize)>,
    w: Vec<Vec<f64>>,
}

impl Params {
    fn from_network(net: &Network) -> Self {
        Self {
            shapes: net.weights().iter().map(|m| (m.rows(), m.cols())).collect(),
            w: net.weights().iter().map(Matrix::to_dense).collect(),
        }
    }

    fn to_matrices(&self) -> Vec<Matrix> {
        self.shapes
            .iter()
            .zip(&self.w)
            .map(|(&(r, c), w)| Matrix::new(r, c, w.clone()).expect("finite weights"))
            .collect()
    }

    fn zeros_like(&self) -> Vec<Vec<f64>> {
        self.w.iter().map(|w| vec![0.0; w.len()]).collect()
    }

    fn axpy(&self, t: f64, dir: &[Vec<f64>]) -> Self {
        Self {
            shapes: self.shapes.clone(),
            w: self
                .w
                .iter()
                .zip(dir)
                .map(|(w, g)| w.iter().zip(g).map(|(a, b)| a + t * b).collect())
                .collect(),
        }
    }

    fn is_finite(&self) -> bool {
        self.w.iter().flatten().all(|v| v.is_finite())
    }
}

fn matvec(w: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    (0..rows)
        .map(|r| w[r * cols..(r + 1) * cols].iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// Pre-activations `z_i = W_i h_i` and layer inputs `h_i` for one sample.
fn forward(p: &Params, act: &ActivationKind, input: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut hs = Vec::with_capacity(p.w.len());
    let mut zs = Vec::with_capacity(p.w.len());
    let mut h = input.to_vec();
    for (i, (&(r, c), w)) in p.shapes.iter().zip(&p.w).enumerate() {
        let z = matvec(w, r, c, &h);
        hs.push(h);
        if i + 1 < p.w.len() {
            h = z.iter().map(|&v| act.apply(v)).collect();
        } else {
            h = Vec::new();
        }
        zs.push(z);
    }
    (zs, hs)
}

fn augmented(x: &[f64]) -> Vec<f64> {
    std::iter::once(1.0).chain(x.iter().copied()).collect()
}

fn predict(p: &Params, act: &ActivationKind, x: &[f64]) -> f64 {
    let (zs, _) = forward(p, act, &augmented(x));
    zs[zs.len() - 1][0]
}

/// `(1/n) sum (Y_i - f(X_i))^2` and its gradient by reverse-mode accumulation.
fn risk_and_grad(p: &Params, act: &ActivationKind, data: &Dataset) -> (f64, Vec<Vec<f64>>) {
    let n = data.len() as f64;
    let idx: Vec<usize> = (0..data.len()).collect();
    let partials: Vec<(f64, Vec<Vec<f64>>)> = idx
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut grad = p.zeros_like();
            let mut loss = 0.0;
            for &s in chunk {
                let (zs, hs) = forward(p, act, &augmented(&data.x[s]));
                let e = zs[zs.len() - 1][0] - data.y[s];
                loss += e * e;
                let mut delta = vec![2.0 * e / n];
                for i in (0..p.w.len()).rev() {
                    let (rows, cols) = p.shapes[i];
                    let g = &mut grad[i];
                    for a in 0..rows {
                        if delta[a] == 0.0 {
                            continue;
                        }
                        for b in 0..cols {
                            g[a * cols + b] += delta[a] * hs[i][b];
                        }
                    }
                    if i > 0 {
                        let w = &p.w[i];
                        delta = (0..cols)
                            .map(|b| {
                                let back: f64 = (0..rows).map(|a| w[a * cols + b] * delta[a]).sum();
                                back * act.derivative(zs[i - 1][b])
                            })
                            .collect();
                    }
                }
            }
            (loss, grad)
        })
        .collect();
    let mut total = 0.0;
    let mut grad = p.zeros_like();
    for (l, g) in partials {
        total += l;
        for (acc, part) in grad.iter_mut().zip(g) {
            for (a, b) in acc.iter_mut().zip(part) {
                *a += b;
            }
        }
    }
    (total / n, grad)
}

/// Path norm and its gradient `sign(W_i[a,b]) left_i[a] right_i[b]` with
/// `left_i = 1^T |W_L| ... |W_{i+1}|` and `right_i = |W_{i-1}| ... |W_0| 1`.
fn path_norm_and_grad(p: &Params) -> (f64, Vec<Vec<f64>>) {
    let layers = p.w.len();
    let abs: Vec<Vec<f64>> = p.w.iter().map(|w| w.iter().map(|v| v.abs()).collect()).collect();
    let mut right = Vec::with_capacity(layers);
    right.push(vec![1.0; p.shapes[0].1]);
    for i in 0..layers - 1 {
        let (r, c) = p.shapes[i];
        let next = matvec(&abs[i], r, c, &right[i]);
        right.push(next);
    }
    let mut left = vec![Vec::new(); layers];
    left[layers - 1] = vec![1.0; p.shapes[layers - 1].0];
    for i in (0..layers - 1).rev() {
        let (r, c) = p.shapes[i + 1];
        left[i] = (0..c)
            .map(|b| (0..r).map(|a| left[i + 1][a] * abs[i + 1][a * c + b]).sum())
            .collect();
    }
    let (r0, c0) = p.shapes[0];
    let pn: f64 = (0..r0)
        .map(|a| left[0][a] * (0..c0).map(|b| abs[0][a * c0 + b] * right[0][b]).sum::<f64>())
        .sum();
    let grad = (0..layers)
        .map(|i| {
            let (r, c) = p.shapes[i];
            let mut g = vec![0.0; r * c];
            for a in 0..r {
                for b in 0..c {
                    let w = p.w[i][a * c + b];
                    let s = if w > 0.0 {
                        1.0
                    } else if w < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    g[a * c + b] = s * left[i][a] * right[i][b];
                }
            }
            g
        })
        .collect();
    (pn, grad)
}

fn dense_to_matrices(shapes: &[(usize, usize)], g: Vec<Vec<f64>>) -> Vec<Matrix> {
    shapes
        .iter()
        .zip(g)
        .map(|(&(r, c), v)| Matrix::new(r, c, v).expect("finite gradient"))
        .collect()
}

/// Gradient of the path norm with respect to every weight (0 at exact zeros).
pub fn path_norm_gradient(net: &Network) -> Vec<Matrix> {
    let p = Params::from_network(net);
    dense_to_matrices(&p.shapes, path_norm_and_grad(&p).1)
}

/// Empirical risk of `net` on `data` (inputs `(1, X_i)`) and its gradient.
pub fn risk_gradient(net: &Network, data: &Dataset) -> (f64, Vec<Matrix>) {
    let p = Params::from_network(net);
    let (risk, g) = risk_and_grad(&p, net.activation(), data);
    (risk, dense_to_matrices(&p.shapes, g))
}

pub fn empirical_risk(net: &Network, data: &Dataset) -> f64 {
    let ev = net.evaluator();
    let s: f64 = data
        .x
        .iter()
        .zip(&data.y)
        .map(|(x, y)| {
            let e = ev.eval(&augmented(x))[0] - y;
            e * e
        })
        .sum();
    s / data.len() as f64
}

/// Monte Carlo estimate of `||f - f_0||^2_{2, P_X}` with `P_X` uniform.
pub fn mc_sq_distance(net: &Network, target: &AnalyticTarget, samples: usize, seed: u64, stream: u64) -> f64 {
    let mut rng = rng_for(seed, stream);
    let pts = uniform_points(&mut rng, samples, target.dim());
    let ev = net.evaluator();
    let s: f64 = pts
        .iter()
        .map(|x| {
            let e = ev.eval(&augmented(x))[0] - target.eval(x);
            e * e
        })
        .sum();
    s / samples as f64
}

/// Random initial network: entries uniform on `[-s, s]`, `s = (1/fan_in)^{1/2}`.
pub fn init_network(config: &RegressionConfig) -> Result<Network> {
    config.validate()?;
    let mut rng = rng_for(config.optimizer.seed, STREAM_INIT);
    let widths = config.widths();
    let weights = widths
        .windows(2)
        .map(|w| {
            let s = (1.0 / w[0] as f64).sqrt();
            let data = (0..w[0] * w[1]).map(|_| rng.random_range(-s..=s)).collect();
            Matrix::new(w[1], w[0], data)
        })
        .collect::<Result<Vec<_>>>()?;
    Network::new(config.activation.clone(), weights)
}

/// Bracketed terms of the oracle bound evaluated at one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRhs {
    /// Monte Carlo `||f - f_0||^2_{2, P_X}`.
    pub approx_term: f64,
    pub lambda: f64,
    /// `lambda ||f||_x`.
    pub penalty_term: f64,
    /// `C sum_{i=1}^{L} p_i log2^3(n) / n`.
    pub remainder: f64,
    /// `2 (approx_term + penalty_term) + remainder`.
    pub total: f64,
}

/// Reported, never asserted: the right-hand side of the oracle inequality at `candidate`.
pub fn oracle_rhs(config: &RegressionConfig, candidate: &Network, data: &Dataset) -> Result<OracleRhs> {
    if candidate.input_dim() != config.d() + 1 || candidate.output_dim() != 1 {
        return Err(Error::DimensionMismatch {
            layer: 0,
            expected: config.d() + 1,
            got: candidate.input_dim(),
        });
    }
    let n = data.len().max(1);
    let widths = candidate.widths();
    let lambda = config.lambda.resolve(n, &widths);
    let approx_term = mc_sq_distance(
        candidate,
        &config.target,
        config.holdout,
        config.optimizer.seed,
        STREAM_ORACLE,
    );
    let penalty_term = lambda * candidate.path_norm();
    let nf = n as f64;
    let hidden: usize = widths[1..widths.len() - 1].iter().sum();
    let remainder = config.remainder_c * hidden as f64 * nf.log2().powi(3) / nf;
    Ok(OracleRhs {
        approx_term,
        lambda,
        penalty_term,
        remainder,
        total: 2.0 * (approx_term + penalty_term) + remainder,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxEpochs,
    RelativeImprovement,
    LineSearchFailed,
    ZeroGradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub target: String,
    pub n: usize,
    pub widths: Vec<usize>,
    pub noise_sd: f64,
    pub seed: u64,
    pub lambda: f64,
    pub objective: f64,
    pub empirical_risk: f64,
    pub penalty: f64,
    pub path_norm: f64,
    /// Monte Carlo `||f_hat - f_0||^2` on fresh uniform inputs.
    pub heldout_mse: f64,
    /// The same estimate for the constant predictor `mean(Y)`.
    pub constant_predictor_mse: f64,
    pub oracle_rhs: OracleRhs,
    pub epochs: usize,
    pub stop_reason: StopReason,
    /// Objective after each accepted step, starting from the initial value.
    pub objective_trace: Vec<f64>,
}

/// Gradient descent with Armijo backtracking on `risk + lambda ||f||_x`,
/// starting from [`init_network`].
pub fn fit(config: &RegressionConfig, data: &Dataset) -> Result<(Network, FitReport)> {
    fit_from(config, data, &init_network(config)?)
}

/// As [`fit`], starting from `start`.
pub fn fit_from(config: &RegressionConfig, data: &Dataset, start: &Network) -> Result<(Network, FitReport)> {
    config.validate()?;
    if data.is_empty() || start.input_dim() != config.d() + 1 || start.output_dim() != 1 {
        return Err(Error::InvalidParameter(
            "training needs data and a (1, x) -> scalar network".into(),
        ));
    }
    let act = start.activation().clone();
    let lambda = config.lambda.resolve(data.len(), &start.widths());
    let objective = |p: &Params| -> (f64, f64, f64) {
        let risk = risk_only(p, &act, data);
        let (pn, _) = path_norm_and_grad(p);
        (risk + lambda * pn, risk, pn)
    };

    let mut params = Params::from_network(start);
    let (mut obj, _, _) = objective(&params);
    let limit = 1e6 * obj.max(f64::MIN_POSITIVE);
    if !obj.is_finite() {
        return Err(Error::Diverged { objective: obj, limit });
    }
    let mut trace = vec![obj];
    let mut step = config.optimizer.initial_step;
    let mut stop = StopReason::MaxEpochs;
    let mut epochs = 0;

    while epochs < config.optimizer.max_epochs {
        let (_, mut grad) = risk_and_grad(&params, &act, data);
        if lambda > 0.0 {
            let (_, pg) = path_norm_and_grad(&params);
            for (g, q) in grad.iter_mut().zip(pg) {
                for (a, b) in g.iter_mut().zip(q) {
                    *a += lambda * b;
                }
            }
        }
        let gg: f64 = grad.iter().flatten().map(|v| v * v).sum();
        if gg == 0.0 {
            stop = StopReason::ZeroGradient;
            break;
        }
        let dir: Vec<Vec<f64>> = grad.iter().map(|g| g.iter().map(|v| -v).collect()).collect();
        let mut accepted = None;
        for _ in 0..60 {
            let trial = params.axpy(step, &dir);
            if trial.is_finite() {
                let (o, _, _) = objective(&trial);
                if o.is_finite() && o <= obj - 1e-4 * step * gg {
                    accepted = Some((trial, o));
                    break;
                }
            }
            step *= 0.5;
        }
        epochs += 1;
        let Some((trial, o)) = accepted else {
            stop = StopReason::LineSearchFailed;
            break;
        };
        assert!(o <= obj, "accepted step increased the objective");
        if o > limit {
            return Err(Error::Diverged { objective: o, limit });
        }
        let improvement = (obj - o) / obj.abs().max(f64::MIN_POSITIVE);
        params = trial;
        obj = o;
        trace.push(obj);
        step *= 2.0;
        if improvement < config.optimizer.rel_tol {
            stop = StopReason::RelativeImprovement;
            break;
        }
    }

    let net = start.with_weights(params.to_matrices())?;
    let (obj, risk, pn) = objective(&params);
    let seed = config.optimizer.seed;
    let heldout_mse = mc_sq_distance(&net, &config.target, config.holdout, seed, STREAM_HOLDOUT);
    let mean_y = data.y.iter().sum::<f64>() / data.len() as f64;
    let constant = Network::new(
        act.clone(),
        vec![Matrix::row_vector(
            &std::iter::once(mean_y)
                .chain(std::iter::repeat_n(0.0, config.d()))
                .collect::<Vec<_>>(),
        )?],
    )?;
    let constant_predictor_mse = mc_sq_distance(&constant, &config.target, config.holdout, seed, STREAM_HOLDOUT);
    let rhs = oracle_rhs(config, &net, data)?;
    let report = FitReport {
        target: config.target.name().to_string(),
        n: data.len(),
        widths: net.widths(),
        noise_sd: config.noise_sd,
        seed,
        lambda,
        objective: obj,
        empirical_risk: risk,
        penalty: lambda * pn,
        path_norm: pn,
        heldout_mse,
        constant_predictor_mse,
        oracle_rhs: rhs,
        epochs,
        stop_reason: stop,
        objective_trace: trace,
    };
    Ok((net, report))
}

fn risk_only(p: &Params, act: &ActivationKind, data: &Dataset) -> f64 {
    let n = data.len() as f64;
    let idx: Vec<usize> = (0..data.len()).collect();
    let partials: Vec<f64> = idx
        .par_chunks(CHUNK)
        .map(|chunk| {
            chunk
                .iter()
                .map(|&s| {
                    let e = predict(p, act, &data.x[s]) - data.y[s];
                    e * e
                })
                .sum()
        })
        .collect();
    partials.iter().sum::<f64>() / n
}
