//! Covering-number bounds for linear and network classes, and a greedy
//! empirical cover over sampled networks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::Network;

/// Parameters of the class `F_{alpha,r}(L, p, B)` observed on `n` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyBoundSpec {
    pub eps: f64,
    /// Number of hidden layers `L`.
    pub depth: usize,
    /// `(p_0, ..., p_{L+1})`; `d = p_0`.
    pub widths: Vec<usize>,
    /// Path-norm cap `B`.
    pub b_cap: f64,
    /// Sup-norm radius of the inputs.
    pub r: f64,
    pub n: usize,
}

impl EntropyBoundSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.eps, self.b_cap, self.r];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "eps, B and r must be positive (got {}, {}, {})",
                self.eps, self.b_cap, self.r
            )));
        }
        if self.n == 0 || self.widths.contains(&0) {
            return Err(Error::InvalidParameter("n and all widths must be >= 1".into()));
        }
        if self.widths.len() != self.depth + 2 {
            return Err(Error::InvalidParameter(format!(
                "width vector needs L + 2 = {} entries, got {}",
                self.depth + 2,
                self.widths.len()
            )));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    /// `P = prod_{i=1}^{L} p_i`, 1 when `L = 0`.
    pub fn hidden_product(&self) -> f64 {
        self.widths[1..=self.depth].iter().map(|&p| p as f64).product()
    }
}

fn ceil_ratio(b: f64, r: f64, eps: f64) -> f64 {
    (b * b * r * r / (eps * eps)).ceil()
}

fn sparse_term(b: f64, r: f64, eps: f64, hidden_product: f64, d: f64) -> f64 {
    ceil_ratio(b, r, eps) * (2.0 * hidden_product * d + 1.0).log2()
}

/// `ceil(b^2 r^2 / eps^2) log2(2d + 1)`, the entropy bound of the `l1`-ball of
/// linear functionals of radius `b` on inputs of sup-norm at most `r`.
pub fn linear_bound(b: f64, r: f64, eps: f64, d: usize) -> f64 {
    sparse_term(b, r, eps, 1.0, d as f64)
}

/// `sum_{i=1}^{L} p_i log2(3n) + ceil(B^2 r^2 / eps^2) log2(2 P d + 1)`.
pub fn network_bound(spec: &EntropyBoundSpec) -> Result<f64> {
    spec.validate()?;
    let pattern: f64 = spec.widths[1..=spec.depth]
        .iter()
        .map(|&p| p as f64 * (3.0 * spec.n as f64).log2())
        .sum();
    Ok(pattern
        + sparse_term(
            spec.b_cap,
            spec.r,
            spec.eps,
            spec.hidden_product(),
            spec.input_dim() as f64,
        ))
}

/// Draws networks from a path-norm-capped class.
pub trait NetworkSampler: Sync {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Network;
    /// Path-norm cap every sample must respect.
    fn cap(&self) -> f64;
}

/// Independent uniform `[-1, 1]` weights; when the path norm exceeds `B`
/// every layer is scaled by `(B / ||f||_x)^{1/(L+1)}`.
#[derive(Debug, Clone)]
pub struct UniformCappedSampler {
    pub activation: ActivationKind,
    pub widths: Vec<usize>,
    pub b_cap: f64,
}

impl UniformCappedSampler {
    pub fn new(activation: ActivationKind, widths: Vec<usize>, b_cap: f64) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) || !(b_cap >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sampler needs >= 2 positive widths and B >= 0 (got {widths:?}, {b_cap})"
            )));
        }
        Ok(Self {
            activation,
            widths,
            b_cap,
        })
    }

    pub fn for_spec(activation: ActivationKind, spec: &EntropyBoundSpec) -> Result<Self> {
        spec.validate()?;
        Self::new(activation, spec.widths.clone(), spec.b_cap)
    }
}

impl NetworkSampler for UniformCappedSampler {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Network {
        let mut weights: Vec<Matrix> = self
            .widths
            .windows(2)
            .map(|w| {
                let data = (0..w[0] * w[1]).map(|_| rng.random_range(-1.0..=1.0)).collect();
                Matrix::new(w[1], w[0], data).expect("finite weights")
            })
            .collect();
        let net = Network::new(self.activation.clone(), weights.clone()).expect("chained widths");
        let pn = net.path_norm();
        if pn > self.b_cap {
            let s = (self.b_cap / pn).powf(1.0 / weights.len() as f64);
            weights = weights.iter().map(|w| w.scale(s)).collect();
            return net.with_weights(weights).expect("same shapes");
        }
        net
    }

    fn cap(&self) -> f64 {
        self.b_cap
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub size: usize,
    pub log2_size: f64,
    pub trials: usize,
    pub eps: f64,
    pub n: usize,
}

/// Empirical distance `{(1/n) sum (u_i - v_i)^2}^{1/2}`.
pub fn empirical_distance(u: &[f64], v: &[f64]) -> f64 {
    let s: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    (s / u.len() as f64).sqrt()
}

/// Greedy `eps`-net over the evaluation vectors: each vector farther than
/// `eps` from every center so far becomes a new center.
pub fn greedy_cover(vectors: &[Vec<f64>], eps: f64) -> usize {
    let mut centers: Vec<&[f64]> = Vec::new();
    for v in vectors {
        if centers.iter().all(|c| empirical_distance(c, v) > eps) {
            centers.push(v);
        }
    }
    centers.len()
}

/// Evaluation vectors `(f(z_1), ..., f(z_n))` of `trials` sampled scalar networks.
///
/// Trial `t` draws from its own stream of `seed`, so the result does not
/// depend on the thread count.
pub fn sample_evaluations(
    sampler: &dyn NetworkSampler,
    points: &[Vec<f64>],
    trials: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let net = sampler.sample(&mut rng);
            let pn = net.path_norm();
            if pn > sampler.cap() * (1.0 + 1e-9) {
                return Err(Error::CapViolated {
                    path_norm: pn,
                    cap: sampler.cap(),
                });
            }
            let ev = net.evaluator();
            Ok(points.iter().map(|z| ev.eval(z)[0]).collect())
        })
        .collect()
}

/// Greedy cover size of `trials` sampled networks on `points`.
pub fn empirical_covering(
    sampler: &dyn NetworkSampler,
    points: &[Vec<f64>],
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<CoverReport> {
    if points.is_empty() || trials == 0 || !(eps > 0.0) {
        return Err(Error::InvalidParameter(
            "covering needs points, trials >= 1 and eps > 0".into(),
        ));
    }
    let vectors = sample_evaluations(sampler, points, trials, seed)?;
    let size = greedy_cover(&vectors, eps);
    Ok(CoverReport {
        size,
        log2_size: (size as f64).log2(),
        trials,
        eps,
        n: points.len(),
    })
}

/// `n` points drawn uniformly from `[-r, r]^d`.
pub fn sample_points(n: usize, d: usize, r: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-r..=r)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(depth: usize, widths: Vec<usize>, b: f64, r: f64, eps: f64, n: usize) -> EntropyBoundSpec {
        EntropyBoundSpec {
            eps,
            depth,
            widths,
            b_cap: b,
            r,
            n,
        }
    }

    #[test]
    fn linear_bound_examples() {
        assert_eq!(linear_bound(1.0, 1.0, 1.0, 1), 3f64.log2());
        assert_eq!(linear_bound(1.0, 1.0, 2.0, 4), 9f64.log2());
        assert_eq!(linear_bound(2.0, 1.0, 0.5, 1), 4.0 * linear_bound(1.0, 1.0, 0.5, 1));
    }

    #[test]
    fn network_bound_examples() {
        let s = spec(1, vec![1, 2, 1], 1.0, 1.0, 1.0, 8);
        assert_eq!(network_bound(&s).unwrap(), 2.0 * 24f64.log2() + 5f64.log2());
        let s0 = spec(0, vec![3, 1], 1.5, 0.7, 0.3, 8);
        assert_eq!(network_bound(&s0).unwrap(), linear_bound(1.5, 0.7, 0.3, 3));
        assert!(network_bound(&spec(1, vec![1, 2], 1.0, 1.0, 1.0, 8)).is_err());
    }

    #[test]
    fn sampler_respects_cap() {
        let s = UniformCappedSampler::new(ActivationKind::Abs, vec![2, 3, 3, 1], 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            assert!(s.sample(&mut rng).path_norm() <= 0.5 * (1.0 + 1e-12));
        }
    }

    struct Cheater;
    impl NetworkSampler for Cheater {
        fn sample(&self, _: &mut ChaCha8Rng) -> Network {
            Network::new(ActivationKind::Abs, vec![Matrix::row_vector(&[5.0]).unwrap()]).unwrap()
        }
        fn cap(&self) -> f64 {
            1.0
        }
    }

    #[test]
    fn cap_violation_is_rejected() {
        let pts = sample_points(4, 1, 1.0, 0);
        assert!(matches!(
            empirical_covering(&Cheater, &pts, 0.1, 3, 0),
            Err(Error::CapViolated { .. })
        ));
    }

    #[test]
    fn trivial_covers() {
        let pts = sample_points(8, 1, 1.0, 1);
        let s = UniformCappedSampler::new(ActivationKind::Abs, vec![1, 2, 1], 1.0).unwrap();
        assert_eq!(empirical_covering(&s, &pts, 10.0, 100, 0).unwrap().size, 1);
        let zero = UniformCappedSampler::new(ActivationKind::Abs, vec![1, 2, 1], 0.0).unwrap();
        assert_eq!(empirical_covering(&zero, &pts, 1e-6, 100, 0).unwrap().size, 1);
    }

    #[test]
    fn cover_is_seed_deterministic() {
        let pts = sample_points(8, 1, 1.0, 1);
        let s = UniformCappedSampler::new(ActivationKind::Relu, vec![1, 3, 1], 1.0).unwrap();
        let a = empirical_covering(&s, &pts, 0.05, 500, 9).unwrap();
        let b = empirical_covering(&s, &pts, 0.05, 500, 9).unwrap();
        assert_eq!(a, b);
    }
}
