//! Grid verification of the constructions against exact oracles.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::constructions::{
    build_mon, build_mult, build_multr, build_sq, enumerate_multi_indices, mon_error_bound,
    mult_error_bound, multr_error_bound, variant_domain_hi, MultVariant,
};
use crate::constructions::oracles::sq_error_bound;
use crate::error::{Error, Result};
use crate::network::Network;

/// Reproducible description of the evaluation points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridSpec {
    /// Tensor grid on `[lo, hi]^d`, or `(lo, hi]^d` when `include_lo` is false.
    Cube {
        d: usize,
        lo: f64,
        hi: f64,
        points_per_axis: usize,
        include_lo: bool,
    },
    /// `{(i s, j s) : i, j >= 0, i + j <= 1/s}`.
    Triangle { step: f64 },
    /// Independent uniform samples on `[lo, hi]^d`.
    Random {
        d: usize,
        lo: f64,
        hi: f64,
        samples: usize,
        seed: u64,
    },
}

impl GridSpec {
    pub fn cube(d: usize, lo: f64, hi: f64, points_per_axis: usize) -> Self {
        GridSpec::Cube {
            d,
            lo,
            hi,
            points_per_axis,
            include_lo: true,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            GridSpec::Cube { d, .. } | GridSpec::Random { d, .. } => *d,
            GridSpec::Triangle { .. } => 2,
        }
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        match *self {
            GridSpec::Cube {
                d,
                lo,
                hi,
                points_per_axis: p,
                include_lo,
            } => {
                let axis: Vec<f64> = if include_lo {
                    if p <= 1 {
                        vec![lo]
                    } else {
                        (0..p).map(|i| lo + (hi - lo) * i as f64 / (p - 1) as f64).collect()
                    }
                } else {
                    (1..=p).map(|i| lo + (hi - lo) * i as f64 / p as f64).collect()
                };
                let total = axis.len().pow(d as u32);
                (0..total)
                    .map(|mut flat| {
                        let mut x = vec![0.0; d];
                        for slot in x.iter_mut().rev() {
                            *slot = axis[flat % axis.len()];
                            flat /= axis.len();
                        }
                        x
                    })
                    .collect()
            }
            GridSpec::Triangle { step } => {
                let n = (1.0 / step).round() as usize;
                let mut pts = Vec::new();
                for i in 0..=n {
                    for j in 0..=(n - i) {
                        pts.push(vec![i as f64 / n as f64, j as f64 / n as f64]);
                    }
                }
                pts
            }
            GridSpec::Random {
                d,
                lo,
                hi,
                samples,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..samples)
                    .map(|_| (0..d).map(|_| rng.random_range(lo..=hi)).collect())
                    .collect()
            }
        }
    }
}

/// `max_x |net(1, x) - f(x)|` over `points` for a scalar-output network.
pub fn sup_error<F>(net: &Network, points: &[Vec<f64>], f: F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let ev = net.evaluator();
    points
        .par_iter()
        .map(|x| {
            let input: Vec<f64> = std::iter::once(1.0).chain(x.iter().copied()).collect();
            (ev.eval(&input)[0] - f(x)).abs()
        })
        .reduce(|| 0.0, f64::max)
}

/// Channel-wise sup error for vector-output networks.
pub fn sup_error_channels<F>(net: &Network, points: &[Vec<f64>], f: F) -> f64
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let ev = net.evaluator();
    points
        .par_iter()
        .map(|x| {
            let input: Vec<f64> = std::iter::once(1.0).chain(x.iter().copied()).collect();
            ev.eval(&input)
                .iter()
                .zip(f(x))
                .map(|(o, w)| (o - w).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub construction: String,
    pub params: Map<String, Value>,
    pub grid: GridSpec,
    pub measured_max_error: f64,
    pub claimed_bound: f64,
    pub pass: bool,
    pub wall_clock_secs: f64,
}

fn report(
    construction: &str,
    params: Value,
    grid: GridSpec,
    measured: f64,
    claimed: f64,
    start: Instant,
) -> VerificationReport {
    let params = match params {
        Value::Object(map) => map,
        _ => Map::new(),
    };
    VerificationReport {
        construction: construction.to_string(),
        params,
        grid,
        measured_max_error: measured,
        claimed_bound: claimed,
        pass: measured <= claimed,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    }
}

/// Squaring network on `points` equispaced points of `[0, 1]`.
pub fn verify_sq(m: u32, points: usize) -> Result<VerificationReport> {
    let start = Instant::now();
    let net = build_sq(m)?;
    let grid = GridSpec::cube(1, 0.0, 1.0, points);
    let measured = sup_error(&net, &grid.points(), |x| x[0] * x[0]);
    Ok(report("sq", json!({ "m": m }), grid, measured, sq_error_bound(m), start))
}

/// Multiplication network on the variant's domain: the triangle `x + y <= 1`
/// for `PaperLiteral`, the unit square for `Rescaled`, both with spacing `step`.
pub fn verify_mult(m: u32, variant: MultVariant, step: f64) -> Result<VerificationReport> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidParameter(format!("grid step {step} outside (0, 1]")));
    }
    let start = Instant::now();
    let net = build_mult(m, variant)?;
    let per_axis = (1.0 / step).round() as usize + 1;
    let grid = match variant {
        MultVariant::PaperLiteral => GridSpec::Triangle { step },
        MultVariant::Rescaled => GridSpec::cube(2, 0.0, 1.0, per_axis),
    };
    let measured = sup_error(&net, &grid.points(), |x| x[0] * x[1]);
    Ok(report(
        "mult",
        json!({ "m": m, "variant": variant.as_str() }),
        grid,
        measured,
        mult_error_bound(m, variant),
        start,
    ))
}

/// Product tree on uniform random samples from `[0, 1/2]^r` (PaperLiteral) or `[0, 1]^r`.
pub fn verify_multr(
    m: u32,
    r: usize,
    variant: MultVariant,
    samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let net = build_multr(m, r, variant)?;
    let grid = GridSpec::Random {
        d: r,
        lo: 0.0,
        hi: variant_domain_hi(variant),
        samples,
        seed,
    };
    let measured = sup_error(&net, &grid.points(), |x| x.iter().product());
    Ok(report(
        "multr",
        json!({ "m": m, "r": r, "variant": variant.as_str() }),
        grid,
        measured,
        multr_error_bound(m, r, variant),
        start,
    ))
}

/// All-monomials network on a tensor grid of the variant's domain.
pub fn verify_mon(
    m: u32,
    gamma: u32,
    d: usize,
    variant: MultVariant,
    points_per_axis: usize,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let net = build_mon(m, gamma, d, variant)?;
    let indices = enumerate_multi_indices(d, gamma);
    let grid = GridSpec::cube(d, 0.0, variant_domain_hi(variant), points_per_axis);
    let measured = sup_error_channels(&net, &grid.points(), |x| {
        indices.iter().map(|k| k.monomial(x)).collect()
    });
    Ok(report(
        "mon",
        json!({ "m": m, "gamma": gamma, "d": d, "variant": variant.as_str() }),
        grid,
        measured,
        mon_error_bound(m, gamma, variant),
        start,
    ))
}
