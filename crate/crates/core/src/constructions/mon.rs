//! All-monomials network `(1, x) -> (x^k)_{|k|_1 < gamma}`.

use serde_json::json;

use crate::activation::ActivationKind;
use crate::constructions::multi_index::{enumerate_multi_indices, MultiIndex};
use crate::constructions::mult::check_m;
use crate::constructions::tree::{build_multr, ceil_log2};
use crate::constructions::MultVariant;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::Network;

/// Per-channel error constant of the monomial network.
pub fn mon_error_bound(m: u32, gamma: u32, variant: MultVariant) -> f64 {
    let base = (gamma as f64).powi(2) * 4f64.powi(-(m as i32));
    match variant {
        MultVariant::PaperLiteral => base,
        MultVariant::Rescaled => 3.0 * base,
    }
}

/// Entry cap for the monomial network's path matrix.
pub fn mon_path_cap(gamma: u32, variant: MultVariant) -> f64 {
    let g = gamma as f64 + 1.0;
    match variant {
        MultVariant::PaperLiteral => 144.0 * g.powi(5),
        MultVariant::Rescaled => 2304.0 * g.powi(6),
    }
}

/// Upper end of the per-axis input interval on which the variant is accurate.
pub fn variant_domain_hi(variant: MultVariant) -> f64 {
    match variant {
        MultVariant::PaperLiteral => 0.5,
        MultVariant::Rescaled => 1.0,
    }
}

/// Outputs follow [`enumerate_multi_indices`]`(d, gamma)`.
///
/// The first layer `Gamma` maps `(1, x)` to `(1, x, x_{k^1}, ..., x_{k^N})`
/// where `x_k = (1, x_1 (k_1 times), ..., x_d (k_d times))` for every index of
/// degree at least two. The leading `d + 1` channels are carried by identity
/// rows, the rest feed parallel product trees.
pub fn build_mon(m: u32, gamma: u32, d: usize, variant: MultVariant) -> Result<Network> {
    check_m(m)?;
    if gamma < 2 || d < 1 {
        return Err(Error::InvalidParameter(format!(
            "Mon needs gamma >= 2 and d >= 1 (got gamma={gamma}, d={d})"
        )));
    }
    let indices = enumerate_multi_indices(d, gamma);
    let higher: Vec<&MultiIndex> = indices.iter().filter(|k| k.degree() > 1).collect();

    let rows = d + 1 + higher.iter().map(|k| k.degree() as usize + 1).sum::<usize>();
    let mut g = Matrix::zeros(rows, d + 1);
    for i in 0..=d {
        g.set(i, i, 1.0);
    }
    let mut row = d + 1;
    for k in &higher {
        g.set(row, 0, 1.0);
        row += 1;
        for (j, &kj) in k.0.iter().enumerate() {
            for _ in 0..kj {
                g.set(row, j + 1, 1.0);
                row += 1;
            }
        }
    }

    let mut blocks = vec![Network::new(ActivationKind::Abs, vec![Matrix::identity(d + 1)])?];
    for k in &higher {
        blocks.push(build_multr(m, k.degree() as usize, variant)?);
    }
    let stacked = Network::parallel(&blocks)?;

    // Parallel output order is (1, x_1..x_d, higher...); map to graded-lex order.
    let mut next_higher = d + 1;
    let perm: Vec<usize> = indices
        .iter()
        .map(|k| match k.degree() {
            0 => 0,
            1 => 1 + k.0.iter().position(|&v| v == 1).expect("degree one"),
            _ => {
                let ch = next_higher;
                next_higher += 1;
                ch
            }
        })
        .collect();
    let net = Network::compose(&Network::new(ActivationKind::Abs, vec![g])?, &stacked)?
        .permute_outputs(&perm);

    let count = indices.len();
    let mu = m as usize;
    let depth_cap = ceil_log2(gamma as usize) as usize * (2 * mu + 5) + 2;
    if net.depth() > depth_cap {
        return Err(Error::BoundViolated(format!(
            "Mon depth {} > {depth_cap}",
            net.depth()
        )));
    }
    let width_cap = 6 * gamma as usize * (mu + 2) * count;
    if net.max_width() > width_cap {
        return Err(Error::BoundViolated(format!(
            "Mon width {} > {width_cap}",
            net.max_width()
        )));
    }
    let path_sup = net.path_matrix().max_abs();
    let cap = mon_path_cap(gamma, variant);
    if path_sup > cap {
        return Err(Error::BoundViolated(format!(
            "Mon path entry {path_sup} > {cap}"
        )));
    }
    let hi = variant_domain_hi(variant);
    let widths = net.widths();
    Ok(net
        .with_meta("construction", "mon")
        .with_meta("m", m)
        .with_meta("gamma", gamma)
        .with_meta("d", d)
        .with_meta("variant", variant.as_str())
        .with_meta("input_layout", "(1, x): augmented constant coordinate counted in p_0")
        .with_meta("claimed_error_bound", mon_error_bound(m, gamma, variant))
        .with_meta("claimed_domain", json!(vec![[0.0, hi]; d]))
        .with_meta(
            "monomials",
            json!(indices.iter().map(|k| k.0.clone()).collect::<Vec<_>>()),
        )
        .with_meta("widths", json!(widths)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d1_gamma2_is_exact() {
        for variant in [MultVariant::PaperLiteral, MultVariant::Rescaled] {
            let net = build_mon(3, 2, 1, variant).unwrap();
            for i in 0..=50 {
                let x = i as f64 / 50.0;
                assert_eq!(net.eval(&[1.0, x]).unwrap(), vec![1.0, x]);
            }
        }
    }

    #[test]
    fn rescaled_d2_gamma3_grid() {
        let net = build_mon(6, 3, 2, MultVariant::Rescaled).unwrap();
        let ev = net.evaluator();
        let indices = enumerate_multi_indices(2, 3);
        let mut worst: f64 = 0.0;
        for i in 0..=50 {
            for j in 0..=50 {
                let x = [i as f64 / 50.0, j as f64 / 50.0];
                let out = ev.eval(&[1.0, x[0], x[1]]);
                for (o, k) in out.iter().zip(&indices) {
                    worst = worst.max((o - k.monomial(&x)).abs());
                }
            }
        }
        assert!(worst <= 3.0 * 9.0 * 4f64.powi(-6), "{worst}");
    }

    #[test]
    fn channel_order_matches_enumeration() {
        // With exact-ish products each channel must be closest to its own monomial.
        let net = build_mon(10, 4, 3, MultVariant::Rescaled).unwrap();
        let indices = enumerate_multi_indices(3, 4);
        let x = [0.9, 0.7, 0.45];
        let out = net.eval(&[1.0, x[0], x[1], x[2]]).unwrap();
        for (c, o) in out.iter().enumerate() {
            let best = indices
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    (o - a.1.monomial(&x))
                        .abs()
                        .total_cmp(&(o - b.1.monomial(&x)).abs())
                })
                .unwrap()
                .0;
            assert_eq!(best, c);
        }
    }

    #[test]
    fn literal_path_entries_bounded() {
        for m in 1..=8 {
            let net = build_mon(m, 3, 2, MultVariant::PaperLiteral).unwrap();
            assert!(net.path_matrix().max_abs() <= 144.0 * 4f64.powi(5));
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(build_mon(3, 1, 2, MultVariant::Rescaled).is_err());
        assert!(build_mon(3, 3, 0, MultVariant::Rescaled).is_err());
    }
}
