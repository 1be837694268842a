//! Squaring network `(1, x) -> f_m(x)` and the three-branch multiplication
//! network `(1, x, y) -> ~xy` built from it.

use serde_json::json;

use crate::activation::ActivationKind;
use crate::constructions::oracles::sq_error_bound;
use crate::constructions::MultVariant;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::Network;

/// `(k+1) x k`: identity plus the row `(-1/2, 0, ..., 0, 1)`.
fn a_matrix(k: usize) -> Matrix {
    let mut m = Matrix::zeros(k + 1, k);
    for i in 0..k {
        m.set(i, i, 1.0);
    }
    m.set(k, 0, -0.5);
    m.set(k, k - 1, 1.0);
    m
}

/// `k x k`: identity with its last row replaced by `(1, 0, ..., 0, -2)`.
fn b_matrix(k: usize) -> Matrix {
    let mut m = Matrix::identity(k);
    m.set(k - 1, 0, 1.0);
    m.set(k - 1, k - 1, -2.0);
    m
}

/// Row `(0, 1, -4^{-1}, ..., -4^{-m})`.
fn s_row(m: u32) -> Matrix {
    let mut row = vec![0.0, 1.0];
    let mut scale = 1.0;
    for _ in 0..m {
        scale *= 0.25;
        row.push(-scale);
    }
    Matrix::row_vector(&row).expect("finite row")
}

pub(crate) fn check_m(m: u32) -> Result<()> {
    if m < 1 {
        return Err(Error::InvalidParameter(format!("m must be >= 1, got {m}")));
    }
    if m > 26 {
        // 4^{-m} falls below the f64 resolution of values near 1.
        return Err(Error::InvalidParameter(format!("m must be <= 26, got {m}")));
    }
    Ok(())
}

/// Chain `S . a . B_{m+2} . a . A_{m+1} . ... . a . B_3 . a . A_2` on `(1, x)`.
///
/// Intermediate vectors are `(1, x, g_1(x), ..., g_s(x))`; every channel is
/// nonnegative for `x` in `[0, 1]`, so the activations after each `B` are inert.
pub fn build_sq(m: u32) -> Result<Network> {
    check_m(m)?;
    let mut weights = Vec::with_capacity(2 * m as usize + 1);
    for k in 2..=(m as usize + 1) {
        weights.push(a_matrix(k));
        weights.push(b_matrix(k + 1));
    }
    weights.push(s_row(m));
    let net = Network::new(ActivationKind::Abs, weights)?;
    debug_assert_eq!(net.max_width(), m as usize + 2);
    Ok(net
        .with_meta("construction", "sq")
        .with_meta("m", m)
        .with_meta("claimed_error_bound", sq_error_bound(m))
        .with_meta("claimed_domain", json!([[0.0, 1.0]])))
}

/// Per-variant error constant of the multiplication network.
pub fn mult_error_bound(m: u32, variant: MultVariant) -> f64 {
    match variant {
        MultVariant::PaperLiteral => 3.0 * 2f64.powi(-2 * m as i32 - 3),
        MultVariant::Rescaled => 3.0 * 2f64.powi(-2 * m as i32 - 2),
    }
}

/// `(1, x, y) -> ~xy` through `xy = ((x+y)^2 - x^2 - y^2) / 2`.
///
/// `PaperLiteral` squares `x + y` and is accurate on `{x, y >= 0, x + y <= 1}`.
/// `Rescaled` squares `(x + y) / 2` with output row `(-1/2, -1/2, 2)` and is
/// accurate on all of `[0, 1]^2`.
pub fn build_mult(m: u32, variant: MultVariant) -> Result<Network> {
    check_m(m)?;
    let sum_weight = match variant {
        MultVariant::PaperLiteral => 1.0,
        MultVariant::Rescaled => 0.5,
    };
    let c = Matrix::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![1.0, 0.0, 0.0],
        vec![0.0, sum_weight, sum_weight],
    ])?;
    let out = match variant {
        MultVariant::PaperLiteral => [-0.5, -0.5, 0.5],
        MultVariant::Rescaled => [-0.5, -0.5, 2.0],
    };
    let sq = build_sq(m)?;
    let branches = Network::parallel(&[sq.clone(), sq.clone(), sq])?;
    let net = Network::compose(
        &Network::new(ActivationKind::Abs, vec![c])?,
        &branches.append_layer(Matrix::row_vector(&out)?)?,
    )?;

    let width_cap = 3 * m as usize + 6;
    if net.max_width() > width_cap {
        return Err(Error::BoundViolated(format!(
            "Mult width {} > {width_cap}",
            net.max_width()
        )));
    }
    if net.depth() > 2 * m as usize + 3 {
        return Err(Error::BoundViolated(format!("Mult depth {}", net.depth())));
    }
    let widths = net.widths();
    let domain = match variant {
        MultVariant::PaperLiteral => "x,y >= 0, x + y <= 1",
        MultVariant::Rescaled => "[0,1]^2",
    };
    Ok(net
        .with_meta("construction", "mult")
        .with_meta("m", m)
        .with_meta("variant", variant.as_str())
        .with_meta("claimed_error_bound", mult_error_bound(m, variant))
        .with_meta("claimed_domain", domain)
        .with_meta("widths", json!(widths)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::oracles::{fm_ref, mult_path_a, mult_path_b, sq_path_row};

    #[test]
    fn sq_matches_oracle_and_shape() {
        for m in 1..=10 {
            let net = build_sq(m).unwrap();
            assert_eq!(net.weights().len(), 2 * m as usize + 1);
            let ev = net.evaluator();
            for i in 0..=1000 {
                let x = i as f64 / 1000.0;
                let y = ev.eval(&[1.0, x])[0];
                assert!((y - fm_ref(m, x)).abs() <= 1e-12, "m={m} x={x}");
            }
        }
        assert_eq!(build_sq(1).unwrap().eval(&[1.0, 0.0]).unwrap(), vec![0.0]);
        assert_eq!(build_sq(3).unwrap().eval(&[1.0, 1.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn sq_path_matrix_closed_form() {
        let p = build_sq(2).unwrap().path_matrix();
        assert_eq!(p.to_rows(), vec![vec![0.875, 1.75]]);
        for m in 1..=10 {
            let p = build_sq(m).unwrap().path_matrix();
            let want = sq_path_row(m);
            for j in 0..2 {
                assert!((p.get(0, j) - want[j]).abs() <= 1e-13 * want[j]);
            }
        }
    }

    #[test]
    fn mult_at_half_half() {
        let net = build_mult(1, MultVariant::PaperLiteral).unwrap();
        assert_eq!(net.eval_scalar(&[1.0, 0.5, 0.5]).unwrap(), 0.25);
    }

    #[test]
    fn mult_path_row() {
        let p = build_mult(2, MultVariant::PaperLiteral).unwrap().path_matrix();
        assert_eq!(p.to_rows(), vec![vec![1.3125, 1.75, 1.75]]);
        let n1 = build_mult(1, MultVariant::PaperLiteral).unwrap();
        assert_eq!(n1.path_norm(), 3.75);
        for m in 1..=10 {
            let p = build_mult(m, MultVariant::PaperLiteral).unwrap().path_matrix();
            let want = [mult_path_a(m), mult_path_b(m), mult_path_b(m)];
            for j in 0..3 {
                assert!((p.get(0, j) - want[j]).abs() <= 1e-13 * want[j]);
            }
        }
    }

    #[test]
    fn mult_zero_factor() {
        for m in [1, 3, 6] {
            let lit = build_mult(m, MultVariant::PaperLiteral).unwrap();
            let res = build_mult(m, MultVariant::Rescaled).unwrap();
            for i in 0..=20 {
                let y = i as f64 / 20.0;
                assert_eq!(lit.eval_scalar(&[1.0, 0.0, y]).unwrap(), 0.0);
                // f_m(y/2) = f_{m-1}(y)/4, so the rescaled branch leaves g_m(y)/2^{2m+1}.
                let r = res.eval_scalar(&[1.0, 0.0, y]).unwrap();
                assert!(r.abs() <= mult_error_bound(m, MultVariant::Rescaled));
            }
        }
    }

    #[test]
    fn rescaled_exact_at_corner() {
        let net = build_mult(3, MultVariant::Rescaled).unwrap();
        let v = net.eval_scalar(&[1.0, 1.0, 1.0]).unwrap();
        assert!((v - 1.0).abs() <= 3.0 * 2f64.powi(-8));
    }

    #[test]
    fn literal_fails_off_domain() {
        // x + y = 2 leaves the tent-map range; the literal network is not a product there.
        let net = build_mult(4, MultVariant::PaperLiteral).unwrap();
        let v = net.eval_scalar(&[1.0, 1.0, 1.0]).unwrap();
        assert!((v - 1.0).abs() > 0.5);
    }

    #[test]
    fn literal_error_grid_m4() {
        let net = build_mult(4, MultVariant::PaperLiteral).unwrap();
        let ev = net.evaluator();
        let mut worst: f64 = 0.0;
        for i in 0..=100 {
            for j in 0..=(100 - i) {
                let (x, y) = (i as f64 / 100.0, j as f64 / 100.0);
                worst = worst.max((ev.eval(&[1.0, x, y])[0] - x * y).abs());
            }
        }
        assert!(worst <= 3.0 * 2f64.powi(-11), "{worst}");
    }

    #[test]
    fn rejects_m_zero() {
        assert!(build_sq(0).is_err());
        assert!(build_mult(0, MultVariant::Rescaled).is_err());
    }

    #[test]
    fn parameters_within_two() {
        let net = build_mult(3, MultVariant::PaperLiteral).unwrap();
        assert!(net.weights().iter().all(|w| w.max_abs() <= 2.0));
    }
}
