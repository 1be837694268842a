//! Pairing layers and the binary product tree `(1, x_1, ..., x_r) -> ~prod x_i`.

use serde_json::json;

use crate::activation::ActivationKind;
use crate::constructions::mult::{build_mult, check_m};
use crate::constructions::MultVariant;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::Network;

fn carrier() -> Network {
    Network::new(ActivationKind::Abs, vec![Matrix::identity(1)]).expect("1x1 identity")
}

/// One tree level: `(1, v_1, ..., v_n) -> (1, M(v_1, v_2), ..., M(v_{2k-1}, v_{2k}) [, v_n])`
/// with `k = n / 2`; an odd trailing input is carried through unchanged.
fn pairing_level(m: u32, n: usize, variant: MultVariant) -> Result<Network> {
    let pairs = n / 2;
    let carry = n % 2 == 1;
    let rows = 1 + 3 * pairs + usize::from(carry);
    let mut spread = Matrix::zeros(rows, n + 1);
    spread.set(0, 0, 1.0);
    for l in 0..pairs {
        spread.set(1 + 3 * l, 0, 1.0);
        spread.set(2 + 3 * l, 1 + 2 * l, 1.0);
        spread.set(3 + 3 * l, 2 + 2 * l, 1.0);
    }
    if carry {
        spread.set(rows - 1, n, 1.0);
    }
    let mult = build_mult(m, variant)?;
    let mut blocks = Vec::with_capacity(pairs + 2);
    blocks.push(carrier());
    blocks.extend(std::iter::repeat_n(mult, pairs));
    if carry {
        blocks.push(carrier());
    }
    Network::compose(
        &Network::new(ActivationKind::Abs, vec![spread])?,
        &Network::parallel(&blocks)?,
    )
}

/// `N^k_m`: `(1, x_1, ..., x_{2k}) -> (1, Mult(1, x_1, x_2), ..., Mult(1, x_{2k-1}, x_{2k}))`.
pub fn build_pairing_layer(m: u32, k: usize, variant: MultVariant) -> Result<Network> {
    check_m(m)?;
    if k < 1 {
        return Err(Error::InvalidParameter("pairing layer needs k >= 1".into()));
    }
    let net = pairing_level(m, 2 * k, variant)?;
    debug_assert_eq!(net.output_dim(), k + 1);
    Ok(net
        .with_meta("construction", "pairing")
        .with_meta("m", m)
        .with_meta("k", k)
        .with_meta("variant", variant.as_str()))
}

/// Tree error constant and its domain.
pub fn multr_error_bound(m: u32, r: usize, variant: MultVariant) -> f64 {
    let base = (r * r) as f64 * 4f64.powi(-(m as i32));
    match variant {
        MultVariant::PaperLiteral => base,
        MultVariant::Rescaled => 3.0 * base,
    }
}

/// Cap on the sup-norm of the product tree's path vector.
pub fn multr_path_cap(r: usize, variant: MultVariant) -> f64 {
    let r = r as f64;
    match variant {
        MultVariant::PaperLiteral => 144.0 * r.powi(4),
        MultVariant::Rescaled => 2304.0 * r.powi(5),
    }
}

pub(crate) fn ceil_log2(r: usize) -> u32 {
    r.next_power_of_two().trailing_zeros()
}

/// Product tree over `q = ceil(log2 r)` pairing levels.
///
/// `Rescaled` pads the inputs with ones up to `2^q` factors in its first
/// layer. `PaperLiteral` multiplies only inside `{x + y <= 1}`, where a
/// padded one would leave the squaring range, so it carries odd factors to
/// the next level instead; it is accurate on `[0, 1/2]^r`.
pub fn build_multr(m: u32, r: usize, variant: MultVariant) -> Result<Network> {
    check_m(m)?;
    if r < 2 {
        return Err(Error::InvalidParameter(format!("r must be >= 2, got {r}")));
    }
    let q = ceil_log2(r);
    let slots = match variant {
        MultVariant::PaperLiteral => r,
        MultVariant::Rescaled => 1 << q,
    };
    let mut first = Matrix::zeros(slots + 1, r + 1);
    for i in 0..=r {
        first.set(i, i, 1.0);
    }
    for i in (r + 1)..=slots {
        first.set(i, 0, 1.0);
    }
    let mut net = Network::new(ActivationKind::Abs, vec![first])?;
    let mut n = slots;
    while n > 1 {
        net = Network::compose(&net, &pairing_level(m, n, variant)?)?;
        n = n.div_ceil(2);
    }
    let net = net.append_layer(Matrix::row_vector(&[0.0, 1.0])?)?;

    let mu = m as usize;
    let depth_cap = (2 * mu + 5) * q as usize + 1;
    if net.depth() > depth_cap {
        return Err(Error::BoundViolated(format!(
            "Mult^{r}_{m} depth {} > {depth_cap}",
            net.depth()
        )));
    }
    let width_cap = 6 * r * (mu + 2) + 1;
    if net.max_width() > width_cap {
        return Err(Error::BoundViolated(format!(
            "Mult^{r}_{m} width {} > {width_cap}",
            net.max_width()
        )));
    }
    let path_sup = net.path_matrix().max_abs();
    let cap = multr_path_cap(r, variant);
    if path_sup > cap {
        return Err(Error::BoundViolated(format!(
            "Mult^{r}_{m} path sup-norm {path_sup} > {cap}"
        )));
    }
    let domain = match variant {
        MultVariant::PaperLiteral => json!(vec![[0.0, 0.5]; r]),
        MultVariant::Rescaled => json!(vec![[0.0, 1.0]; r]),
    };
    let widths = net.widths();
    Ok(net
        .with_meta("construction", "multr")
        .with_meta("m", m)
        .with_meta("r", r)
        .with_meta("variant", variant.as_str())
        .with_meta("claimed_error_bound", multr_error_bound(m, r, variant))
        .with_meta("claimed_domain", domain)
        .with_meta("widths", json!(widths)))
}
