//! Networks approximating analytic functions: a monomial network followed by
//! one output row of polynomial coefficients.

use serde::{Deserialize, Serialize};

use crate::approximators::chebyshev::{cheb_fit, cheb_to_monomial};
use crate::approximators::polynomial::MonomialPolynomial;
use crate::approximators::target::{AnalyticTarget, PowerSeries};
use crate::constructions::tree::ceil_log2;
use crate::constructions::{
    build_mon, enumerate_multi_indices, mon_error_bound, monomial_count, variant_domain_hi,
    MultVariant, MultiIndex,
};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::Network;
use crate::verify::{sup_error, GridSpec};

/// Parameter count and `l1` mass of a network, against `(L + 1) ||p||_inf^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Budget {
    pub param_count: usize,
    pub nonzero_params: usize,
    pub l1_total: f64,
    pub max_abs_param: f64,
    pub depth: usize,
    pub max_width: usize,
    pub param_cap: usize,
    pub within_cap: bool,
}

pub fn l1_param_budget(net: &Network) -> L1Budget {
    let param_count = net.param_count();
    let param_cap = (net.depth() + 1) * net.max_width().pow(2);
    L1Budget {
        param_count,
        nonzero_params: net.weights().iter().map(Matrix::nnz).sum(),
        l1_total: net.l1_param_norm(),
        max_abs_param: net.weights().iter().map(Matrix::max_abs).fold(0.0, f64::max),
        depth: net.depth(),
        max_width: net.max_width(),
        param_cap,
        within_cap: param_count <= param_cap,
    }
}

/// Measured size of a network against `log2(1/eps)` powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeRatios {
    pub log2_inv_eps: f64,
    /// `L / log2(1/eps)^2`.
    pub depth: f64,
    /// `||p||_inf / log2(1/eps)^{d+2}`.
    pub width: f64,
    /// `||F||_x / log2(1/eps)^{2d+5}`.
    pub path_norm: f64,
}

/// Parameters, claimed bounds and measurements of an approximating network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub construction: String,
    pub target: String,
    pub variant: MultVariant,
    pub d: usize,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub m: u32,
    pub gamma: u32,
    pub f_bound: Option<f64>,
    /// `None` when the bound involves an unknown constant.
    pub claimed_error: Option<f64>,
    pub claimed_domain: Vec<[f64; 2]>,
    /// Hidden layers of the monomial part and the cap at `(m, gamma + 1)`.
    pub mon_depth: usize,
    pub mon_depth_cap: usize,
    pub max_width: usize,
    pub width_cap: usize,
    pub path_norm: f64,
    pub path_norm_cap: Option<f64>,
    /// Monomial-network error times the coefficient `l1` mass.
    pub mon_error_floor: f64,
    pub coefficient_l1: f64,
    pub max_abs_coefficient: f64,
    pub budget: L1Budget,
    pub shape: ShapeRatios,
    pub domain_map: Option<String>,
    pub fitted_decay_constant: Option<f64>,
    pub measured_error: Option<f64>,
    pub grid: Option<GridSpec>,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {v}")))
    }
}

/// `ceil(log2(1/eps))`, at least 1.
pub fn log_degree(eps: f64) -> u32 {
    ((1.0 / eps).log2().ceil() as u32).max(1)
}

/// Appends the coefficient row to `Mon^d_{m, gamma+1}`; `coeff` is queried in
/// the monomial network's output order.
fn attach_coefficients(
    m: u32,
    gamma: u32,
    d: usize,
    variant: MultVariant,
    mut coeff: impl FnMut(&MultiIndex) -> Result<f64>,
) -> Result<(Network, f64, f64)> {
    let mon = build_mon(m, gamma + 1, d, variant)?;
    let indices = enumerate_multi_indices(d, gamma + 1);
    let row: Vec<f64> = indices.iter().map(&mut coeff).collect::<Result<_>>()?;
    let l1 = row.iter().map(|c| c.abs()).sum();
    let max = row.iter().fold(0.0_f64, |a, c| a.max(c.abs()));
    let mut weights = mon.weights().to_vec();
    weights.push(Matrix::row_vector(&row)?);
    let mut net = Network::new(mon.activation().clone(), weights)?;
    if let Some(v) = mon.meta().get("widths") {
        net = net.with_meta("mon_widths", v.clone());
    }
    Ok((net, l1, max))
}

fn shape_ratios(eps: f64, d: usize, net: &Network, path_norm: f64) -> ShapeRatios {
    let l = (1.0 / eps).log2();
    ShapeRatios {
        log2_inv_eps: l,
        depth: net.depth() as f64 / l.powi(2),
        width: net.max_width() as f64 / l.powi(d as i32 + 2),
        path_norm: path_norm / l.powi(2 * d as i32 + 5),
    }
}

fn mon_caps(m: u32, gamma: u32, d: usize) -> (usize, usize) {
    let g = gamma + 1;
    let depth_cap = ceil_log2(g as usize) as usize * (2 * m as usize + 5) + 2;
    let width_cap = 6 * g as usize * (m as usize + 2) * monomial_count(d, g);
    (depth_cap, width_cap)
}

/// Power-series route: `gamma = ceil((1/delta) ln(1/eps))`, `m = ceil(log2(1/eps))`
/// and the partial sum over `||k||_1 <= gamma` read off the monomial network.
///
/// Claimed error on `(0, 1 - delta]^d` (intersected with `(0, 1/2]^d` for
/// `PaperLiteral`): `2 F eps / delta^2`, or `6 F eps / delta^2` for `Rescaled`.
pub fn build_power_series_net(
    series: &PowerSeries,
    eps: f64,
    delta: f64,
    variant: MultVariant,
) -> Result<(Network, Certificate)> {
    check_unit("eps", eps)?;
    check_unit("delta", delta)?;
    let gamma = ((1.0 / delta) * (1.0 / eps).ln()).ceil() as u32;
    let gamma = gamma.max(1);
    let m = log_degree(eps);
    let d = series.dim();
    let f = series.f_bound();
    let (net, coefficient_l1, max_abs_coefficient) =
        attach_coefficients(m, gamma, d, variant, |k| series.coefficient(k))?;

    let path_norm = net.path_norm();
    let literal_cap = 144.0 * (d as f64 + 1.0) * f * (gamma as f64 + 2.0).powi(5);
    let cap = match variant {
        MultVariant::PaperLiteral => literal_cap,
        MultVariant::Rescaled => 16.0 * (gamma as f64 + 2.0) * literal_cap,
    };
    if path_norm > cap * (1.0 + 1e-12) {
        return Err(Error::BoundViolated(format!(
            "power-series network path norm {path_norm} > {cap}"
        )));
    }
    let claimed = match variant {
        MultVariant::PaperLiteral => 2.0 * f * eps / (delta * delta),
        MultVariant::Rescaled => 6.0 * f * eps / (delta * delta),
    };
    let hi = (1.0 - delta).min(variant_domain_hi(variant));
    let (mon_depth_cap, width_cap) = mon_caps(m, gamma, d);
    let cert = Certificate {
        construction: "power-series".into(),
        target: series.name().to_string(),
        variant,
        d,
        epsilon: eps,
        delta: Some(delta),
        m,
        gamma,
        f_bound: Some(f),
        claimed_error: Some(claimed),
        claimed_domain: vec![[0.0, hi]; d],
        mon_depth: net.depth() - 1,
        mon_depth_cap,
        max_width: net.max_width(),
        width_cap,
        path_norm,
        path_norm_cap: Some(cap),
        mon_error_floor: mon_error_bound(m, gamma + 1, variant) * coefficient_l1,
        coefficient_l1,
        max_abs_coefficient,
        budget: l1_param_budget(&net),
        shape: shape_ratios(eps, d, &net, path_norm),
        domain_map: None,
        fitted_decay_constant: None,
        measured_error: None,
        grid: None,
    };
    let net = net
        .with_meta("construction", "power-series")
        .with_meta("m", m)
        .with_meta("gamma", gamma)
        .with_meta("d", d)
        .with_meta("variant", variant.as_str())
        .with_meta("claimed_error_bound", claimed)
        .with_meta("claimed_domain", serde_json::json!(cert.claimed_domain));
    Ok((net, cert))
}

/// Default grid resolution per dimension for certificate measurements.
pub fn default_points_per_axis(d: usize) -> usize {
    match d {
        1 => 1001,
        2 => 101,
        3 => 21,
        _ => 6,
    }
}

/// Chebyshev route: `gamma = m = ceil(log2(1/eps))`, a tensor fit of per-axis
/// degree `gamma` on `[0, 1]^d`, total-degree truncation, conversion to
/// monomials and the coefficient row on `Mon^d_{m, gamma+1}`.
///
/// The certificate carries the sup error measured on a grid of the variant's
/// domain; the rate constant is not known, so no error is claimed.
pub fn build_cheb_net(
    target: &AnalyticTarget,
    eps: f64,
    variant: MultVariant,
) -> Result<(Network, Certificate, MonomialPolynomial)> {
    check_unit("eps", eps)?;
    let gamma = log_degree(eps);
    let m = gamma;
    let d = target.dim();
    let series = cheb_fit(target, &vec![gamma as usize; d], None)?;
    let poly = cheb_to_monomial(&series, gamma as usize)?;
    let (net, coefficient_l1, max_abs_coefficient) =
        attach_coefficients(m, gamma, d, variant, |k| Ok(poly.coeff(k)))?;
    let path_norm = net.path_norm();

    let hi = variant_domain_hi(variant);
    let grid = GridSpec::cube(d, 0.0, hi, default_points_per_axis(d));
    let measured = sup_error(&net, &grid.points(), |x| target.eval(x));
    let (mon_depth_cap, width_cap) = mon_caps(m, gamma, d);
    let rho = target.rho().unwrap_or(2f64.powf((d as f64).sqrt()));
    let cert = Certificate {
        construction: "chebyshev".into(),
        target: target.name().to_string(),
        variant,
        d,
        epsilon: eps,
        delta: None,
        m,
        gamma,
        f_bound: target.f_bound(),
        claimed_error: None,
        claimed_domain: vec![[0.0, hi]; d],
        mon_depth: net.depth() - 1,
        mon_depth_cap,
        max_width: net.max_width(),
        width_cap,
        path_norm,
        path_norm_cap: None,
        mon_error_floor: mon_error_bound(m, gamma + 1, variant) * coefficient_l1,
        coefficient_l1,
        max_abs_coefficient,
        budget: l1_param_budget(&net),
        shape: shape_ratios(eps, d, &net, path_norm),
        domain_map: Some("t_i = 2 x_i - 1".into()),
        fitted_decay_constant: Some(series.decay_constant(rho)),
        measured_error: Some(measured),
        grid: Some(grid),
    };
    let net = net
        .with_meta("construction", "chebyshev")
        .with_meta("m", m)
        .with_meta("gamma", gamma)
        .with_meta("d", d)
        .with_meta("variant", variant.as_str())
        .with_meta("claimed_domain", serde_json::json!(cert.claimed_domain));
    Ok((net, cert, poly))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_of_single_layer() {
        let net = Network::new(
            crate::ActivationKind::Abs,
            vec![Matrix::from_rows(&[vec![1.0, 0.0, -2.0], vec![0.5, 0.0, 0.0]]).unwrap()],
        )
        .unwrap();
        let b = l1_param_budget(&net);
        assert_eq!(b.param_count, 6);
        assert_eq!(b.nonzero_params, 3);
        assert_eq!(b.l1_total, 3.5);
        assert!(b.within_cap);
    }

    #[test]
    fn zero_and_linear_series() {
        let zero = PowerSeries::from_polynomial(MonomialPolynomial::zero(1).unwrap(), Some(1.0)).unwrap();
        let (net, _) = build_power_series_net(&zero, 0.25, 0.5, MultVariant::Rescaled).unwrap();
        for i in 0..=20 {
            assert_eq!(net.eval_scalar(&[1.0, i as f64 / 20.0]).unwrap(), 0.0);
        }
        let lin = MonomialPolynomial::from_terms(1, [(MultiIndex(vec![1]), 1.0)]).unwrap();
        let lin = PowerSeries::from_polynomial(lin, None).unwrap();
        let (net, cert) = build_power_series_net(&lin, 2f64.powi(-6), 0.25, MultVariant::Rescaled).unwrap();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!((net.eval_scalar(&[1.0, x]).unwrap() - x).abs() <= 1e-11);
        }
        assert_eq!(cert.gamma, 17);
        assert_eq!(cert.m, 6);
    }

    #[test]
    fn missing_coefficient_is_an_error() {
        let s = PowerSeries::from_generator("short", 1, 1.0, |k| (k.0[0] < 3).then_some(0.1)).unwrap();
        assert_eq!(
            build_power_series_net(&s, 0.25, 0.5, MultVariant::Rescaled).unwrap_err(),
            Error::MissingCoefficient(vec![3])
        );
        assert!(build_power_series_net(&s, 1.5, 0.5, MultVariant::Rescaled).is_err());
    }

    #[test]
    fn inv2mx_small_eps_within_claim() {
        let s = PowerSeries::builtin("inv2mx", 1).unwrap();
        let (net, cert) = build_power_series_net(&s, 2f64.powi(-4), 0.25, MultVariant::Rescaled).unwrap();
        let grid = GridSpec::Cube {
            d: 1,
            lo: 0.0,
            hi: 0.75,
            points_per_axis: 1000,
            include_lo: false,
        };
        let err = sup_error(&net, &grid.points(), |x| 1.0 / (2.0 - x[0]));
        assert!(err <= cert.claimed_error.unwrap(), "{err}");
        assert!(cert.mon_depth <= cert.mon_depth_cap);
        assert!(cert.max_width <= cert.width_cap);
    }

    #[test]
    fn cheb_net_constant_and_product() {
        let one = AnalyticTarget::builtin("one", 1).unwrap();
        let (net, cert, _) = build_cheb_net(&one, 0.25, MultVariant::Rescaled).unwrap();
        assert_eq!(cert.measured_error, Some(0.0));
        assert_eq!(net.eval_scalar(&[1.0, 0.3]).unwrap(), 1.0);

        let prod = AnalyticTarget::builtin("product", 2).unwrap();
        let (_, cert, poly) = build_cheb_net(&prod, 2f64.powi(-8), MultVariant::Rescaled).unwrap();
        assert!((poly.coeff(&MultiIndex(vec![1, 1])) - 1.0).abs() < 1e-9);
        assert!(cert.measured_error.unwrap() <= mon_error_bound(8, 9, MultVariant::Rescaled));
    }
}
