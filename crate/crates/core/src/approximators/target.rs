use std::fmt;
use std::sync::Arc;

use crate::approximators::polynomial::MonomialPolynomial;
use crate::constructions::MultiIndex;
use crate::error::{Error, Result};

pub type TargetFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type CoefficientFn = Arc<dyn Fn(&MultiIndex) -> Option<f64> + Send + Sync>;

/// Names accepted by [`AnalyticTarget::builtin`].
pub const BUILTIN_TARGETS: &[&str] = &[
    "inv2mx", "exp", "runge", "square", "product", "linear", "one", "zero",
];

/// Names accepted by [`PowerSeries::builtin`].
pub const BUILTIN_SERIES: &[&str] = &["inv2mx", "exp"];

/// A function on `[0, 1]^d` with its declared bound `F` and, when known, the
/// Bernstein ellipse parameter `rho` of its continuation.
#[derive(Clone)]
pub struct AnalyticTarget {
    name: String,
    d: usize,
    f: TargetFn,
    f_bound: Option<f64>,
    rho: Option<f64>,
    concurrent: bool,
}

impl fmt::Debug for AnalyticTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticTarget")
            .field("name", &self.name)
            .field("d", &self.d)
            .field("f_bound", &self.f_bound)
            .field("rho", &self.rho)
            .field("concurrent", &self.concurrent)
            .finish()
    }
}

impl AnalyticTarget {
    pub fn new(name: &str, d: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("target dimension must be >= 1".into()));
        }
        Ok(Self {
            name: name.to_string(),
            d,
            f: Arc::new(f),
            f_bound: None,
            rho: None,
            concurrent: true,
        })
    }

    pub fn with_bound(mut self, f_bound: f64) -> Self {
        self.f_bound = Some(f_bound);
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = Some(rho);
        self
    }

    /// Marks the evaluator as unsafe to call from several threads at once.
    pub fn serial(mut self) -> Self {
        self.concurrent = false;
        self
    }

    /// Built-in targets on `[0, 1]^d`:
    ///
    /// | name | function | F |
    /// |---|---|---|
    /// | `inv2mx` | `prod 1/(2 - x_i)` | 1 |
    /// | `exp` | `exp(sum x_i)` | `e^d` |
    /// | `runge` | `1/(1 + 25 sum x_i^2)` | 1 |
    /// | `square` | `sum x_i^2` | d |
    /// | `product` | `prod x_i` | 1 |
    /// | `linear` | `sum x_i` | d |
    /// | `one`, `zero` | constants | 1, 0 |
    pub fn builtin(name: &str, d: usize) -> Result<Self> {
        let df = d as f64;
        let t = match name {
            "inv2mx" => Self::new(name, d, |x| x.iter().map(|v| 1.0 / (2.0 - v)).product())?
                .with_bound(1.0)
                .with_rho(3.0 + 8f64.sqrt()),
            "exp" => Self::new(name, d, |x| x.iter().sum::<f64>().exp())?.with_bound(df.exp()),
            "runge" => Self::new(name, d, |x| {
                1.0 / (1.0 + 25.0 * x.iter().map(|v| v * v).sum::<f64>())
            })?
            .with_bound(1.0)
            .with_rho(runge_rho()),
            "square" => Self::new(name, d, |x| x.iter().map(|v| v * v).sum())?.with_bound(df),
            "product" => Self::new(name, d, |x| x.iter().product())?.with_bound(1.0),
            "linear" => Self::new(name, d, |x| x.iter().sum())?.with_bound(df),
            "one" => Self::new(name, d, |_| 1.0)?.with_bound(1.0),
            "zero" => Self::new(name, d, |_| 0.0)?.with_bound(0.0),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown target {other:?} (expected one of {BUILTIN_TARGETS:?})"
                )))
            }
        };
        Ok(t)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn f_bound(&self) -> Option<f64> {
        self.f_bound
    }

    pub fn rho(&self) -> Option<f64> {
        self.rho
    }

    pub fn is_concurrent(&self) -> bool {
        self.concurrent
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Ellipse parameter of the pole of the Runge function at `x = i/5`, after
/// mapping `[0, 1]` onto `[-1, 1]`: `rho = |z + sqrt(z^2 - 1)|` with `z = -1 + 0.4i`.
fn runge_rho() -> f64 {
    let (zr, zi) = (-1.0_f64, 0.4_f64);
    // w = z^2 - 1
    let (wr, wi) = (zr * zr - zi * zi - 1.0, 2.0 * zr * zi);
    let modulus = wr.hypot(wi).sqrt();
    let arg = wi.atan2(wr) / 2.0;
    let (sr, si) = (modulus * arg.cos(), modulus * arg.sin());
    let plus = (zr + sr).hypot(zi + si);
    let minus = (zr - sr).hypot(zi - si);
    plus.max(minus)
}

#[derive(Clone)]
pub enum CoefficientSource {
    /// Finite list; absent terms are zero.
    Polynomial(MonomialPolynomial),
    /// Closed form; `None` means the coefficient is unknown.
    Generator(CoefficientFn),
}

/// Power series `sum_k a_k x^k` with `sum_k |a_k| <= F`.
#[derive(Clone)]
pub struct PowerSeries {
    d: usize,
    f_bound: f64,
    source: CoefficientSource,
    name: String,
}

impl fmt::Debug for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PowerSeries")
            .field("name", &self.name)
            .field("d", &self.d)
            .field("f_bound", &self.f_bound)
            .finish()
    }
}

impl PowerSeries {
    /// `f_bound` defaults to the coefficient `l1` sum and may not be below it.
    pub fn from_polynomial(poly: MonomialPolynomial, f_bound: Option<f64>) -> Result<Self> {
        let sum = poly.abs_sum();
        let f_bound = f_bound.unwrap_or(sum);
        if !(f_bound >= 0.0 && f_bound.is_finite()) || f_bound < sum * (1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "declared F = {f_bound} is below the coefficient sum {sum}"
            )));
        }
        Ok(Self {
            d: poly.dim(),
            f_bound,
            source: CoefficientSource::Polynomial(poly),
            name: "polynomial".into(),
        })
    }

    pub fn from_generator(
        name: &str,
        d: usize,
        f_bound: f64,
        generator: impl Fn(&MultiIndex) -> Option<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if d == 0 || !(f_bound >= 0.0 && f_bound.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "power series needs d >= 1 and finite F >= 0 (got d={d}, F={f_bound})"
            )));
        }
        Ok(Self {
            d,
            f_bound,
            source: CoefficientSource::Generator(Arc::new(generator)),
            name: name.to_string(),
        })
    }

    /// `inv2mx`: `a_k = prod 2^{-k_i-1}`, F = 1. `exp`: `a_k = prod 1/k_i!`, F = `e^d`.
    pub fn builtin(name: &str, d: usize) -> Result<Self> {
        match name {
            "inv2mx" => Self::from_generator(name, d, 1.0, |k| {
                Some(k.0.iter().map(|&ki| 0.5f64.powi(ki as i32 + 1)).product())
            }),
            "exp" => Self::from_generator(name, d, (d as f64).exp(), |k| {
                Some(k.0.iter().map(|&ki| 1.0 / factorial(ki)).product())
            }),
            other => Err(Error::InvalidParameter(format!(
                "unknown series {other:?} (expected one of {BUILTIN_SERIES:?})"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn f_bound(&self) -> f64 {
        self.f_bound
    }

    pub fn coefficient(&self, k: &MultiIndex) -> Result<f64> {
        let c = match &self.source {
            CoefficientSource::Polynomial(p) => Some(p.coeff(k)),
            CoefficientSource::Generator(g) => g(k),
        };
        match c {
            Some(v) if v.is_finite() => Ok(v),
            Some(_) => Err(Error::NonFinite {
                context: format!("series coefficient {:?}", k.0),
            }),
            None => Err(Error::MissingCoefficient(k.0.clone())),
        }
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::enumerate_multi_indices;

    #[test]
    fn builtin_values() {
        let t = AnalyticTarget::builtin("inv2mx", 1).unwrap();
        assert_eq!(t.eval(&[0.5]), 1.0 / 1.5);
        assert_eq!(t.f_bound(), Some(1.0));
        let r = AnalyticTarget::builtin("runge", 1).unwrap();
        assert_eq!(r.eval(&[0.2]), 0.5);
        assert!(AnalyticTarget::builtin("nope", 1).is_err());
        assert!(AnalyticTarget::builtin("exp", 0).is_err());
    }

    #[test]
    fn runge_rho_is_a_root_modulus() {
        // The pole must lie on the Bernstein ellipse with foci -1 and 1.
        let rho = runge_rho();
        assert!(rho > 1.0);
        let a = (rho + 1.0 / rho) / 2.0;
        let b = (rho - 1.0 / rho) / 2.0;
        let (x, y) = (-1.0_f64, 0.4_f64);
        assert!(((x / a).powi(2) + (y / b).powi(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn series_partial_sums_converge() {
        let s = PowerSeries::builtin("inv2mx", 1).unwrap();
        let t = AnalyticTarget::builtin("inv2mx", 1).unwrap();
        let x = 0.6;
        let partial: f64 = enumerate_multi_indices(1, 60)
            .iter()
            .map(|k| s.coefficient(k).unwrap() * k.monomial(&[x]))
            .sum();
        assert!((partial - t.eval(&[x])).abs() < 1e-12);

        let e = PowerSeries::builtin("exp", 2).unwrap();
        let x = [0.3, 0.4];
        let partial: f64 = enumerate_multi_indices(2, 30)
            .iter()
            .map(|k| e.coefficient(k).unwrap() * k.monomial(&x))
            .sum();
        assert!((partial - 0.7f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn missing_coefficients_are_reported() {
        let s = PowerSeries::from_generator("sparse", 1, 1.0, |k| (k.0[0] < 2).then_some(0.5)).unwrap();
        assert_eq!(
            s.coefficient(&MultiIndex(vec![2])).unwrap_err(),
            Error::MissingCoefficient(vec![2])
        );
        let p = MonomialPolynomial::from_terms(1, [(MultiIndex(vec![1]), 2.0)]).unwrap();
        assert!(PowerSeries::from_polynomial(p.clone(), Some(1.0)).is_err());
        let ok = PowerSeries::from_polynomial(p, None).unwrap();
        assert_eq!(ok.coefficient(&MultiIndex(vec![5])).unwrap(), 0.0);
    }
}
