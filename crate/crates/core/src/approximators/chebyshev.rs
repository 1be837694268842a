//! Chebyshev polynomials, tensor-product Chebyshev series and their
//! conversion to the monomial basis.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approximators::polynomial::MonomialPolynomial;
use crate::approximators::target::AnalyticTarget;
use crate::constructions::MultiIndex;
use crate::error::{Error, Result};

/// Largest degree whose integer coefficients are computed exactly.
pub const MAX_CHEB_DEGREE: usize = 60;

/// Integer monomial coefficients of `T_n`, lowest power first.
pub fn cheb_poly_coeffs_exact(n: usize) -> Result<Vec<i128>> {
    if n > MAX_CHEB_DEGREE {
        return Err(Error::DegreeOverflow(n));
    }
    let mut prev = vec![1i128];
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = vec![0i128, 1];
    for _ in 1..n {
        let mut next = vec![0i128; cur.len() + 1];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += 2 * c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(cur)
}

/// Monomial coefficients of `T_n` as reals; length `n + 1`.
pub fn cheb_poly_coeffs(n: usize) -> Result<Vec<f64>> {
    Ok(cheb_poly_coeffs_exact(n)?.into_iter().map(|c| c as f64).collect())
}

/// `(T_0(t), ..., T_n(t))` by the three-term recursion.
pub fn cheb_values(n: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(t);
    }
    for k in 2..=n {
        out.push(2.0 * t * out[k - 1] - out[k - 2]);
    }
    out
}

/// Tensor-product series `sum_k a_k T_{k_1}(t_1) ... T_{k_d}(t_d)`, where each
/// `t_i` is the affine image of `x_i` from `domain[i]` onto `[-1, 1]`.
///
/// Coefficients are stored row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRepr")]
pub struct ChebyshevSeries {
    degrees: Vec<usize>,
    coeffs: Vec<f64>,
    domain: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
struct SeriesRepr {
    degrees: Vec<usize>,
    coeffs: Vec<f64>,
    domain: Vec<[f64; 2]>,
}

impl TryFrom<SeriesRepr> for ChebyshevSeries {
    type Error = Error;
    fn try_from(r: SeriesRepr) -> Result<Self> {
        ChebyshevSeries::new(r.degrees, r.coeffs, r.domain)
    }
}

fn tensor_len(degrees: &[usize]) -> usize {
    degrees.iter().map(|n| n + 1).product()
}

impl ChebyshevSeries {
    pub fn new(degrees: Vec<usize>, coeffs: Vec<f64>, domain: Vec<[f64; 2]>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::InvalidParameter("series dimension must be >= 1".into()));
        }
        if domain.len() != degrees.len() {
            return Err(Error::DimensionMismatch {
                layer: 0,
                expected: degrees.len(),
                got: domain.len(),
            });
        }
        if let Some(iv) = domain.iter().find(|[lo, hi]| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
            return Err(Error::InvalidParameter(format!("bad interval {iv:?}")));
        }
        let len = tensor_len(&degrees);
        if coeffs.len() != len {
            return Err(Error::InvalidParameter(format!(
                "degrees {degrees:?} need {len} coefficients, got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                context: "Chebyshev coefficients".into(),
            });
        }
        Ok(Self {
            degrees,
            coeffs,
            domain,
        })
    }

    /// All-zero series on `[-1, 1]^d`.
    pub fn zeros(degrees: Vec<usize>) -> Result<Self> {
        let d = degrees.len();
        let len = tensor_len(&degrees);
        Self::new(degrees, vec![0.0; len], vec![[-1.0, 1.0]; d])
    }

    pub fn with_domain(mut self, domain: Vec<[f64; 2]>) -> Result<Self> {
        self.domain = domain;
        Self::new(self.degrees, self.coeffs, self.domain)
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn domain(&self) -> &[[f64; 2]] {
        &self.domain
    }

    fn flat(&self, k: &[usize]) -> usize {
        assert_eq!(k.len(), self.dim(), "index dimension");
        k.iter().zip(&self.degrees).fold(0, |acc, (&ki, &n)| {
            assert!(ki <= n, "index {ki} above degree {n}");
            acc * (n + 1) + ki
        })
    }

    fn unflat(&self, mut flat: usize) -> Vec<usize> {
        let mut k = vec![0; self.dim()];
        for (slot, &n) in k.iter_mut().zip(&self.degrees).rev() {
            *slot = flat % (n + 1);
            flat /= n + 1;
        }
        k
    }

    pub fn coeff(&self, k: &[usize]) -> f64 {
        self.coeffs[self.flat(k)]
    }

    pub fn set_coeff(&mut self, k: &[usize], v: f64) {
        assert!(v.is_finite(), "non-finite coefficient");
        let i = self.flat(k);
        self.coeffs[i] = v;
    }

    /// `(k, a_k)` over the whole tensor.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        (0..self.coeffs.len()).map(move |i| (self.unflat(i), self.coeffs[i]))
    }

    /// Affine map of `x` in `domain` onto `[-1, 1]`, per axis.
    pub fn to_reference(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.domain)
            .map(|(&v, [lo, hi])| (2.0 * v - lo - hi) / (hi - lo))
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "point dimension");
        let t = self.to_reference(x);
        let basis: Vec<Vec<f64>> = self
            .degrees
            .iter()
            .zip(&t)
            .map(|(&n, &ti)| cheb_values(n, ti))
            .collect();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| {
                let k = self.unflat(i);
                c * k.iter().zip(&basis).map(|(&ki, b)| b[ki]).product::<f64>()
            })
            .sum()
    }

    /// Zeroes every coefficient of total degree above `gamma`.
    pub fn truncate_total_degree(&self, gamma: usize) -> Self {
        let mut out = self.clone();
        for i in 0..out.coeffs.len() {
            if self.unflat(i).iter().sum::<usize>() > gamma {
                out.coeffs[i] = 0.0;
            }
        }
        out
    }

    /// Smallest `C` with `|a_k| <= C rho^{-||k||_2}` over the stored coefficients.
    pub fn decay_constant(&self, rho: f64) -> f64 {
        self.entries()
            .map(|(k, a)| {
                let norm2 = k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
                a.abs() * rho.powf(norm2)
            })
            .fold(0.0, f64::max)
    }
}

/// Chebyshev-Gauss-Lobatto nodes `cos(j pi / n)`, `j = 0..=n`; the single node 0 for `n = 0`.
pub fn cgl_nodes(n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![0.0];
    }
    (0..=n).map(|j| cos_pi_ratio(j, n)).collect()
}

/// `cos(pi * a / n)` with the argument reduced exactly modulo `2n`.
fn cos_pi_ratio(a: usize, n: usize) -> f64 {
    let r = a % (2 * n);
    if 2 * r == n || 2 * r == 3 * n {
        return 0.0;
    }
    (PI * r as f64 / n as f64).cos()
}

/// In-place discrete cosine transform of one fiber of nodal values into coefficients.
fn dct_fiber(values: &[f64], n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![values[0]];
    }
    let w = |j: usize| if j == 0 || j == n { 0.5 } else { 1.0 };
    (0..=n)
        .map(|k| {
            let s: f64 = (0..=n).map(|j| w(j) * values[j] * cos_pi_ratio(j * k, n)).sum();
            w(k) * 2.0 / n as f64 * s
        })
        .collect()
}

/// Interpolates `target` at the tensor Chebyshev-Gauss-Lobatto nodes of
/// `domain` (default `[0, 1]^d` when `None`) and returns the coefficients.
///
/// Reproduces polynomials of degree `<= n_i` along each axis up to rounding.
pub fn cheb_fit(
    target: &AnalyticTarget,
    degrees: &[usize],
    domain: Option<&[[f64; 2]]>,
) -> Result<ChebyshevSeries> {
    let d = target.dim();
    if degrees.len() != d {
        return Err(Error::DimensionMismatch {
            layer: 0,
            expected: d,
            got: degrees.len(),
        });
    }
    let domain: Vec<[f64; 2]> = domain.map_or_else(|| vec![[0.0, 1.0]; d], <[_]>::to_vec);
    let mut series = ChebyshevSeries::zeros(degrees.to_vec())?.with_domain(domain.clone())?;
    let nodes: Vec<Vec<f64>> = degrees
        .iter()
        .zip(&domain)
        .map(|(&n, [lo, hi])| {
            cgl_nodes(n)
                .into_iter()
                .map(|t| lo + (t + 1.0) * 0.5 * (hi - lo))
                .collect()
        })
        .collect();
    let point = |flat: usize| -> Vec<f64> {
        series
            .unflat(flat)
            .iter()
            .zip(&nodes)
            .map(|(&j, axis)| axis[j])
            .collect()
    };
    let len = series.coeffs.len();
    let sample = |i: usize| {
        let x = point(i);
        let v = target.eval(&x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::FitFailure(x))
        }
    };
    let mut values: Vec<f64> = if target.is_concurrent() {
        (0..len).into_par_iter().map(sample).collect::<Result<_>>()?
    } else {
        (0..len).map(sample).collect::<Result<_>>()?
    };

    // Transform one axis at a time.
    let mut stride = 1;
    for axis in (0..d).rev() {
        let n = degrees[axis];
        let block = stride * (n + 1);
        let mut fiber = vec![0.0; n + 1];
        for base in (0..len).step_by(block) {
            for offset in 0..stride {
                for (j, f) in fiber.iter_mut().enumerate() {
                    *f = values[base + offset + j * stride];
                }
                for (j, c) in dct_fiber(&fiber, n).into_iter().enumerate() {
                    values[base + offset + j * stride] = c;
                }
            }
        }
        stride = block;
    }
    series.coeffs = values;
    Ok(series)
}

/// Monomial coefficients (in `x`) of `T_k(alpha x + beta)`.
fn shifted_cheb(k: usize, alpha: f64, beta: f64) -> Result<Vec<f64>> {
    let c = cheb_poly_coeffs(k)?;
    let mut out = vec![0.0; k + 1];
    // (alpha x + beta)^j expanded with binomial coefficients.
    for (j, &cj) in c.iter().enumerate() {
        if cj == 0.0 {
            continue;
        }
        let mut binom = 1.0;
        for l in 0..=j {
            out[l] += cj * binom * alpha.powi(l as i32) * beta.powi((j - l) as i32);
            binom = binom * (j - l) as f64 / (l + 1) as f64;
        }
    }
    Ok(out)
}

/// Rewrites the total-degree-`gamma` truncation of `series` in the monomial
/// basis of the original coordinates `x` (the affine domain map is composed in).
pub fn cheb_to_monomial(series: &ChebyshevSeries, gamma: usize) -> Result<MonomialPolynomial> {
    let d = series.dim();
    let mut axes = Vec::with_capacity(d);
    for (&n, [lo, hi]) in series.degrees.iter().zip(&series.domain) {
        let top = n.min(gamma);
        if top > MAX_CHEB_DEGREE {
            return Err(Error::DegreeOverflow(top));
        }
        let alpha = 2.0 / (hi - lo);
        let beta = -(hi + lo) / (hi - lo);
        axes.push((0..=top).map(|k| shifted_cheb(k, alpha, beta)).collect::<Result<Vec<_>>>()?);
    }

    // Dense accumulator over exponents l with l_i <= min(n_i, gamma).
    let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
    let mut acc = vec![0.0; dims.iter().product()];
    for (k, a) in series.entries() {
        if a == 0.0 || k.iter().sum::<usize>() > gamma {
            continue;
        }
        let mut l = vec![0usize; d];
        loop {
            let mut term = a;
            for i in 0..d {
                term *= axes[i][k[i]][l[i]];
            }
            if term != 0.0 {
                let flat = l.iter().zip(&dims).fold(0, |f, (&li, &n)| f * n + li);
                acc[flat] += term;
            }
            // Odometer over l_i = 0..=k_i.
            let mut i = d;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if l[i] < k[i] {
                    l[i] += 1;
                    break;
                }
                l[i] = 0;
            }
            if l.iter().all(|&v| v == 0) {
                break;
            }
        }
    }

    let mut poly = MonomialPolynomial::zero(d)?;
    for (flat, &c) in acc.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let mut rest = flat;
        let mut l = vec![0u32; d];
        for (slot, &n) in l.iter_mut().zip(&dims).rev() {
            *slot = (rest % n) as u32;
            rest /= n;
        }
        poly.add_term(MultiIndex(l), c)?;
    }
    Ok(poly)
}
