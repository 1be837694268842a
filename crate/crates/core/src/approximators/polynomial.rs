use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constructions::MultiIndex;
use crate::error::{Error, Result};

/// Sparse polynomial `sum_k c_k x^k` in `d` variables.
///
/// JSON form: `{"d": 2, "terms": [{"k": [1, 0], "c": 0.5}, ...]}`, terms in
/// graded-lex order. Zero coefficients are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolynomialRepr", into = "PolynomialRepr")]
pub struct MonomialPolynomial {
    d: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

#[derive(Serialize, Deserialize)]
struct Term {
    k: MultiIndex,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct PolynomialRepr {
    d: usize,
    terms: Vec<Term>,
}

impl TryFrom<PolynomialRepr> for MonomialPolynomial {
    type Error = Error;
    fn try_from(r: PolynomialRepr) -> Result<Self> {
        let mut p = MonomialPolynomial::zero(r.d)?;
        for t in r.terms {
            p.add_term(t.k, t.c)?;
        }
        Ok(p)
    }
}

impl From<MonomialPolynomial> for PolynomialRepr {
    fn from(p: MonomialPolynomial) -> Self {
        PolynomialRepr {
            d: p.d,
            terms: p.terms.into_iter().map(|(k, c)| Term { k, c }).collect(),
        }
    }
}

impl MonomialPolynomial {
    pub fn zero(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("polynomial dimension must be >= 1".into()));
        }
        Ok(Self {
            d,
            terms: BTreeMap::new(),
        })
    }

    pub fn from_terms(d: usize, terms: impl IntoIterator<Item = (MultiIndex, f64)>) -> Result<Self> {
        let mut p = Self::zero(d)?;
        for (k, c) in terms {
            p.add_term(k, c)?;
        }
        Ok(p)
    }

    /// Adds `c` to the coefficient of `x^k`.
    pub fn add_term(&mut self, k: MultiIndex, c: f64) -> Result<()> {
        if k.dim() != self.d {
            return Err(Error::DimensionMismatch {
                layer: 0,
                expected: self.d,
                got: k.dim(),
            });
        }
        if !c.is_finite() {
            return Err(Error::NonFinite {
                context: format!("coefficient of {:?}", k.0),
            });
        }
        let sum = self.coeff(&k) + c;
        if sum == 0.0 {
            self.terms.remove(&k);
        } else {
            self.terms.insert(k, sum);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: &MultiIndex) -> f64 {
        self.terms.get(k).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(k, &c)| (k, c))
    }

    /// Total degree, 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// `sum_k |c_k|`.
    pub fn abs_sum(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.d, "point dimension");
        self.terms.iter().map(|(k, c)| c * k.monomial(x)).sum()
    }

    /// Keeps the terms of total degree `<= gamma`.
    pub fn truncate(&self, gamma: u32) -> Self {
        Self {
            d: self.d,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.degree() <= gamma)
                .map(|(k, &c)| (k.clone(), c))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_json_round_trip() {
        let p = MonomialPolynomial::from_terms(
            2,
            [
                (MultiIndex(vec![0, 0]), 1.0),
                (MultiIndex(vec![1, 1]), -0.5),
                (MultiIndex(vec![2, 0]), 0.25),
            ],
        )
        .unwrap();
        assert_eq!(p.eval(&[2.0, 3.0]), 1.0 - 3.0 + 1.0);
        assert_eq!(p.abs_sum(), 1.75);
        assert_eq!(p.degree(), 2);
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.starts_with(r#"{"d":2,"terms":[{"k":[0,0],"c":1.0}"#));
        let back: MonomialPolynomial = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn cancelling_terms_vanish() {
        let mut p = MonomialPolynomial::zero(1).unwrap();
        p.add_term(MultiIndex(vec![3]), 2.0).unwrap();
        p.add_term(MultiIndex(vec![3]), -2.0).unwrap();
        assert!(p.is_empty());
        assert!(p.add_term(MultiIndex(vec![1, 1]), 1.0).is_err());
        assert!(p.add_term(MultiIndex(vec![1]), f64::INFINITY).is_err());
    }
}
