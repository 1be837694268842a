use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// Exponent vector `k` of the monomial `x^k = prod x_i^{k_i}`.
///
/// Ordered graded-lexicographically: by degree first, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&k, &v)| v.powi(k as i32))
            .product()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All `d`-dimensional multi-indices with degree `< gamma`, in graded-lex order.
pub fn enumerate_multi_indices(d: usize, gamma: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut buf = vec![0u32; d];
    for degree in 0..gamma {
        fill(&mut buf, 0, degree, &mut out);
    }
    out
}

fn fill(buf: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        out.push(MultiIndex(buf.to_vec()));
        return;
    }
    for v in 0..=remaining {
        buf[pos] = v;
        fill(buf, pos + 1, remaining - v, out);
    }
}

/// `C_{d,gamma} = binom(d + gamma - 1, d)`, the number of monomials of degree `< gamma`.
pub fn monomial_count(d: usize, gamma: u32) -> usize {
    let n = d as u64 + gamma as u64 - 1;
    let k = d as u64;
    if gamma == 0 {
        return 0;
    }
    let mut c: u64 = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c as usize
}
