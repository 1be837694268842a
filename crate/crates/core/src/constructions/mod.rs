//! Explicit absolute-value networks: squaring, multiplication, product
//! trees and the all-monomials network, plus closed-form oracles.

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub mod mon;
pub mod mult;
pub mod multi_index;
pub mod oracles;
pub mod tree;

pub use mon::{build_mon, mon_error_bound, mon_path_cap, variant_domain_hi};
pub use mult::{build_mult, build_sq, mult_error_bound};
pub use multi_index::{enumerate_multi_indices, monomial_count, MultiIndex};
pub use oracles::{fm_ref, tent, tent_iter};
pub use tree::{build_multr, build_pairing_layer, multr_error_bound, multr_path_cap};

/// How the multiplication network forms the square of the sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultVariant {
    /// Input row `(0 1 1)`, output row `(-1/2 -1/2 1/2)`; valid for `x + y <= 1`.
    PaperLiteral,
    /// Input row `(0 1/2 1/2)`, output row `(-1/2 -1/2 2)`; valid on `[0, 1]^2`.
    Rescaled,
}

impl MultVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            MultVariant::PaperLiteral => "paper-literal",
            MultVariant::Rescaled => "rescaled",
        }
    }
}

impl std::str::FromStr for MultVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "paper-literal" | "paper" | "literal" => Ok(MultVariant::PaperLiteral),
            "rescaled" => Ok(MultVariant::Rescaled),
            other => Err(Error::InvalidParameter(format!("unknown variant {other:?}"))),
        }
    }
}
