//! Constructive approximation with absolute-value activation networks.
//!
//! The crate builds explicit networks without shift vectors (the constant is
//! fed as an extra input coordinate), measures their path norm
//! `||f||_x = || |W_L| ... |W_0| ||_1`, and ships the harnesses around them:
//!
//! - [`network`]: matrix chains, evaluation, path norm, combinators, JSON.
//! - [`constructions`]: squaring, multiplication, product-tree and
//!   all-monomials networks with closed-form oracles.
//! - [`approximators`]: power-series and Chebyshev approximators of analytic
//!   functions, and the Chebyshev machinery they rely on.
//! - [`entropy`]: covering-number bounds and an empirical greedy cover.
//! - [`regression`]: path-norm penalized least squares on synthetic data.
//! - [`verify`]: grid verification reports for the constructions.

pub mod activation;
pub mod approximators;
pub mod constructions;
pub mod entropy;
pub mod error;
pub mod matrix;
pub mod network;
pub mod regression;
pub mod verify;

pub use activation::{ActivationKind, Sign, SignSelector};
pub use constructions::{MultVariant, MultiIndex};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use network::{Evaluator, Network};
