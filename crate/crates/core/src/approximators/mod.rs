//! Approximation of analytic functions by appending a coefficient row to the
//! all-monomials network, via truncated power series or Chebyshev fits.

pub mod builders;
pub mod chebyshev;
pub mod polynomial;
pub mod target;

pub use builders::{
    build_cheb_net, build_power_series_net, l1_param_budget, Certificate, L1Budget, ShapeRatios,
};
pub use chebyshev::{cheb_fit, cheb_poly_coeffs, cheb_poly_coeffs_exact, cheb_to_monomial, ChebyshevSeries};
pub use polynomial::MonomialPolynomial;
pub use target::{AnalyticTarget, CoefficientSource, PowerSeries, BUILTIN_SERIES, BUILTIN_TARGETS};
