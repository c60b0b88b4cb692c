//! Special functions and quadrature shared by the analytic error-probability code.
//!
//! Everything here is pure and reentrant.

mod erf;
mod gamma;
mod quadrature;

pub use erf::{erf, erfc, erfcx};
pub use gamma::{ln_gamma, lower_incomplete_gamma_reg, upper_incomplete_gamma_reg};
pub use quadrature::{integrate, integrate_semi_infinite, integrate_tail, Integral, QuadratureSpec};

