//! Pairwise error probabilities, BER union bounds and diversity orders for
//! downlink power-domain NOMA with successive interference cancellation,
//! under additive generalized Gaussian noise and ordered Rayleigh fading,
//! together with a seeded Monte Carlo link simulator to check them against.

pub mod channel;
pub mod cli;
pub mod error;
pub mod exec;
pub mod ggd;
pub mod mc;
pub mod noma;
pub mod pep;
pub mod specfun;

pub use error::{Error, Result};

#[cfg(test)]
mod testing;
