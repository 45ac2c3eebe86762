//! Riemann theta functions, the Kummer embedding of a principally polarized
//! abelian variety, and numerical residuals for the Γ₀₀, trisecant and
//! theta-divisor identities.

pub mod cli;
pub mod divisor;
pub mod error;
pub mod kummer;
pub mod numeric;
pub mod scenarios;
pub mod theta;

pub use error::{Error, Result};
