//! Small dense complex linear algebra, scalar Newton iteration and the
//! vector/matrix types shared by the evaluation modules.

mod linalg;
mod newton;
mod point;
pub mod rng;

pub use linalg::{cholesky_spd, lstsq, singular_values, symmetric_min_eigenvalue, CMatrix, LstsqSolution};
pub use newton::{newton_scalar, DEFAULT_MAX_ITER};
pub use point::{cdot, CPoint};

/// Largest supported genus. Kummer vectors then have at most 64 entries.
pub const MAX_GENUS: usize = 6;

pub type C64 = num_complex::Complex64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);
