use super::C64;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITER: usize = 50;

/// Plain (undamped) complex Newton iteration.
///
/// `f` returns the pair `(f(t), f'(t))`. Returns the first iterate with
/// `|f(t)| < tol`.
pub fn newton_scalar<F>(mut f: F, t0: C64, tol: f64, max_iter: usize) -> Result<C64>
where
    F: FnMut(C64) -> Result<(C64, C64)>,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("Newton tolerance must be positive, got {tol}")));
    }
    let mut t = t0;
    let mut last = f64::INFINITY;
    for _ in 0..=max_iter {
        let (value, deriv) = f(t)?;
        last = value.norm();
        if last < tol {
            return Ok(t);
        }
        if deriv.norm() < 1e-300 {
            return Err(Error::DerivativeVanished(format!("|f'| < 1e-300 at t = {t}")));
        }
        t -= value / deriv;
        if !t.is_finite() {
            break;
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: last })
}
