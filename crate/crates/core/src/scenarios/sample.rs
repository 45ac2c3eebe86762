use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numeric::rng::SeededRng;
use crate::numeric::{symmetric_min_eigenvalue, C64, MAX_GENUS};
use crate::theta::PeriodMatrix;

/// Draws with a smaller `Im B` eigenvalue are rejected and redrawn.
pub const MIN_SAMPLED_IM_EIGENVALUE: f64 = 0.05;
const MAX_DRAWS: usize = 100;

/// Random period matrix `B = i(I + S) + R`.
///
/// Per draw, the upper triangle is visited row-major and for each `(i, j)`
/// two uniforms are consumed: `S_ij = offdiag_scale · u1`, `R_ij = 0.4 · u2`
/// (both `u` in `[-1, 1)`). Draws whose `Im B` has an eigenvalue below
/// [`MIN_SAMPLED_IM_EIGENVALUE`] are discarded.
pub fn sample_siegel(g: usize, seed: u64, offdiag_scale: f64) -> Result<PeriodMatrix> {
    if g == 0 || g > MAX_GENUS {
        return Err(Error::InvalidInput(format!("genus must be in 1..={MAX_GENUS}, got {g}")));
    }
    if !(0.0..0.5).contains(&offdiag_scale) {
        return Err(Error::InvalidInput(format!("offdiag_scale must lie in [0, 0.5), got {offdiag_scale}")));
    }
    let mut rng = SeededRng::new(seed);
    for _ in 0..MAX_DRAWS {
        let mut b = DMatrix::<C64>::zeros(g, g);
        for i in 0..g {
            for j in i..g {
                let s = offdiag_scale * rng.symmetric_unit();
                let r = 0.4 * rng.symmetric_unit();
                let v = C64::new(r, if i == j { 1.0 + s } else { s });
                b[(i, j)] = v;
                b[(j, i)] = v;
            }
        }
        let im = b.map(|z| z.im);
        if symmetric_min_eigenvalue(&im) < MIN_SAMPLED_IM_EIGENVALUE {
            continue;
        }
        return PeriodMatrix::new(b);
    }
    Err(Error::InvalidInput(format!("no positive-definite draw in {MAX_DRAWS} attempts")))
}

/// Random point with real parts in `[-1/2, 1/2)` and imaginary parts
/// `Im B · c`, `c` in `[-1/2, 1/2)^g`: a fundamental-domain sample.
pub fn sample_point(pm: &PeriodMatrix, rng: &mut SeededRng) -> crate::numeric::CPoint {
    let g = pm.genus();
    let re: Vec<f64> = (0..g).map(|_| 0.5 * rng.symmetric_unit()).collect();
    let c: Vec<f64> = (0..g).map(|_| 0.5 * rng.symmetric_unit()).collect();
    let bc = pm.apply(&c);
    crate::numeric::CPoint::new((0..g).map(|i| C64::new(re[i], bc[i].im)).collect())
}

/// Random direction with real and imaginary parts uniform in `[-1, 1)`.
pub fn sample_direction(g: usize, rng: &mut SeededRng) -> crate::numeric::CPoint {
    crate::numeric::CPoint::new((0..g).map(|_| rng.complex_in(1.0)).collect())
}
