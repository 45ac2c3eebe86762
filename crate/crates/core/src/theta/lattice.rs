//! Truncated evaluation of
//!
//! ```text
//! S_a(Ω, w) = Σ_{n ∈ Z^g} exp(πi (n+a)ᵀΩ(n+a) + 2πi (n+a)·w)
//! ```
//!
//! and its directional derivatives in `w`, with a certified bound on the
//! discarded tail.
//!
//! The argument is first reduced: with `Y = Im Ω`, `m = round(Y⁻¹ Im w)` and
//! `k = round(Re(w - Ωm))`, the reduced argument `w'' = w - Ωm - k` satisfies
//! `S_a(w) = F · S_a(w'')` with `F = exp(πi mᵀΩm - 2πi m·w + 2πi a·k)`.
//! Derivatives of the cocycle are handled by Leibniz' rule, so one pass over
//! the lattice produces the derivative for every subset of the requested
//! directions.
//!
//! Tail bound. Write `Y = RᵀR` (R upper triangular), `c = Y⁻¹ Im w''` and
//! `v = n + a + c`. Then `|term| = exp(-π|Rv|² + π cᵀYc)` and
//! `|2πi (n+a)·W| <= 2π |W| (|Rv|/δ + |c|)` with `δ = sqrt(λ_min(Y))`.
//! Translated lattice points `Rv` are at least `δ` apart, so at most
//! `(1 + 2r/δ)^g` of them lie in a ball of radius `r`. Summing over unit
//! shells beyond the radius `ρ` gives
//! `tail <= Σ_{j>=0} (1 + 2(ρ+j+1)/δ)^g · f(ρ+j)` with `f` the term bound,
//! valid once `f` is decreasing (`ρ >= sqrt(order / 2π)`).
//!
//! The radius is the first point of a fixed grid where every bound is at
//! most `tol · max(1, |F|)`, which makes it monotone in `tol`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numeric::{cholesky_spd, symmetric_min_eigenvalue, C64, I};

use std::f64::consts::PI;

const RADIUS_START: f64 = 0.5;
const RADIUS_STEP: f64 = 0.05;

#[derive(Debug, Clone)]
pub(crate) struct LatticeSum {
    g: usize,
    /// Ω, row-major.
    omega: Vec<C64>,
    y: DMatrix<f64>,
    y_inv: DMatrix<f64>,
    /// Upper-triangular `R` with `Y = RᵀR`.
    upper: DMatrix<f64>,
    /// Lower bound on the shortest nonzero vector of `R Z^g`.
    shortest: f64,
    lambda_max: f64,
}

/// All derivative combinations from one lattice pass.
#[derive(Debug, Clone)]
pub(crate) struct SubsetSums {
    /// Indexed by subset mask of the directions.
    pub values: Vec<C64>,
    pub tail_bounds: Vec<f64>,
    /// `|F| · Σ|term|`, a magnitude reference for cancellation checks.
    pub scale: f64,
    pub radius: f64,
}

struct Reduced {
    w: Vec<C64>,
    /// Lattice offset `c = Y⁻¹ Im w''`.
    offset: Vec<f64>,
    /// `ln F`.
    log_factor: C64,
    /// `λ_j = -2πi m·W_j`.
    lambdas: Vec<C64>,
}

impl LatticeSum {
    pub fn new(omega: &DMatrix<C64>) -> Result<Self> {
        let g = omega.nrows();
        let y = omega.map(|z| z.im);
        let lambda_min = symmetric_min_eigenvalue(&y);
        let lower = cholesky_spd(&y)?;
        let lambda_max = y.clone().symmetric_eigenvalues().iter().cloned().fold(0.0, f64::max);
        let y_inv = y.clone().try_inverse().ok_or(Error::NotPositiveDefinite { row: 0, pivot: 0.0 })?;
        Ok(LatticeSum {
            g,
            omega: omega.transpose().iter().cloned().collect(),
            y,
            y_inv,
            upper: lower.transpose(),
            shortest: lambda_min.sqrt(),
            lambda_max,
        })
    }

    pub fn cholesky_lower(&self) -> DMatrix<f64> {
        self.upper.transpose()
    }

    fn omega_at(&self, i: usize, j: usize) -> C64 {
        self.omega[i * self.g + j]
    }

    fn omega_times_real(&self, v: &[f64]) -> Vec<C64> {
        (0..self.g)
            .map(|i| (0..self.g).map(|j| self.omega_at(i, j) * v[j]).sum())
            .collect()
    }

    fn reduce(&self, shift: &[f64], w: &[C64], dirs: &[Vec<C64>]) -> Reduced {
        let g = self.g;
        let im: Vec<f64> = w.iter().map(|z| z.im).collect();
        let m: Vec<f64> = (0..g)
            .map(|i| (0..g).map(|j| self.y_inv[(i, j)] * im[j]).sum::<f64>().round())
            .collect();
        let om = self.omega_times_real(&m);
        let mut w1: Vec<C64> = w.iter().zip(&om).map(|(a, b)| a - b).collect();
        let k: Vec<f64> = w1.iter().map(|z| z.re.round()).collect();
        for (z, kk) in w1.iter_mut().zip(&k) {
            *z -= kk;
        }
        let m_omega_m: C64 = m.iter().zip(&om).map(|(a, b)| b * a).sum();
        let m_dot_w: C64 = m.iter().zip(w).map(|(a, b)| b * a).sum();
        let a_dot_k: f64 = shift.iter().zip(&k).map(|(a, b)| a * b).sum();
        let log_factor = I * PI * m_omega_m - 2.0 * PI * I * m_dot_w + 2.0 * PI * I * a_dot_k;
        let lambdas = dirs
            .iter()
            .map(|d| -2.0 * PI * I * m.iter().zip(d).map(|(a, b)| b * a).sum::<C64>())
            .collect();
        let im1: Vec<f64> = w1.iter().map(|z| z.im).collect();
        let offset = (0..g)
            .map(|i| (0..g).map(|j| self.y_inv[(i, j)] * im1[j]).sum())
            .collect();
        Reduced { w: w1, offset, log_factor, lambdas }
    }

    fn quad_y(&self, v: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.g {
            for j in 0..self.g {
                s += v[i] * self.y[(i, j)] * v[j];
            }
        }
        s
    }

    /// Tail bound of the reduced sum for one derivative order beyond radius `rho`.
    fn reduced_tail(&self, rho: f64, order: usize, dir_norm_product: f64, offset_norm: f64, offset_quad: f64) -> f64 {
        if dir_norm_product == 0.0 {
            return 0.0;
        }
        let delta = self.shortest;
        let log_d = order as f64 * (2.0 * PI).ln() + dir_norm_product.ln();
        let mut total = 0.0;
        for j in 0..400 {
            let r = rho + j as f64;
            let log_count = self.g as f64 * (1.0 + 2.0 * (r + 1.0) / delta).ln();
            let log_f = -PI * r * r + PI * offset_quad + log_d + order as f64 * (r / delta + offset_norm).ln();
            let term = (log_count + log_f).exp();
            total += term;
            if term <= 1e-18 * total || term < 1e-300 {
                break;
            }
        }
        total
    }

    /// Per-mask absolute tail bounds at radius `rho`.
    fn mask_bounds(&self, rho: f64, dir_norms: &[f64], lambda_abs: &[f64], offset_norm: f64, offset_quad: f64, factor_abs: f64) -> Vec<f64> {
        let k = dir_norms.len();
        let reduced: Vec<f64> = (0..1usize << k)
            .map(|t| {
                let order = t.count_ones() as usize;
                let prod: f64 = (0..k).filter(|j| t >> j & 1 == 1).map(|j| dir_norms[j]).product();
                self.reduced_tail(rho, order, prod, offset_norm, offset_quad)
            })
            .collect();
        (0..1usize << k)
            .map(|s| {
                let mut b = 0.0;
                for t in 0..1usize << k {
                    if t & !s != 0 {
                        continue;
                    }
                    let rest: f64 = (0..k).filter(|j| (s & !t) >> j & 1 == 1).map(|j| lambda_abs[j]).product();
                    b += rest * reduced[t];
                }
                factor_abs * b
            })
            .collect()
    }

    fn min_radius(order: usize) -> f64 {
        RADIUS_START.max((order as f64 / (2.0 * PI)).sqrt() + 1e-9)
    }

    /// First grid radius whose bound is within `tol`.
    fn search_radius<B: Fn(f64) -> f64>(order: usize, tol: f64, cap: f64, bound: B) -> Result<f64> {
        let start = Self::min_radius(order);
        let mut step = 0usize;
        loop {
            let rho = start + RADIUS_STEP * step as f64;
            if rho > cap {
                return Err(Error::RadiusOverflow { required: rho, cap, tol });
            }
            if bound(rho) <= tol {
                return Ok(rho);
            }
            step += 1;
        }
    }

    /// Radius sufficient for unit directions and a reduced offset with every
    /// lattice coordinate bounded by `offset_bound`.
    pub fn radius_for(&self, tol: f64, order: usize, offset_bound: f64, cap: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
        }
        let offset_norm = (self.g as f64).sqrt() * offset_bound;
        let offset_quad = self.lambda_max * offset_norm * offset_norm;
        Self::search_radius(order, tol, cap, |rho| {
            self.reduced_tail(rho, order, 1.0, offset_norm, offset_quad)
        })
    }

    /// Evaluate with the smallest grid radius meeting `tol` on every mask.
    pub fn evaluate(&self, shift: &[f64], w: &[C64], dirs: &[Vec<C64>], tol: f64, cap: f64) -> Result<SubsetSums> {
        self.run(shift, w, dirs, Some(tol), None, cap)
    }

    /// Evaluate at a fixed radius (tail bounds still reported).
    pub fn evaluate_at_radius(&self, shift: &[f64], w: &[C64], dirs: &[Vec<C64>], radius: f64) -> Result<SubsetSums> {
        self.run(shift, w, dirs, None, Some(radius), f64::INFINITY)
    }

    fn run(&self, shift: &[f64], w: &[C64], dirs: &[Vec<C64>], tol: Option<f64>, fixed: Option<f64>, cap: f64) -> Result<SubsetSums> {
        let g = self.g;
        if w.len() != g {
            return Err(Error::DimensionMismatch { expected: g, got: w.len() });
        }
        if let Some(d) = dirs.iter().find(|d| d.len() != g) {
            return Err(Error::DimensionMismatch { expected: g, got: d.len() });
        }
        if w.iter().chain(dirs.iter().flatten()).any(|z| !z.is_finite()) {
            return Err(Error::InvalidInput("non-finite argument".into()));
        }
        let red = self.reduce(shift, w, dirs);
        let k = dirs.len();
        let dir_norms: Vec<f64> = dirs.iter().map(|d| d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
        let lambda_abs: Vec<f64> = red.lambdas.iter().map(|l| l.norm()).collect();
        let offset_norm = red.offset.iter().map(|c| c * c).sum::<f64>().sqrt();
        let offset_quad = self.quad_y(&red.offset);
        let factor_abs = red.log_factor.re.exp();
        let bounds_at = |rho: f64| self.mask_bounds(rho, &dir_norms, &lambda_abs, offset_norm, offset_quad, factor_abs);
        let radius = match (fixed, tol) {
            (Some(r), _) => r,
            (None, Some(tol)) => {
                if !(tol > 0.0) {
                    return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
                }
                // tol is absolute inside the fundamental domain and relative
                // to the quasi-periodicity factor outside it
                let target = tol * factor_abs.max(1.0);
                Self::search_radius(k, target, cap, |rho| bounds_at(rho).into_iter().fold(0.0, f64::max))?
            }
            (None, None) => unreachable!(),
        };
        let tail_bounds = bounds_at(radius);

        // Lattice sums h_T for every subset T of directions.
        let nmask = 1usize << k;
        let mut sums = vec![C64::new(0.0, 0.0); nmask];
        let mut abs_sum = 0.0;
        let center: Vec<f64> = shift.iter().zip(&red.offset).map(|(a, c)| a + c).collect();
        let mut n = vec![0i64; g];
        let mut q = vec![0.0f64; g];
        let mut factors = vec![C64::new(0.0, 0.0); k];
        let mut visit = |n: &[i64]| {
            for i in 0..g {
                q[i] = n[i] as f64 + shift[i];
            }
            let mut quad = C64::new(0.0, 0.0);
            for i in 0..g {
                let mut row = C64::new(0.0, 0.0);
                for j in 0..g {
                    row += self.omega_at(i, j) * q[j];
                }
                quad += row * q[i] + 2.0 * red.w[i] * q[i];
            }
            let term = (I * PI * quad).exp();
            abs_sum += term.norm();
            for (f, d) in factors.iter_mut().zip(dirs) {
                *f = 2.0 * PI * I * d.iter().zip(q.iter()).map(|(a, b)| a * b).sum::<C64>();
            }
            for (t, s) in sums.iter_mut().enumerate() {
                let mut v = term;
                for (j, f) in factors.iter().enumerate() {
                    if t >> j & 1 == 1 {
                        v *= f;
                    }
                }
                *s += v;
            }
        };
        self.enumerate(g - 1, radius * radius, &center, &mut n, &mut visit);

        let factor = red.log_factor.exp();
        let values: Vec<C64> = (0..nmask)
            .map(|s| {
                let mut acc = C64::new(0.0, 0.0);
                for (t, h) in sums.iter().enumerate() {
                    if t & !s != 0 {
                        continue;
                    }
                    let mut coeff = C64::new(1.0, 0.0);
                    for j in 0..k {
                        if (s & !t) >> j & 1 == 1 {
                            coeff *= red.lambdas[j];
                        }
                    }
                    acc += coeff * h;
                }
                factor * acc
            })
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("theta value overflows; the argument is too far from the fundamental domain".into()));
        }
        Ok(SubsetSums { values, tail_bounds, scale: factor_abs * abs_sum, radius })
    }

    /// Visits every `n` with `|R(n + center)|² < budget`, last coordinate outermost.
    fn enumerate<F: FnMut(&[i64])>(&self, level: usize, budget: f64, center: &[f64], n: &mut [i64], visit: &mut F) {
        let g = self.g;
        let mut t = 0.0;
        for j in level + 1..g {
            t += self.upper[(level, j)] * (n[j] as f64 + center[j]);
        }
        let r = self.upper[(level, level)];
        let rho = budget.max(0.0).sqrt();
        let lo = ((-t - rho) / r - center[level]).ceil() as i64;
        let hi = ((rho - t) / r - center[level]).floor() as i64;
        for ni in lo..=hi {
            let e = r * (ni as f64 + center[level]) + t;
            let rest = budget - e * e;
            if rest < 0.0 {
                continue;
            }
            n[level] = ni;
            if level == 0 {
                visit(n);
            } else {
                self.enumerate(level - 1, rest, center, n, visit);
            }
        }
    }
}
