//! Riemann theta function and the second-order theta functions.
//!
//! ```text
//! θ(B, z)    = Σ_{n ∈ Z^g} exp(2πi (z, n) + πi (Bn, n))
//! Θ[ε](B, z) = Σ_{n ∈ Z^g} exp(2πi (2n+ε, z) + πi (2n+ε, B(n + ε/2)))
//! ```
//!
//! where `(·,·)` is the complex bilinear pairing. `Θ[ε](B, z)` is the
//! half-characteristic theta function of period `2B` evaluated at `2z`, so
//! both share the engine in [`lattice`]. Every value carries an absolute
//! bound on the truncation error.

mod lattice;

use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{symmetric_min_eigenvalue, CPoint, C64, MAX_GENUS};
use lattice::LatticeSum;

/// Environment variable overriding the default lattice radius cap.
pub const MAX_RADIUS_ENV: &str = "THETA_KUMMER_MAX_RADIUS";
/// Cap on the truncation radius, measured in the `Im B` ellipsoid norm.
pub const DEFAULT_MAX_RADIUS: f64 = 12.0;
/// `Im B` with a smaller eigenvalue is rejected.
pub const MIN_IM_EIGENVALUE: f64 = 1e-8;

/// Default evaluation tolerance for genus `g`.
pub fn default_tol(g: usize) -> f64 {
    if g <= 3 {
        1e-12
    } else {
        1e-10
    }
}

fn env_radius_cap() -> f64 {
    static CAP: OnceLock<f64> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(MAX_RADIUS_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|r| *r > 0.0)
            .unwrap_or(DEFAULT_MAX_RADIUS)
    })
}

/// A point of the Siegel upper half space.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "crate::cli::PeriodMatrixFile", into = "crate::cli::PeriodMatrixFile")]
pub struct PeriodMatrix {
    b: DMatrix<C64>,
    first: LatticeSum,
    second: LatticeSum,
    radius_cap: f64,
}

impl PartialEq for PeriodMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.b == other.b && self.radius_cap == other.radius_cap
    }
}

impl PeriodMatrix {
    pub fn new(b: DMatrix<C64>) -> Result<Self> {
        let g = b.nrows();
        if g == 0 || g > MAX_GENUS {
            return Err(Error::InvalidInput(format!("genus must be in 1..={MAX_GENUS}, got {g}")));
        }
        if b.ncols() != g {
            return Err(Error::DimensionMismatch { expected: g, got: b.ncols() });
        }
        if b.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidInput("period matrix has non-finite entries".into()));
        }
        let asym = (&b - b.transpose()).norm();
        if asym > 1e-12 * b.norm() {
            return Err(Error::InvalidInput(format!("period matrix not symmetric (|B - B^T| = {asym:e})")));
        }
        // symmetrize exactly so both triangles agree bit-for-bit
        let b = (&b + b.transpose()).map(|z| z * 0.5);
        let im = b.map(|z| z.im);
        let lmin = symmetric_min_eigenvalue(&im);
        let first = LatticeSum::new(&b)?;
        if lmin < MIN_IM_EIGENVALUE {
            return Err(Error::InvalidInput(format!(
                "Im B nearly singular: smallest eigenvalue {lmin:e} < {MIN_IM_EIGENVALUE:e}"
            )));
        }
        let second = LatticeSum::new(&b.map(|z| z * 2.0))?;
        Ok(PeriodMatrix { b, first, second, radius_cap: env_radius_cap() })
    }

    pub fn from_parts(re: &DMatrix<f64>, im: &DMatrix<f64>) -> Result<Self> {
        if re.shape() != im.shape() {
            return Err(Error::DimensionMismatch { expected: re.nrows(), got: im.nrows() });
        }
        Self::new(DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| C64::new(re[(i, j)], im[(i, j)])))
    }

    /// Replaces the lattice radius cap (default from `THETA_KUMMER_MAX_RADIUS`).
    pub fn with_radius_cap(mut self, cap: f64) -> Self {
        self.radius_cap = cap;
        self
    }

    pub fn genus(&self) -> usize {
        self.b.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.b
    }

    pub fn radius_cap(&self) -> f64 {
        self.radius_cap
    }

    /// Cholesky factor of `Im B`.
    pub fn chol_im(&self) -> DMatrix<f64> {
        self.first.cholesky_lower()
    }

    /// `B m` for an integer (or real) vector `m`.
    pub fn apply(&self, m: &[f64]) -> CPoint {
        let g = self.genus();
        CPoint::new((0..g).map(|i| (0..g).map(|j| self.b[(i, j)] * m[j]).sum()).collect())
    }
}

/// Translates `z` by a lattice vector `k + Bm` into the fundamental domain:
/// `(Im B)⁻¹ Im z` and `Re z` rounded to the nearest integers are removed.
pub fn reduce_to_fundamental(pm: &PeriodMatrix, z: &CPoint) -> Result<CPoint> {
    let g = pm.genus();
    z.expect_dim(g)?;
    let im: Vec<f64> = z.coords().iter().map(|x| x.im).collect();
    let y_inv = pm.b.map(|x| x.im).try_inverse().ok_or(Error::NotPositiveDefinite { row: 0, pivot: 0.0 })?;
    let m: Vec<f64> = (0..g).map(|i| (0..g).map(|j| y_inv[(i, j)] * im[j]).sum::<f64>().round()).collect();
    let shifted = z - &pm.apply(&m);
    Ok(CPoint::new(shifted.coords().iter().map(|x| C64::new(x.re - x.re.round(), x.im)).collect()))
}

/// A half-characteristic `ε ∈ (Z/2Z)^g`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaCharacteristic {
    eps: Vec<u8>,
}

impl ThetaCharacteristic {
    pub fn new(eps: Vec<u8>) -> Result<Self> {
        if eps.iter().any(|&e| e > 1) {
            return Err(Error::InvalidInput(format!("characteristic entries must be 0 or 1, got {eps:?}")));
        }
        Ok(ThetaCharacteristic { eps })
    }

    /// The characteristic at position `index` in lexicographic order of
    /// `(ε_1, …, ε_g)`; `ε_1` is the most significant bit.
    pub fn from_index(g: usize, index: usize) -> Self {
        ThetaCharacteristic { eps: (0..g).map(|k| ((index >> (g - 1 - k)) & 1) as u8).collect() }
    }

    pub fn index(&self) -> usize {
        self.eps.iter().fold(0, |acc, &e| (acc << 1) | e as usize)
    }

    pub fn all(g: usize) -> impl Iterator<Item = ThetaCharacteristic> {
        (0..1usize << g).map(move |i| Self::from_index(g, i))
    }

    pub fn bits(&self) -> &[u8] {
        &self.eps
    }

    fn half_shift(&self) -> Vec<f64> {
        self.eps.iter().map(|&e| 0.5 * e as f64).collect()
    }
}

/// A value together with an absolute truncation-error bound.
///
/// For arguments in the fundamental domain `tail_bound <= tol`. Elsewhere
/// the series is evaluated through the quasi-periodicity factor `F` of the
/// reduction and `tail_bound <= tol · |F|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    pub value: C64,
    pub tail_bound: f64,
    /// Sum of the magnitudes of the retained terms; reference scale for
    /// judging cancellation.
    pub scale: f64,
}

/// Ordered directional derivatives `∂_{U_1} ∂_{U_2} …` (at most three).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DerivSpec {
    pub dirs: Vec<CPoint>,
}

impl DerivSpec {
    pub fn none() -> Self {
        DerivSpec { dirs: Vec::new() }
    }

    pub fn of(dirs: &[&CPoint]) -> Self {
        DerivSpec { dirs: dirs.iter().map(|d| (*d).clone()).collect() }
    }

    pub fn order(&self) -> usize {
        self.dirs.len()
    }
}

/// Values of all mixed derivatives over subsets of a direction list.
///
/// `jet.get(mask)` is the derivative along the directions whose bits are set
/// in `mask`; `mask = 0` is the function value.
#[derive(Debug, Clone)]
pub struct Jet {
    values: Vec<ThetaValue>,
    pub radius: f64,
}

impl Jet {
    pub fn get(&self, mask: usize) -> ThetaValue {
        self.values[mask]
    }

    pub fn value(&self) -> C64 {
        self.values[0].value
    }

    pub fn full(&self) -> ThetaValue {
        *self.values.last().expect("jet has at least the value")
    }

    pub fn max_tail(&self) -> f64 {
        self.values.iter().map(|v| v.tail_bound).fold(0.0, f64::max)
    }
}

fn check_inputs(pm: &PeriodMatrix, z: &CPoint, dirs: &[CPoint], max_order: usize, tol: f64) -> Result<()> {
    z.expect_dim(pm.genus())?;
    for d in dirs {
        d.expect_dim(pm.genus())?;
    }
    if dirs.len() > max_order {
        return Err(Error::InvalidInput(format!("at most {max_order} derivative directions supported")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

fn into_jet(sums: lattice::SubsetSums) -> Jet {
    let values = sums
        .values
        .iter()
        .zip(&sums.tail_bounds)
        .map(|(&value, &tail_bound)| ThetaValue { value, tail_bound, scale: sums.scale })
        .collect();
    Jet { values, radius: sums.radius }
}

/// `θ` and all its mixed derivatives over subsets of `dirs` (up to three).
pub fn theta_jet(pm: &PeriodMatrix, z: &CPoint, dirs: &[CPoint], tol: f64) -> Result<Jet> {
    check_inputs(pm, z, dirs, 3, tol)?;
    let g = pm.genus();
    let dirs: Vec<Vec<C64>> = dirs.iter().map(|d| d.coords().to_vec()).collect();
    let sums = pm.first.evaluate(&vec![0.0; g], z.coords(), &dirs, tol, pm.radius_cap)?;
    Ok(into_jet(sums))
}

/// `Θ[ε]` and all its mixed derivatives over subsets of `dirs` (up to two).
pub fn theta_char_jet(pm: &PeriodMatrix, eps: &ThetaCharacteristic, z: &CPoint, dirs: &[CPoint], tol: f64) -> Result<Jet> {
    check_inputs(pm, z, dirs, 2, tol)?;
    if eps.bits().len() != pm.genus() {
        return Err(Error::DimensionMismatch { expected: pm.genus(), got: eps.bits().len() });
    }
    let w: Vec<C64> = z.coords().iter().map(|x| x * 2.0).collect();
    let dirs: Vec<Vec<C64>> = dirs.iter().map(|d| d.coords().iter().map(|x| x * 2.0).collect()).collect();
    let sums = pm.second.evaluate(&eps.half_shift(), &w, &dirs, tol, pm.radius_cap)?;
    Ok(into_jet(sums))
}

/// `∂_{U_1}…∂_{U_k} θ(B, z)` for `k <= 3`, certified to `tol`.
pub fn theta_eval(pm: &PeriodMatrix, z: &CPoint, d: &DerivSpec, tol: f64) -> Result<ThetaValue> {
    Ok(theta_jet(pm, z, &d.dirs, tol)?.full())
}

/// `∂_{U_1}…∂_{U_k} Θ[ε](B, z)` for `k <= 2`, certified to `tol`.
pub fn theta_char_eval(pm: &PeriodMatrix, eps: &ThetaCharacteristic, z: &CPoint, d: &DerivSpec, tol: f64) -> Result<ThetaValue> {
    Ok(theta_char_jet(pm, eps, z, &d.dirs, tol)?.full())
}

/// Ellipsoid radius (in the `Im B` norm) beyond which the tail of the
/// order-`order` differentiated series, for unit directions, is below `tol`.
///
/// `z_bound` bounds every coordinate of the lattice offset `(Im B)⁻¹ Im z` of
/// the arguments to be evaluated; after reduction it is at most `1/2`.
pub fn truncation_radius(pm: &PeriodMatrix, tol: f64, order: usize, z_bound: f64) -> Result<f64> {
    if order > 3 {
        return Err(Error::InvalidInput(format!("derivative order {order} > 3")));
    }
    if !(z_bound >= 0.0) {
        return Err(Error::InvalidInput(format!("z_bound must be nonnegative, got {z_bound}")));
    }
    pm.first.radius_for(tol, order, z_bound, pm.radius_cap)
}

/// Re-evaluates `θ` (with derivatives) at a fixed radius. Used for
/// tail-certification checks.
pub fn theta_eval_at_radius(pm: &PeriodMatrix, z: &CPoint, d: &DerivSpec, radius: f64) -> Result<ThetaValue> {
    check_inputs(pm, z, &d.dirs, 3, 1.0)?;
    let g = pm.genus();
    let dirs: Vec<Vec<C64>> = d.dirs.iter().map(|d| d.coords().to_vec()).collect();
    let sums = pm.first.evaluate_at_radius(&vec![0.0; g], z.coords(), &dirs, radius)?;
    Ok(into_jet(sums).full())
}

#[cfg(test)]
mod tests;
