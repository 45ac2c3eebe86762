//! The Kummer map `K(z) = (Θ[ε](z))_ε`, the bilinear addition theorem and
//! the linear-dependence residuals built on it.
//!
//! Kummer vectors are affine representatives of projective points and are
//! never normalized; every residual here is scale invariant.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{lstsq, singular_values, CMatrix, CPoint, C64};
use crate::theta::{theta_char_jet, theta_jet, PeriodMatrix, ThetaCharacteristic};

/// `2^g` second-order theta values, indexed lexicographically by `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KummerVector {
    pub g: usize,
    pub comps: Vec<C64>,
    /// Largest per-component truncation bound.
    pub tail_bound: f64,
}

impl KummerVector {
    pub fn norm(&self) -> f64 {
        self.comps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Bilinear pairing `Σ_ε a_ε b_ε`.
    pub fn dot(&self, other: &KummerVector) -> C64 {
        self.comps.iter().zip(&other.comps).map(|(a, b)| a * b).sum()
    }
}

/// One component per characteristic, taken from the jet entry `mask`.
fn kummer_jet(pm: &PeriodMatrix, z: &CPoint, dirs: &[CPoint], mask: usize, tol: f64) -> Result<KummerVector> {
    let g = pm.genus();
    let mut comps = Vec::with_capacity(1 << g);
    let mut tail: f64 = 0.0;
    for eps in ThetaCharacteristic::all(g) {
        let v = theta_char_jet(pm, &eps, z, dirs, tol)?.get(mask);
        comps.push(v.value);
        tail = tail.max(v.tail_bound);
    }
    Ok(KummerVector { g, comps, tail_bound: tail })
}

pub fn kummer_map(pm: &PeriodMatrix, z: &CPoint, tol: f64) -> Result<KummerVector> {
    kummer_jet(pm, z, &[], 0, tol)
}

/// `∂_U K(z)`.
pub fn kummer_deriv(pm: &PeriodMatrix, z: &CPoint, u: &CPoint, tol: f64) -> Result<KummerVector> {
    kummer_jet(pm, z, std::slice::from_ref(u), 1, tol)
}

/// `∂_U ∂_V K(z)`.
pub fn kummer_dderiv(pm: &PeriodMatrix, z: &CPoint, u: &CPoint, v: &CPoint, tol: f64) -> Result<KummerVector> {
    kummer_jet(pm, z, &[u.clone(), v.clone()], 3, tol)
}

/// All second partials `∂_{z_i} ∂_{z_j} K(z)`, `i <= j`, in row-major upper
/// triangular order.
pub fn kummer_hessian(pm: &PeriodMatrix, z: &CPoint, tol: f64) -> Result<Vec<KummerVector>> {
    let g = pm.genus();
    let mut out = Vec::with_capacity(g * (g + 1) / 2);
    for i in 0..g {
        for j in i..g {
            out.push(kummer_dderiv(pm, z, &CPoint::basis(g, i), &CPoint::basis(g, j), tol)?);
        }
    }
    Ok(out)
}

/// `|θ(z+Z)θ(z−Z) − K(z)·K(Z)| / (1 + |θ(z+Z)θ(z−Z)|)`.
pub fn bilinear_residual(pm: &PeriodMatrix, z: &CPoint, zz: &CPoint, tol: f64) -> Result<f64> {
    z.expect_dim(pm.genus())?;
    zz.expect_dim(pm.genus())?;
    let plus = theta_jet(pm, &(z + zz), &[], tol)?.value();
    let minus = theta_jet(pm, &(z - zz), &[], tol)?.value();
    let lhs = plus * minus;
    let rhs = kummer_map(pm, z, tol)?.dot(&kummer_map(pm, zz, tol)?);
    Ok((lhs - rhs).norm() / (1.0 + lhs.norm()))
}

/// A candidate solution of `K(P) = c K(0) + ∂_U ∂_V K(0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gamma00Instance {
    pub pm: PeriodMatrix,
    #[serde(rename = "P")]
    pub p: CPoint,
    #[serde(rename = "U")]
    pub u: CPoint,
    #[serde(rename = "V")]
    pub v: CPoint,
    pub c: C64,
}

impl Gamma00Instance {
    pub fn new(pm: PeriodMatrix, p: CPoint, u: CPoint, v: CPoint, c: C64) -> Result<Self> {
        let g = pm.genus();
        p.expect_dim(g)?;
        u.expect_dim(g)?;
        v.expect_dim(g)?;
        Ok(Gamma00Instance { pm, p, u, v, c })
    }
}

fn relative_gap(target: &KummerVector, combo: &[C64]) -> f64 {
    let num = target.comps.iter().zip(combo).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let den = target.norm();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// `|K(P) − c K(0) − ∂_U ∂_V K(0)| / |K(P)|`.
pub fn gamma00_residual(inst: &Gamma00Instance, tol: f64) -> Result<f64> {
    let pm = &inst.pm;
    let g = pm.genus();
    inst.p.expect_dim(g)?;
    inst.u.expect_dim(g)?;
    inst.v.expect_dim(g)?;
    let zero = CPoint::zeros(g);
    let kp = kummer_map(pm, &inst.p, tol)?;
    let k0 = kummer_map(pm, &zero, tol)?;
    let kuv = kummer_dderiv(pm, &zero, &inst.u, &inst.v, tol)?;
    let combo: Vec<C64> = k0.comps.iter().zip(&kuv.comps).map(|(a, b)| inst.c * a + b).collect();
    Ok(relative_gap(&kp, &combo))
}

/// Least-squares coefficients of `K(P) ≈ c K(0) + b ∂_U ∂_V K(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitCoefficients {
    pub c: C64,
    pub b: C64,
    pub rel_residual: f64,
}

/// Fit against precomputed `K(0)` and `∂_U∂_V K(0)`.
pub fn fit_against(kp: &KummerVector, k0: &KummerVector, kuv: &KummerVector) -> Result<FitCoefficients> {
    if kp.norm() == 0.0 {
        return Err(Error::InvalidInput("K(P) vanishes".into()));
    }
    let a = CMatrix::from_columns(&[&k0.comps, &kuv.comps])?;
    let sol = lstsq(&a, &kp.comps)?;
    Ok(FitCoefficients { c: sol.x[0], b: sol.x[1], rel_residual: sol.rel_residual })
}

pub fn gamma00_fit(pm: &PeriodMatrix, p: &CPoint, u: &CPoint, v: &CPoint, tol: f64) -> Result<FitCoefficients> {
    let zero = CPoint::zeros(pm.genus());
    let kp = kummer_map(pm, p, tol)?;
    let k0 = kummer_map(pm, &zero, tol)?;
    let kuv = kummer_dderiv(pm, &zero, u, v, tol)?;
    fit_against(&kp, &k0, &kuv)
}

/// Coefficients `c, c_ij` of a general linear dependence
/// `K(P) = c K(0) + Σ c_ij ∂_i ∂_j K(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub c: C64,
    pub cij: DMatrix<C64>,
}

impl CoefficientMatrix {
    pub fn new(c: C64, cij: DMatrix<C64>) -> Result<Self> {
        if cij.nrows() != cij.ncols() {
            return Err(Error::DimensionMismatch { expected: cij.nrows(), got: cij.ncols() });
        }
        let asym = (&cij - cij.transpose()).norm();
        if asym > 1e-12 * cij.norm() {
            return Err(Error::InvalidInput(format!("c_ij not symmetric (|C - C^T| = {asym:e})")));
        }
        Ok(CoefficientMatrix { c, cij })
    }

    /// `c_ij = (U_i V_j + V_i U_j) / 2`.
    pub fn rank_two(c: C64, u: &CPoint, v: &CPoint) -> Self {
        let g = u.dim();
        let cij = DMatrix::from_fn(g, g, |i, j| (u[i] * v[j] + v[i] * u[j]) * 0.5);
        CoefficientMatrix { c, cij }
    }
}

pub fn gamma00_residual_full(pm: &PeriodMatrix, p: &CPoint, coeffs: &CoefficientMatrix, tol: f64) -> Result<f64> {
    let g = pm.genus();
    p.expect_dim(g)?;
    if coeffs.cij.nrows() != g {
        return Err(Error::DimensionMismatch { expected: g, got: coeffs.cij.nrows() });
    }
    let zero = CPoint::zeros(g);
    let kp = kummer_map(pm, p, tol)?;
    let k0 = kummer_map(pm, &zero, tol)?;
    let hess = kummer_hessian(pm, &zero, tol)?;
    let mut combo: Vec<C64> = k0.comps.iter().map(|a| coeffs.c * a).collect();
    let mut idx = 0;
    for i in 0..g {
        for j in i..g {
            // symmetric: the off-diagonal pair contributes twice
            let w = if i == j { coeffs.cij[(i, j)] } else { coeffs.cij[(i, j)] + coeffs.cij[(j, i)] };
            for (acc, h) in combo.iter_mut().zip(&hess[idx].comps) {
                *acc += w * h;
            }
            idx += 1;
        }
    }
    Ok(relative_gap(&kp, &combo))
}

/// `σ_3 / σ_1` of the matrix with the given columns (0 if fewer than three
/// singular values exist).
pub fn collinearity_ratio(cols: &[&KummerVector]) -> Result<f64> {
    let refs: Vec<&[C64]> = cols.iter().map(|k| k.comps.as_slice()).collect();
    let m = CMatrix::from_columns(&refs)?;
    let s = singular_values(&m);
    if s[0] < 1e-300 {
        return Err(Error::DegenerateSystem("all Kummer vectors vanish".into()));
    }
    Ok(s.get(2).map_or(0.0, |s3| s3 / s[0]))
}

/// Collinearity of `K((p+p1−p2−p3)/2)`, `K((p+p2−p3−p1)/2)`, `K((p+p3−p1−p2)/2)`.
pub fn trisecant_residual(pm: &PeriodMatrix, p: &CPoint, p1: &CPoint, p2: &CPoint, p3: &CPoint, tol: f64) -> Result<f64> {
    for x in [p, p1, p2, p3] {
        x.expect_dim(pm.genus())?;
    }
    let half = |a: &CPoint, b: &CPoint, c: &CPoint| (&(&(p + a) - b) - c).scale_real(0.5);
    let k1 = kummer_map(pm, &half(p1, p2, p3), tol)?;
    let k2 = kummer_map(pm, &half(p2, p3, p1), tol)?;
    let k3 = kummer_map(pm, &half(p3, p1, p2), tol)?;
    collinearity_ratio(&[&k1, &k2, &k3])
}

/// Linear dependence of `K((p+p1−2q)/2)`, `K((p−p1)/2)` and `∂_U K((p−p1)/2)`:
/// the limit of the trisecant triple as `p2, p3 → q` along the curve.
pub fn semidegenerate_residual(pm: &PeriodMatrix, p: &CPoint, p1: &CPoint, q: &CPoint, u: &CPoint, tol: f64) -> Result<f64> {
    for x in [p, p1, q, u] {
        x.expect_dim(pm.genus())?;
    }
    if u.norm() == 0.0 {
        return Err(Error::InvalidInput("direction U must be nonzero".into()));
    }
    let mid = (&(p + p1) - &q.scale_real(2.0)).scale_real(0.5);
    let half_diff = (p - p1).scale_real(0.5);
    let k1 = kummer_map(pm, &mid, tol)?;
    let k2 = kummer_map(pm, &half_diff, tol)?;
    let k3 = kummer_deriv(pm, &half_diff, u, tol)?;
    collinearity_ratio(&[&k1, &k2, &k3])
}

/// The trisecant triple rewritten in a basis adapted to `p2, p3 → q`:
/// columns `K(a1)`, `(K(a2) + K(a3))/2` and `(K(a2) − K(a3))/(2s)`, where
/// `a1, a2, a3` are the half-sums of [`trisecant_residual`].
///
/// The span is unchanged. For `p2, p3 = q ± sU + O(s²)` the columns tend to
/// those of [`semidegenerate_residual`], so this ratio converges to it while
/// the raw trisecant ratio collapses like `s`.
pub fn trisecant_limit_residual(
    pm: &PeriodMatrix,
    p: &CPoint,
    p1: &CPoint,
    p2: &CPoint,
    p3: &CPoint,
    s: f64,
    tol: f64,
) -> Result<f64> {
    for x in [p, p1, p2, p3] {
        x.expect_dim(pm.genus())?;
    }
    if !(s > 0.0) {
        return Err(Error::InvalidInput(format!("step s must be positive, got {s}")));
    }
    let half = |a: &CPoint, b: &CPoint, c: &CPoint| (&(&(p + a) - b) - c).scale_real(0.5);
    let k1 = kummer_map(pm, &half(p1, p2, p3), tol)?;
    let k2 = kummer_map(pm, &half(p2, p3, p1), tol)?;
    let k3 = kummer_map(pm, &half(p3, p1, p2), tol)?;
    let mean = KummerVector {
        g: k2.g,
        comps: k2.comps.iter().zip(&k3.comps).map(|(a, b)| (a + b) * 0.5).collect(),
        tail_bound: k2.tail_bound.max(k3.tail_bound),
    };
    let slope = KummerVector {
        g: k2.g,
        comps: k2.comps.iter().zip(&k3.comps).map(|(a, b)| (a - b) / (2.0 * s)).collect(),
        tail_bound: k2.tail_bound.max(k3.tail_bound) / s,
    };
    collinearity_ratio(&[&k1, &mean, &slope])
}

#[cfg(test)]
mod tests;
