//! Points on the theta divisor `{θ = 0}`, the flowed theta function
//! `τ(x,y,t) = θ(Ux + Vy + Pt + Z)` with `u = 2∂_x∂_y ln τ` and
//! `ψ = τ(t)/τ(t−1)`, and the residuals of the difference-differential
//! equation and the on-divisor identity derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{newton_scalar, CPoint, C64, DEFAULT_MAX_ITER};
use crate::theta::{theta_jet, PeriodMatrix};

/// Gradient norms at or below this mark a singular point of the divisor.
pub const SMOOTHNESS_THRESHOLD: f64 = 1e-8;
/// A theta value below this fraction of its term scale counts as zero.
const VANISHING_RATIO: f64 = 1e-12;

fn eval_tol(tol: f64) -> f64 {
    (tol * 1e-3).max(1e-16)
}

/// A point of `C^g` with `|θ|` and the gradient of `θ` recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorPoint {
    pub z: CPoint,
    pub theta_abs: f64,
    pub grad: CPoint,
}

impl DivisorPoint {
    /// Records `|θ(z)|` and `∇θ(z)` without requiring `z` to lie on the divisor.
    pub fn evaluate(pm: &PeriodMatrix, z: &CPoint, tol: f64) -> Result<Self> {
        let g = pm.genus();
        z.expect_dim(g)?;
        let mut grad = Vec::with_capacity(g);
        let mut theta_abs = 0.0;
        for i in 0..g {
            let jet = theta_jet(pm, z, &[CPoint::basis(g, i)], tol)?;
            theta_abs = jet.value().norm();
            grad.push(jet.get(1).value);
        }
        Ok(DivisorPoint { z: z.clone(), theta_abs, grad: CPoint::new(grad) })
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad.norm()
    }
}

/// Newton search for `θ(z0 + s·dir) = 0` along the complex line through `z0`.
pub fn find_divisor_point(pm: &PeriodMatrix, z0: &CPoint, dir: &CPoint, tol: f64) -> Result<DivisorPoint> {
    let g = pm.genus();
    z0.expect_dim(g)?;
    dir.expect_dim(g)?;
    if dir.norm() == 0.0 {
        return Err(Error::InvalidInput("search direction must be nonzero".into()));
    }
    let etol = eval_tol(tol);
    let s = newton_scalar(
        |s| {
            // an iterate thrown far off the fundamental domain is a failed start
            let jet = theta_jet(pm, &z0.axpy(s, dir), std::slice::from_ref(dir), etol).map_err(|e| match e {
                Error::NonFinite(_) => Error::NoConvergence { iterations: 0, residual: f64::INFINITY },
                e => e,
            })?;
            Ok((jet.value(), jet.get(1).value))
        },
        C64::new(0.0, 0.0),
        tol,
        DEFAULT_MAX_ITER,
    )?;
    let dp = DivisorPoint::evaluate(pm, &z0.axpy(s, dir), etol)?;
    if dp.grad_norm() <= SMOOTHNESS_THRESHOLD {
        return Err(Error::SingularPoint { grad_norm: dp.grad_norm() });
    }
    Ok(dp)
}

/// Unit tangent of a genus-2 divisor at a smooth point: the kernel
/// `(−∂_2θ, ∂_1θ)` of the bilinear pairing with the gradient.
pub fn tangent_direction(pm: &PeriodMatrix, dp: &DivisorPoint) -> Result<CPoint> {
    if pm.genus() != 2 {
        return Err(Error::InvalidInput(format!("tangent_direction needs genus 2, got {}", pm.genus())));
    }
    dp.grad.expect_dim(2)?;
    let n = dp.grad_norm();
    if n <= SMOOTHNESS_THRESHOLD {
        return Err(Error::SingularPoint { grad_norm: n });
    }
    Ok(CPoint::new(vec![-dp.grad[1] / n, dp.grad[0] / n]))
}

/// Data of `τ(x,y,t) = θ(Ux + Vy + Pt + Z)` and the difference operator
/// `c + u − T`.
#[derive(Debug, Clone)]
pub struct FlowFrame {
    pub pm: PeriodMatrix,
    pub u: CPoint,
    pub v: CPoint,
    pub p: CPoint,
    pub z: CPoint,
    pub c: C64,
}

impl FlowFrame {
    pub fn new(pm: PeriodMatrix, u: CPoint, v: CPoint, p: CPoint, z: CPoint, c: C64) -> Result<Self> {
        let g = pm.genus();
        for x in [&u, &v, &p, &z] {
            x.expect_dim(g)?;
        }
        if u.norm() == 0.0 || v.norm() == 0.0 {
            return Err(Error::InvalidInput("directions U and V must be nonzero".into()));
        }
        Ok(FlowFrame { pm, u, v, p, z, c })
    }

    /// `Ux + Vy + Pt + Z`.
    pub fn point(&self, x: C64, y: C64, t: C64) -> CPoint {
        self.z.axpy(x, &self.u).axpy(y, &self.v).axpy(t, &self.p)
    }

    /// Same frame with the roles of `U` and `V` exchanged.
    pub fn swapped(&self) -> FlowFrame {
        FlowFrame { u: self.v.clone(), v: self.u.clone(), ..self.clone() }
    }
}

/// `τ`, `u` and `ψ` at one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauUPsi {
    pub tau: C64,
    pub u: C64,
    pub psi: C64,
}

struct FlowJet {
    tau: C64,
    tau_x: C64,
    tau_y: C64,
    tau_xy: C64,
    scale: f64,
}

fn flow_jet(frame: &FlowFrame, x: C64, y: C64, t: C64, tol: f64) -> Result<FlowJet> {
    let jet = theta_jet(&frame.pm, &frame.point(x, y, t), &[frame.u.clone(), frame.v.clone()], tol)?;
    Ok(FlowJet {
        tau: jet.get(0).value,
        tau_x: jet.get(1).value,
        tau_y: jet.get(2).value,
        tau_xy: jet.get(3).value,
        scale: jet.get(0).scale,
    })
}

fn flow_value(frame: &FlowFrame, x: C64, y: C64, t: C64, tol: f64) -> Result<(C64, f64)> {
    let v = theta_jet(&frame.pm, &frame.point(x, y, t), &[], tol)?.get(0);
    Ok((v.value, v.scale))
}

fn nonvanishing(value: C64, scale: f64, what: &str) -> Result<C64> {
    if value.norm() < VANISHING_RATIO * scale.max(1e-300) {
        return Err(Error::PoleAtArgument(format!("{what} vanishes (|{what}| = {:e})", value.norm())));
    }
    Ok(value)
}

/// `u = 2(τ τ_xy − τ_x τ_y) / τ²`, free of logarithm branches.
fn log_mixed(j: &FlowJet) -> Result<C64> {
    let tau = nonvanishing(j.tau, j.scale, "tau(x,y,t)")?;
    Ok(2.0 * (tau * j.tau_xy - j.tau_x * j.tau_y) / (tau * tau))
}

pub fn tau_u_psi(frame: &FlowFrame, x: C64, y: C64, t: C64, tol: f64) -> Result<TauUPsi> {
    let here = flow_jet(frame, x, y, t, tol)?;
    let u = log_mixed(&here)?;
    let (prev, prev_scale) = flow_value(frame, x, y, t - 1.0, tol)?;
    let prev = nonvanishing(prev, prev_scale, "tau(x,y,t-1)")?;
    Ok(TauUPsi { tau: here.tau, u, psi: here.tau / prev })
}

/// `|(c + u)ψ − ψ(t+1)| / (|cψ| + |uψ| + |ψ(t+1)|)`.
pub fn upsi_residual(frame: &FlowFrame, x: C64, y: C64, t: C64, tol: f64) -> Result<f64> {
    let cur = tau_u_psi(frame, x, y, t, tol)?;
    let (next, _) = flow_value(frame, x, y, t + 1.0, tol)?;
    let shifted = next / cur.tau;
    let lhs = (frame.c + cur.u) * cur.psi;
    let den = (frame.c * cur.psi).norm() + (cur.u * cur.psi).norm() + shifted.norm() + 1e-300;
    Ok((lhs - shifted).norm() / den)
}

/// Both sides of `(c + u − T)ψ · τ(t)τ(t−1) = cτ(t)² + 2(ττ_xy − τ_xτ_y)(t) − τ(t+1)τ(t−1)`.
///
/// Returns `(left, right)`: the left side is assembled from `u` and `ψ`, the
/// right side from raw theta values and derivatives.
pub fn upsi_cleared(frame: &FlowFrame, x: C64, y: C64, t: C64, tol: f64) -> Result<(C64, C64)> {
    let cur = tau_u_psi(frame, x, y, t, tol)?;
    let (next, _) = flow_value(frame, x, y, t + 1.0, tol)?;
    let (prev, _) = flow_value(frame, x, y, t - 1.0, tol)?;
    let operator = (frame.c + cur.u) * cur.psi - next / cur.tau;
    let left = operator * cur.tau * prev;
    let j = flow_jet(frame, x, y, t, tol)?;
    let right = frame.c * j.tau * j.tau + 2.0 * (j.tau * j.tau_xy - j.tau_x * j.tau_y) - next * prev;
    Ok((left, right))
}

struct DirectionalValues {
    value: C64,
    first: C64,
    second: C64,
    scale: f64,
}

fn directional(pm: &PeriodMatrix, z: &CPoint, u: &CPoint, tol: f64) -> Result<DirectionalValues> {
    let jet = theta_jet(pm, z, &[u.clone(), u.clone()], tol)?;
    Ok(DirectionalValues {
        value: jet.get(0).value,
        first: jet.get(1).value,
        second: jet.get(3).value,
        scale: jet.get(0).scale,
    })
}

/// Residual of `θ_UU(z)θ(z−P)θ(z+P) = θ_U(z)θ_U(z−P)θ(z+P) + θ_U(z)θ_U(z+P)θ(z−P)`.
///
/// Normalized by `|LHS| + |RHS| + max(|LHS|, |first term|, |second term|)`.
pub fn divisor_identity_residual(pm: &PeriodMatrix, dp: &DivisorPoint, u: &CPoint, p: &CPoint, tol: f64) -> Result<f64> {
    let g = pm.genus();
    for x in [&dp.z, u, p] {
        x.expect_dim(g)?;
    }
    let at = directional(pm, &dp.z, u, tol)?;
    let minus = directional(pm, &(&dp.z - p), u, tol)?;
    let plus = directional(pm, &(&dp.z + p), u, tol)?;
    nonvanishing(minus.value, minus.scale, "theta(z-P)")?;
    nonvanishing(plus.value, plus.scale, "theta(z+P)")?;
    let lhs = at.second * minus.value * plus.value;
    let t1 = at.first * minus.first * plus.value;
    let t2 = at.first * plus.first * minus.value;
    let rhs = t1 + t2;
    let max_term = lhs.norm().max(t1.norm()).max(t2.norm());
    let den = lhs.norm() + rhs.norm() + max_term;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok((lhs - rhs).norm() / den)
}

/// Leading coefficients of `ψ` and `Tψ` at a divisor crossing in `x`:
/// `ψ = a s + (b/2) s² + …`, `Tψ = A/s + B/2 + …` with `s = x − η`.
/// (`b` and `B` are second derivatives, so the halves appear in both
/// expansions alike.)
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorQuad {
    pub a: C64,
    pub b: C64,
    #[serde(rename = "A")]
    pub big_a: C64,
    #[serde(rename = "B")]
    pub big_b: C64,
    /// `A / (2a)`.
    pub eta_y: C64,
}

impl TaylorQuad {
    /// `|Ab − aB| / (|Ab| + |aB|)`.
    pub fn relation_residual(&self) -> f64 {
        let ab = self.big_a * self.b;
        let ba = self.a * self.big_b;
        let den = ab.norm() + ba.norm();
        if den == 0.0 {
            0.0
        } else {
            (ab - ba).norm() / den
        }
    }

    /// `B / (2b)`, the second estimate of `η_y`.
    pub fn eta_y_from_second_order(&self) -> C64 {
        self.big_b / (2.0 * self.b)
    }
}

/// Closed-form `a, b, A, B` at the divisor point `dp` in the direction `frame.u`
/// with shift `frame.p`.
pub fn taylor_quad(frame: &FlowFrame, dp: &DivisorPoint, tol: f64) -> Result<TaylorQuad> {
    let pm = &frame.pm;
    let at = directional(pm, &dp.z, &frame.u, tol)?;
    if at.first.norm() < VANISHING_RATIO * at.scale.max(1e-300) {
        return Err(Error::DerivativeVanished("theta_U(z) vanishes: U is tangent to the divisor".into()));
    }
    let minus = directional(pm, &(&dp.z - &frame.p), &frame.u, tol)?;
    let plus = directional(pm, &(&dp.z + &frame.p), &frame.u, tol)?;
    let tm = nonvanishing(minus.value, minus.scale, "theta(z-P)")?;
    let tp = nonvanishing(plus.value, plus.scale, "theta(z+P)")?;
    let a = at.first / tm;
    let b = at.second / tm - 2.0 * minus.first * at.first / (tm * tm);
    let big_a = tp / at.first;
    let second_inv = at.second / tp - 2.0 * plus.first * at.first / (tp * tp);
    let big_b = -big_a * big_a * second_inv;
    Ok(TaylorQuad { a, b, big_a, big_b, eta_y: big_a / (2.0 * a) })
}
