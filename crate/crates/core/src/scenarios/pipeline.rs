//! The genus-2 verification pipeline.
//!
//! Every indecomposable genus-2 ppav is a Jacobian and its theta divisor is a
//! translate of the Abel–Jacobi curve, so divisor points and divisor tangents
//! stand in for curve points and curve tangents. The indecomposability check
//! is a heuristic on `|B_12|` only.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::sample::{sample_direction, sample_point};
use crate::divisor::{
    divisor_identity_residual, find_divisor_point, tangent_direction, taylor_quad, upsi_residual, DivisorPoint, FlowFrame,
};
use crate::error::{Error, Result};
use crate::kummer::{
    gamma00_fit, gamma00_residual, semidegenerate_residual, trisecant_limit_residual, trisecant_residual, FitCoefficients,
    Gamma00Instance,
};
use crate::numeric::rng::SeededRng;
use crate::numeric::{CPoint, C64};
use crate::theta::{reduce_to_fundamental, PeriodMatrix};

/// `|B_12|` at or below this is treated as a product of elliptic curves.
pub const INDECOMPOSABILITY_THRESHOLD: f64 = 1e-3;
/// Newton restarts allowed per divisor point.
pub const MAX_POINT_RESAMPLES: usize = 50;
pub const UPSI_SAMPLES: usize = 20;
pub const DIVISOR_SAMPLES: usize = 10;
/// Steps `s` of the path `p2, p3 = q ± sV` (projected onto the divisor).
pub const DEGENERATION_STEPS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

/// Keys of [`PipelineReport::residuals`].
pub const RESIDUAL_NAMES: [&str; 6] = ["gamma00", "upsi", "thetaidentity", "trisecant", "semidegenerate", "taylor_abAB"];

/// The trisecant triple along `p2, p3 → q` against its semidegenerate limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Degeneration {
    /// `(s, trisecant_limit_residual)` for each step.
    pub steps: Vec<(f64, f64)>,
    /// Richardson extrapolation to `s = 0` from the last two steps (error `O(s²)`).
    pub extrapolated: f64,
    pub semidegenerate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub pm: PeriodMatrix,
    pub seed: u64,
    pub tol: f64,
    pub z1: DivisorPoint,
    pub z2: DivisorPoint,
    #[serde(rename = "U")]
    pub u: CPoint,
    #[serde(rename = "V")]
    pub v: CPoint,
    #[serde(rename = "P")]
    pub p: CPoint,
    pub fit: FitCoefficients,
    /// Largest value of each residual over its sample points.
    pub residuals: BTreeMap<String, f64>,
    /// `(P, bU, V, c)`: the fitted solution with `b` absorbed into `U`.
    pub witness: Gamma00Instance,
    pub degeneration: Degeneration,
    /// Fresh divisor points used for the on-divisor residuals.
    pub divisor_points: Vec<DivisorPoint>,
}

impl PipelineReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().cloned().fold(0.0, f64::max)
    }
}

fn check_indecomposable(pm: &PeriodMatrix) -> Result<()> {
    if pm.genus() != 2 {
        return Err(Error::InvalidInput(format!("the pipeline needs genus 2, got {}", pm.genus())));
    }
    let offdiag = pm.matrix()[(0, 1)].norm();
    if offdiag <= INDECOMPOSABILITY_THRESHOLD {
        return Err(Error::IndecomposabilityCheckFailed { offdiag });
    }
    Ok(())
}

/// A smooth divisor point from a random Newton start, translated into the
/// fundamental domain. Gives up after [`MAX_POINT_RESAMPLES`] failed starts.
pub fn sample_divisor_point(pm: &PeriodMatrix, rng: &mut SeededRng, tol: f64) -> Result<DivisorPoint> {
    let g = pm.genus();
    let mut last = Error::SingularPoint { grad_norm: 0.0 };
    for _ in 0..MAX_POINT_RESAMPLES {
        let z0 = sample_point(pm, rng);
        let dir = sample_direction(g, rng);
        match find_divisor_point(pm, &z0, &dir, tol) {
            Ok(dp) => {
                let z = reduce_to_fundamental(pm, &dp.z)?;
                let dp = DivisorPoint::evaluate(pm, &z, tol)?;
                if dp.grad_norm() > crate::divisor::SMOOTHNESS_THRESHOLD {
                    return Ok(dp);
                }
                last = Error::SingularPoint { grad_norm: dp.grad_norm() };
            }
            Err(e @ (Error::SingularPoint { .. } | Error::NoConvergence { .. } | Error::DerivativeVanished(_))) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

fn is_lattice_point(pm: &PeriodMatrix, p: &CPoint) -> Result<bool> {
    Ok(reduce_to_fundamental(pm, p)?.norm() < 1e-10)
}

pub fn genus2_pipeline(pm: &PeriodMatrix, seed: u64, tol: f64) -> Result<PipelineReport> {
    check_indecomposable(pm)?;
    let mut rng = SeededRng::new(seed);
    let z1 = sample_divisor_point(pm, &mut rng, tol)?;
    let mut z2 = sample_divisor_point(pm, &mut rng, tol)?;
    let mut tries = 1;
    while is_lattice_point(pm, &(&z1.z - &z2.z))? {
        if tries == MAX_POINT_RESAMPLES {
            return Err(Error::InvalidInput("could not find two distinct divisor points".into()));
        }
        z2 = sample_divisor_point(pm, &mut rng, tol)?;
        tries += 1;
    }
    run(pm, z1, z2, &mut rng, seed, tol)
}

/// The pipeline from given divisor points; the remaining randomness comes
/// from `seed`.
pub fn genus2_pipeline_with_points(pm: &PeriodMatrix, z1: &CPoint, z2: &CPoint, seed: u64, tol: f64) -> Result<PipelineReport> {
    check_indecomposable(pm)?;
    z1.expect_dim(2)?;
    z2.expect_dim(2)?;
    if is_lattice_point(pm, &(z1 - z2))? {
        return Err(Error::InvalidInput("P = z1 - z2 lies in the lattice (P = 0 on the torus)".into()));
    }
    let z1 = DivisorPoint::evaluate(pm, z1, tol)?;
    let z2 = DivisorPoint::evaluate(pm, z2, tol)?;
    run(pm, z1, z2, &mut SeededRng::new(seed), seed, tol)
}

/// Draws until `f` succeeds, skipping poles and tangencies.
fn retry<T>(rng: &mut SeededRng, mut f: impl FnMut(&mut SeededRng) -> Result<T>) -> Result<T> {
    let mut last = None;
    for _ in 0..MAX_POINT_RESAMPLES {
        match f(rng) {
            Ok(v) => return Ok(v),
            Err(e @ (Error::PoleAtArgument(_) | Error::DerivativeVanished(_))) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

fn run(pm: &PeriodMatrix, z1: DivisorPoint, z2: DivisorPoint, rng: &mut SeededRng, seed: u64, tol: f64) -> Result<PipelineReport> {
    let u = tangent_direction(pm, &z1)?;
    let v = tangent_direction(pm, &z2)?;
    let p = &z1.z - &z2.z;
    let fit = gamma00_fit(pm, &p, &u, &v, tol)?;
    let witness = Gamma00Instance::new(pm.clone(), p.clone(), u.scale(fit.b), v.clone(), fit.c)?;

    let mut residuals = BTreeMap::new();
    residuals.insert("gamma00".to_string(), gamma00_residual(&witness, tol)?);

    let mut upsi: f64 = 0.0;
    let z = sample_point(pm, rng);
    let frame = FlowFrame::new(pm.clone(), witness.u.clone(), v.clone(), p.clone(), z, fit.c)?;
    // keep each flow displacement within about half a period
    let reach = |d: &CPoint| 0.5 / d.norm().max(1.0);
    let (rx, ry, rt) = (reach(&witness.u), reach(&v), reach(&p));
    for _ in 0..UPSI_SAMPLES {
        let r = retry(rng, |rng| {
            let (x, y, t) = (rng.complex_in(rx), rng.complex_in(ry), rng.complex_in(rt));
            upsi_residual(&frame, x, y, t, tol)
        })?;
        upsi = upsi.max(r);
    }
    residuals.insert("upsi".to_string(), upsi);

    let (mut ident, mut taylor): (f64, f64) = (0.0, 0.0);
    let mut fresh = Vec::with_capacity(DIVISOR_SAMPLES);
    while fresh.len() < DIVISOR_SAMPLES {
        let (dp, id, tq) = retry(rng, |rng| {
            let dp = sample_divisor_point(pm, rng, tol)?;
            let id = divisor_identity_residual(pm, &dp, &witness.u, &p, tol)?;
            let frame = FlowFrame::new(pm.clone(), witness.u.clone(), v.clone(), p.clone(), dp.z.clone(), fit.c)?;
            let tq = taylor_quad(&frame, &dp, tol)?;
            Ok((dp, id, tq.relation_residual()))
        })?;
        ident = ident.max(id);
        taylor = taylor.max(tq);
        fresh.push(dp);
    }
    residuals.insert("thetaidentity".to_string(), ident);
    residuals.insert("taylor_abAB".to_string(), taylor);

    let [a, b, c, d] = [&fresh[0].z, &fresh[1].z, &fresh[2].z, &fresh[3].z];
    residuals.insert("trisecant".to_string(), trisecant_residual(pm, a, b, c, d, tol)?);
    let semi = semidegenerate_residual(pm, a, b, &z2.z, &v, tol)?;
    residuals.insert("semidegenerate".to_string(), semi);
    let degeneration = degenerate(pm, a, b, &z2, &v, semi, tol)?;

    Ok(PipelineReport {
        pm: pm.clone(),
        seed,
        tol,
        z1,
        z2,
        u,
        v,
        p,
        fit,
        residuals,
        witness,
        degeneration,
        divisor_points: fresh,
    })
}

/// `p2, p3` are `q ± sT` pushed back onto the divisor along the conjugate
/// gradient, so they are curve points with `p2 − p3 = 2sT + O(s³)`.
fn degenerate(pm: &PeriodMatrix, p: &CPoint, p1: &CPoint, q: &DivisorPoint, t: &CPoint, semi: f64, tol: f64) -> Result<Degeneration> {
    let normal = CPoint::new(q.grad.coords().iter().map(|x| x.conj()).collect()).scale_real(1.0 / q.grad_norm());
    let mut steps = Vec::with_capacity(DEGENERATION_STEPS.len());
    for &s in &DEGENERATION_STEPS {
        let sc = C64::new(s, 0.0);
        let p2 = find_divisor_point(pm, &q.z.axpy(sc, t), &normal, tol)?;
        let p3 = find_divisor_point(pm, &q.z.axpy(-sc, t), &normal, tol)?;
        steps.push((s, trisecant_limit_residual(pm, p, p1, &p2.z, &p3.z, s, tol)?));
    }
    let n = steps.len();
    let (s0, r0) = steps[n - 2];
    let (s1, r1) = steps[n - 1];
    let q2 = (s0 / s1).powi(2);
    let extrapolated = ((q2 * r1 - r0) / (q2 - 1.0)).max(0.0);
    Ok(Degeneration { steps, extrapolated, semidegenerate: semi })
}
