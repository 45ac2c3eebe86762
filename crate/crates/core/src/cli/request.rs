//! Fully resolved command inputs and their evaluation. A [`Request`] carries
//! explicit values only, so executing it twice gives identical outputs.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::files::Tolerances;
use crate::divisor::{divisor_identity_residual, upsi_residual, DivisorPoint, FlowFrame};
use crate::error::Result;
use crate::kummer::{
    bilinear_residual, gamma00_fit, gamma00_residual, semidegenerate_residual, trisecant_residual, Gamma00Instance,
};
use crate::numeric::{CPoint, C64};
use crate::scenarios::{genus2_pipeline, scan_min_residual};
use crate::theta::{theta_char_eval, theta_eval, DerivSpec, PeriodMatrix, ThetaCharacteristic};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Request {
    Theta {
        pm: PeriodMatrix,
        z: CPoint,
        /// Present for a second-order function `Θ[ε]`.
        characteristic: Option<Vec<u8>>,
        deriv: Vec<CPoint>,
        tol: f64,
    },
    CheckBilinear {
        pm: PeriodMatrix,
        z: CPoint,
        #[serde(rename = "Z")]
        zz: CPoint,
        tol: f64,
        threshold: f64,
    },
    /// With `c` the fixed-coefficient residual; without it `c` and `b` are fitted.
    CheckGamma00 {
        pm: PeriodMatrix,
        #[serde(rename = "P")]
        p: CPoint,
        #[serde(rename = "U")]
        u: CPoint,
        #[serde(rename = "V")]
        v: CPoint,
        c: Option<C64>,
        tol: f64,
        threshold: f64,
    },
    CheckTrisecant {
        pm: PeriodMatrix,
        /// `p, p1, p2, p3`.
        points: Vec<CPoint>,
        tol: f64,
        threshold: f64,
    },
    CheckSemidegenerate {
        pm: PeriodMatrix,
        /// `p, p1, q`.
        points: Vec<CPoint>,
        #[serde(rename = "U")]
        u: CPoint,
        tol: f64,
        threshold: f64,
    },
    CheckDivisorIdentity {
        pm: PeriodMatrix,
        z: CPoint,
        #[serde(rename = "U")]
        u: CPoint,
        #[serde(rename = "P")]
        p: CPoint,
        tol: f64,
        threshold: f64,
    },
    CheckUpsi {
        pm: PeriodMatrix,
        #[serde(rename = "U")]
        u: CPoint,
        #[serde(rename = "V")]
        v: CPoint,
        #[serde(rename = "P")]
        p: CPoint,
        #[serde(rename = "Z")]
        zz: CPoint,
        c: C64,
        /// `(x, y, t)` evaluation points.
        points: Vec<[C64; 3]>,
        tol: f64,
        threshold: f64,
    },
    PipelineG2 {
        pm: PeriodMatrix,
        seed: u64,
        tol: f64,
        threshold: f64,
    },
    PipelineScan {
        pm: PeriodMatrix,
        seed: u64,
        iters: usize,
        tol: f64,
    },
}

fn status(residual: f64, threshold: f64) -> &'static str {
    if residual < threshold {
        "pass"
    } else {
        "fail"
    }
}

fn check(identity: &str, residual: f64, threshold: f64) -> Value {
    json!({ "identity": identity, "residual": residual, "status": status(residual, threshold) })
}

impl Request {
    /// Display name, e.g. `check gamma00`.
    pub fn name(&self) -> &'static str {
        match self {
            Request::Theta { .. } => "theta",
            Request::CheckBilinear { .. } => "check bilinear",
            Request::CheckGamma00 { .. } => "check gamma00",
            Request::CheckTrisecant { .. } => "check trisecant",
            Request::CheckSemidegenerate { .. } => "check semidegenerate",
            Request::CheckDivisorIdentity { .. } => "check divisor-identity",
            Request::CheckUpsi { .. } => "check upsi",
            Request::PipelineG2 { .. } => "pipeline g2",
            Request::PipelineScan { .. } => "pipeline scan",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Request::PipelineG2 { seed, .. } | Request::PipelineScan { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        match *self {
            Request::Theta { tol, .. } | Request::PipelineScan { tol, .. } => Tolerances { tol, threshold: None },
            Request::CheckBilinear { tol, threshold, .. }
            | Request::CheckGamma00 { tol, threshold, .. }
            | Request::CheckTrisecant { tol, threshold, .. }
            | Request::CheckSemidegenerate { tol, threshold, .. }
            | Request::CheckDivisorIdentity { tol, threshold, .. }
            | Request::CheckUpsi { tol, threshold, .. }
            | Request::PipelineG2 { tol, threshold, .. } => Tolerances { tol, threshold: Some(threshold) },
        }
    }

    pub fn execute(&self) -> Result<Value> {
        match self {
            Request::Theta { pm, z, characteristic, deriv, tol } => {
                let dirs: Vec<&CPoint> = deriv.iter().collect();
                let spec = DerivSpec::of(&dirs);
                let v = match characteristic {
                    Some(bits) => theta_char_eval(pm, &ThetaCharacteristic::new(bits.clone())?, z, &spec, *tol)?,
                    None => theta_eval(pm, z, &spec, *tol)?,
                };
                Ok(serde_json::to_value(v).expect("theta values serialize"))
            }
            Request::CheckBilinear { pm, z, zz, tol, threshold } => Ok(check(
                "theta(z+Z) theta(z-Z) = sum_eps Theta[eps](z) Theta[eps](Z)",
                bilinear_residual(pm, z, zz, *tol)?,
                *threshold,
            )),
            Request::CheckGamma00 { pm, p, u, v, c, tol, threshold } => {
                let identity = "K(P) = c K(0) + d_U d_V K(0)";
                match c {
                    Some(c) => {
                        let inst = Gamma00Instance::new(pm.clone(), p.clone(), u.clone(), v.clone(), *c)?;
                        Ok(check(identity, gamma00_residual(&inst, *tol)?, *threshold))
                    }
                    None => {
                        let fit = gamma00_fit(pm, p, u, v, *tol)?;
                        let mut out = check("K(P) = c K(0) + b d_U d_V K(0), c and b fitted", fit.rel_residual, *threshold);
                        out["fit"] = serde_json::to_value(fit).expect("fit serializes");
                        Ok(out)
                    }
                }
            }
            Request::CheckTrisecant { pm, points, tol, threshold } => {
                let [p, p1, p2, p3] = expect_points::<4>(points)?;
                Ok(check(
                    "K((p+p1-p2-p3)/2), K((p+p2-p3-p1)/2), K((p+p3-p1-p2)/2) collinear (sigma3/sigma1)",
                    trisecant_residual(pm, p, p1, p2, p3, *tol)?,
                    *threshold,
                ))
            }
            Request::CheckSemidegenerate { pm, points, u, tol, threshold } => {
                let [p, p1, q] = expect_points::<3>(points)?;
                Ok(check(
                    "K((p+p1-2q)/2), K((p-p1)/2), d_U K((p-p1)/2) collinear (sigma3/sigma1)",
                    semidegenerate_residual(pm, p, p1, q, u, *tol)?,
                    *threshold,
                ))
            }
            Request::CheckDivisorIdentity { pm, z, u, p, tol, threshold } => {
                let dp = DivisorPoint::evaluate(pm, z, *tol)?;
                let r = divisor_identity_residual(pm, &dp, u, p, *tol)?;
                let mut out = check(
                    "theta_UU(z) theta(z-P) theta(z+P) = theta_U(z) [theta_U(z-P) theta(z+P) + theta_U(z+P) theta(z-P)] on theta = 0",
                    r,
                    *threshold,
                );
                out["theta_abs"] = json!(dp.theta_abs);
                Ok(out)
            }
            Request::CheckUpsi { pm, u, v, p, zz, c, points, tol, threshold } => {
                let frame = FlowFrame::new(pm.clone(), u.clone(), v.clone(), p.clone(), zz.clone(), *c)?;
                let residuals =
                    points.iter().map(|[x, y, t]| upsi_residual(&frame, *x, *y, *t, *tol)).collect::<Result<Vec<f64>>>()?;
                let worst = residuals.iter().cloned().fold(0.0, f64::max);
                let mut out = check("(c + u) psi = psi(t+1)", worst, *threshold);
                out["residuals"] = json!(residuals);
                Ok(out)
            }
            Request::PipelineG2 { pm, seed, tol, threshold } => {
                let report = genus2_pipeline(pm, *seed, *tol)?;
                let worst = report.max_residual();
                Ok(json!({
                    "status": status(worst, *threshold),
                    "max_residual": worst,
                    "indecomposability": "heuristic: |B_12| above threshold only",
                    "report": report,
                }))
            }
            Request::PipelineScan { pm, seed, iters, tol } => {
                let report = scan_min_residual(pm, *iters, *seed, *tol)?;
                Ok(json!({
                    "status": "exploratory",
                    "note": "local search only; no residual value here certifies absence of solutions",
                    "report": report,
                }))
            }
        }
    }
}

fn expect_points<const N: usize>(points: &[CPoint]) -> Result<[&CPoint; N]> {
    let refs: Vec<&CPoint> = points.iter().collect();
    refs.try_into()
        .map_err(|_| crate::error::Error::InvalidInput(format!("expected {N} points, got {}", points.len())))
}
