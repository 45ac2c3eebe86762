//! Exploratory multistart search for small `Γ₀₀` residuals.
//!
//! For fixed `(P, U)` the best `c` and `bV` enter linearly:
//! `∂_U ∂_{bV} K(0) = Σ_j (bV)_j ∂_U ∂_j K(0)`, so they are fitted by least
//! squares against the columns `K(0), ∂_U ∂_1 K(0), …, ∂_U ∂_g K(0)`.
//! Nelder–Mead then only searches the `4g` real coordinates of `(P, U)`.
//!
//! Near the lattice `K(P) = K(0) + ½ ∂_P ∂_P K(0) + O(|P|⁴)`, which makes
//! every residual small without saying anything about the variety. Starts
//! and iterates with torus coordinates of `P` inside [`EXCLUSION_RADIUS`]
//! are therefore penalized. Nothing here certifies that no solution exists.

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sample::sample_direction;
use crate::error::{Error, Result};
use crate::kummer::{gamma00_residual, kummer_hessian, kummer_map, Gamma00Instance, KummerVector};
use crate::numeric::rng::SeededRng;
use crate::numeric::{lstsq, CMatrix, CPoint, C64};
use crate::theta::PeriodMatrix;

/// Points whose torus coordinates all lie within this of an integer are
/// excluded.
pub const EXCLUSION_RADIUS: f64 = 0.15;
/// Nelder–Mead iterations per start, per real parameter.
pub const ITERS_PER_PARAMETER: u64 = 25;
const INITIAL_STEP: f64 = 0.05;
/// Cost of excluded or degenerate parameters (residuals never exceed 1).
const PENALTY: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub pm: PeriodMatrix,
    pub best_residual: f64,
    pub best_instance: Gamma00Instance,
    /// Number of random starts.
    pub iterations: usize,
    pub seed: u64,
    /// Whether a supplied witness instance was among the candidates.
    pub witness_seeded: bool,
    /// Always true: a small or large residual here proves nothing.
    pub exploratory: bool,
}

struct Objective<'a> {
    pm: &'a PeriodMatrix,
    k0: KummerVector,
    /// Full symmetric Hessian of `K` at the origin, `hess[i][j]`.
    hess: Vec<Vec<KummerVector>>,
    tol: f64,
}

struct Fitted {
    residual: f64,
    p: CPoint,
    u: CPoint,
    v: CPoint,
    c: C64,
}

impl<'a> Objective<'a> {
    fn new(pm: &'a PeriodMatrix, tol: f64) -> Result<Self> {
        let g = pm.genus();
        let zero = CPoint::zeros(g);
        let k0 = kummer_map(pm, &zero, tol)?;
        let upper = kummer_hessian(pm, &zero, tol)?;
        let mut hess = vec![Vec::with_capacity(g); g];
        for (i, row) in hess.iter_mut().enumerate() {
            for j in 0..g {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                row.push(upper[a * g - a * (a + 1) / 2 + b].clone());
            }
        }
        Ok(Objective { pm, k0, hess, tol })
    }

    fn g(&self) -> usize {
        self.pm.genus()
    }

    /// `(x, y, Re U, Im U)` with `P = x + B y`.
    fn decode(&self, params: &[f64]) -> (CPoint, CPoint) {
        let g = self.g();
        let p = &CPoint::from_real(&params[..g]) + &self.pm.apply(&params[g..2 * g]);
        let u = CPoint::new((0..g).map(|i| C64::new(params[2 * g + i], params[3 * g + i])).collect());
        (p, u)
    }

    fn encode(&self, p: &CPoint, u: &CPoint) -> Result<Vec<f64>> {
        let g = self.g();
        let im = nalgebra::DVector::from_iterator(g, p.coords().iter().map(|x| x.im));
        let y_im = self.pm.matrix().map(|x| x.im);
        let y = y_im.lu().solve(&im).ok_or_else(|| Error::DegenerateSystem("Im B is singular".into()))?;
        let shift = self.pm.apply(y.as_slice());
        let mut out: Vec<f64> = (0..g).map(|i| p[i].re - shift[i].re).collect();
        out.extend(y.iter());
        out.extend(u.coords().iter().map(|x| x.re));
        out.extend(u.coords().iter().map(|x| x.im));
        Ok(out)
    }

    fn excluded(&self, params: &[f64]) -> bool {
        params[..2 * self.g()].iter().all(|x| (x - x.round()).abs() < EXCLUSION_RADIUS)
    }

    fn fit(&self, params: &[f64]) -> Result<Fitted> {
        let g = self.g();
        let (p, u) = self.decode(params);
        let kp = kummer_map(self.pm, &p, self.tol)?;
        let cols: Vec<Vec<C64>> = (0..g)
            .map(|j| {
                (0..self.k0.comps.len()).map(|e| (0..g).map(|i| u[i] * self.hess[i][j].comps[e]).sum()).collect()
            })
            .collect();
        let mut refs: Vec<&[C64]> = vec![&self.k0.comps];
        refs.extend(cols.iter().map(|c| c.as_slice()));
        let sol = lstsq(&CMatrix::from_columns(&refs)?, &kp.comps)?;
        Ok(Fitted { residual: sol.rel_residual, v: CPoint::new(sol.x[1..].to_vec()), c: sol.x[0], p, u })
    }

    fn cost_of(&self, params: &[f64]) -> f64 {
        if self.excluded(params) {
            return PENALTY;
        }
        match self.fit(params) {
            Ok(f) if f.residual.is_finite() => f.residual,
            _ => PENALTY,
        }
    }
}

struct Borrowed<'a>(&'a Objective<'a>);

impl CostFunction for Borrowed<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, params: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.0.cost_of(params))
    }
}

/// Independent stream for start `k`.
fn start_rng(seed: u64, k: usize) -> SeededRng {
    SeededRng::new(seed ^ (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_start(obj: &Objective, rng: &mut SeededRng) -> Vec<f64> {
    let g = obj.g();
    loop {
        let mut params: Vec<f64> = (0..2 * g).map(|_| 0.5 * rng.symmetric_unit()).collect();
        if obj.excluded(&params) {
            continue;
        }
        let u = sample_direction(g, rng);
        params.extend(u.coords().iter().map(|x| x.re));
        params.extend(u.coords().iter().map(|x| x.im));
        return params;
    }
}

fn local_search<'a>(obj: &'a Objective<'a>, start: Vec<f64>) -> Result<(f64, Vec<f64>)> {
    let n = start.len();
    let mut simplex = vec![start.clone()];
    for i in 0..n {
        let mut vertex = start.clone();
        vertex[i] += INITIAL_STEP;
        simplex.push(vertex);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-15)
        .map_err(|e| Error::InvalidInput(format!("Nelder-Mead setup: {e}")))?;
    let budget = ITERS_PER_PARAMETER * n as u64;
    let res = Executor::new(Borrowed(obj), solver)
        .configure(|state| state.max_iters(budget))
        .run()
        .map_err(|e| Error::InvalidInput(format!("Nelder-Mead: {e}")))?;
    let best = res.state.best_param.unwrap_or(start);
    Ok((obj.cost_of(&best), best))
}

pub fn scan_min_residual(pm: &PeriodMatrix, iters: usize, seed: u64, tol: f64) -> Result<ScanReport> {
    scan_min_residual_seeded(pm, iters, seed, tol, None)
}

/// As [`scan_min_residual`], with `witness` added as a candidate and as the
/// first start. The result then never exceeds the witness residual.
pub fn scan_min_residual_seeded(
    pm: &PeriodMatrix,
    iters: usize,
    seed: u64,
    tol: f64,
    witness: Option<&Gamma00Instance>,
) -> Result<ScanReport> {
    if iters == 0 {
        return Err(Error::InvalidInput("iters must be at least 1".into()));
    }
    if let Some(w) = witness {
        if w.pm != *pm {
            return Err(Error::InvalidInput("witness belongs to a different period matrix".into()));
        }
    }
    let obj = Objective::new(pm, tol)?;
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(iters + 1);
    if let Some(w) = witness {
        starts.push(obj.encode(&w.p, &w.u)?);
    }
    starts.extend((0..iters).map(|k| random_start(&obj, &mut start_rng(seed, k))));
    // results come back in start order, so ties resolve identically on every run
    let results: Vec<(f64, Vec<f64>)> = starts.into_par_iter().map(|s| local_search(&obj, s)).collect::<Result<_>>()?;

    let mut best: Option<(f64, Gamma00Instance)> = None;
    if let Some(w) = witness {
        best = Some((gamma00_residual(w, tol)?, w.clone()));
    }
    for (cost, params) in results {
        if cost >= PENALTY || best.as_ref().is_some_and(|(r, _)| cost >= *r) {
            continue;
        }
        let f = obj.fit(&params)?;
        let inst = Gamma00Instance::new(pm.clone(), f.p, f.u, f.v, f.c)?;
        let r = gamma00_residual(&inst, tol)?;
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, inst));
        }
    }
    let (best_residual, best_instance) =
        best.ok_or_else(|| Error::DegenerateSystem("every start ended in an excluded or degenerate region".into()))?;
    Ok(ScanReport {
        pm: pm.clone(),
        best_residual,
        best_instance,
        iterations: iters,
        seed,
        witness_seeded: witness.is_some(),
        exploratory: true,
    })
}
