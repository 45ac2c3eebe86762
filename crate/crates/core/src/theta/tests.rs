use std::f64::consts::PI;

use super::*;
use crate::numeric::rng::SeededRng;
use crate::numeric::I;
use crate::scenarios::{sample_direction, sample_point, sample_siegel};

const TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn g1_i() -> PeriodMatrix {
    PeriodMatrix::new(DMatrix::from_element(1, 1, c(0.0, 1.0))).unwrap()
}

/// Direct summation of the defining series over the box `|n_k| <= half`,
/// with no argument reduction. Each derivative direction contributes the
/// factor `2πi (U, n)`.
fn brute_theta(pm: &PeriodMatrix, z: &CPoint, dirs: &[CPoint], half: i64) -> C64 {
    let g = pm.genus();
    let b = pm.matrix();
    let mut total = c(0.0, 0.0);
    let count = (2 * half + 1).pow(g as u32);
    for idx in 0..count {
        let mut rem = idx;
        let n: Vec<f64> = (0..g)
            .map(|_| {
                let v = rem % (2 * half + 1) - half;
                rem /= 2 * half + 1;
                v as f64
            })
            .collect();
        let mut e = c(0.0, 0.0);
        for i in 0..g {
            e += 2.0 * PI * I * z[i] * n[i];
            for j in 0..g {
                e += PI * I * b[(i, j)] * n[i] * n[j];
            }
        }
        let mut term = e.exp();
        for d in dirs {
            let pair: C64 = (0..g).map(|i| d[i] * n[i]).sum();
            term *= 2.0 * PI * I * pair;
        }
        total += term;
    }
    total
}

fn brute_second_order(pm: &PeriodMatrix, eps: &ThetaCharacteristic, z: &CPoint, half: i64) -> C64 {
    let g = pm.genus();
    let b = pm.matrix();
    let e: Vec<f64> = eps.bits().iter().map(|&x| x as f64).collect();
    let mut total = c(0.0, 0.0);
    let count = (2 * half + 1).pow(g as u32);
    for idx in 0..count {
        let mut rem = idx;
        let n: Vec<f64> = (0..g)
            .map(|_| {
                let v = rem % (2 * half + 1) - half;
                rem /= 2 * half + 1;
                v as f64
            })
            .collect();
        let two_n_eps: Vec<f64> = (0..g).map(|i| 2.0 * n[i] + e[i]).collect();
        let half_shifted: Vec<f64> = (0..g).map(|i| n[i] + e[i] / 2.0).collect();
        let mut ex = c(0.0, 0.0);
        for i in 0..g {
            ex += 2.0 * PI * I * two_n_eps[i] * z[i];
            for j in 0..g {
                ex += PI * I * two_n_eps[i] * b[(i, j)] * half_shifted[j];
            }
        }
        total += ex.exp();
    }
    total
}

#[test]
fn genus_one_value_matches_direct_sum() {
    let oracle: f64 = (-50i64..=50).map(|n| (-PI * (n * n) as f64).exp()).sum();
    let v = theta_eval(&g1_i(), &CPoint::zeros(1), &DerivSpec::none(), TOL).unwrap();
    assert!((v.value - oracle).norm() < 1e-12);
    assert!((v.value.re - 1.086_434_811_213_308).abs() < 1e-12);
    assert!(v.tail_bound <= TOL);
}

#[test]
fn genus_one_second_order_matches_direct_sum() {
    let oracle: f64 = (-50i64..=50).map(|n| (-2.0 * PI * (n * n) as f64).exp()).sum();
    let eps = ThetaCharacteristic::new(vec![0]).unwrap();
    let v = theta_char_eval(&g1_i(), &eps, &CPoint::zeros(1), &DerivSpec::none(), TOL).unwrap();
    assert!((v.value - oracle).norm() < 1e-12);
}

#[test]
fn agrees_with_box_summation() {
    let mut rng = SeededRng::new(17);
    for g in 1..=3 {
        for seed in 0..5 {
            let pm = sample_siegel(g, 100 + seed, 0.3).unwrap();
            let z = sample_point(&pm, &mut rng);
            let u = sample_direction(g, &mut rng);
            let half = if g == 3 { 7 } else { 10 };
            let want = brute_theta(&pm, &z, &[], half);
            let got = theta_eval(&pm, &z, &DerivSpec::none(), TOL).unwrap();
            assert!((got.value - want).norm() < 1e-11, "g={g}: {} vs {}", got.value, want);
            let want_d = brute_theta(&pm, &z, &[u.clone(), u.clone()], half);
            let got_d = theta_eval(&pm, &z, &DerivSpec::of(&[&u, &u]), TOL).unwrap();
            assert!((got_d.value - want_d).norm() < 1e-9 * (1.0 + want_d.norm()));
            for eps in ThetaCharacteristic::all(g) {
                let want = brute_second_order(&pm, &eps, &z, half);
                let got = theta_char_eval(&pm, &eps, &z, &DerivSpec::none(), TOL).unwrap();
                assert!((got.value - want).norm() < 1e-11, "eps={eps:?}");
            }
        }
    }
}

#[test]
fn far_arguments_use_quasi_periodicity() {
    // argument several lattice periods away from the fundamental domain
    let pm = sample_siegel(2, 3, 0.3).unwrap();
    let mut rng = SeededRng::new(2);
    let z0 = sample_point(&pm, &mut rng);
    let m = [2.0, -1.0];
    let bm = pm.apply(&m);
    let z = &(&z0 + &bm) + &CPoint::from_real(&[3.0, -2.0]);
    let shifted = theta_eval(&pm, &z, &DerivSpec::none(), TOL).unwrap();
    let base = theta_eval(&pm, &z0, &DerivSpec::none(), TOL).unwrap();
    let mbm: C64 = (0..2).map(|i| bm[i] * m[i]).sum();
    let mz: C64 = (0..2).map(|i| z0[i] * m[i]).sum();
    let factor = (-PI * I * mbm - 2.0 * PI * I * mz).exp();
    let want = factor * base.value;
    assert!((shifted.value - want).norm() <= 1e-10 * (1.0 + factor.norm()));
    // and the reduction-free oracle agrees
    let direct = brute_theta(&pm, &z, &[], 12);
    assert!((shifted.value - direct).norm() <= 1e-9 * (1.0 + direct.norm()));
}

#[test]
fn first_derivative_vanishes_at_origin() {
    let mut rng = SeededRng::new(4);
    for g in 1..=3 {
        let pm = sample_siegel(g, g as u64, 0.3).unwrap();
        let u = sample_direction(g, &mut rng);
        let v = theta_eval(&pm, &CPoint::zeros(g), &DerivSpec::of(&[&u]), TOL).unwrap();
        assert!(v.value.norm() <= v.tail_bound + 1e-13, "{}", v.value);
        let v3 = theta_eval(&pm, &CPoint::zeros(g), &DerivSpec::of(&[&u, &u, &u]), TOL).unwrap();
        assert!(v3.value.norm() <= v3.tail_bound + 1e-10);
    }
}

#[test]
fn even_in_z() {
    let mut rng = SeededRng::new(5);
    for i in 0..200u64 {
        let g = 1 + (i % 3) as usize;
        let pm = sample_siegel(g, 1000 + i, 0.3).unwrap();
        let z = sample_point(&pm, &mut rng);
        let a = theta_eval(&pm, &z, &DerivSpec::none(), TOL).unwrap();
        let b = theta_eval(&pm, &-&z, &DerivSpec::none(), TOL).unwrap();
        // rounding of an O(scale) sum accompanies the truncation bound
        assert!((a.value - b.value).norm() <= 2.0 * a.tail_bound.max(b.tail_bound) + 1e-14 * a.scale.max(1.0));
    }
}

#[test]
fn integer_periodic() {
    let mut rng = SeededRng::new(6);
    for i in 0..60u64 {
        let g = 1 + (i % 3) as usize;
        let pm = sample_siegel(g, 2000 + i, 0.3).unwrap();
        let z = sample_point(&pm, &mut rng);
        let k: Vec<f64> = (0..g).map(|_| rng.int_in(-3, 3) as f64).collect();
        let a = theta_eval(&pm, &z, &DerivSpec::none(), TOL).unwrap();
        let b = theta_eval(&pm, &(&z + &CPoint::from_real(&k)), &DerivSpec::none(), TOL).unwrap();
        assert!((a.value - b.value).norm() <= 2.0 * a.tail_bound.max(b.tail_bound) + 1e-14 * a.scale.max(1.0));
    }
}

#[test]
fn quasi_periodic_in_b_direction() {
    let mut rng = SeededRng::new(7);
    for i in 0..40u64 {
        let g = 1 + (i % 3) as usize;
        let pm = sample_siegel(g, 3000 + i, 0.3).unwrap();
        let z = sample_point(&pm, &mut rng);
        let m: Vec<f64> = (0..g).map(|_| rng.int_in(-2, 2) as f64).collect();
        let bm = pm.apply(&m);
        let mbm: C64 = (0..g).map(|k| bm[k] * m[k]).sum();
        let mz: C64 = (0..g).map(|k| z[k] * m[k]).sum();
        let factor = (-PI * I * mbm - 2.0 * PI * I * mz).exp();
        let a = theta_eval(&pm, &(&z + &bm), &DerivSpec::none(), TOL).unwrap();
        let b = theta_eval(&pm, &z, &DerivSpec::none(), TOL).unwrap();
        let bound = (a.tail_bound + b.tail_bound + 1e-13) * (1.0 + factor.norm());
        assert!((a.value - factor * b.value).norm() <= bound);
    }
}

fn central_difference<F: Fn(&CPoint) -> C64>(f: F, z: &CPoint, u: &CPoint, h: f64) -> C64 {
    (f(&z.axpy(c(h, 0.0), u)) - f(&z.axpy(c(-h, 0.0), u))) / (2.0 * h)
}

#[test]
fn derivatives_match_finite_differences() {
    let mut rng = SeededRng::new(8);
    let h = 1e-5;
    for i in 0..50u64 {
        let g = 1 + (i % 3) as usize;
        let pm = sample_siegel(g, 4000 + i, 0.3).unwrap();
        let z = sample_point(&pm, &mut rng);
        let u = sample_direction(g, &mut rng);
        let v = sample_direction(g, &mut rng);
        let f0 = |p: &CPoint| theta_eval(&pm, p, &DerivSpec::none(), TOL).unwrap().value;
        let d1 = theta_eval(&pm, &z, &DerivSpec::of(&[&u]), TOL).unwrap();
        let fd1 = central_difference(f0, &z, &u, h);
        let scale = d1.scale.max(1.0);
        assert!((d1.value - fd1).norm() <= 1e-6 * d1.value.norm().max(1e-2 * scale), "first: {} vs {}", d1.value, fd1);
        let d2 = theta_eval(&pm, &z, &DerivSpec::of(&[&u, &v]), TOL).unwrap();
        let fd2 = central_difference(|p| {
            theta_eval(&pm, p, &DerivSpec::of(&[&v]), TOL).unwrap().value
        }, &z, &u, h);
        assert!((d2.value - fd2).norm() <= 1e-6 * d2.value.norm().max(1e-2 * scale));
        let d3 = theta_eval(&pm, &z, &DerivSpec::of(&[&u, &u, &v]), TOL).unwrap();
        let fd3 = central_difference(|p| {
            theta_eval(&pm, p, &DerivSpec::of(&[&u, &v]), TOL).unwrap().value
        }, &z, &u, h);
        assert!((d3.value - fd3).norm() <= 1e-6 * d3.value.norm().max(1e-2 * scale));
    }
}

#[test]
fn doubling_radius_stays_within_tail_bound() {
    let mut rng = SeededRng::new(9);
    for i in 0..50u64 {
        let g = 1 + (i % 3) as usize;
        let pm = sample_siegel(g, 5000 + i, 0.3).unwrap();
        let z = sample_point(&pm, &mut rng);
        let u = sample_direction(g, &mut rng);
        let d = DerivSpec::of(&[&u]);
        let jet = theta_jet(&pm, &z, &d.dirs, 1e-8).unwrap();
        let v = jet.full();
        let wide = theta_eval_at_radius(&pm, &z, &d, 2.0 * jet.radius).unwrap();
        assert!((v.value - wide.value).norm() <= v.tail_bound + 1e-14 * v.scale);
        assert!(v.tail_bound <= 1e-8);
    }
}

#[test]
fn radius_re_evaluation_genus_one() {
    let pm = g1_i();
    let tol = 1e-10;
    let r = truncation_radius(&pm, tol, 0, 0.5).unwrap();
    let z = CPoint::new(vec![c(0.2, 0.3)]);
    let a = theta_eval_at_radius(&pm, &z, &DerivSpec::none(), r).unwrap();
    let b = theta_eval_at_radius(&pm, &z, &DerivSpec::none(), r + 2.0).unwrap();
    assert!((a.value - b.value).norm() < tol);
}

#[test]
fn truncation_radius_is_monotone() {
    let pm = sample_siegel(3, 1, 0.3).unwrap();
    let loose = truncation_radius(&pm, 1e-6, 0, 0.5).unwrap();
    let tight = truncation_radius(&pm, 1e-10, 0, 0.5).unwrap();
    assert!(tight >= loose);
    let r2 = truncation_radius(&pm, 1e-10, 2, 0.5).unwrap();
    assert!(r2 >= tight);
    let mut last = 0.0;
    for k in 1..16 {
        let r = truncation_radius(&pm, 10f64.powi(-k), 1, 0.5).unwrap();
        assert!(r >= last);
        last = r;
    }
}

#[test]
fn radius_cap_overflow_is_reported() {
    let pm = sample_siegel(2, 1, 0.3).unwrap().with_radius_cap(1.0);
    let err = theta_eval(&pm, &CPoint::zeros(2), &DerivSpec::none(), 1e-14).unwrap_err();
    assert!(matches!(err, Error::RadiusOverflow { .. }));
}

#[test]
fn dimension_mismatch_is_reported() {
    let pm = sample_siegel(2, 1, 0.3).unwrap();
    let err = theta_eval(&pm, &CPoint::zeros(3), &DerivSpec::none(), TOL).unwrap_err();
    assert_eq!(err, Error::DimensionMismatch { expected: 2, got: 3 });
}

#[test]
fn rejects_invalid_period_matrices() {
    let asym = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.1, 0.0), c(0.2, 0.0), c(0.0, 1.0)]);
    assert!(matches!(PeriodMatrix::new(asym), Err(Error::InvalidInput(_))));
    let indefinite = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 2.0), c(0.0, 2.0), c(0.0, 1.0)]);
    assert!(matches!(PeriodMatrix::new(indefinite), Err(Error::NotPositiveDefinite { .. })));
    let thin = DMatrix::from_row_slice(1, 1, &[c(0.0, 1e-9)]);
    assert!(matches!(PeriodMatrix::new(thin), Err(Error::InvalidInput(_))));
}

#[test]
fn second_order_functions_are_even() {
    let mut rng = SeededRng::new(10);
    for g in 1..=3 {
        let pm = sample_siegel(g, 10 + g as u64, 0.3).unwrap();
        let z = sample_point(&pm, &mut rng);
        for eps in ThetaCharacteristic::all(g) {
            let a = theta_char_eval(&pm, &eps, &z, &DerivSpec::none(), TOL).unwrap();
            let b = theta_char_eval(&pm, &eps, &-&z, &DerivSpec::none(), TOL).unwrap();
            assert!((a.value - b.value).norm() <= 2.0 * a.tail_bound.max(b.tail_bound) + 1e-14 * a.scale.max(1.0));
        }
    }
}

#[test]
fn squares_of_second_order_constants_sum_to_theta_squared() {
    for g in 1..=3 {
        let pm = sample_siegel(g, 20 + g as u64, 0.3).unwrap();
        let z = CPoint::zeros(g);
        let th = theta_eval(&pm, &z, &DerivSpec::none(), TOL).unwrap();
        let sum: C64 = ThetaCharacteristic::all(g)
            .map(|e| theta_char_eval(&pm, &e, &z, &DerivSpec::none(), TOL).unwrap().value.powi(2))
            .sum();
        assert!((sum - th.value * th.value).norm() < 1e-10);
    }
}

#[test]
fn characteristic_ordering_is_lexicographic() {
    let all: Vec<Vec<u8>> = ThetaCharacteristic::all(2).map(|e| e.bits().to_vec()).collect();
    assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    for (i, e) in ThetaCharacteristic::all(3).enumerate() {
        assert_eq!(e.index(), i);
    }
    assert!(ThetaCharacteristic::new(vec![0, 2]).is_err());
}
