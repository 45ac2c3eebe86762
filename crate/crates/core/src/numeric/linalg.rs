use nalgebra::DMatrix;

use super::C64;
use crate::error::{Error, Result};

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix dimensions must be positive".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: entries.len() });
        }
        Ok(CMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, entries: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    /// Builds a matrix whose columns are the given equal-length vectors.
    pub fn from_columns(columns: &[&[C64]]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch { expected: rows, got: bad.len() });
        }
        let mut m = CMatrix::new(rows, cols, vec![C64::new(0.0, 0.0); rows * cols])?;
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let s = (0..self.cols).map(|k| self.get(i, k) * other.get(k, j)).sum();
                out.set(i, j, s);
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }
}

/// Cholesky factor `L` (lower triangular) of a real symmetric positive-definite matrix.
pub fn cholesky_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.ncols() });
    }
    let asym = (m - m.transpose()).norm();
    if asym > 1e-12 * m.norm() {
        return Err(Error::InvalidInput(format!("matrix not symmetric (|M - M^T| = {asym:e})")));
    }
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let pivot = m[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if !(pivot > 0.0) {
            return Err(Error::NotPositiveDefinite { row: j, pivot });
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let s = m[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn symmetric_min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Singular values in nonincreasing order; `min(rows, cols)` of them.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.to_nalgebra().singular_values().iter().cloned().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstsqSolution {
    pub x: Vec<C64>,
    /// `|Ax - b| / |b|`, or 0 when `b = 0`.
    pub rel_residual: f64,
}

/// Minimum-norm least-squares solution of `Ax = b` for `rows >= cols`.
pub fn lstsq(a: &CMatrix, b: &[C64]) -> Result<LstsqSolution> {
    if a.rows() < a.cols() {
        return Err(Error::InvalidInput(format!(
            "least squares needs rows >= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch { expected: a.rows(), got: b.len() });
    }
    let svd = a.to_nalgebra().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^H");
    let sigma = &svd.singular_values;
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let smin = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax == 0.0 || smin < 1e-14 * smax {
        return Err(Error::DegenerateSystem(format!(
            "rank deficient: sigma_min / sigma_max = {:e}",
            if smax == 0.0 { 0.0 } else { smin / smax }
        )));
    }
    let n = a.cols();
    // x = V diag(1/sigma) U^H b
    let mut coef = vec![C64::new(0.0, 0.0); sigma.len()];
    for (k, c) in coef.iter_mut().enumerate() {
        let proj: C64 = (0..a.rows()).map(|i| u[(i, k)].conj() * b[i]).sum();
        *c = proj / sigma[k];
    }
    let x: Vec<C64> = (0..n)
        .map(|j| coef.iter().enumerate().map(|(k, &c)| v_t[(k, j)].conj() * c).sum())
        .collect();
    let ax = a.mul_vec(&x);
    let bnorm = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let rnorm = ax.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
    let rel_residual = if bnorm == 0.0 { 0.0 } else { rnorm / bnorm };
    Ok(LstsqSolution { x, rel_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rng::SeededRng;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> CMatrix {
        let data = (0..rows * cols).map(|_| rng.complex_in(1.0)).collect();
        CMatrix::new(rows, cols, data).unwrap()
    }

    fn random_unitary(rng: &mut SeededRng, n: usize) -> CMatrix {
        // Gram-Schmidt on a random complex matrix
        let m = random_matrix(rng, n, n);
        let mut cols: Vec<Vec<C64>> = Vec::new();
        for j in 0..n {
            let mut v: Vec<C64> = (0..n).map(|i| m.get(i, j)).collect();
            for q in &cols {
                let proj: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
            let nrm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            cols.push(v.into_iter().map(|x| x / nrm).collect());
        }
        let refs: Vec<&[C64]> = cols.iter().map(|c| c.as_slice()).collect();
        CMatrix::from_columns(&refs).unwrap()
    }

    #[test]
    fn cholesky_identity() {
        let l = cholesky_spd(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(l, DMatrix::identity(2, 2));
    }

    #[test]
    fn cholesky_hand_checked() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 3.0]);
        let l = cholesky_spd(&m).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 2f64.sqrt()]);
        assert!((l - want).norm() < 1e-15);
    }

    #[test]
    fn cholesky_random_spd_reconstructs() {
        let mut rng = SeededRng::new(11);
        for _ in 0..20 {
            let a = DMatrix::from_fn(4, 4, |_, _| rng.symmetric_unit());
            let m = &a * a.transpose() + DMatrix::identity(4, 4) * 0.1;
            let l = cholesky_spd(&m).unwrap();
            assert!((&l * l.transpose() - &m).norm() / m.norm() < 1e-12);
            for i in 0..4 {
                for j in i + 1..4 {
                    assert_eq!(l[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(cholesky_spd(&m), Err(Error::NotPositiveDefinite { row: 1, .. })));
    }

    #[test]
    fn lstsq_identity_returns_rhs() {
        let b = vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0)];
        let sol = lstsq(&CMatrix::identity(3), &b).unwrap();
        for (x, y) in sol.x.iter().zip(&b) {
            assert!((x - y).norm() < 1e-15);
        }
        assert!(sol.rel_residual < 1e-15);
    }

    #[test]
    fn lstsq_consistent_overdetermined() {
        let mut rng = SeededRng::new(5);
        let a = random_matrix(&mut rng, 8, 3);
        let x0 = vec![c(0.3, -1.0), c(2.0, 0.1), c(-0.7, 0.4)];
        let b = a.mul_vec(&x0);
        let sol = lstsq(&a, &b).unwrap();
        assert!(sol.rel_residual < 1e-12);
        for (x, y) in sol.x.iter().zip(&x0) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn lstsq_orthogonal_rhs_has_unit_residual() {
        let a = CMatrix::new(2, 1, vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let sol = lstsq(&a, &[c(0.0, 0.0), c(0.0, 3.0)]).unwrap();
        assert!(sol.x[0].norm() < 1e-15);
        assert!((sol.rel_residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lstsq_rejects_parallel_columns() {
        let col = [c(1.0, 1.0), c(2.0, 0.0), c(0.0, -1.0)];
        let twice: Vec<C64> = col.iter().map(|v| v * 2.0).collect();
        let a = CMatrix::from_columns(&[&col, &twice]).unwrap();
        assert!(matches!(lstsq(&a, &col), Err(Error::DegenerateSystem(_))));
    }

    #[test]
    fn lstsq_is_locally_optimal() {
        let mut rng = SeededRng::new(8);
        let a = random_matrix(&mut rng, 6, 2);
        let b: Vec<C64> = (0..6).map(|_| rng.complex_in(1.0)).collect();
        let sol = lstsq(&a, &b).unwrap();
        let resid = |x: &[C64]| {
            a.mul_vec(x).iter().zip(&b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt()
        };
        let best = resid(&sol.x);
        for _ in 0..100 {
            let dir: Vec<C64> = (0..2).map(|_| rng.complex_in(1.0)).collect();
            let nrm = dir.iter().map(|d| d.norm_sqr()).sum::<f64>().sqrt();
            let moved: Vec<C64> = sol.x.iter().zip(&dir).map(|(x, d)| x + d * (1e-4 / nrm)).collect();
            assert!(resid(&moved) > best - 1e-12);
        }
    }

    #[test]
    fn singular_values_of_zero_matrix() {
        assert_eq!(singular_values(&CMatrix::zeros(4, 3)), vec![0.0; 3]);
    }

    #[test]
    fn repeated_column_is_rank_deficient() {
        let col = [c(1.0, 0.5), c(-2.0, 1.0), c(0.3, 0.0), c(0.0, 2.0)];
        let other = [c(0.0, 1.0), c(1.0, 1.0), c(-1.0, 0.0), c(0.5, 0.5)];
        let a = CMatrix::from_columns(&[&col, &other, &col]).unwrap();
        let s = singular_values(&a);
        assert!(s[2] < 1e-13 * s[0]);
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        let mut rng = SeededRng::new(3);
        let a = random_matrix(&mut rng, 8, 3);
        // oracle: sqrt of eigenvalues of A^H A
        let na = a.to_nalgebra();
        let gram = na.adjoint() * &na;
        let mut eig: Vec<f64> =
            gram.symmetric_eigenvalues().iter().map(|&l| l.max(0.0).sqrt()).collect();
        eig.sort_by(|x, y| y.total_cmp(x));
        let s = singular_values(&a);
        for (x, y) in s.iter().zip(&eig) {
            assert!((x - y).abs() < 1e-10 * s[0]);
        }
    }

    proptest! {
        #[test]
        fn singular_values_unitarily_invariant(seed in 0u64..10_000) {
            let mut rng = SeededRng::new(seed);
            let a = random_matrix(&mut rng, 5, 3);
            let left = random_unitary(&mut rng, 5);
            let right = random_unitary(&mut rng, 3);
            let s0 = singular_values(&a);
            let s1 = singular_values(&left.matmul(&a).unwrap().matmul(&right).unwrap());
            for (x, y) in s0.iter().zip(&s1) {
                prop_assert!((x - y).abs() < 1e-10 * s0[0]);
            }
        }

        #[test]
        fn cholesky_reconstruction(seed in 0u64..10_000, n in 1usize..6) {
            let mut rng = SeededRng::new(seed);
            let a = DMatrix::from_fn(n, n, |_, _| rng.symmetric_unit());
            let m = &a * a.transpose() + DMatrix::identity(n, n) * 0.05;
            let l = cholesky_spd(&m).unwrap();
            prop_assert!((&l * l.transpose() - &m).norm() <= 1e-12 * m.norm());
        }
    }
}
