//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

/// Matrix with a single unit entry at (row, col).
pub fn unit(n: usize, row: usize, col: usize) -> CMat {
    let mut m = zeros(n);
    m[(row, col)] = ONE;
    m
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Largest entry of |A − A†|.
pub fn hermiticity_error(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn trace(a: &CMat) -> Complex64 {
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the normalized eigenvectors.
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn new(a: &CMat) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Internal("eigendecomposition of a non-square matrix".into()));
        }
        let scale = a.iter().map(|x| x.norm()).fold(1.0, f64::max);
        let err = hermiticity_error(a);
        if err > 1e-10 * scale {
            return Err(Error::Internal(format!(
                "eigendecomposition requires a Hermitian matrix (|A - A†| = {err:.3e})"
            )));
        }
        let eig = a.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..a.nrows()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = zeros(a.nrows());
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Ok(Self { values, vectors })
    }

    /// exp(−i H t) reconstructed from the spectral decomposition.
    pub fn propagator(&self, t: f64) -> CMat {
        let phases: Vec<Complex64> = self
            .values
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * t))
            .collect();
        let mut scaled = self.vectors.clone();
        for (j, p) in phases.iter().enumerate() {
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= p;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Smallest eigenvalue of a Hermitian matrix (used for positivity checks).
pub fn min_eigenvalue(a: &CMat) -> f64 {
    let h = (a + a.adjoint()).scale(0.5);
    h.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Sparse operator with explicit (row, col, value) entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    pub dim: usize,
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    pub fn from_dense(m: &CMat) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != ZERO {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        Self {
            dim: m.nrows(),
            entries,
        }
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = zeros(self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }

    /// out += factor · M · S
    pub fn right_mul_acc(&self, m: &CMat, factor: Complex64, out: &mut CMat) {
        let n = m.nrows();
        for &(r, c, v) in &self.entries {
            let w = v * factor;
            for i in 0..n {
                out[(i, c)] += m[(i, r)] * w;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hermitian(n: usize, re: &[f64], im: &[f64]) -> CMat {
        let mut a = zeros(n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                let z = if i == j {
                    Complex64::new(re[k], 0.0)
                } else {
                    Complex64::new(re[k], im[k])
                };
                a[(i, j)] = z;
                a[(j, i)] = z.conj();
                k += 1;
            }
        }
        a
    }

    proptest! {
        #[test]
        fn eigen_reconstructs_and_sorts(re in prop::collection::vec(-2.0..2.0f64, 10), im in prop::collection::vec(-2.0..2.0f64, 10)) {
            let a = hermitian(4, &re, &im);
            let e = HermitianEigen::new(&a).unwrap();
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(4, e.values.iter().map(|&v| Complex64::new(v, 0.0))));
            let back = &e.vectors * d * e.vectors.adjoint();
            prop_assert!(max_abs_diff(&back, &a) < 1e-10);
            let gram = e.vectors.adjoint() * &e.vectors;
            prop_assert!(max_abs_diff(&gram, &CMat::identity(4, 4)) < 1e-10);
        }

        #[test]
        fn propagator_matches_matrix_exponential(re in prop::collection::vec(-1.0..1.0f64, 6), im in prop::collection::vec(-1.0..1.0f64, 6), t in -5.0..5.0f64) {
            let h = hermitian(3, &re, &im);
            let oracle = (h.map(|z| z * Complex64::new(0.0, -t))).exp();
            let u = HermitianEigen::new(&h).unwrap().propagator(t);
            prop_assert!(max_abs_diff(&u, &oracle) < 1e-10);
        }

        #[test]
        fn sparse_right_multiplication_matches_dense(vals in prop::collection::vec(-1.0..1.0f64, 18)) {
            let m = CMat::from_fn(3, 3, |i, j| Complex64::new(vals[3 * i + j], vals[9 + 3 * i + j]));
            let mut s = zeros(3);
            s[(0, 2)] = Complex64::new(0.5, -1.0);
            s[(1, 1)] = ONE;
            let op = SparseOp::from_dense(&s);
            prop_assert_eq!(op.to_dense(), s.clone());
            let factor = Complex64::new(0.3, 0.7);
            let mut out = CMat::identity(3, 3);
            op.right_mul_acc(&m, factor, &mut out);
            let oracle = CMat::identity(3, 3) + (&m * &s).map(|z| z * factor);
            prop_assert!(max_abs_diff(&out, &oracle) < 1e-14);
        }
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let mut a = zeros(2);
        a[(0, 1)] = ONE;
        assert!(matches!(HermitianEigen::new(&a), Err(Error::Internal(_))));
    }

    #[test]
    fn helpers() {
        let a = unit(2, 0, 1);
        let b = unit(2, 1, 0);
        let c = commutator(&a, &b);
        assert_eq!(c[(0, 0)], ONE);
        assert_eq!(c[(1, 1)], -ONE);
        assert_eq!(trace(&c), ZERO);
        assert_eq!(hermiticity_error(&a), 1.0);
        let rho = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(-0.25, 0.0), ONE]));
        assert!((min_eigenvalue(&rho) + 0.25).abs() < 1e-15);
    }
}
