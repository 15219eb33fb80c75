//! Eigenpairs of small dense real matrices.
//!
//! Eigenvalues come from nalgebra's real Schur form; eigenvectors are
//! recovered by shifted inverse iteration in complex arithmetic.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: Complex64,
    /// Unit 2-norm eigenvector.
    pub vector: DVector<Complex64>,
    /// `‖A v − λ v‖`; large values flag a defective or ill-conditioned pair.
    pub residual: f64,
}

pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex64> {
    a.clone().complex_eigenvalues().iter().copied().collect()
}

pub fn eigenpairs(a: &DMatrix<f64>) -> Vec<EigenPair> {
    let ac = a.map(|x| Complex64::new(x, 0.0));
    let scale = a.amax().max(1.0);
    eigenvalues(a)
        .into_iter()
        .map(|lambda| {
            let vector = inverse_iteration(&ac, lambda, scale);
            let residual = (&ac * &vector - &vector * lambda).norm();
            EigenPair { value: lambda, vector, residual }
        })
        .collect()
}

fn inverse_iteration(a: &DMatrix<Complex64>, lambda: Complex64, scale: f64) -> DVector<Complex64> {
    let n = a.nrows();
    let shift = lambda + Complex64::new(1e-10 * scale, 1e-11 * scale);
    let shifted = a - DMatrix::<Complex64>::identity(n, n) * shift;
    let lu = shifted.lu();
    let mut v = DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * i as f64));
    v /= Complex64::new(v.norm(), 0.0);
    for _ in 0..4 {
        match lu.solve(&v) {
            Some(w) if w.norm().is_finite() && w.norm() > 0.0 => {
                v = w.clone() / Complex64::new(w.norm(), 0.0);
            }
            _ => break,
        }
    }
    v
}
