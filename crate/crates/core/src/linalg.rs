use nalgebra::{DMatrix, DVector};

/// Stationary vector `ν` of a row-stochastic matrix: solves `ν(P − I) = 0`
/// with the last balance equation replaced by `Σν = 1`.
pub(crate) fn stationary_direct(p: &DMatrix<f64>) -> Option<Vec<f64>> {
    let n = p.nrows();
    let mut a = p.transpose() - DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b)?;
    Some(x.iter().copied().collect())
}

/// `‖νP − ν‖∞`.
pub(crate) fn stationary_residual(p: &DMatrix<f64>, nu: &[f64]) -> f64 {
    let v = DVector::from_column_slice(nu);
    let moved = p.tr_mul(&v);
    moved.iter().zip(nu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
