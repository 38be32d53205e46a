//! Small dense-decomposition helpers backed by nalgebra.
//!
//! Complex Hermitian problems are realified: H = A + iB maps to the real
//! symmetric [[A, -B], [B, A]], whose spectrum is that of H with every
//! eigenvalue doubled. This avoids a LAPACK dependency and keeps the
//! decompositions pure Rust.

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;

/// Realify a complex matrix into [[A, -B], [B, A]].
fn realify(h: &Array2<Complex64>) -> DMatrix<f64> {
    let d = h.nrows();
    DMatrix::from_fn(2 * d, 2 * d, |i, j| {
        let z = h[[i % d, j % d]];
        match (i < d, j < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Eigenvalues of a complex Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(h: &Array2<Complex64>) -> Vec<f64> {
    let d = h.nrows();
    if d == 0 {
        return Vec::new();
    }
    let eig = nalgebra::SymmetricEigen::new(realify(h));
    let mut all: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Doubled spectrum: average each numerically-near pair back down.
    (0..d).map(|i| 0.5 * (all[2 * i] + all[2 * i + 1])).collect()
}

/// Eigen-decomposition of a complex Hermitian matrix.
///
/// Returns (eigenvalues ascending, eigenvectors as columns). Vectors are
/// recovered from the realified problem; for each doubled eigenvalue one
/// representative [x; y] is kept and read back as v = x + iy.
#[cfg(test)]
pub(crate) fn hermitian_eigen(h: &Array2<Complex64>) -> (Vec<f64>, Array2<Complex64>) {
    let d = h.nrows();
    if d == 0 {
        return (Vec::new(), Array2::zeros((0, 0)));
    }
    let eig = nalgebra::SymmetricEigen::new(realify(h));
    let mut order: Vec<usize> = (0..2 * d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut values = Vec::with_capacity(d);
    let mut vectors = Array2::zeros((d, d));
    for i in 0..d {
        let (ka, kb) = (order[2 * i], order[2 * i + 1]);
        values.push(0.5 * (eig.eigenvalues[ka] + eig.eigenvalues[kb]));
        // Any unit eigenvector [x; y] of the real problem reads back as a
        // unit eigenvector x + iy of H (the doubled partner is i times it).
        let col = eig.eigenvectors.column(ka);
        for r in 0..d {
            vectors[[r, i]] = Complex64::new(col[r], col[d + r]);
        }
    }
    (values, vectors)
}

/// Singular values of a real matrix, descending.
pub(crate) fn singular_values(j: &Array2<f64>) -> Vec<f64> {
    let (rows, cols) = j.dim();
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let m = DMatrix::from_fn(rows, cols, |i, k| j[[i, k]]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}
