//! Small dense symmetric eigenproblems with a reproducible output order.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigenpairs sorted by ascending eigenvalue; every eigenvector has its
/// largest-magnitude component positive (first such index on ties).
#[derive(Clone, Debug)]
pub struct SortedEigen {
    pub values: Vec<f64>,
    /// Columns are eigenvectors, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

pub fn symmetric_eigen(m: &DMatrix<f64>) -> SortedEigen {
    let n = m.nrows();
    if n == 0 {
        return SortedEigen { values: vec![], vectors: DMatrix::zeros(0, 0) };
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        let mut v: DVector<f64> = eig.eigenvectors.column(k).into_owned();
        normalize_sign(&mut v);
        vectors.set_column(col, &v);
        values.push(eig.eigenvalues[k]);
    }
    SortedEigen { values, vectors }
}

/// Flip `v` so that its largest-magnitude component is positive.
pub fn normalize_sign(v: &mut DVector<f64>) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, x) in v.iter().enumerate() {
        // a relative margin keeps near-ties from flipping on rounding noise
        if x.abs() > best_abs * (1.0 + 1e-9) {
            best_abs = x.abs();
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.neg_mut();
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// `max |U^T U - 1|`.
pub fn orthogonality_defect(u: &DMatrix<f64>) -> f64 {
    let g = u.transpose() * u;
    max_abs(&(g - DMatrix::identity(u.ncols(), u.ncols())))
}
