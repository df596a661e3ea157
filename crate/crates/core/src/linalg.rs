//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Orthonormalization of a set of columns.
pub struct Orthonormalized {
    /// `d × k` with orthonormal columns.
    pub q: CMatrix,
    /// `k × k` upper triangular with `vectors = q · r`.
    pub r: CMatrix,
}

/// Modified Gram–Schmidt with one full reorthogonalization pass, in the
/// given column order. Returns `None` if a column is numerically dependent on
/// the previous ones.
pub fn gram_schmidt(vectors: &CMatrix) -> Option<Orthonormalized> {
    let (d, k) = vectors.shape();
    let mut q = CMatrix::zeros(d, k);
    let mut r = CMatrix::zeros(k, k);
    for j in 0..k {
        let mut v = vectors.column(j).clone_owned();
        let original = v.norm();
        for _pass in 0..2 {
            for i in 0..j {
                let qi = q.column(i);
                let proj = qi.dotc(&v);
                r[(i, j)] += proj;
                v -= qi * proj;
            }
        }
        let norm = v.norm();
        if norm <= original * 1e-14 || norm == 0.0 {
            return None;
        }
        r[(j, j)] = C64::new(norm, 0.0);
        q.set_column(j, &(v / C64::new(norm, 0.0)));
    }
    Some(Orthonormalized { q, r })
}

/// Extends the orthonormal columns of `q` to a unitary `d × d` matrix whose
/// first columns are `q`.
pub fn complete_unitary(q: &CMatrix) -> CMatrix {
    let (d, k) = q.shape();
    let mut basis: Vec<CVector> = (0..k).map(|j| q.column(j).clone_owned()).collect();
    let mut candidates: Vec<usize> = (0..d).collect();
    while basis.len() < d {
        // Pick the standard basis vector with the largest residual.
        let (pos, residual) = candidates
            .iter()
            .enumerate()
            .map(|(pos, &e)| (pos, residual_against(&basis, &unit(d, e))))
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("candidates remain while the basis is incomplete");
        candidates.remove(pos);
        let norm = residual.norm();
        basis.push(residual / C64::new(norm, 0.0));
    }
    CMatrix::from_columns(&basis)
}

fn unit(d: usize, e: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[e] = C64::new(1.0, 0.0);
    v
}

fn residual_against(basis: &[CVector], v: &CVector) -> CVector {
    let mut v = v.clone();
    for _pass in 0..2 {
        for b in basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
    }
    v
}

/// Inverse of an invertible upper-triangular matrix.
pub fn upper_triangular_inverse(r: &CMatrix) -> Option<CMatrix> {
    let n = r.nrows();
    r.solve_upper_triangular(&CMatrix::identity(n, n))
}

/// Ratio of largest to smallest eigenvalue of a Hermitian positive matrix.
pub fn hermitian_condition(gram: &CMatrix) -> f64 {
    let eig = gram.clone().symmetric_eigenvalues();
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Singular values, largest first.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().cloned().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Left singular vectors whose singular value exceeds `tol · σ_max`.
pub fn range_basis(m: &CMatrix, tol: f64) -> CMatrix {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<CVector> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax > 0.0 && s > tol * smax)
        .map(|(i, _)| u.column(i).clone_owned())
        .collect();
    if keep.is_empty() {
        CMatrix::zeros(m.nrows(), 0)
    } else {
        CMatrix::from_columns(&keep)
    }
}
