//! Dense linear-algebra helpers shared by the certificate pipeline.
//!
//! Everything here works on `nalgebra::DMatrix<f64>`. Rank decisions use a
//! relative singular-value threshold `sigma > rel_tol * sigma_max`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Default relative threshold for numeric rank decisions.
pub const RANK_TOL: f64 = 1e-8;

/// Singular values of `m`, sorted in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Rank report for a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub tolerance: f64,
}

pub fn numeric_rank(m: &DMatrix<f64>, rel_tol: f64) -> RankInfo {
    let s = singular_values(m);
    let sigma_max = s.first().copied().unwrap_or(0.0);
    let sigma_min = s.last().copied().unwrap_or(0.0);
    let tolerance = rel_tol * sigma_max;
    let rank = if sigma_max == 0.0 {
        0
    } else {
        s.iter().filter(|&&v| v > tolerance).count()
    };
    RankInfo {
        rank,
        sigma_max,
        sigma_min,
        tolerance,
    }
}

/// Thin SVD split into the part above the rank threshold.
///
/// Returns `(u_r, sigma_r, v_r)` with `m ≈ u_r * diag(sigma_r) * v_rᵀ`.
pub fn truncated_svd(
    m: &DMatrix<f64>,
    abs_tol: f64,
) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > abs_tol)
        .collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let r = idx.len();
    let mut u_r = DMatrix::zeros(m.nrows(), r);
    let mut v_r = DMatrix::zeros(m.ncols(), r);
    let mut s_r = Vec::with_capacity(r);
    for (k, &i) in idx.iter().enumerate() {
        u_r.set_column(k, &u.column(i));
        v_r.set_column(k, &v_t.row(i).transpose());
        s_r.push(svd.singular_values[i]);
    }
    (u_r, s_r, v_r)
}

/// Moore–Penrose pseudoinverse with relative rank truncation.
pub fn pinv(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let info = numeric_rank(m, rel_tol);
    if info.rank == 0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let (u, s, v) = truncated_svd(m, info.tolerance);
    let mut vs = v;
    for (k, sk) in s.iter().enumerate() {
        vs.column_mut(k).scale_mut(1.0 / sk);
    }
    vs * u.transpose()
}

/// Right pseudoinverse `M† = V Σ⁻¹ Uᵀ` of a full-row-rank matrix, so that `M M† = I`.
pub fn right_pseudoinverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let info = numeric_rank(m, RANK_TOL);
    if info.rank < m.nrows() || m.nrows() > m.ncols() {
        return Err(Error::RankDeficient {
            what: "right pseudoinverse operand".into(),
            rank: info.rank,
            required: m.nrows(),
            tolerance: info.tolerance,
        });
    }
    Ok(pinv(m, RANK_TOL))
}

/// Orthonormal basis of the null space of `m` (columns).
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let q = m.ncols();
    let info = numeric_rank(m, rel_tol);
    if info.rank == 0 {
        return DMatrix::identity(q, q);
    }
    let (_, _, v_r) = truncated_svd(m, info.tolerance);
    let projector = DMatrix::identity(q, q) - &v_r * v_r.transpose();
    let eig = SymmetricEigen::new(sym(&projector));
    let keep: Vec<usize> = (0..q).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let mut basis = DMatrix::zeros(q, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        basis.set_column(k, &eig.eigenvectors.column(i));
    }
    basis
}

/// Least-squares solution of `a x = b` (minimum norm).
pub fn lstsq(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    pinv(a, 1e-12) * b
}

pub fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of the symmetric part, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(sym(m)).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

pub fn lambda_min(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m).first().copied().unwrap_or(f64::NAN)
}

pub fn lambda_max(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m).last().copied().unwrap_or(f64::NAN)
}

/// Symmetric PSD square root with eigenvalues floored at zero.
pub fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(sym(m));
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

/// Induced 2-norm.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Condition number of a symmetric positive-definite matrix.
pub fn spd_condition(m: &DMatrix<f64>) -> f64 {
    let e = sym_eigenvalues(m);
    match (e.first(), e.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Column-major vectorisation.
pub fn vec(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &[f64], rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(rows, cols, v)
}

/// Largest real part among the eigenvalues of a general square matrix.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|c| c.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn is_hurwitz(m: &DMatrix<f64>) -> bool {
    spectral_abscissa(m) < 0.0
}

pub fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Frobenius norm of `a - b`.
pub fn frob_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm()
}

/// Stack matrices vertically; all blocks must share a column count.
pub fn vstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(*b);
        r += b.nrows();
    }
    out
}

/// Stack matrices horizontally; all blocks must share a row count.
pub fn hstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), (rows, b.ncols())).copy_from(*b);
        c += b.ncols();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_of_identity_and_scalar() {
        let i3 = DMatrix::<f64>::identity(3, 3);
        assert!(frob_diff(&right_pseudoinverse(&i3).unwrap(), &i3) < 1e-14);
        let two = DMatrix::from_element(1, 1, 2.0);
        assert!((right_pseudoinverse(&two).unwrap()[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn right_pinv_rejects_rank_deficient() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        match right_pseudoinverse(&m) {
            Err(Error::RankDeficient { rank, required, .. }) => {
                assert_eq!(rank, 1);
                assert_eq!(required, 2);
            }
            other => panic!("expected rank error, got {other:?}"),
        }
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let n = null_space(&m, 1e-10);
        assert_eq!(n.ncols(), 2);
        assert!((&m * &n).norm() < 1e-12);
        assert!(frob_diff(&(n.transpose() * &n), &DMatrix::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let p = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let r = sym_sqrt(&p);
        assert!(frob_diff(&(&r * &r), &p) < 1e-12);
    }

    #[test]
    fn hurwitz_detection() {
        let stable = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -3.0]);
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!(is_hurwitz(&stable));
        assert!(!is_hurwitz(&rot));
    }
}
