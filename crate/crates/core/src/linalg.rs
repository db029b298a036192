//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `J_N`: one `[[0, 1], [-1, 0]]` block per mode.
pub fn symplectic_form<T: Real>(n_modes: usize) -> DMatrix<T> {
    let mut j = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        j[(2 * k, 2 * k + 1)] = T::one();
        j[(2 * k + 1, 2 * k)] = -T::one();
    }
    j
}

pub fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()))
}

pub fn max_abs_diff<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    max_abs(&(a - b))
}

pub fn max_asymmetry<T: Real>(m: &DMatrix<T>) -> T {
    max_abs_diff(m, &m.transpose())
}

/// Replaces `m` with `(m + mᵀ)/2`.
pub fn symmetrize<T: Real>(m: &mut DMatrix<T>) {
    let half = T::lit(0.5);
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)]) * half;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Smallest eigenvalue of the Hermitian matrix `γ + iJ`.
///
/// Uses the real embedding `[[γ, -J], [J, γ]]`, whose spectrum is that of
/// `γ + iJ` with every eigenvalue doubled.
pub fn min_eig_gamma_plus_ij<T: Real>(cov: &DMatrix<T>) -> T {
    let dim = cov.nrows();
    let j = symplectic_form::<T>(dim / 2);
    let mut big = DMatrix::zeros(2 * dim, 2 * dim);
    big.view_mut((0, 0), (dim, dim)).copy_from(cov);
    big.view_mut((dim, dim), (dim, dim)).copy_from(cov);
    big.view_mut((0, dim), (dim, dim)).copy_from(&(-&j));
    big.view_mut((dim, 0), (dim, dim)).copy_from(&j);
    SymmetricEigen::new(big).eigenvalues.min()
}

/// Moore–Penrose pseudoinverse with a cutoff relative to the largest
/// singular value.
pub fn pseudo_inverse<T: Real>(m: &DMatrix<T>, rel_cutoff: T) -> DMatrix<T> {
    let svd = SVD::new(m.clone(), true, true);
    let smax = svd.singular_values.max();
    if smax <= T::zero() {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let eps = smax * rel_cutoff;
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut acc = DMatrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > eps {
            let col = vt.row(k).transpose() / s;
            acc += col * u.column(k).transpose();
        }
    }
    acc
}

/// Inverse via LU. Fails on exactly singular input.
pub fn inverse<T: Real>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    m.clone().try_inverse().ok_or(Error::Singular)
}

/// Principal square root of a symmetric positive-definite matrix.
pub fn sqrt_spd<T: Real>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    let eig = SymmetricEigen::new(m.clone());
    let scale = eig.eigenvalues.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
    let floor = scale.max(T::one()) * T::boundary_tol();
    if eig.eigenvalues.iter().any(|&v| v <= floor) {
        return Err(Error::NotPositiveDefinite);
    }
    let roots = eig.eigenvalues.map(|v| v.sqrt());
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&roots) * q.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_squares_to_minus_identity() {
        let j = symplectic_form::<f64>(3);
        assert_eq!(&j * &j, -DMatrix::<f64>::identity(6, 6));
        assert_eq!(j.transpose(), -&j);
    }

    #[test]
    fn vacuum_sits_on_the_boundary() {
        let min = min_eig_gamma_plus_ij(&DMatrix::<f64>::identity(4, 4));
        assert!(min.abs() < 1e-12);
    }

    #[test]
    fn pinv_on_support_only() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 0.0]);
        let p: DMatrix<f64> = pseudo_inverse(&m, 1e-12);
        assert!((p[(0, 0)] - 0.25).abs() < 1e-15);
        assert_eq!(p[(1, 1)], 0.0);
    }

    #[test]
    fn sqrt_spd_roundtrip() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let r = sqrt_spd(&m).unwrap();
        assert!(max_abs_diff(&(&r * &r), &m) < 1e-12);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(sqrt_spd(&bad).is_err());
    }
}
