//! Gaussian states of canonical modes.
//!
//! Quadratures are stored interleaved, `(x₁, p₁, …, x_N, p_N)`, in units
//! where the vacuum covariance is the identity and a quadrature combination
//! `u = hᵀR` has variance `½ hᵀγh` (in units of ħ).

use std::collections::HashSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    Atomic,
    Light,
}

impl ModeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeKind::Atomic => "atomic",
            ModeKind::Light => "light",
        }
    }
}

impl fmt::Display for ModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Names one canonical mode: an atomic ensemble or a light beam.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeLabel {
    pub id: String,
    pub kind: ModeKind,
}

impl ModeLabel {
    pub fn new(id: impl Into<String>, kind: ModeKind) -> Self {
        Self {
            id: id.into(),
            kind,
        }
    }

    pub fn atomic(id: impl Into<String>) -> Self {
        Self::new(id, ModeKind::Atomic)
    }

    pub fn light(id: impl Into<String>) -> Self {
        Self::new(id, ModeKind::Light)
    }
}

#[inline]
pub fn x_index(mode: usize) -> usize {
    2 * mode
}

#[inline]
pub fn p_index(mode: usize) -> usize {
    2 * mode + 1
}

/// Outcome of the `γ + iJ ≥ 0` check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Physicality<T> {
    Ok,
    Violation { min_eig: T },
}

impl<T> Physicality<T> {
    pub fn is_ok(&self) -> bool {
        matches!(self, Physicality::Ok)
    }
}

/// Checks `γ + iJ ≥ 0` with the library's boundary tolerance.
pub fn physicality<T: Real>(cov: &DMatrix<T>) -> Physicality<T> {
    let min_eig = linalg::min_eig_gamma_plus_ij(cov);
    if min_eig >= -T::boundary_tol() {
        Physicality::Ok
    } else {
        Physicality::Violation { min_eig }
    }
}

/// `n = 1/tanh(ratio)` with `ratio = ħω / (2 k_B T)`.
pub fn occupation_from_temperature<T: Real>(ratio: T) -> Result<T> {
    if !ratio.is_finite() && ratio > T::zero() {
        return Ok(T::one());
    }
    if !(ratio > T::zero()) {
        return Err(Error::Domain(format!(
            "temperature ratio must be positive, got {ratio}"
        )));
    }
    Ok(T::one() / ratio.tanh())
}

/// Covariance matrix, displacement and mode registry of an `N`-mode
/// Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState<T: Real> {
    modes: Vec<ModeLabel>,
    cov: DMatrix<T>,
    disp: DVector<T>,
}

fn check_labels(labels: &[ModeLabel]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::EmptyModes);
    }
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.id.as_str()) {
            return Err(Error::DuplicateMode(l.id.clone()));
        }
    }
    Ok(())
}

impl<T: Real> GaussianState<T> {
    /// Validated constructor. Rejects asymmetric, non-finite or unphysical
    /// covariance matrices.
    pub fn new(modes: Vec<ModeLabel>, cov: DMatrix<T>, disp: DVector<T>) -> Result<Self> {
        check_labels(&modes)?;
        let dim = 2 * modes.len();
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: cov.nrows().max(cov.ncols()),
            });
        }
        if disp.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: disp.len(),
            });
        }
        if cov.iter().chain(disp.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state entries"));
        }
        let asym = linalg::max_asymmetry(&cov);
        if asym > T::symmetry_tol() * linalg::max_abs(&cov).max(T::one()) {
            return Err(Error::NotSymmetric(asym.as_f64()));
        }
        if let Physicality::Violation { min_eig } = physicality(&cov) {
            return Err(Error::Unphysical(min_eig.as_f64()));
        }
        Ok(Self::from_parts(modes, cov, disp))
    }

    /// Internal constructor for results of structure-preserving operations.
    pub(crate) fn from_parts(modes: Vec<ModeLabel>, mut cov: DMatrix<T>, disp: DVector<T>) -> Self {
        linalg::symmetrize(&mut cov);
        Self { modes, cov, disp }
    }

    pub fn vacuum(labels: Vec<ModeLabel>) -> Result<Self> {
        check_labels(&labels)?;
        let dim = 2 * labels.len();
        Ok(Self::from_parts(
            labels,
            DMatrix::identity(dim, dim),
            DVector::zeros(dim),
        ))
    }

    /// Single-mode thermal state `γ = n𝟙₂`.
    pub fn thermal(label: ModeLabel, n: T) -> Result<Self> {
        if !n.is_finite() {
            return Err(Error::NonFinite("occupation"));
        }
        if n < T::one() - T::boundary_tol() {
            return Err(Error::Unphysical((n - T::one()).as_f64()));
        }
        Ok(Self::from_parts(
            vec![label],
            DMatrix::identity(2, 2) * n,
            DVector::zeros(2),
        ))
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn cov(&self) -> &DMatrix<T> {
        &self.cov
    }

    pub fn disp(&self) -> &DVector<T> {
        &self.disp
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.modes.len()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.id == id)
            .ok_or_else(|| Error::UnknownMode(id.to_string()))
    }

    pub fn mode(&self, id: &str) -> Result<&ModeLabel> {
        self.index_of(id).map(|k| &self.modes[k])
    }

    /// Direct sum: block-diagonal covariance, concatenated displacement.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut modes = self.modes.clone();
        modes.extend(other.modes.iter().cloned());
        check_labels(&modes)?;
        let (da, db) = (self.dim(), other.dim());
        let mut cov = DMatrix::zeros(da + db, da + db);
        cov.view_mut((0, 0), (da, da)).copy_from(&self.cov);
        cov.view_mut((da, da), (db, db)).copy_from(&other.cov);
        let mut disp = DVector::zeros(da + db);
        disp.rows_mut(0, da).copy_from(&self.disp);
        disp.rows_mut(da, db).copy_from(&other.disp);
        Ok(Self::from_parts(modes, cov, disp))
    }

    /// Restricts the state to the listed modes, in the given order.
    pub fn reduce_to(&self, ids: &[&str]) -> Result<Self> {
        let mut idx = Vec::with_capacity(ids.len());
        let mut modes = Vec::with_capacity(ids.len());
        for id in ids {
            let k = self.index_of(id)?;
            idx.push(k);
            modes.push(self.modes[k].clone());
        }
        check_labels(&modes)?;
        let rows: Vec<usize> = idx.iter().flat_map(|&k| [x_index(k), p_index(k)]).collect();
        let cov = self.cov.select_rows(&rows).select_columns(&rows);
        let disp = self.disp.select_rows(&rows);
        Ok(Self::from_parts(modes, cov, disp))
    }

    /// Partial trace over one mode.
    pub fn discard_mode(&self, id: &str) -> Result<Self> {
        self.index_of(id)?;
        let keep: Vec<&str> = self
            .modes
            .iter()
            .filter(|m| m.id != id)
            .map(|m| m.id.as_str())
            .collect();
        if keep.is_empty() {
            return Err(Error::EmptyModes);
        }
        self.reduce_to(&keep)
    }

    /// `Var(hᵀR)/ħ = ½ hᵀγh`.
    pub fn variance_of(&self, h: &DVector<T>) -> Result<T> {
        if h.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: h.len(),
            });
        }
        Ok(T::lit(0.5) * h.dot(&(&self.cov * h)))
    }

    pub fn check_physicality(&self) -> Physicality<T> {
        physicality(&self.cov)
    }

    /// Gaussian Wigner function `(πᴺ√det γ)⁻¹ exp[−(ζ−d)ᵀγ⁻¹(ζ−d)]`.
    pub fn wigner_density(&self, point: &DVector<T>) -> Result<T> {
        if point.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: point.len(),
            });
        }
        let det = self.cov.determinant();
        if det <= T::boundary_tol() {
            return Err(Error::Degenerate(det.as_f64()));
        }
        let inv = linalg::inverse(&self.cov)?;
        let delta = point - &self.disp;
        let exponent = delta.dot(&(&inv * &delta));
        let norm = T::pi().powi(self.n_modes() as i32) * det.sqrt();
        Ok((-exponent).exp() / norm)
    }

    /// Same state with a different covariance on the same modes.
    pub(crate) fn with_moments(&self, cov: DMatrix<T>, disp: DVector<T>) -> Self {
        Self::from_parts(self.modes.clone(), cov, disp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn a(id: &str) -> ModeLabel {
        ModeLabel::atomic(id)
    }

    #[test]
    fn vacuum_is_identity() {
        let s = GaussianState::<f64>::vacuum(vec![a("A1"), ModeLabel::light("L1")]).unwrap();
        assert_eq!(s.cov(), &DMatrix::identity(4, 4));
        assert_eq!(s.disp(), &DVector::zeros(4));
        assert_eq!(
            GaussianState::<f64>::vacuum(vec![]).unwrap_err(),
            Error::EmptyModes
        );
        assert_eq!(
            GaussianState::<f64>::vacuum(vec![a("A"), a("A")]).unwrap_err(),
            Error::DuplicateMode("A".into())
        );
    }

    #[test]
    fn thermal_states() {
        let s = GaussianState::thermal(a("A"), 1.5).unwrap();
        assert_eq!(s.cov(), &DMatrix::from_diagonal_element(2, 2, 1.5));
        let v = GaussianState::thermal(a("A"), 1.0).unwrap();
        assert_eq!(v, GaussianState::vacuum(vec![a("A")]).unwrap());
        assert!(matches!(
            GaussianState::thermal(a("A"), 0.5),
            Err(Error::Unphysical(_))
        ));
    }

    #[test]
    fn occupation_values() {
        assert!((occupation_from_temperature(1.0f64).unwrap() - 1.313_035_285_499_331_5).abs() < 1e-12);
        let n = occupation_from_temperature(0.1f64).unwrap();
        assert!((n - 10.033_311_132_253_99).abs() < 1e-9);
        // 1/x + x/3 series
        assert!((n - (10.0 + 0.1 / 3.0)).abs() < 1e-4);
        assert!((occupation_from_temperature(50.0f64).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(occupation_from_temperature(f64::INFINITY).unwrap(), 1.0);
        assert!(occupation_from_temperature(0.0).is_err());
        assert!(occupation_from_temperature(-1.0).is_err());
    }

    #[test]
    fn tensor_and_discard() {
        let t = GaussianState::thermal(a("A"), 2.0).unwrap();
        let l = GaussianState::vacuum(vec![ModeLabel::light("L")]).unwrap();
        let s = t.tensor(&l).unwrap();
        assert_eq!(s.cov(), &DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 2.0, 1.0, 1.0])));
        assert_eq!(s.discard_mode("L").unwrap(), t);
        assert_eq!(t.tensor(&t).unwrap_err(), Error::DuplicateMode("A".into()));
        assert_eq!(s.discard_mode("Z").unwrap_err(), Error::UnknownMode("Z".into()));
    }

    #[test]
    fn variances() {
        let v = GaussianState::<f64>::vacuum(vec![a("A")]).unwrap();
        assert_eq!(v.variance_of(&DVector::from_vec(vec![1.0, 0.0])).unwrap(), 0.5);
        assert!(v.variance_of(&DVector::from_vec(vec![1.0])).is_err());
    }

    #[test]
    fn physicality_examples() {
        let d = |x: f64, y: f64| DMatrix::from_diagonal(&DVector::from_vec(vec![x, y]));
        assert!(physicality(&DMatrix::<f64>::identity(2, 2)).is_ok());
        assert!(!physicality(&d(0.5, 0.5)).is_ok());
        assert!(physicality(&d(0.5, 2.0)).is_ok());
        assert!(matches!(
            GaussianState::new(vec![a("A")], d(0.5, 0.5), DVector::zeros(2)),
            Err(Error::Unphysical(_))
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[2.0, 0.1, 0.0, 2.0]);
        assert!(matches!(
            GaussianState::new(vec![a("A")], asym, DVector::zeros(2)),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn wigner_values() {
        let v = GaussianState::<f64>::vacuum(vec![a("A")]).unwrap();
        let w0 = v.wigner_density(&DVector::zeros(2)).unwrap();
        assert!((w0 - 1.0 / PI).abs() < 1e-15);
        let w1 = v.wigner_density(&DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert!((w1 - (-1.0f64).exp() / PI).abs() < 1e-15);
        let v2 = GaussianState::<f64>::vacuum(vec![a("A"), a("B")]).unwrap();
        assert!((v2.wigner_density(&DVector::zeros(4)).unwrap() - 1.0 / (PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn wigner_rejects_singular() {
        let s = GaussianState::<f64>::from_parts(vec![a("A")], DMatrix::zeros(2, 2), DVector::zeros(2));
        assert!(matches!(
            s.wigner_density(&DVector::zeros(2)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn wigner_normalizes() {
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 0.8]);
        let s = GaussianState::new(vec![a("A")], cov, DVector::from_vec(vec![0.4, -0.2])).unwrap();
        let step = 0.05;
        let mut total = 0.0;
        let n = (16.0 / step) as usize;
        for i in 0..n {
            for j in 0..n {
                let x = -8.0 + (i as f64 + 0.5) * step;
                let p = -8.0 + (j as f64 + 0.5) * step;
                total += s.wigner_density(&DVector::from_vec(vec![x, p])).unwrap();
            }
        }
        assert!((total * step * step - 1.0).abs() < 1e-4);
    }

    #[test]
    fn works_in_single_precision() {
        let s = GaussianState::<f32>::thermal(a("A"), 1.5).unwrap();
        assert!(s.check_physicality().is_ok());
        assert!((s.variance_of(&DVector::from_vec(vec![1.0, 1.0])).unwrap() - 1.5).abs() < 1e-6);
    }
}
