//! Faraday (QND) beam transits and their symplectic action on states.
//!
//! A beam transit is described in the Heisenberg picture by a linear map
//! `K` on the quadratures: for each pass through sample `n` at angle `αₙ`
//!
//! ```text
//! x_A ← x_A − κ p_L cos α        p_A ← p_A + κ p_L sin α
//! x_L ← x_L − κ (p_A cos α + x_A sin α)        p_L ← p_L
//! ```
//!
//! The covariance update uses `S = (Kᵀ)⁻¹` with `γ_out = SᵀγS`. Because
//! the coupling part of `K` is nilpotent, `(Kᵀ)⁻¹` is exactly `K̃ᵀ` where
//! `K̃` is the same transit rebuilt with every coupling negated.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;
use crate::state::{p_index, x_index, GaussianState, ModeKind, ModeLabel};

/// Maps an angle into `(−π, π]`.
pub fn normalize_angle<T: Real>(alpha: T) -> T {
    let pi = T::pi();
    if alpha > -pi && alpha <= pi {
        return alpha;
    }
    let two_pi = T::two_pi();
    let mut a = alpha % two_pi;
    if a <= -pi {
        a += two_pi;
    } else if a > pi {
        a -= two_pi;
    }
    a
}

/// One beam–sample interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct PassSpec<T> {
    pub beam: String,
    pub sample: String,
    pub kappa: T,
    pub alpha: T,
}

impl<T: Real> PassSpec<T> {
    pub fn new(beam: impl Into<String>, sample: impl Into<String>, kappa: T, alpha: T) -> Result<Self> {
        if !kappa.is_finite() {
            return Err(Error::NonFinite("kappa"));
        }
        if !alpha.is_finite() {
            return Err(Error::NonFinite("alpha"));
        }
        Ok(Self {
            beam: beam.into(),
            sample: sample.into(),
            kappa,
            alpha: normalize_angle(alpha),
        })
    }
}

/// Ordered passes of a single beam through distinct samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Transit<T> {
    passes: Vec<PassSpec<T>>,
}

impl<T: Real> Transit<T> {
    pub fn new(passes: Vec<PassSpec<T>>) -> Result<Self> {
        let first = passes.first().ok_or(Error::EmptyModes)?;
        let mut samples = HashSet::new();
        for p in &passes {
            if p.beam != first.beam {
                return Err(Error::MixedBeams(first.beam.clone(), p.beam.clone()));
            }
            if !samples.insert(p.sample.as_str()) {
                return Err(Error::DuplicateSample(p.sample.clone()));
            }
        }
        Ok(Self { passes })
    }

    /// Convenience for a beam coupling with one `κ` to several samples.
    pub fn uniform(beam: &str, kappa: T, samples: &[(&str, T)]) -> Result<Self> {
        let passes = samples
            .iter()
            .map(|&(id, alpha)| PassSpec::new(beam, id, kappa, alpha))
            .collect::<Result<Vec<_>>>()?;
        Self::new(passes)
    }

    pub fn beam(&self) -> &str {
        &self.passes[0].beam
    }

    pub fn passes(&self) -> &[PassSpec<T>] {
        &self.passes
    }

    /// The same geometry with every `κₙ → −κₙ`.
    pub fn with_negated_couplings(&self) -> Self {
        Self {
            passes: self
                .passes
                .iter()
                .map(|p| PassSpec {
                    kappa: -p.kappa,
                    ..p.clone()
                })
                .collect(),
        }
    }
}

fn expect_kind(modes: &[ModeLabel], id: &str, kind: ModeKind) -> Result<usize> {
    let k = modes
        .iter()
        .position(|m| m.id == id)
        .ok_or_else(|| Error::UnknownMode(id.to_string()))?;
    if modes[k].kind != kind {
        return Err(Error::WrongModeKind {
            id: id.to_string(),
            expected: kind.as_str(),
            found: modes[k].kind.as_str(),
        });
    }
    Ok(k)
}

/// Heisenberg-picture matrix `K` of a transit, embedded as the identity on
/// modes the beam does not touch.
pub fn heisenberg_matrix<T: Real>(transit: &Transit<T>, modes: &[ModeLabel]) -> Result<DMatrix<T>> {
    let dim = 2 * modes.len();
    let beam = expect_kind(modes, transit.beam(), ModeKind::Light)?;
    let (xl, pl) = (x_index(beam), p_index(beam));
    let mut k = DMatrix::identity(dim, dim);
    for pass in transit.passes() {
        let a = expect_kind(modes, &pass.sample, ModeKind::Atomic)?;
        let (xa, pa) = (x_index(a), p_index(a));
        let (sin, cos) = pass.alpha.sin_cos();
        let kappa = pass.kappa;
        k[(xa, pl)] -= kappa * cos;
        k[(pa, pl)] += kappa * sin;
        k[(xl, pa)] -= kappa * cos;
        k[(xl, xa)] -= kappa * sin;
    }
    Ok(k)
}

/// Largest entry of `|SᵀJS − J|`.
pub fn symplectic_defect<T: Real>(s: &DMatrix<T>) -> T {
    let j = linalg::symplectic_form::<T>(s.nrows() / 2);
    linalg::max_abs_diff(&(s.transpose() * &j * s), &j)
}

/// A phase-space map `γ ↦ SᵀγS` over a fixed mode ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOp<T: Real> {
    matrix: DMatrix<T>,
    acts_on: Vec<ModeLabel>,
}

impl<T: Real> SymplecticOp<T> {
    /// Wraps a matrix after checking `SᵀJS = J`.
    pub fn new(matrix: DMatrix<T>, acts_on: Vec<ModeLabel>) -> Result<Self> {
        let dim = 2 * acts_on.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        let defect = symplectic_defect(&matrix);
        let scale = linalg::max_abs(&matrix).max(T::one());
        if !(defect <= T::certificate_tol() * scale * scale) {
            return Err(Error::Domain(format!(
                "matrix is not symplectic (defect {:e})",
                defect.as_f64()
            )));
        }
        Ok(Self { matrix, acts_on })
    }

    pub fn identity(acts_on: Vec<ModeLabel>) -> Self {
        let dim = 2 * acts_on.len();
        Self {
            matrix: DMatrix::identity(dim, dim),
            acts_on,
        }
    }

    /// `heisenberg_matrix` followed by `convert_to_symplectic`.
    pub fn from_transit(transit: &Transit<T>, modes: &[ModeLabel]) -> Result<Self> {
        let k = heisenberg_matrix(transit, modes)?;
        convert_to_symplectic(&k, modes.to_vec())
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn acts_on(&self) -> &[ModeLabel] {
        &self.acts_on
    }

    pub fn defect(&self) -> T {
        symplectic_defect(&self.matrix)
    }

    /// Change of phase-space frame: returns `M S M⁻¹` for an orthogonal
    /// frame map `M` given per mode.
    pub fn conjugate(&self, frame: &FrameRotation) -> Result<Self> {
        let m = frame.matrix::<T>(&self.acts_on)?;
        Ok(Self {
            matrix: &m * &self.matrix * m.transpose(),
            acts_on: self.acts_on.clone(),
        })
    }
}

/// Phase-space symplectic matrix of a Heisenberg map: `S = (Kᵀ)⁻¹`.
pub fn convert_to_symplectic<T: Real>(k: &DMatrix<T>, acts_on: Vec<ModeLabel>) -> Result<SymplecticOp<T>> {
    if k.nrows() != k.ncols() {
        return Err(Error::Dimension {
            expected: k.nrows(),
            got: k.ncols(),
        });
    }
    let s = linalg::inverse(&k.transpose())?;
    SymplecticOp::new(s, acts_on)
}

/// `γ_out = SᵀγS`, `d_out = Sᵀd`.
pub fn apply<T: Real>(op: &SymplecticOp<T>, s: &GaussianState<T>) -> Result<GaussianState<T>> {
    if op.acts_on.len() != s.n_modes() {
        return Err(Error::Dimension {
            expected: s.dim(),
            got: op.matrix.nrows(),
        });
    }
    if let Some(m) = op.acts_on.iter().zip(s.modes()).find(|(a, b)| a.id != b.id) {
        return Err(Error::UnknownMode(m.0.id.clone()));
    }
    let st = op.matrix.transpose();
    let cov = &st * s.cov() * &op.matrix;
    let disp = &st * s.disp();
    Ok(s.with_moments(cov, disp))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameDirection {
    ToPrimed,
    FromPrimed,
}

/// Local rotation `x′ = (x − p)/√2`, `p′ = (x + p)/√2` on chosen modes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameRotation {
    pub targets: Vec<String>,
    pub direction: FrameDirection,
}

impl FrameRotation {
    pub fn to_primed<S: Into<String>>(targets: impl IntoIterator<Item = S>) -> Self {
        Self {
            targets: targets.into_iter().map(Into::into).collect(),
            direction: FrameDirection::ToPrimed,
        }
    }

    pub fn from_primed<S: Into<String>>(targets: impl IntoIterator<Item = S>) -> Self {
        Self {
            targets: targets.into_iter().map(Into::into).collect(),
            direction: FrameDirection::FromPrimed,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            targets: self.targets.clone(),
            direction: match self.direction {
                FrameDirection::ToPrimed => FrameDirection::FromPrimed,
                FrameDirection::FromPrimed => FrameDirection::ToPrimed,
            },
        }
    }

    fn block<T: Real>(&self) -> Matrix2<T> {
        let h = T::one() / T::lit(2.0).sqrt();
        let r = Matrix2::new(h, -h, h, h);
        match self.direction {
            FrameDirection::ToPrimed => r,
            FrameDirection::FromPrimed => r.transpose(),
        }
    }

    /// Full coordinate map `ζ′ = Mζ` over `modes`.
    pub fn matrix<T: Real>(&self, modes: &[ModeLabel]) -> Result<DMatrix<T>> {
        local_map(modes, &self.targets, &self.block())
    }
}

/// Block-diagonal coordinate map applying `block` on `targets` only.
pub(crate) fn local_map<T: Real>(modes: &[ModeLabel], targets: &[String], block: &Matrix2<T>) -> Result<DMatrix<T>> {
    let dim = 2 * modes.len();
    let mut m = DMatrix::identity(dim, dim);
    for id in targets {
        let k = modes
            .iter()
            .position(|l| &l.id == id)
            .ok_or_else(|| Error::UnknownMode(id.clone()))?;
        m.view_mut((x_index(k), x_index(k)), (2, 2)).copy_from(block);
    }
    Ok(m)
}

/// Applies a coordinate map `ζ′ = Mζ`: `γ′ = MγMᵀ`, `d′ = Md`.
pub(crate) fn transform_coordinates<T: Real>(s: &GaussianState<T>, m: &DMatrix<T>) -> GaussianState<T> {
    let cov = m * s.cov() * m.transpose();
    let disp: DVector<T> = m * s.disp();
    s.with_moments(cov, disp)
}

pub fn rotate_frame<T: Real>(r: &FrameRotation, s: &GaussianState<T>) -> Result<GaussianState<T>> {
    let m = r.matrix(s.modes())?;
    Ok(transform_coordinates(s, &m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn modes(ids: &[(&str, ModeKind)]) -> Vec<ModeLabel> {
        ids.iter().map(|&(i, k)| ModeLabel::new(i, k)).collect()
    }

    fn two_sample_modes() -> Vec<ModeLabel> {
        modes(&[("A1", ModeKind::Atomic), ("A2", ModeKind::Atomic), ("L", ModeKind::Light)])
    }

    #[test]
    fn single_pass_matches_printed_k() {
        let m = modes(&[("A", ModeKind::Atomic), ("L", ModeKind::Light)]);
        let (kappa, alpha) = (0.7f64, 0.3f64);
        let t = Transit::new(vec![PassSpec::new("L", "A", kappa, alpha).unwrap()]).unwrap();
        let k = heisenberg_matrix(&t, &m).unwrap();
        let (s, c) = (alpha.sin(), alpha.cos());
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            1.0, 0.0, 0.0, -kappa * c,
            0.0, 1.0, 0.0, kappa * s,
            -kappa * s, -kappa * c, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        ]);
        assert!(linalg::max_abs_diff(&k, &expected) < 1e-15);
    }

    #[test]
    fn zero_coupling_is_identity() {
        let m = two_sample_modes();
        let t = Transit::uniform("L", 0.0, &[("A1", 0.0), ("A2", 1.0)]).unwrap();
        assert_eq!(heisenberg_matrix(&t, &m).unwrap(), DMatrix::identity(6, 6));
        let s = SymplecticOp::from_transit(&t, &m).unwrap();
        assert_eq!(s.matrix(), &DMatrix::identity(6, 6));
    }

    #[test]
    fn two_samples_reproduce_printed_s_int() {
        let kappa = 0.9;
        let m = two_sample_modes();
        let t = Transit::uniform("L", kappa, &[("A1", 0.0), ("A2", 0.0)]).unwrap();
        let k = heisenberg_matrix(&t, &m).unwrap();
        assert_eq!(k[(4, 1)], -kappa);
        assert_eq!(k[(4, 3)], -kappa);
        let s = SymplecticOp::from_transit(&t, &m).unwrap();
        #[rustfmt::skip]
        let printed = DMatrix::from_row_slice(6, 6, &[
            1.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0, kappa, 0.0,
            0.0, 0.0, 1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0, kappa, 0.0,
            0.0, 0.0, 0.0, 0.0, 1.0, 0.0,
            kappa, 0.0, kappa, 0.0, 0.0, 1.0,
        ]);
        assert!(linalg::max_abs_diff(s.matrix(), &printed) < 1e-15);
    }

    #[test]
    fn eraser_geometry_reproduces_printed_matrix() {
        let eta = 0.45;
        let m = two_sample_modes();
        let t = Transit::uniform("L", eta, &[("A1", FRAC_PI_2), ("A2", FRAC_PI_2)]).unwrap();
        let s = SymplecticOp::from_transit(&t, &m).unwrap();
        #[rustfmt::skip]
        let printed = DMatrix::from_row_slice(6, 6, &[
            1.0, 0.0, 0.0, 0.0, eta, 0.0,
            0.0, 1.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0, eta, 0.0,
            0.0, 0.0, 0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 1.0, 0.0,
            0.0, -eta, 0.0, -eta, 0.0, 1.0,
        ]);
        assert!(linalg::max_abs_diff(s.matrix(), &printed) < 1e-15);
    }

    #[test]
    fn inverse_equals_negated_rebuild() {
        let m = two_sample_modes();
        let t = Transit::new(vec![
            PassSpec::new("L", "A1", 1.3, 0.4).unwrap(),
            PassSpec::new("L", "A2", -0.6, -2.1).unwrap(),
        ])
        .unwrap();
        let s = SymplecticOp::from_transit(&t, &m).unwrap();
        let k_tilde = heisenberg_matrix(&t.with_negated_couplings(), &m).unwrap();
        assert!(linalg::max_abs_diff(s.matrix(), &k_tilde.transpose()) < 1e-13);
    }

    #[test]
    fn transit_validation() {
        let p = |b: &str, s: &str| PassSpec::new(b, s, 1.0, 0.0).unwrap();
        assert_eq!(
            Transit::new(vec![p("L", "A1"), p("L", "A1")]).unwrap_err(),
            Error::DuplicateSample("A1".into())
        );
        assert!(matches!(
            Transit::new(vec![p("L", "A1"), p("M", "A2")]),
            Err(Error::MixedBeams(..))
        ));
        let m = two_sample_modes();
        let t = Transit::new(vec![p("L", "A9")]).unwrap();
        assert_eq!(heisenberg_matrix(&t, &m).unwrap_err(), Error::UnknownMode("A9".into()));
        let t = Transit::new(vec![p("A1", "A2")]).unwrap();
        assert!(matches!(heisenberg_matrix(&t, &m), Err(Error::WrongModeKind { .. })));
        assert!(PassSpec::new("L", "A", f64::NAN, 0.0).is_err());
    }

    #[test]
    fn angles_normalize() {
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-15);
        assert!((normalize_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
        assert_eq!(normalize_angle(0.25), 0.25);
    }

    #[test]
    fn singular_k_is_rejected() {
        let m = modes(&[("A", ModeKind::Atomic)]);
        assert_eq!(
            convert_to_symplectic(&DMatrix::<f64>::zeros(2, 2), m).unwrap_err(),
            Error::Singular
        );
    }

    #[test]
    fn frame_rotation_examples() {
        let m = modes(&[("A", ModeKind::Atomic)]);
        let v = GaussianState::<f64>::vacuum(m.clone()).unwrap();
        let r = FrameRotation::to_primed(["A"]);
        assert!(linalg::max_abs_diff(rotate_frame(&r, &v).unwrap().cov(), v.cov()) < 1e-15);

        let (a, b) = (3.0f64, 0.5f64);
        let s = GaussianState::new(
            m,
            DMatrix::from_diagonal(&DVector::from_vec(vec![a, b])),
            DVector::from_vec(vec![0.2, -1.0]),
        )
        .unwrap();
        let p = rotate_frame(&r, &s).unwrap();
        assert!((p.cov()[(0, 0)] - (a + b) / 2.0).abs() < 1e-15);
        let back = rotate_frame(&r.inverse(), &p).unwrap();
        assert!(linalg::max_abs_diff(back.cov(), s.cov()) < 1e-14);
        assert!((back.disp() - s.disp()).amax() < 1e-14);
        assert!(rotate_frame(&FrameRotation::to_primed(["B"]), &s).is_err());
    }

    #[test]
    fn apply_identity_and_mismatch() {
        let m = two_sample_modes();
        let s = GaussianState::thermal(ModeLabel::atomic("A1"), 2.0)
            .unwrap()
            .tensor(&GaussianState::vacuum(m[1..].to_vec()).unwrap())
            .unwrap();
        let out = apply(&SymplecticOp::identity(m.clone()), &s).unwrap();
        assert_eq!(out, s);
        let short = SymplecticOp::<f64>::identity(m[..2].to_vec());
        assert!(apply(&short, &s).is_err());
    }
}
