//! Homodyne detection of a light quadrature.
//!
//! For `γ = [[γ_A, C], [Cᵀ, γ_L]]` and an `x` measurement with outcome `x̃`
//! the remaining modes are updated as
//!
//! ```text
//! γ_A′ = γ_A − C (Xγ_L X)⁺ Cᵀ        d_A′ = d_A + C (Xγ_L X)⁺ (x̃ − d_x, 0)
//! ```
//!
//! with `X = diag(1, 0)` and `⁺` the inverse on the support. A `p`
//! measurement first exchanges `(x, p) → (p, −x)` on the beam.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;
use crate::state::{p_index, x_index, GaussianState, ModeKind, ModeLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrature {
    X,
    P,
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quadrature::X => "x",
            Quadrature::P => "p",
        })
    }
}

/// How the measurement outcome is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutcomePolicy<T> {
    Fixed(T),
    /// Draw from the Born-rule marginal. The stream is derived from
    /// `(seed, step_index)` only.
    Sampled { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord<T> {
    pub measured_mode: ModeLabel,
    pub quadrature: Quadrature,
    pub outcome: T,
    pub step_index: usize,
}

fn step_rng(seed: u64, step_index: usize) -> ChaCha8Rng {
    let mix = (step_index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    ChaCha8Rng::seed_from_u64(seed ^ mix)
}

/// Draws a homodyne outcome with mean `mean` and variance `gamma_xx / 2`.
pub fn sample_outcome<T: Real>(mean: T, gamma_xx: T, seed: u64, step_index: usize) -> T {
    let std = (gamma_xx.as_f64() * 0.5).max(0.0).sqrt();
    let normal = Normal::new(mean.as_f64(), std).expect("finite std");
    T::lit(normal.sample(&mut step_rng(seed, step_index)))
}

/// Schur-complement update on the support of `Xγ_L X`.
///
/// `outcome` is measured relative to the beam's prior mean. Returns the new
/// covariance of the remaining modes and the shift of their displacement.
pub fn conditional_update<T: Real>(
    gamma_a: &DMatrix<T>,
    gamma_l: &DMatrix<T>,
    c: &DMatrix<T>,
    quad: Quadrature,
    outcome: T,
) -> Result<(DMatrix<T>, DVector<T>)> {
    let m = gamma_a.nrows();
    if gamma_a.ncols() != m {
        return Err(Error::Dimension { expected: m, got: gamma_a.ncols() });
    }
    if gamma_l.shape() != (2, 2) {
        return Err(Error::Dimension { expected: 2, got: gamma_l.nrows().max(gamma_l.ncols()) });
    }
    if c.shape() != (m, 2) {
        return Err(Error::Dimension { expected: m, got: c.nrows() });
    }
    let (gamma_l, c) = match quad {
        Quadrature::X => (gamma_l.clone(), c.clone()),
        Quadrature::P => {
            let e = DMatrix::from_row_slice(2, 2, &[T::zero(), T::one(), -T::one(), T::zero()]);
            (&e * gamma_l * e.transpose(), c * e.transpose())
        }
    };
    let mut x_proj = DMatrix::zeros(2, 2);
    x_proj[(0, 0)] = T::one();
    let xgx = &x_proj * &gamma_l * &x_proj;

    let variance = gamma_l[(0, 0)];
    let scale = linalg::max_abs(&gamma_l).max(T::one());
    let c_col = c.column(0).amax();
    if variance <= T::support_cutoff() * scale && c_col > T::boundary_tol() {
        return Err(Error::IllConditioned { variance: variance.as_f64() });
    }

    let inv = linalg::pseudo_inverse(&xgx, T::support_cutoff());
    let gain = &c * &inv;
    let mut cov = gamma_a - &gain * c.transpose();
    linalg::symmetrize(&mut cov);
    let shift = &gain * DVector::from_vec(vec![outcome, T::zero()]);
    Ok((cov, shift))
}

/// Measures `quad` of light mode `beam` and removes it from the state.
pub fn measure_homodyne<T: Real>(
    s: &GaussianState<T>,
    beam: &str,
    quad: Quadrature,
    policy: OutcomePolicy<T>,
    step_index: usize,
) -> Result<(GaussianState<T>, MeasurementRecord<T>)> {
    let k = s.index_of(beam)?;
    let label = s.modes()[k].clone();
    if label.kind != ModeKind::Light {
        return Err(Error::WrongModeKind {
            id: beam.to_string(),
            expected: ModeKind::Light.as_str(),
            found: label.kind.as_str(),
        });
    }
    if s.n_modes() == 1 {
        return Err(Error::EmptyModes);
    }
    let (xl, pl) = (x_index(k), p_index(k));
    let rest: Vec<usize> = (0..s.dim()).filter(|&i| i != xl && i != pl).collect();
    let beam_rows = [xl, pl];

    let cov = s.cov();
    let gamma_a = cov.select_rows(&rest).select_columns(&rest);
    let gamma_l = cov.select_rows(&beam_rows).select_columns(&beam_rows);
    let c = cov.select_rows(&rest).select_columns(&beam_rows);

    let measured = match quad {
        Quadrature::X => xl,
        Quadrature::P => pl,
    };
    // The exchange (x, p) → (p, −x) maps the p quadrature onto x unchanged.
    let mean = s.disp()[measured];
    let outcome = match policy {
        OutcomePolicy::Fixed(v) => {
            if !v.is_finite() {
                return Err(Error::NonFinite("outcome"));
            }
            v
        }
        OutcomePolicy::Sampled { seed } => sample_outcome(mean, cov[(measured, measured)], seed, step_index),
    };

    let (cov_a, shift) = conditional_update(&gamma_a, &gamma_l, &c, quad, outcome - mean)?;
    let disp_a = s.disp().select_rows(&rest) + shift;
    let modes: Vec<ModeLabel> = s
        .modes()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, m)| m.clone())
        .collect();
    let record = MeasurementRecord {
        measured_mode: label,
        quadrature: quad,
        outcome,
        step_index,
    };
    Ok((GaussianState::from_parts(modes, cov_a, disp_a), record))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product_state() -> GaussianState<f64> {
        GaussianState::thermal(ModeLabel::atomic("A"), 1.7)
            .unwrap()
            .tensor(&GaussianState::vacuum(vec![ModeLabel::light("L")]).unwrap())
            .unwrap()
    }

    #[test]
    fn uncorrelated_beam_is_a_noop() {
        let s = product_state();
        let (out, rec) = measure_homodyne(&s, "L", Quadrature::X, OutcomePolicy::Fixed(2.5), 0).unwrap();
        assert_eq!(out.cov(), &DMatrix::from_diagonal_element(2, 2, 1.7));
        assert_eq!(out.disp(), &DVector::zeros(2));
        assert_eq!(rec.outcome, 2.5);
        assert_eq!(out.modes(), &[ModeLabel::atomic("A")]);
    }

    #[test]
    fn zero_correlation_block_update() {
        let ga = DMatrix::from_diagonal_element(2, 2, 3.0);
        let gl = DMatrix::identity(2, 2);
        let (g, d) = conditional_update(&ga, &gl, &DMatrix::zeros(2, 2), Quadrature::X, 1.0).unwrap();
        assert_eq!(g, ga);
        assert_eq!(d, DVector::zeros(2));
    }

    #[test]
    fn rejects_atomic_and_unknown_modes() {
        let s = product_state();
        assert!(matches!(
            measure_homodyne(&s, "A", Quadrature::X, OutcomePolicy::Fixed(0.0), 0),
            Err(Error::WrongModeKind { .. })
        ));
        assert_eq!(
            measure_homodyne(&s, "Q", Quadrature::X, OutcomePolicy::Fixed(0.0), 0).unwrap_err(),
            Error::UnknownMode("Q".into())
        );
    }

    #[test]
    fn ill_conditioned_measurement() {
        let ga = DMatrix::identity(2, 2);
        let gl = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let c = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0]);
        assert!(matches!(
            conditional_update(&ga, &gl, &c, Quadrature::X, 0.0),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn p_measurement_selects_the_momentum_block() {
        // Correlate A's x with L's p only; an x measurement must not touch A.
        #[rustfmt::skip]
        let cov = DMatrix::from_row_slice(4, 4, &[
            2.0, 0.0, 0.0, 1.0,
            0.0, 2.0, 0.0, 0.0,
            0.0, 0.0, 2.0, 0.0,
            1.0, 0.0, 0.0, 2.0,
        ]);
        let s = GaussianState::new(
            vec![ModeLabel::atomic("A"), ModeLabel::light("L")],
            cov,
            DVector::zeros(4),
        )
        .unwrap();
        let (ox, _) = measure_homodyne(&s, "L", Quadrature::X, OutcomePolicy::Fixed(1.0), 0).unwrap();
        assert_eq!(ox.cov()[(0, 0)], 2.0);
        let (op, _): (GaussianState<f64>, _) = measure_homodyne(&s, "L", Quadrature::P, OutcomePolicy::Fixed(1.0), 0).unwrap();
        assert!((op.cov()[(0, 0)] - 1.5).abs() < 1e-15);
        assert!((op.disp()[0] - 0.5).abs() < 1e-15);
        assert!(op.check_physicality().is_ok());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_outcome(0.0, 2.0, 42, 3);
        let b = sample_outcome(0.0, 2.0, 42, 3);
        let c = sample_outcome(0.0, 2.0, 42, 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_outcomes_follow_the_marginal() {
        let n = 20_000;
        let draws: Vec<f64> = (0..n).map(|i| sample_outcome(0.3, 3.0, 7, i)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((mean - 0.3).abs() < 0.05);
        assert!((var - 1.5).abs() < 0.06);
    }
}
