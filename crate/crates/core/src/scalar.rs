//! Scalar abstraction shared by every numerical module.
//!
//! All state and dynamics code is written against [`Real`], so the same
//! pipeline runs in `f64` (the reference precision) or `f32`.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable for covariance-matrix arithmetic.
///
/// The tolerance hooks are scaled to the precision of the type; for `f64`
/// they are the values the library is specified against.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Slack for positivity and PPT boundary decisions.
    fn boundary_tol() -> Self;
    /// Maximum accepted asymmetry of a covariance matrix.
    fn symmetry_tol() -> Self;
    /// Maximum entrywise deviation of `SᵀJS` from `J`.
    fn certificate_tol() -> Self;
    /// Relative singular-value cutoff for inverses on the support.
    fn support_cutoff() -> Self;

    /// Converts an `f64` literal. Never fails for the implemented types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f64 {
    fn boundary_tol() -> Self {
        1e-9
    }
    fn symmetry_tol() -> Self {
        1e-12
    }
    fn certificate_tol() -> Self {
        1e-10
    }
    fn support_cutoff() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn boundary_tol() -> Self {
        1e-4
    }
    fn symmetry_tol() -> Self {
        1e-5
    }
    fn certificate_tol() -> Self {
        1e-4
    }
    fn support_cutoff() -> Self {
        1e-6
    }
}
