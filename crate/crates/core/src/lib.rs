//! Covariance-matrix simulation of Faraday atom–light interfaces.
//!
//! Atomic ensembles and light beams are treated as canonical modes of a
//! Gaussian state. Beam transits act as symplectic maps, homodyne
//! detection of the beam conditions the atoms, and entanglement is
//! certified with PPT and variance criteria. The [`protocols`] module runs
//! the standard experiments end to end: EPR generation from thermal
//! ensembles, its two-beam enhancement, entanglement erasure and the
//! four-mode linear cluster.
//!
//! Everything is generic over [`Real`]; `f64` aliases are provided at the
//! crate root.

pub mod dynamics;
pub mod entanglement;
mod error;
pub mod homodyne;
pub mod linalg;
pub mod protocols;
mod scalar;
pub mod state;

pub use dynamics::{
    apply, convert_to_symplectic, heisenberg_matrix, rotate_frame, FrameDirection, FrameRotation,
    PassSpec, SymplecticOp, Transit,
};
pub use entanglement::{
    duan_sum, partial_time_reversal, ppt_all, ppt_test, symplectic_spectrum, vlf_bound, vlf_test,
    Bipartition, ClusterInequality, EntanglementVerdict, VarianceCriterion, VlfVerdict,
};
pub use error::{Error, Result};
pub use homodyne::{conditional_update, measure_homodyne, MeasurementRecord, OutcomePolicy, Quadrature};
pub use protocols::{
    enhanced_threshold, epr_threshold, run_cluster, run_epr, run_epr_enhanced, run_eraser, sweep,
    ProtocolKind, ProtocolParams, ProtocolResult, Reports, Runner, Step, SweepParameter, SweepSpec,
    SweepTable,
};
pub use scalar::Real;
pub use state::{occupation_from_temperature, physicality, GaussianState, ModeKind, ModeLabel, Physicality};

pub type State = GaussianState<f64>;
pub type StateF32 = GaussianState<f32>;
pub type Symplectic = SymplecticOp<f64>;
pub type Pass = PassSpec<f64>;
pub type BeamTransit = Transit<f64>;
pub type Verdict = EntanglementVerdict<f64>;
pub type Record = MeasurementRecord<f64>;
pub type Outcome = OutcomePolicy<f64>;
pub type Result64 = protocols::ProtocolResult<f64>;
pub type Table = SweepTable<f64>;
