//! End-to-end experiments built from the generic pipeline.
//!
//! Every protocol is a list of [`Step`]s executed by a [`Runner`]; the
//! scenario language compiles to the same steps, so both paths perform the
//! same floating-point operations in the same order.

use std::fmt;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::dynamics::{apply, rotate_frame, FrameRotation, SymplecticOp, Transit};
use crate::entanglement::{duan_sum, ppt_test, vlf_test, Bipartition, ClusterInequality, EntanglementVerdict};
use crate::error::{Error, Result};
use crate::homodyne::{measure_homodyne, MeasurementRecord, OutcomePolicy, Quadrature};
use crate::scalar::Real;
use crate::state::{p_index, x_index, GaussianState, ModeLabel};

/// `π · num / den`, the single place angles given as fractions of π are
/// evaluated.
pub fn pi_fraction<T: Real>(num: i32, den: u32) -> T {
    T::pi() * T::lit(num as f64) / T::lit(den as f64)
}

/// Named scalar outputs in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Reports<T> {
    entries: Vec<(String, T)>,
}

impl<T: Copy> Reports<T> {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    /// Inserts or overwrites `name`.
    pub fn push(&mut self, name: impl Into<String>, value: T) {
        let name = name.into();
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((name, value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.entries.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, T)> {
        self.entries.iter().map(|(n, v)| (n.as_str(), *v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One operation of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Step<T: Real> {
    /// Appends fresh modes (thermal ensembles, vacuum beams).
    Prepare(GaussianState<T>),
    Interact(Transit<T>),
    Measure {
        beam: String,
        quadrature: Quadrature,
        policy: OutcomePolicy<T>,
    },
    Rotate(FrameRotation),
}

impl<T: Real> Step<T> {
    pub fn label(&self) -> String {
        match self {
            Step::Prepare(s) => {
                let ids: Vec<&str> = s.modes().iter().map(|m| m.id.as_str()).collect();
                format!("prepare:{}", ids.join(","))
            }
            Step::Interact(t) => format!("interact:{}", t.beam()),
            Step::Measure { beam, quadrature, .. } => format!("measure:{beam}:{quadrature}"),
            Step::Rotate(r) => format!("rotate:{}", r.targets.join(",")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T: Real> {
    pub label: String,
    pub state: GaussianState<T>,
}

/// Executes steps one by one, keeping every intermediate state.
#[derive(Debug, Clone)]
pub struct Runner<T: Real> {
    state: Option<GaussianState<T>>,
    records: Vec<MeasurementRecord<T>>,
    snapshots: Vec<Snapshot<T>>,
}

impl<T: Real> Default for Runner<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Runner<T> {
    pub fn new() -> Self {
        Self {
            state: None,
            records: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    pub fn state(&self) -> Result<&GaussianState<T>> {
        self.state.as_ref().ok_or(Error::EmptyModes)
    }

    pub fn records(&self) -> &[MeasurementRecord<T>] {
        &self.records
    }

    pub fn snapshots(&self) -> &[Snapshot<T>] {
        &self.snapshots
    }

    pub fn step(&mut self, step: &Step<T>) -> Result<()> {
        let next = match step {
            Step::Prepare(fresh) => match &self.state {
                Some(s) => s.tensor(fresh)?,
                None => fresh.clone(),
            },
            Step::Interact(transit) => {
                let s = self.state()?;
                let op = SymplecticOp::from_transit(transit, s.modes())?;
                apply(&op, s)?
            }
            Step::Measure {
                beam,
                quadrature,
                policy,
            } => {
                let index = self.records.len();
                let (s, record) = measure_homodyne(self.state()?, beam, *quadrature, *policy, index)?;
                self.records.push(record);
                s
            }
            Step::Rotate(r) => rotate_frame(r, self.state()?)?,
        };
        self.snapshots.push(Snapshot {
            label: step.label(),
            state: next.clone(),
        });
        self.state = Some(next);
        Ok(())
    }

    pub fn run(steps: &[Step<T>]) -> Result<Self> {
        let mut r = Self::new();
        for s in steps {
            r.step(s)?;
        }
        Ok(r)
    }

    pub fn finish(self, reports: Reports<T>) -> Result<ProtocolResult<T>> {
        let final_state = self.state.ok_or(Error::EmptyModes)?;
        Ok(ProtocolResult {
            final_state,
            records: self.records,
            snapshots: self.snapshots,
            reports,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult<T: Real> {
    pub final_state: GaussianState<T>,
    pub records: Vec<MeasurementRecord<T>>,
    /// State after every step, in execution order.
    pub snapshots: Vec<Snapshot<T>>,
    pub reports: Reports<T>,
}

impl<T: Real> ProtocolResult<T> {
    pub fn snapshot(&self, label: &str) -> Option<&GaussianState<T>> {
        self.snapshots.iter().find(|s| s.label == label).map(|s| &s.state)
    }
}

/// Variance of `Σ c·q(mode)` on `s`.
pub fn quadrature_variance<T: Real>(s: &GaussianState<T>, terms: &[(&str, Quadrature, T)]) -> Result<T> {
    let mut h = DVector::zeros(s.dim());
    for &(id, quad, c) in terms {
        let k = s.index_of(id)?;
        let i = match quad {
            Quadrature::X => x_index(k),
            Quadrature::P => p_index(k),
        };
        h[i] += c;
    }
    s.variance_of(&h)
}

/// Adds `<base>_min_eig`, `<base>_entangled` (0/1) and
/// `<base>_log_negativity`.
pub fn push_ppt<T: Real>(reports: &mut Reports<T>, base: &str, v: &EntanglementVerdict<T>) {
    reports.push(format!("{base}_min_eig"), v.min_pt_symplectic_eig);
    reports.push(
        format!("{base}_entangled"),
        if v.entangled { T::one() } else { T::zero() },
    );
    reports.push(format!("{base}_log_negativity"), v.log_negativity);
}

/// Report name for one split, e.g. `ppt_A1_vs_A2_A3`.
pub fn partition_name(p: &Bipartition) -> String {
    format!("ppt_{}_vs_{}", p.side_a.join("_"), p.side_b.join("_"))
}

/// PPT on every split of `ids`, then `ppt_all_entangled`.
pub fn push_ppt_all<T: Real>(reports: &mut Reports<T>, s: &GaussianState<T>, ids: &[&str]) -> Result<()> {
    let mut all = true;
    for part in Bipartition::all(ids) {
        let v = ppt_test(s, &part)?;
        all &= v.entangled;
        push_ppt(reports, &partition_name(&part), &v);
    }
    reports.push("ppt_all_entangled", if all { T::one() } else { T::zero() });
    Ok(())
}

/// Left-hand side of a cluster inequality on the first four atomic modes
/// of `s`, taken in the current frame.
pub fn cluster_delta<T: Real>(s: &GaussianState<T>, which: ClusterInequality) -> Result<T> {
    let atoms: Vec<&str> = s
        .modes()
        .iter()
        .filter(|m| m.kind == crate::state::ModeKind::Atomic)
        .map(|m| m.id.as_str())
        .collect();
    if atoms.len() < 4 {
        return Err(Error::Criterion(format!(
            "{} needs four atomic modes, found {}",
            which.name(),
            atoms.len()
        )));
    }
    Ok(vlf_test(&s.reduce_to(&atoms[..4])?, &which.criterion())?.lhs())
}

const A1: &str = "A1";
const A2: &str = "A2";

fn two_ensembles<T: Real>(n1: T, n2: T) -> Result<Vec<Step<T>>> {
    Ok(vec![
        Step::Prepare(GaussianState::thermal(ModeLabel::atomic(A1), n1)?),
        Step::Prepare(GaussianState::thermal(ModeLabel::atomic(A2), n2)?),
    ])
}

fn beam_step<T: Real>(
    beam: &str,
    kappa: T,
    samples: &[(&str, T)],
    policy: OutcomePolicy<T>,
) -> Result<Vec<Step<T>>> {
    Ok(vec![
        Step::Prepare(GaussianState::vacuum(vec![ModeLabel::light(beam)])?),
        Step::Interact(Transit::uniform(beam, kappa, samples)?),
        Step::Measure {
            beam: beam.to_string(),
            quadrature: Quadrature::X,
            policy,
        },
    ])
}

/// Variances, Duan sum and PPT verdict of the two-ensemble protocols.
pub fn epr_reports<T: Real>(s: &GaussianState<T>) -> Result<Reports<T>> {
    let one = T::one();
    let mut r = Reports::new();
    r.push(
        "var_p1_plus_p2",
        quadrature_variance(s, &[(A1, Quadrature::P, one), (A2, Quadrature::P, one)])?,
    );
    r.push(
        "var_x1_minus_x2",
        quadrature_variance(s, &[(A1, Quadrature::X, one), (A2, Quadrature::X, -one)])?,
    );
    r.push("duan_lambda1", duan_sum(s, (A1, A2), one)?);
    push_ppt(&mut r, "ppt", &ppt_test(s, &Bipartition::new([A1], [A2]))?);
    Ok(r)
}

/// Beam through both samples at `α = 0`, then `x` measurement; squeezes
/// `p₁ + p₂`.
pub fn epr_steps<T: Real>(n1: T, n2: T, kappa: T, outcome: OutcomePolicy<T>) -> Result<Vec<Step<T>>> {
    let mut steps = two_ensembles(n1, n2)?;
    steps.extend(beam_step("L1", kappa, &[(A1, T::zero()), (A2, T::zero())], outcome)?);
    Ok(steps)
}

pub fn run_epr<T: Real>(n1: T, n2: T, kappa: T, outcome: OutcomePolicy<T>) -> Result<ProtocolResult<T>> {
    let runner = Runner::run(&epr_steps(n1, n2, kappa, outcome)?)?;
    let reports = epr_reports(runner.state()?)?;
    runner.finish(reports)
}

/// First beam as in [`run_epr`], second beam at `(π/2, −π/2)` squeezing
/// `x₁ − x₂`.
pub fn enhanced_steps<T: Real>(n1: T, n2: T, kappa: T, outcomes: [OutcomePolicy<T>; 2]) -> Result<Vec<Step<T>>> {
    let mut steps = epr_steps(n1, n2, kappa, outcomes[0])?;
    let half = pi_fraction::<T>(1, 2);
    steps.extend(beam_step("L2", kappa, &[(A1, half), (A2, -half)], outcomes[1])?);
    Ok(steps)
}

pub fn run_epr_enhanced<T: Real>(
    n1: T,
    n2: T,
    kappa: T,
    outcomes: [OutcomePolicy<T>; 2],
) -> Result<ProtocolResult<T>> {
    let runner = Runner::run(&enhanced_steps(n1, n2, kappa, outcomes)?)?;
    let reports = epr_reports(runner.state()?)?;
    runner.finish(reports)
}

/// EPR generation from vacuum, then a second beam with coupling `eta` at
/// `(π/2, π/2)`.
pub fn eraser_steps<T: Real>(kappa: T, eta: T, outcomes: [OutcomePolicy<T>; 2]) -> Result<Vec<Step<T>>> {
    let mut steps = epr_steps(T::one(), T::one(), kappa, outcomes[0])?;
    let half = pi_fraction::<T>(1, 2);
    steps.extend(beam_step("L2", eta, &[(A1, half), (A2, half)], outcomes[1])?);
    Ok(steps)
}

pub fn run_eraser<T: Real>(kappa: T, eta: T, outcomes: [OutcomePolicy<T>; 2]) -> Result<ProtocolResult<T>> {
    let runner = Runner::run(&eraser_steps(kappa, eta, outcomes)?)?;
    let reports = epr_reports(runner.state()?)?;
    runner.finish(reports)
}

/// Coupling `η = κ/√(1 + 2κ²)` at which the second beam undoes the first.
pub fn erasing_coupling<T: Real>(kappa: T) -> T {
    kappa / (T::one() + T::lit(2.0) * kappa * kappa).sqrt()
}

pub const CLUSTER_MODES: [&str; 4] = ["A1", "A2", "A3", "A4"];

/// Vertex and neighbours of each cluster step (0-based).
const CLUSTER_GRAPH: [(usize, &[usize]); 4] = [(0, &[1]), (1, &[0, 2]), (2, &[1, 3]), (3, &[2])];

/// Lab-frame transit squeezing `p′_a − Σ x′_b`: `α = π/4` on vertex `a`,
/// `α = −π/4` on its neighbours.
pub fn cluster_transit<T: Real>(beam: &str, kappa: T, step: usize) -> Result<Transit<T>> {
    let (a, neighbours) = CLUSTER_GRAPH[step];
    let quarter = pi_fraction::<T>(1, 4);
    let mut samples = vec![(CLUSTER_MODES[a], quarter)];
    samples.extend(neighbours.iter().map(|&b| (CLUSTER_MODES[b], -quarter)));
    Transit::uniform(beam, kappa, &samples)
}

/// Four beam/measure steps in the given order, followed by a rotation of
/// the atoms into the primed frame.
pub fn cluster_steps<T: Real>(
    kappa: T,
    outcomes: [OutcomePolicy<T>; 4],
    order: [usize; 4],
) -> Result<Vec<Step<T>>> {
    let mut sorted = order;
    sorted.sort_unstable();
    if sorted != [0, 1, 2, 3] {
        return Err(Error::Domain(format!("{order:?} is not a permutation of the four steps")));
    }
    let mut steps: Vec<Step<T>> = Vec::new();
    for id in CLUSTER_MODES {
        steps.push(Step::Prepare(GaussianState::vacuum(vec![ModeLabel::atomic(id)])?));
    }
    for (j, &which) in order.iter().enumerate() {
        let beam = format!("L{}", which + 1);
        steps.push(Step::Prepare(GaussianState::vacuum(vec![ModeLabel::light(beam.as_str())])?));
        steps.push(Step::Interact(cluster_transit(&beam, kappa, which)?));
        steps.push(Step::Measure {
            beam,
            quadrature: Quadrature::X,
            policy: outcomes[j],
        });
    }
    steps.push(Step::Rotate(FrameRotation::to_primed(CLUSTER_MODES)));
    Ok(steps)
}

/// Nullifier variances, Δ criteria and PPT on all seven splits, on a
/// primed-frame 4-mode state.
pub fn cluster_reports<T: Real>(s: &GaussianState<T>) -> Result<Reports<T>> {
    let one = T::one();
    let [m1, m2, m3, m4] = CLUSTER_MODES;
    let (x, p) = (Quadrature::X, Quadrature::P);
    let mut r = Reports::new();
    r.push("var_p1_x2", quadrature_variance(s, &[(m1, p, one), (m2, x, -one)])?);
    r.push("var_p2_x1_x3", quadrature_variance(s, &[(m2, p, one), (m1, x, -one), (m3, x, -one)])?);
    r.push("var_p3_x2_x4", quadrature_variance(s, &[(m3, p, one), (m2, x, -one), (m4, x, -one)])?);
    r.push("var_p4_x3", quadrature_variance(s, &[(m4, p, one), (m3, x, -one)])?);
    for which in ClusterInequality::ALL {
        r.push(which.name(), cluster_delta(s, which)?);
    }
    push_ppt_all(&mut r, s, &CLUSTER_MODES)?;
    Ok(r)
}

pub fn run_cluster_in_order<T: Real>(
    kappa: T,
    outcomes: [OutcomePolicy<T>; 4],
    order: [usize; 4],
) -> Result<ProtocolResult<T>> {
    let runner = Runner::run(&cluster_steps(kappa, outcomes, order)?)?;
    let reports = cluster_reports(runner.state()?)?;
    runner.finish(reports)
}

/// Four-mode linear cluster; the final state is in the primed frame.
pub fn run_cluster<T: Real>(kappa: T, outcomes: [OutcomePolicy<T>; 4]) -> Result<ProtocolResult<T>> {
    run_cluster_in_order(kappa, outcomes, [0, 1, 2, 3])
}

fn check_occupation<T: Real>(n: T) -> Result<()> {
    if !n.is_finite() || n < T::one() {
        return Err(Error::Unphysical((n - T::one()).as_f64()));
    }
    Ok(())
}

/// Coupling above which the single-beam Duan sum drops below 2; `None`
/// when `n₁ + n₂ ≥ 4` (no violation at any coupling).
pub fn epr_threshold<T: Real>(n1: T, n2: T) -> Result<Option<T>> {
    check_occupation(n1)?;
    check_occupation(n2)?;
    let s = n1 + n2;
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    if s >= four {
        return Ok(None);
    }
    Ok(Some((two * (s - two) / ((four - s) * s)).max(T::zero()).sqrt()))
}

/// Same threshold for the two-beam protocol.
pub fn enhanced_threshold<T: Real>(n1: T, n2: T) -> Result<T> {
    check_occupation(n1)?;
    check_occupation(n2)?;
    let s = n1 + n2;
    let two = T::lit(2.0);
    Ok(((s - two) / (two * s)).max(T::zero()).sqrt())
}

/// Bisection for the smallest `x ∈ [lo, hi]` where `violated(x)` turns on,
/// assuming it is off at `lo` and on at `hi`.
pub fn find_onset<T: Real>(
    mut lo: T,
    mut hi: T,
    tol: T,
    mut violated: impl FnMut(T) -> Result<bool>,
) -> Result<Option<T>> {
    if violated(lo)? {
        return Ok(Some(lo));
    }
    if !violated(hi)? {
        return Ok(None);
    }
    let half = T::lit(0.5);
    while hi - lo > tol {
        let mid = (lo + hi) * half;
        if violated(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some((lo + hi) * half))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    Epr,
    EprEnhanced,
    Eraser,
    Cluster,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Epr => "epr",
            Self::EprEnhanced => "epr_enhanced",
            Self::Eraser => "eraser",
            Self::Cluster => "cluster",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::Epr, Self::EprEnhanced, Self::Eraser, Self::Cluster]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParameter {
    Kappa,
    Eta,
    N1,
    N2,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::Kappa => "kappa",
            Self::Eta => "eta",
            Self::N1 => "n1",
            Self::N2 => "n2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::Kappa, Self::Eta, Self::N1, Self::N2]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

/// Fixed protocol inputs; the swept one is overridden per grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams<T> {
    pub n1: T,
    pub n2: T,
    pub kappa: T,
    pub eta: T,
}

impl<T: Real> Default for ProtocolParams<T> {
    fn default() -> Self {
        Self {
            n1: T::one(),
            n2: T::one(),
            kappa: T::one(),
            eta: T::zero(),
        }
    }
}

impl<T: Real> ProtocolParams<T> {
    fn with(mut self, p: SweepParameter, v: T) -> Self {
        match p {
            SweepParameter::Kappa => self.kappa = v,
            SweepParameter::Eta => self.eta = v,
            SweepParameter::N1 => self.n1 = v,
            SweepParameter::N2 => self.n2 = v,
        }
        self
    }
}

/// Runs a protocol with all outcomes fixed to zero.
pub fn run_protocol<T: Real>(kind: ProtocolKind, p: &ProtocolParams<T>) -> Result<ProtocolResult<T>> {
    let zero = OutcomePolicy::Fixed(T::zero());
    match kind {
        ProtocolKind::Epr => run_epr(p.n1, p.n2, p.kappa, zero),
        ProtocolKind::EprEnhanced => run_epr_enhanced(p.n1, p.n2, p.kappa, [zero; 2]),
        ProtocolKind::Eraser => run_eraser(p.kappa, p.eta, [zero; 2]),
        ProtocolKind::Cluster => run_cluster(p.kappa, [zero; 4]),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec<T> {
    pub parameter: SweepParameter,
    pub start: T,
    pub stop: T,
    pub step: T,
    pub observables: Vec<String>,
}

/// Grid `start, start + step, …` up to `stop` inclusive (within a relative
/// slack of 1e-9 steps). Empty when `start > stop`.
pub fn grid<T: Real>(start: T, stop: T, step: T) -> Result<Vec<T>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::Range("bounds must be finite".into()));
    }
    if step <= T::zero() {
        return Err(Error::Range(format!("step must be positive, got {step}")));
    }
    if start > stop {
        return Ok(Vec::new());
    }
    let count = ((stop - start) / step + T::lit(1e-9)).floor().as_f64() as usize + 1;
    Ok((0..count).map(|i| start + step * T::lit(i as f64)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable<T> {
    /// Swept parameter first, then the observables.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<T>>,
}

/// Evaluates `spec.observables` on every grid point, in parallel; rows come
/// back in grid order.
pub fn sweep<T: Real>(
    kind: ProtocolKind,
    spec: &SweepSpec<T>,
    fixed: &ProtocolParams<T>,
) -> Result<SweepTable<T>> {
    let points = grid(spec.start, spec.stop, spec.step)?;
    let mut columns = vec![spec.parameter.name().to_string()];
    columns.extend(spec.observables.iter().cloned());
    let rows = points
        .par_iter()
        .map(|&v| {
            let result = run_protocol(kind, &fixed.with(spec.parameter, v))?;
            let mut row = vec![v];
            for name in &spec.observables {
                row.push(
                    result
                        .reports
                        .get(name)
                        .ok_or_else(|| Error::UnknownObservable(name.clone()))?,
                );
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { columns, rows })
}
