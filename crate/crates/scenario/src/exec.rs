//! Runs a parsed scenario through the same step engine as the named
//! protocols.

use std::collections::HashMap;
use std::fmt;

use cvfaraday::protocols::{
    cluster_delta, grid, partition_name, pi_fraction, push_ppt, push_ppt_all, quadrature_variance,
    Runner, Step,
};
use cvfaraday::{
    duan_sum, ppt_test, vlf_test, Bipartition, ClusterInequality, Error, FrameDirection, FrameRotation,
    GaussianState, ModeKind, ModeLabel, OutcomePolicy, PassSpec, ProtocolResult, Reports, SweepTable,
    Transit, VarianceCriterion,
};
use rayon::prelude::*;

use crate::ast::*;

/// Largest number of simultaneously present modes a scenario may create.
pub const MAX_MODES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub span: Option<SourceSpan>,
    pub error: Error,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(s) => write!(f, "{s}: {}", self.error),
            None => write!(f, "{}", self.error),
        }
    }
}

impl std::error::Error for RunError {}

fn at(span: SourceSpan) -> impl Fn(Error) -> RunError {
    move |error| RunError {
        span: Some(span),
        error,
    }
}

struct Env {
    params: HashMap<String, f64>,
}

impl Env {
    fn num(&self, n: &Num) -> Result<f64, Error> {
        match n {
            Num::Lit(v) => Ok(*v),
            Num::Param(p) => self
                .params
                .get(p)
                .copied()
                .ok_or_else(|| Error::Domain(format!("parameter `{p}` has no value"))),
        }
    }

    fn angle(&self, a: &Angle) -> Result<f64, Error> {
        match a {
            Angle::Radians(n) => self.num(n),
            Angle::Degrees(v) => Ok(v.to_radians()),
            Angle::PiFraction { num, den } => Ok(pi_fraction(*num, *den)),
        }
    }
}

struct Pending {
    span: SourceSpan,
    passes: Vec<PassSpec<f64>>,
}

struct Exec {
    env: Env,
    seed: u64,
    runner: Runner<f64>,
    pending: Option<Pending>,
    reports: Reports<f64>,
}

impl Exec {
    fn step(&mut self, step: Step<f64>, span: SourceSpan) -> Result<(), RunError> {
        if let Step::Prepare(fresh) = &step {
            let present = self.runner.state().map_or(0, |s| s.n_modes());
            if present + fresh.n_modes() > MAX_MODES {
                return Err(at(span)(Error::Domain(format!("more than {MAX_MODES} modes"))));
            }
        }
        self.runner.step(&step).map_err(at(span))
    }

    fn flush(&mut self) -> Result<(), RunError> {
        if let Some(p) = self.pending.take() {
            let transit = Transit::new(p.passes).map_err(at(p.span))?;
            self.step(Step::Interact(transit), p.span)?;
        }
        Ok(())
    }

    fn statement(&mut self, s: &Statement) -> Result<(), RunError> {
        let span = s.span;
        let err = at(span);
        if let StatementKind::Pass {
            beam,
            sample,
            kappa,
            alpha,
        } = &s.node
        {
            let kappa = self.env.num(&kappa.node).map_err(at(kappa.span))?;
            let alpha = self.env.angle(&alpha.node).map_err(at(alpha.span))?;
            let pass = PassSpec::new(beam.node.as_str(), sample.node.as_str(), kappa, alpha).map_err(&err)?;
            match &mut self.pending {
                Some(p) if p.passes[0].beam == beam.node => p.passes.push(pass),
                _ => {
                    self.flush()?;
                    self.pending = Some(Pending {
                        span,
                        passes: vec![pass],
                    });
                }
            }
            return Ok(());
        }
        self.flush()?;
        match &s.node {
            StatementKind::Param { .. } | StatementKind::Sweep { .. } | StatementKind::Pass { .. } => Ok(()),
            StatementKind::Ensemble { id, n } => {
                let n = self.env.num(&n.node).map_err(at(n.span))?;
                let state = GaussianState::thermal(ModeLabel::atomic(id.node.as_str()), n).map_err(&err)?;
                self.step(Step::Prepare(state), span)
            }
            StatementKind::Beam { id } => {
                let state = GaussianState::vacuum(vec![ModeLabel::light(id.node.as_str())]).map_err(&err)?;
                self.step(Step::Prepare(state), span)
            }
            StatementKind::Measure {
                beam,
                quadrature,
                policy,
            } => {
                let policy = match policy {
                    Policy::Sample => OutcomePolicy::Sampled { seed: self.seed },
                    Policy::Fixed(v) => OutcomePolicy::Fixed(self.env.num(&v.node).map_err(at(v.span))?),
                };
                self.step(
                    Step::Measure {
                        beam: beam.node.clone(),
                        quadrature: *quadrature,
                        policy,
                    },
                    span,
                )
            }
            StatementKind::Rotate { direction, targets } => {
                let ids = targets.iter().map(|t| t.node.as_str());
                let r = match direction {
                    FrameDirection::ToPrimed => FrameRotation::to_primed(ids),
                    FrameDirection::FromPrimed => FrameRotation::from_primed(ids),
                };
                self.step(Step::Rotate(r), span)
            }
            StatementKind::Report(r) => self.report(r).map_err(err),
        }
    }

    fn report(&mut self, r: &Report) -> Result<(), Error> {
        let s = self.runner.state()?;
        let name = |default: String| r.name.as_ref().map_or(default, |n| n.node.clone());
        match &r.kind {
            ReportKind::State => {}
            ReportKind::Ppt(Partition::All) => {
                let ids: Vec<&str> = s.modes().iter().map(|m| m.id.as_str()).collect();
                push_ppt_all(&mut self.reports, s, &ids)?;
            }
            ReportKind::Ppt(Partition::Split(a, b)) => {
                let part = Bipartition::new(a.iter().map(|i| i.node.as_str()), b.iter().map(|i| i.node.as_str()));
                let verdict = ppt_test(s, &part)?;
                push_ppt(&mut self.reports, &name(partition_name(&part)), &verdict);
            }
            ReportKind::Duan { a, b, lambda } => {
                let v = duan_sum(s, (&a.node, &b.node), self.env.num(&lambda.node)?)?;
                self.reports.push(name(format!("duan_{}_{}", a.node, b.node)), v);
            }
            ReportKind::Vlf(Vlf::Named(d)) => {
                let which = match d {
                    DeltaName::Delta1 => ClusterInequality::Delta1,
                    DeltaName::Delta2 => ClusterInequality::Delta2,
                    DeltaName::Delta3 => ClusterInequality::Delta3,
                };
                let v = cluster_delta(s, which)?;
                self.reports.push(name(which.name().to_string()), v);
            }
            ReportKind::Vlf(Vlf::Explicit(v)) => {
                let nums = |xs: &[Spanned<Num>]| xs.iter().map(|x| self.env.num(&x.node)).collect::<Result<Vec<_>, _>>();
                let zero_based = |xs: &[usize]| xs.iter().map(|k| k - 1).collect::<Vec<_>>();
                let criterion = VarianceCriterion {
                    h: nums(&v.h)?,
                    g: nums(&v.g)?,
                    distinguished: (v.left[0] - 1, v.right[0] - 1),
                    groups: (zero_based(&v.left[1..]), zero_based(&v.right[1..])),
                    exchanged: zero_based(&v.exchanged),
                };
                let atoms: Vec<&str> = s
                    .modes()
                    .iter()
                    .filter(|m| m.kind == ModeKind::Atomic)
                    .map(|m| m.id.as_str())
                    .collect();
                let n = criterion.h.len();
                if atoms.len() < n {
                    return Err(Error::Criterion(format!(
                        "criterion spans {n} modes, state has {} ensembles",
                        atoms.len()
                    )));
                }
                let lhs = vlf_test(&s.reduce_to(&atoms[..n])?, &criterion)?.lhs();
                self.reports.push(name("vlf".into()), lhs);
            }
            ReportKind::Variance(terms) => {
                let terms = terms
                    .iter()
                    .map(|t| Ok((t.mode.node.as_str(), t.quadrature, self.env.num(&t.coeff.node)?)))
                    .collect::<Result<Vec<_>, Error>>()?;
                let v = quadrature_variance(s, &terms)?;
                self.reports.push(name("variance".into()), v);
            }
        }
        Ok(())
    }
}

/// Runs `ast`; sampled measurements draw from `seed`.
pub fn execute(ast: &ScenarioAst, seed: u64) -> Result<ProtocolResult<f64>, RunError> {
    execute_with(ast, seed, &[])
}

/// Like [`execute`] with some declared parameters overridden.
pub fn execute_with(
    ast: &ScenarioAst,
    seed: u64,
    overrides: &[(&str, f64)],
) -> Result<ProtocolResult<f64>, RunError> {
    let mut params = HashMap::new();
    for s in &ast.statements {
        if let StatementKind::Param { name, value } = &s.node {
            params.insert(name.node.clone(), value.node);
        }
    }
    for &(k, v) in overrides {
        match params.get_mut(k) {
            Some(slot) => *slot = v,
            None => {
                return Err(RunError {
                    span: None,
                    error: Error::Domain(format!("scenario declares no parameter `{k}`")),
                })
            }
        }
    }
    let mut exec = Exec {
        env: Env { params },
        seed,
        runner: Runner::new(),
        pending: None,
        reports: Reports::new(),
    };
    for s in &ast.statements {
        exec.statement(s)?;
    }
    exec.flush()?;
    let Exec { runner, reports, .. } = exec;
    runner.finish(reports).map_err(|error| RunError { span: None, error })
}

/// Re-runs the scenario for every grid value of `param`; columns are the
/// parameter followed by the scenario's reports.
pub fn sweep_scenario(
    ast: &ScenarioAst,
    seed: u64,
    param: &str,
    range: (f64, f64, f64),
) -> Result<SweepTable<f64>, RunError> {
    let no_span = |error| RunError { span: None, error };
    let declared = ast
        .statements
        .iter()
        .any(|s| matches!(&s.node, StatementKind::Param { name, .. } if name.node == param));
    if !declared {
        return Err(no_span(Error::Domain(format!("scenario declares no parameter `{param}`"))));
    }
    let points = grid(range.0, range.1, range.2).map_err(no_span)?;
    let runs = points
        .par_iter()
        .map(|&v| execute_with(ast, seed, &[(param, v)]).map(|r| (v, r.reports)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut columns = vec![param.to_string()];
    if let Some((_, first)) = runs.first() {
        columns.extend(first.names().map(str::to_string));
    }
    let rows = runs
        .into_iter()
        .map(|(v, reports)| std::iter::once(v).chain(reports.iter().map(|(_, x)| x)).collect())
        .collect();
    Ok(SweepTable { columns, rows })
}
