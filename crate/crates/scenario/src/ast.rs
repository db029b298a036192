//! Syntax tree of a scenario file.
//!
//! Spans are positional metadata: they are carried on every node but do not
//! take part in equality, so a tree and its pretty-printed reparse compare
//! equal.

use std::fmt;

use cvfaraday::{FrameDirection, Quadrature};

#[derive(Debug, Clone, Copy, Default)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize) -> Self {
        Self { line, column }
    }
}

impl PartialEq for SourceSpan {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spanned<T> {
    pub node: T,
    pub span: SourceSpan,
}

impl<T> Spanned<T> {
    pub fn new(node: T, span: SourceSpan) -> Self {
        Self { node, span }
    }
}

pub type Ident = Spanned<String>;

/// A literal or a `$name` reference to a declared parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Num {
    Lit(f64),
    Param(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Angle {
    Radians(Num),
    Degrees(f64),
    /// `π · num / den`.
    PiFraction { num: i32, den: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Fixed(Spanned<Num>),
    Sample,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Partition {
    Split(Vec<Ident>, Vec<Ident>),
    /// Every split of the modes present when the report runs.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaName {
    Delta1,
    Delta2,
    Delta3,
}

/// Mode positions are 1-based in source and stored that way.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitVlf {
    pub h: Vec<Spanned<Num>>,
    pub g: Vec<Spanned<Num>>,
    /// Distinguished mode first, then the rest of the group.
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub exchanged: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Vlf {
    Named(DeltaName),
    Explicit(ExplicitVlf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub quadrature: Quadrature,
    pub mode: Ident,
    pub coeff: Spanned<Num>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReportKind {
    Ppt(Partition),
    Duan {
        a: Ident,
        b: Ident,
        lambda: Spanned<Num>,
    },
    Vlf(Vlf),
    Variance(Vec<Term>),
    State,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub kind: ReportKind,
    /// Optional `as NAME` override of the output name.
    pub name: Option<Ident>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatementKind {
    Param {
        name: Ident,
        value: Spanned<f64>,
    },
    Ensemble {
        id: Ident,
        n: Spanned<Num>,
    },
    Beam {
        id: Ident,
    },
    Pass {
        beam: Ident,
        sample: Ident,
        kappa: Spanned<Num>,
        alpha: Spanned<Angle>,
    },
    Measure {
        beam: Ident,
        quadrature: Quadrature,
        policy: Policy,
    },
    Rotate {
        direction: FrameDirection,
        targets: Vec<Ident>,
    },
    Report(Report),
    Sweep {
        param: Ident,
        start: f64,
        stop: f64,
        step: f64,
    },
}

pub type Statement = Spanned<StatementKind>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioAst {
    pub statements: Vec<Statement>,
}

impl ScenarioAst {
    pub fn declarations(&self) -> impl Iterator<Item = &Statement> {
        self.statements.iter().filter(|s| {
            matches!(
                s.node,
                StatementKind::Param { .. } | StatementKind::Ensemble { .. } | StatementKind::Beam { .. }
            )
        })
    }

    pub fn steps(&self) -> impl Iterator<Item = &Statement> {
        self.statements.iter().filter(|s| {
            matches!(
                s.node,
                StatementKind::Pass { .. } | StatementKind::Measure { .. } | StatementKind::Rotate { .. }
            )
        })
    }

    pub fn reports(&self) -> impl Iterator<Item = &Report> {
        self.statements.iter().filter_map(|s| match &s.node {
            StatementKind::Report(r) => Some(r),
            _ => None,
        })
    }

    pub fn sweeps(&self) -> impl Iterator<Item = &Statement> {
        self.statements
            .iter()
            .filter(|s| matches!(s.node, StatementKind::Sweep { .. }))
    }

    pub fn wants_state(&self) -> bool {
        self.reports().any(|r| r.kind == ReportKind::State)
    }
}
