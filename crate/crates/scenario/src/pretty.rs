//! Canonical formatter; `parse(pretty_print(ast)) == ast`.

use std::fmt::Write;

use cvfaraday::{FrameDirection, Quadrature};

use crate::ast::*;

fn num(n: &Num) -> String {
    match n {
        Num::Lit(v) => format!("{v}"),
        Num::Param(p) => format!("${p}"),
    }
}

fn angle(a: &Angle) -> String {
    match a {
        Angle::Radians(n) => num(n),
        Angle::Degrees(v) => format!("{v}deg"),
        Angle::PiFraction { num, den } => {
            let head = match num {
                1 => "pi".to_string(),
                -1 => "-pi".to_string(),
                k => format!("{k}pi"),
            };
            if *den == 1 {
                head
            } else {
                format!("{head}/{den}")
            }
        }
    }
}

fn quad(q: Quadrature) -> &'static str {
    match q {
        Quadrature::X => "x",
        Quadrature::P => "p",
    }
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

fn report(r: &Report) -> String {
    let body = match &r.kind {
        ReportKind::State => "state".to_string(),
        ReportKind::Ppt(Partition::All) => "ppt all".to_string(),
        ReportKind::Ppt(Partition::Split(a, b)) => {
            format!("ppt {}|{}", join(a, |i| i.node.clone()), join(b, |i| i.node.clone()))
        }
        ReportKind::Duan { a, b, lambda } => {
            format!("duan {} {} lambda={}", a.node, b.node, num(&lambda.node))
        }
        ReportKind::Vlf(Vlf::Named(d)) => format!(
            "vlf {}",
            match d {
                DeltaName::Delta1 => "delta1",
                DeltaName::Delta2 => "delta2",
                DeltaName::Delta3 => "delta3",
            }
        ),
        ReportKind::Vlf(Vlf::Explicit(v)) => {
            let mut s = format!(
                "vlf h={} g={} split={}|{}",
                join(&v.h, |n| num(&n.node)),
                join(&v.g, |n| num(&n.node)),
                join(&v.left, |k| k.to_string()),
                join(&v.right, |k| k.to_string()),
            );
            if !v.exchanged.is_empty() {
                let _ = write!(s, " exchange={}", join(&v.exchanged, |k| k.to_string()));
            }
            s
        }
        ReportKind::Variance(terms) => {
            let parts: Vec<String> = terms
                .iter()
                .map(|t| format!("{}:{}={}", quad(t.quadrature), t.mode.node, num(&t.coeff.node)))
                .collect();
            format!("variance {}", parts.join(" "))
        }
    };
    match &r.name {
        Some(n) => format!("report {body} as {}", n.node),
        None => format!("report {body}"),
    }
}

pub fn statement(s: &StatementKind) -> String {
    match s {
        StatementKind::Param { name, value } => format!("param {}={}", name.node, value.node),
        StatementKind::Ensemble { id, n } => format!("ensemble {} n={}", id.node, num(&n.node)),
        StatementKind::Beam { id } => format!("beam {}", id.node),
        StatementKind::Pass {
            beam,
            sample,
            kappa,
            alpha,
        } => format!(
            "pass {} {} kappa={} alpha={}",
            beam.node,
            sample.node,
            num(&kappa.node),
            angle(&alpha.node)
        ),
        StatementKind::Measure {
            beam,
            quadrature,
            policy,
        } => {
            let policy = match policy {
                Policy::Sample => "sample".to_string(),
                Policy::Fixed(v) => format!("fixed={}", num(&v.node)),
            };
            format!("measure {} {} {policy}", beam.node, quad(*quadrature))
        }
        StatementKind::Rotate { direction, targets } => {
            let dir = match direction {
                FrameDirection::ToPrimed => "to_primed",
                FrameDirection::FromPrimed => "from_primed",
            };
            let ids: Vec<&str> = targets.iter().map(|t| t.node.as_str()).collect();
            format!("rotate {dir} {}", ids.join(" "))
        }
        StatementKind::Report(r) => report(r),
        StatementKind::Sweep {
            param,
            start,
            stop,
            step,
        } => format!("sweep {} {start}:{stop}:{step}", param.node),
    }
}

pub fn pretty_print(ast: &ScenarioAst) -> String {
    let mut out = String::new();
    for s in &ast.statements {
        out.push_str(&statement(&s.node));
        out.push('\n');
    }
    out
}
